//! Lightweight lexer for spreadsheet formula text.
//!
//! This is not a formula parser. It recognises just enough structure to
//! answer the questions the scanner asks: how deep `IF(` calls nest, which
//! external workbooks a formula points at, and how to translate relative
//! references when a shared formula is expanded to a child cell.

use std::fmt;

/// A lexical token. Slices borrow from the formula text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Token<'a> {
    /// Function name immediately followed by `(`. The `(` is part of the call.
    Call(&'a str),
    Open,
    Close,
    /// String literal including quotes.
    Str(&'a str),
    /// Quoted sheet name including quotes, e.g. `'My Sheet'`.
    QuotedSheet(&'a str),
    /// Bracketed group including brackets, e.g. `[1]` or `[[#Headers],[Col]]`.
    Bracket(&'a str),
    /// Identifier, reference, number or name.
    Word(&'a str),
    /// Any other single character (operators, separators, whitespace).
    Punct(char),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Spanned<'a> {
    pub token: Token<'a>,
    pub start: usize,
    pub end: usize,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '.' | '$' | '\\' | '#' | '?')
}

/// Splits formula text into tokens. Unterminated strings, quoted names and
/// brackets run to the end of the input.
pub(crate) fn tokenize(text: &str) -> Vec<Spanned<'_>> {
    let mut out = Vec::new();
    let bytes: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    let at = |k: usize| bytes.get(k).map(|&(_, c)| c);
    let offset = |k: usize| bytes.get(k).map(|&(o, _)| o).unwrap_or(text.len());

    while i < bytes.len() {
        let (start, c) = bytes[i];
        let token_end;
        let token;
        match c {
            '"' | '\'' => {
                let mut j = i + 1;
                loop {
                    match at(j) {
                        None => break,
                        Some(q) if q == c => {
                            if at(j + 1) == Some(c) {
                                j += 2;
                                continue;
                            }
                            j += 1;
                            break;
                        }
                        Some(_) => j += 1,
                    }
                }
                token_end = offset(j);
                let slice = &text[start..token_end];
                token = if c == '"' {
                    Token::Str(slice)
                } else {
                    Token::QuotedSheet(slice)
                };
                i = j;
            }
            '[' => {
                let mut depth = 0usize;
                let mut j = i;
                while let Some(ch) = at(j) {
                    j += 1;
                    match ch {
                        '[' => depth += 1,
                        ']' => {
                            depth -= 1;
                            if depth == 0 {
                                break;
                            }
                        }
                        _ => {}
                    }
                }
                token_end = offset(j);
                token = Token::Bracket(&text[start..token_end]);
                i = j;
            }
            '(' => {
                i += 1;
                token_end = offset(i);
                token = Token::Open;
            }
            ')' => {
                i += 1;
                token_end = offset(i);
                token = Token::Close;
            }
            c if is_word_char(c) => {
                let mut j = i;
                while at(j).is_some_and(is_word_char) {
                    j += 1;
                }
                // Exponent sign inside a numeric literal: 1.5E+3
                let word = &text[start..offset(j)];
                if matches!(at(j), Some('+') | Some('-'))
                    && word.ends_with(['e', 'E'])
                    && word[..word.len() - 1].chars().all(|d| d.is_ascii_digit() || d == '.')
                    && !word[..word.len() - 1].is_empty()
                    && at(j + 1).is_some_and(|d| d.is_ascii_digit())
                {
                    j += 1;
                    while at(j).is_some_and(|d| d.is_ascii_digit()) {
                        j += 1;
                    }
                }
                let word = &text[start..offset(j)];
                if at(j) == Some('(') {
                    j += 1;
                    token = Token::Call(word);
                } else {
                    token = Token::Word(word);
                }
                token_end = offset(j);
                i = j;
            }
            other => {
                i += 1;
                token_end = offset(i);
                token = Token::Punct(other);
            }
        }
        out.push(Spanned {
            token,
            start,
            end: token_end,
        });
    }
    out
}

/// Returned when a formula's parentheses do not balance. `depth` is the
/// deepest IF nesting seen over the part of the formula that was read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnbalancedFormula {
    pub depth: u32,
}

impl fmt::Display for UnbalancedFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "unbalanced parentheses in formula (IF depth {} over parsed prefix)",
            self.depth
        )
    }
}

impl std::error::Error for UnbalancedFormula {}

fn strip_eq(formula: &str) -> &str {
    let trimmed = formula.trim_start();
    trimmed.strip_prefix('=').unwrap_or(trimmed)
}

fn is_if(name: &str) -> bool {
    name.eq_ignore_ascii_case("IF")
}

/// Maximum nesting depth of `IF(` calls. String literals are ignored.
pub fn nested_if_depth(formula: &str) -> Result<u32, UnbalancedFormula> {
    let body = strip_eq(formula);
    // One entry per open parenthesis: true when it opened an IF call.
    let mut frames: Vec<bool> = Vec::new();
    let mut current = 0u32;
    let mut max = 0u32;
    let mut balanced = true;
    for spanned in tokenize(body) {
        match spanned.token {
            Token::Call(name) => {
                let opens_if = is_if(name);
                frames.push(opens_if);
                if opens_if {
                    current += 1;
                    max = max.max(current);
                }
            }
            Token::Open => frames.push(false),
            Token::Close => match frames.pop() {
                Some(true) => current -= 1,
                Some(false) => {}
                None => balanced = false,
            },
            _ => {}
        }
    }
    if balanced && frames.is_empty() {
        Ok(max)
    } else {
        Err(UnbalancedFormula { depth: max })
    }
}

/// Number of `IF(` calls in the formula, outside string literals.
pub fn if_call_count(formula: &str) -> u32 {
    tokenize(strip_eq(formula))
        .iter()
        .filter(|s| matches!(s.token, Token::Call(name) if is_if(name)))
        .count() as u32
}

/// How an external reference names its target workbook.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExternalTarget {
    /// `[n]` index into the workbook's external reference list (1-based).
    Index(u32),
    /// A file name written out, e.g. `[Book2.xlsx]`.
    File(String),
}

fn bracket_target(bracket: &str) -> Option<ExternalTarget> {
    let inner = bracket.strip_prefix('[')?.strip_suffix(']')?;
    if inner.is_empty() || inner.contains('[') {
        return None;
    }
    if let Ok(n) = inner.parse::<u32>() {
        return Some(ExternalTarget::Index(n));
    }
    if inner.starts_with(['@', '#']) {
        return None;
    }
    Some(ExternalTarget::File(inner.to_ascii_lowercase()))
}

/// External workbook references in a formula: `[1]Book2!A1`, `[1]!Name`
/// and `'C:\dir\[Book2.xlsx]Sheet1'!A1` forms. Structured table references
/// such as `Table1[Col]` are not external and are skipped.
pub fn external_targets(formula: &str) -> Vec<ExternalTarget> {
    let tokens = tokenize(strip_eq(formula));
    let mut out = Vec::new();
    for (k, spanned) in tokens.iter().enumerate() {
        match spanned.token {
            Token::Bracket(text) => {
                let prev_is_operand = k > 0
                    && matches!(
                        tokens[k - 1].token,
                        Token::Word(_) | Token::Bracket(_) | Token::Close | Token::QuotedSheet(_)
                    );
                if prev_is_operand {
                    continue;
                }
                let followed_by_sheet = match tokens.get(k + 1).map(|t| t.token) {
                    Some(Token::Punct('!')) => true,
                    Some(Token::Word(_)) => {
                        matches!(tokens.get(k + 2).map(|t| t.token), Some(Token::Punct('!')))
                    }
                    _ => false,
                };
                if followed_by_sheet {
                    out.extend(bracket_target(text));
                }
            }
            Token::QuotedSheet(text) => {
                if !matches!(tokens.get(k + 1).map(|t| t.token), Some(Token::Punct('!'))) {
                    continue;
                }
                if let (Some(open), Some(close)) = (text.find('['), text.find(']')) {
                    if open < close {
                        out.extend(bracket_target(&text[open..=close]));
                    }
                }
            }
            _ => {}
        }
    }
    out
}

/// Parsed A1 reference with anchoring flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct A1 {
    col: u32,
    row: u32,
    col_abs: bool,
    row_abs: bool,
}

fn parse_a1(word: &str) -> Option<A1> {
    let mut chars = word.chars().peekable();
    let col_abs = chars.next_if_eq(&'$').is_some();
    let mut col = 0u32;
    let mut letters = 0;
    while let Some(c) = chars.next_if(|c| c.is_ascii_alphabetic()) {
        col = col * 26 + (c.to_ascii_uppercase() as u32 - 'A' as u32 + 1);
        letters += 1;
    }
    if letters == 0 || letters > 3 {
        return None;
    }
    let row_abs = chars.next_if_eq(&'$').is_some();
    let digits: String = chars.by_ref().take_while(|c| c.is_ascii_digit()).collect();
    if digits.is_empty() || digits.len() != word.len() - letters - col_abs as usize - row_abs as usize {
        return None;
    }
    let row: u32 = digits.parse().ok()?;
    if row == 0 || col > crate::scanner::MAX_COLUMNS || row > crate::scanner::MAX_ROWS {
        return None;
    }
    Some(A1 {
        col,
        row,
        col_abs,
        row_abs,
    })
}

/// Converts a 1-based column number to its letters.
pub fn column_letters(mut col: u32) -> String {
    let mut letters = Vec::new();
    while col > 0 {
        let rem = (col - 1) % 26;
        letters.push((b'A' + rem as u8) as char);
        col = (col - 1) / 26;
    }
    letters.iter().rev().collect()
}

/// Splits an A1 address (no `$`) into 1-based (column, row).
pub fn split_address(address: &str) -> Option<(u32, u32)> {
    let a1 = parse_a1(address)?;
    if a1.col_abs || a1.row_abs {
        return None;
    }
    Some((a1.col, a1.row))
}

/// Rewrites relative references in `formula` as if it were copied `rows`
/// down and `cols` across. Absolute parts (`$`) stay put. Used to expand
/// shared formulas from their anchor cell.
pub fn shift_references(formula: &str, rows: i64, cols: i64) -> String {
    if rows == 0 && cols == 0 {
        return formula.to_string();
    }
    let tokens = tokenize(formula);
    let mut out = String::with_capacity(formula.len());
    let mut last = 0;
    for (k, spanned) in tokens.iter().enumerate() {
        let Token::Word(word) = spanned.token else {
            continue;
        };
        if matches!(tokens.get(k + 1).map(|t| t.token), Some(Token::Punct('!'))) {
            continue;
        }
        let Some(a1) = parse_a1(word) else { continue };
        let col = if a1.col_abs {
            a1.col as i64
        } else {
            a1.col as i64 + cols
        };
        let row = if a1.row_abs {
            a1.row as i64
        } else {
            a1.row as i64 + rows
        };
        out.push_str(&formula[last..spanned.start]);
        if col < 1 || row < 1 {
            out.push_str("#REF!");
        } else {
            if a1.col_abs {
                out.push('$');
            }
            out.push_str(&column_letters(col as u32));
            if a1.row_abs {
                out.push('$');
            }
            out.push_str(&row.to_string());
        }
        last = spanned.end;
    }
    out.push_str(&formula[last..]);
    out
}
