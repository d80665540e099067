//! OpenXML package reading.

use std::collections::HashMap;
use std::io::{Cursor, Read};
use std::path::Path;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use zip::ZipArchive;

use super::formula::{column_letters, shift_references, split_address};
use super::{Cell, CellStyle, CellValue, DefinedName, ScanError, SheetModel, Visibility, WorkbookModel};

const ZIP_MAGIC: [u8; 4] = *b"PK\x03\x04";
const ZIP_EMPTY_MAGIC: [u8; 4] = *b"PK\x05\x06";
const CFB_MAGIC: [u8; 8] = [0xD0, 0xCF, 0x11, 0xE0, 0xA1, 0xB1, 0x1A, 0xE1];

const REL_OFFICE_DOCUMENT: &str = "/officeDocument";
const REL_WORKSHEET: &str = "/worksheet";
const REL_SHARED_STRINGS: &str = "/sharedStrings";
const REL_STYLES: &str = "/styles";
const REL_EXTERNAL_LINK: &str = "/externalLink";
const REL_EXTERNAL_LINK_PATH: &str = "/externalLinkPath";

/// Reads a `.xlsx`/`.xlsm` file into a [`WorkbookModel`]. The file is only
/// read, never written.
pub fn parse_workbook(path: impl AsRef<Path>) -> Result<WorkbookModel, ScanError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| ScanError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_workbook_bytes(&bytes)
}

pub fn parse_workbook_bytes(bytes: &[u8]) -> Result<WorkbookModel, ScanError> {
    if bytes.starts_with(&CFB_MAGIC) || bytes.starts_with(&CFB_MAGIC[..4]) {
        return Err(ScanError::EncryptedWorkbook {
            file_size: bytes.len() as u64,
        });
    }
    if !(bytes.starts_with(&ZIP_MAGIC) || bytes.starts_with(&ZIP_EMPTY_MAGIC)) {
        return Err(ScanError::NotAWorkbook);
    }
    let mut package = Package::open(bytes)?;

    let root_rels = package.relationships("")?;
    let workbook_part = root_rels
        .iter()
        .find(|r| r.rel_type.ends_with(REL_OFFICE_DOCUMENT))
        .map(|r| r.target.clone())
        .unwrap_or_else(|| "xl/workbook.xml".to_string());
    let workbook_dir = parent_dir(&workbook_part);
    let workbook_rels = package.relationships(&workbook_part)?;
    let rel_by_id: HashMap<&str, &Relationship> = workbook_rels.iter().map(|r| (r.id.as_str(), r)).collect();

    let workbook_xml = package.required(&workbook_part)?;
    let workbook = Node::parse(&workbook_part, &workbook_xml)?;

    let shared_strings = match workbook_rels.iter().find(|r| r.rel_type.ends_with(REL_SHARED_STRINGS)) {
        Some(rel) => match package.optional(&rel.target)? {
            Some(xml) => parse_shared_strings(&rel.target, &xml)?,
            None => Vec::new(),
        },
        None => Vec::new(),
    };
    let styles = match workbook_rels.iter().find(|r| r.rel_type.ends_with(REL_STYLES)) {
        Some(rel) => match package.optional(&rel.target)? {
            Some(xml) => parse_styles(&rel.target, &xml)?,
            None => Vec::new(),
        },
        None => Vec::new(),
    };

    let mut sheets = Vec::new();
    for sheet in workbook.descendants("sheet") {
        let name = sheet.attr("name").unwrap_or_default().to_string();
        let visibility = match sheet.attr("state") {
            Some("hidden") => Visibility::Hidden,
            Some("veryHidden") => Visibility::VeryHidden,
            _ => Visibility::Visible,
        };
        let mut model = SheetModel::new(name);
        model.visibility = visibility;
        let rel = sheet.attr("id").and_then(|id| rel_by_id.get(id));
        if let Some(rel) = rel.filter(|r| r.rel_type.ends_with(REL_WORKSHEET)) {
            if let Some(xml) = package.optional(&rel.target)? {
                parse_worksheet(&rel.target, &xml, &shared_strings, &mut model)?;
            }
        }
        if sheets.iter().any(|s: &SheetModel| s.name == model.name) {
            return Err(ScanError::MalformedPart {
                part: workbook_part.clone(),
                detail: format!("duplicate sheet name `{}`", model.name),
            });
        }
        sheets.push(model);
    }

    let defined_names = workbook
        .descendants("definedName")
        .filter_map(|n| {
            let name = n.attr("name")?;
            if name.starts_with("_xlnm.") {
                return None;
            }
            Some(DefinedName {
                name: name.to_string(),
                refers_to: n.text.clone(),
            })
        })
        .collect();

    let workbook_protection = workbook.descendants("workbookProtection").any(|p| {
        ["lockStructure", "lockWindows", "lockRevision"]
            .iter()
            .any(|a| p.attr(a).is_some_and(truthy))
            || ["workbookPassword", "workbookHashValue", "revisionsPassword"]
                .iter()
                .any(|a| p.attr(a).is_some())
    });

    // External link parts, in `[n]` order.
    let mut link_parts: Vec<String> = workbook
        .descendants("externalReference")
        .filter_map(|r| r.attr("id").and_then(|id| rel_by_id.get(id)))
        .filter(|r| r.rel_type.ends_with(REL_EXTERNAL_LINK))
        .map(|r| r.target.clone())
        .collect();
    if link_parts.is_empty() {
        link_parts = package
            .names
            .iter()
            .filter(|n| is_numbered_part(n, &format!("{workbook_dir}externalLinks/externalLink")))
            .cloned()
            .collect();
        link_parts.sort_by_key(|n| part_number(n));
    }
    let mut external_link_targets = Vec::new();
    for part in &link_parts {
        let rels = package.relationships(part)?;
        let target = rels
            .iter()
            .find(|r| r.rel_type.ends_with(REL_EXTERNAL_LINK_PATH) || r.external)
            .map(|r| r.raw_target.clone())
            .unwrap_or_else(|| part.clone());
        external_link_targets.push(target);
    }

    let pivot_part_count = package
        .names
        .iter()
        .filter(|n| is_numbered_part(n, &format!("{workbook_dir}pivotTables/pivotTable")))
        .count() as u32;
    let vba_present = package
        .names
        .iter()
        .any(|n| n.to_ascii_lowercase().ends_with("vbaproject.bin"));

    Ok(WorkbookModel {
        sheets,
        defined_names,
        pivot_part_count,
        external_link_targets,
        vba_present,
        workbook_protection,
        file_size: bytes.len() as u64,
        styles,
    })
}

fn truthy(v: &str) -> bool {
    matches!(v, "1" | "true" | "on")
}

fn parent_dir(part: &str) -> String {
    match part.rfind('/') {
        Some(i) => part[..=i].to_string(),
        None => String::new(),
    }
}

fn is_numbered_part(name: &str, prefix: &str) -> bool {
    name.strip_prefix(prefix)
        .and_then(|rest| rest.strip_suffix(".xml"))
        .is_some_and(|digits| digits.chars().all(|c| c.is_ascii_digit()))
}

fn part_number(name: &str) -> u32 {
    let stem = name.trim_end_matches(".xml");
    let digits: String = stem
        .chars()
        .rev()
        .take_while(|c| c.is_ascii_digit())
        .collect::<Vec<_>>()
        .into_iter()
        .rev()
        .collect();
    digits.parse().unwrap_or(0)
}

/// Resolves a relationship target against the directory of its source part.
fn resolve(base_dir: &str, target: &str) -> String {
    if let Some(abs) = target.strip_prefix('/') {
        return abs.to_string();
    }
    let mut parts: Vec<&str> = base_dir.split('/').filter(|p| !p.is_empty()).collect();
    for seg in target.split('/') {
        match seg {
            "" | "." => {}
            ".." => {
                parts.pop();
            }
            s => parts.push(s),
        }
    }
    parts.join("/")
}

struct Package {
    archive: ZipArchive<Cursor<Vec<u8>>>,
    names: Vec<String>,
}

#[derive(Debug)]
struct Relationship {
    id: String,
    rel_type: String,
    /// Package part name, resolved.
    target: String,
    raw_target: String,
    external: bool,
}

impl Package {
    fn open(bytes: &[u8]) -> Result<Self, ScanError> {
        let archive = ZipArchive::new(Cursor::new(bytes.to_vec())).map_err(|e| ScanError::MalformedPart {
            part: "[zip container]".into(),
            detail: e.to_string(),
        })?;
        let names = archive.file_names().map(str::to_string).collect();
        Ok(Package { archive, names })
    }

    fn optional(&mut self, part: &str) -> Result<Option<Vec<u8>>, ScanError> {
        // Part names are case-insensitive in OPC.
        let Some(actual) = self.names.iter().find(|n| n.eq_ignore_ascii_case(part)).cloned() else {
            return Ok(None);
        };
        let mut file = self.archive.by_name(&actual).map_err(|e| malformed(part, e))?;
        let mut buf = Vec::with_capacity(file.size() as usize);
        file.read_to_end(&mut buf).map_err(|e| malformed(part, e))?;
        Ok(Some(buf))
    }

    fn required(&mut self, part: &str) -> Result<Vec<u8>, ScanError> {
        self.optional(part)?
            .ok_or_else(|| malformed(part, "required part is missing"))
    }

    fn relationships(&mut self, source_part: &str) -> Result<Vec<Relationship>, ScanError> {
        let dir = parent_dir(source_part);
        let file = &source_part[dir.len()..];
        let rels_part = format!("{dir}_rels/{file}.rels");
        let Some(xml) = self.optional(&rels_part)? else {
            return Ok(Vec::new());
        };
        let root = Node::parse(&rels_part, &xml)?;
        Ok(root
            .descendants("Relationship")
            .map(|r| {
                let raw_target = r.attr("Target").unwrap_or_default().to_string();
                let external = r.attr("TargetMode") == Some("External");
                let target = if external {
                    raw_target.clone()
                } else {
                    resolve(&dir, &raw_target)
                };
                Relationship {
                    id: r.attr("Id").unwrap_or_default().to_string(),
                    rel_type: r.attr("Type").unwrap_or_default().to_string(),
                    target,
                    raw_target,
                    external,
                }
            })
            .collect())
    }
}

fn malformed(part: &str, detail: impl ToString) -> ScanError {
    ScanError::MalformedPart {
        part: part.to_string(),
        detail: detail.to_string(),
    }
}

/// Minimal element tree for the small package parts.
#[derive(Debug, Default)]
struct Node {
    name: String,
    attrs: Vec<(String, String)>,
    children: Vec<Node>,
    text: String,
}

impl Node {
    fn parse(part: &str, xml: &[u8]) -> Result<Node, ScanError> {
        let mut reader = Reader::from_reader(xml);
        let mut buf = Vec::new();
        let mut stack: Vec<Node> = vec![Node::default()];
        loop {
            match reader.read_event_into(&mut buf) {
                Ok(Event::Start(e)) => stack.push(element(part, &e)?),
                Ok(Event::Empty(e)) => {
                    let node = element(part, &e)?;
                    stack.last_mut().expect("root").children.push(node);
                }
                Ok(Event::End(_)) => {
                    let node = stack.pop().expect("balanced");
                    match stack.last_mut() {
                        Some(parent) => parent.children.push(node),
                        None => return Err(malformed(part, "unexpected closing tag")),
                    }
                }
                Ok(Event::Text(t)) => {
                    let text = t.unescape().map_err(|e| malformed(part, e))?;
                    stack.last_mut().expect("root").text.push_str(&text);
                }
                Ok(Event::CData(t)) => {
                    let text = String::from_utf8_lossy(&t);
                    stack.last_mut().expect("root").text.push_str(&text);
                }
                Ok(Event::Eof) => break,
                Ok(_) => {}
                Err(e) => return Err(malformed(part, e)),
            }
            buf.clear();
        }
        if stack.len() != 1 {
            return Err(malformed(part, "unclosed element"));
        }
        let root = stack.pop().expect("root");
        if root.children.is_empty() {
            return Err(malformed(part, "no root element"));
        }
        Ok(root)
    }

    fn attr(&self, name: &str) -> Option<&str> {
        self.attrs.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_str())
    }

    fn child(&self, name: &str) -> Option<&Node> {
        self.children.iter().find(|c| c.name == name)
    }

    fn descendants<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Node> + 'a {
        let mut stack: Vec<&Node> = self.children.iter().rev().collect();
        std::iter::from_fn(move || {
            while let Some(node) = stack.pop() {
                stack.extend(node.children.iter().rev());
                if node.name == name {
                    return Some(node);
                }
            }
            None
        })
    }

    /// Concatenated text of all `t` descendants (rich-text runs).
    fn run_text(&self) -> String {
        if self.name == "t" {
            return self.text.clone();
        }
        self.descendants("t").map(|t| t.text.as_str()).collect()
    }
}

fn local(name: &[u8]) -> String {
    let name = match name.iter().rposition(|&b| b == b':') {
        Some(i) => &name[i + 1..],
        None => name,
    };
    String::from_utf8_lossy(name).into_owned()
}

fn element(part: &str, e: &BytesStart<'_>) -> Result<Node, ScanError> {
    Ok(Node {
        name: local(e.name().as_ref()),
        attrs: attributes(part, e)?,
        ..Node::default()
    })
}

fn attributes(part: &str, e: &BytesStart<'_>) -> Result<Vec<(String, String)>, ScanError> {
    let mut out = Vec::new();
    for attr in e.attributes() {
        let attr = attr.map_err(|err| malformed(part, err))?;
        let key = attr.key.as_ref();
        if key.starts_with(b"xmlns") {
            continue;
        }
        let value = attr.unescape_value().map_err(|err| malformed(part, err))?;
        out.push((local(key), value.into_owned()));
    }
    Ok(out)
}

fn parse_shared_strings(part: &str, xml: &[u8]) -> Result<Vec<String>, ScanError> {
    let root = Node::parse(part, xml)?;
    Ok(root
        .descendants("si")
        .map(|si| {
            // Phonetic runs (`rPh`) are annotations, not cell text.
            si.children
                .iter()
                .filter(|c| c.name == "t" || c.name == "r")
                .map(Node::run_text)
                .collect()
        })
        .collect())
}

fn normalize_rgb(rgb: &str) -> String {
    let upper = rgb.trim().to_ascii_uppercase();
    if upper.len() == 6 {
        format!("FF{upper}")
    } else {
        upper
    }
}

fn parse_styles(part: &str, xml: &[u8]) -> Result<Vec<CellStyle>, ScanError> {
    let root = Node::parse(part, xml)?;
    let font_colors: Vec<Option<String>> = root
        .descendants("fonts")
        .next()
        .map(|fonts| {
            fonts
                .children
                .iter()
                .filter(|f| f.name == "font")
                .map(|f| f.child("color").and_then(|c| c.attr("rgb")).map(normalize_rgb))
                .collect()
        })
        .unwrap_or_default();
    let fill_colors: Vec<Option<String>> = root
        .descendants("fills")
        .next()
        .map(|fills| {
            fills
                .children
                .iter()
                .filter(|f| f.name == "fill")
                .map(|f| {
                    let pattern = f.child("patternFill")?;
                    if pattern.attr("patternType") != Some("solid") {
                        return None;
                    }
                    pattern.child("fgColor").and_then(|c| c.attr("rgb")).map(normalize_rgb)
                })
                .collect()
        })
        .unwrap_or_default();
    let index = |v: Option<&str>| v.and_then(|s| s.parse::<usize>().ok());
    let styles = root
        .descendants("cellXfs")
        .next()
        .map(|xfs| {
            xfs.children
                .iter()
                .filter(|x| x.name == "xf")
                .map(|xf| CellStyle {
                    font_rgb: index(xf.attr("fontId")).and_then(|i| font_colors.get(i).cloned().flatten()),
                    fill_rgb: index(xf.attr("fillId")).and_then(|i| fill_colors.get(i).cloned().flatten()),
                })
                .collect()
        })
        .unwrap_or_default();
    Ok(styles)
}

#[derive(Default)]
struct PendingCell {
    address: String,
    cell_type: Option<String>,
    style: Option<u32>,
    formula: Option<String>,
    formula_kind: Option<String>,
    shared_index: Option<String>,
    shared_ref: bool,
    value: Option<String>,
    inline: String,
}

/// Streams one worksheet part into `sheet`.
fn parse_worksheet(part: &str, xml: &[u8], shared_strings: &[String], sheet: &mut SheetModel) -> Result<(), ScanError> {
    let mut reader = Reader::from_reader(xml);
    let mut buf = Vec::new();
    let mut path: Vec<String> = Vec::new();
    let mut row_num = 0u32;
    let mut col_num = 0u32;
    let mut cell: Option<PendingCell> = None;
    // si -> (anchor column, anchor row, formula text)
    let mut shared: HashMap<String, (u32, u32, String)> = HashMap::new();

    loop {
        let event = reader.read_event_into(&mut buf).map_err(|e| malformed(part, e))?;
        match event {
            Event::Start(ref e) | Event::Empty(ref e) => {
                let is_empty = matches!(event, Event::Empty(_));
                let name = local(e.name().as_ref());
                let attrs = attributes(part, e)?;
                let get = |k: &str| attrs.iter().find(|(n, _)| n == k).map(|(_, v)| v.as_str());
                match name.as_str() {
                    "row" => {
                        row_num = match get("r").and_then(|r| r.parse().ok()) {
                            Some(r) => r,
                            None => row_num + 1,
                        };
                        col_num = 0;
                        if get("hidden").is_some_and(truthy) {
                            sheet.hidden_rows.push(row_num);
                        }
                    }
                    "col" if path.last().map(String::as_str) == Some("cols") => {
                        if get("hidden").is_some_and(truthy) {
                            let min: u32 = get("min").and_then(|v| v.parse().ok()).unwrap_or(1);
                            let max: u32 = get("max").and_then(|v| v.parse().ok()).unwrap_or(min);
                            let max = max.min(super::MAX_COLUMNS);
                            sheet.hidden_columns.extend(min..=max);
                        }
                    }
                    "sheetProtection" => {
                        if get("sheet").is_some_and(truthy) {
                            sheet.protected = true;
                        }
                    }
                    "c" => {
                        let address = match get("r") {
                            Some(r) => {
                                let (col, row) = split_address(r)
                                    .ok_or_else(|| malformed(part, format!("bad cell reference `{r}`")))?;
                                col_num = col;
                                row_num = row;
                                r.to_string()
                            }
                            None => {
                                col_num += 1;
                                format!("{}{}", column_letters(col_num), row_num.max(1))
                            }
                        };
                        let pending = PendingCell {
                            address,
                            cell_type: get("t").map(str::to_string),
                            style: get("s").and_then(|s| s.parse().ok()),
                            ..PendingCell::default()
                        };
                        if is_empty {
                            finish_cell(part, pending, shared_strings, &mut shared, sheet)?;
                        } else {
                            cell = Some(pending);
                        }
                    }
                    "f" => {
                        if let Some(c) = cell.as_mut() {
                            c.formula_kind = get("t").map(str::to_string);
                            c.shared_index = get("si").map(str::to_string);
                            c.shared_ref = get("ref").is_some();
                            c.formula = Some(String::new());
                        }
                    }
                    _ => {}
                }
                if !is_empty {
                    path.push(name);
                }
            }
            Event::Text(ref t) => {
                if let Some(c) = cell.as_mut() {
                    let text = t.unescape().map_err(|e| malformed(part, e))?;
                    match path.last().map(String::as_str) {
                        Some("f") => c.formula.get_or_insert_with(String::new).push_str(&text),
                        Some("v") => c.value.get_or_insert_with(String::new).push_str(&text),
                        Some("t") if path.iter().any(|p| p == "is") && !path.iter().any(|p| p == "rPh") => {
                            c.inline.push_str(&text)
                        }
                        _ => {}
                    }
                }
            }
            Event::End(_) => {
                let name = path.pop().unwrap_or_default();
                if name == "c" {
                    if let Some(pending) = cell.take() {
                        finish_cell(part, pending, shared_strings, &mut shared, sheet)?;
                    }
                }
            }
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }
    if !path.is_empty() {
        return Err(malformed(part, "unclosed element"));
    }
    sheet.hidden_rows.sort_unstable();
    sheet.hidden_rows.dedup();
    sheet.hidden_columns.sort_unstable();
    sheet.hidden_columns.dedup();
    sheet.cells.sort_by_key(Cell::position);
    Ok(())
}

fn finish_cell(
    part: &str,
    pending: PendingCell,
    shared_strings: &[String],
    shared: &mut HashMap<String, (u32, u32, String)>,
    sheet: &mut SheetModel,
) -> Result<(), ScanError> {
    let mut formula = pending.formula.clone();
    let mut array = false;
    match pending.formula_kind.as_deref() {
        Some("array") => array = true,
        Some("shared") => {
            let si = pending.shared_index.clone().unwrap_or_default();
            let (col, row) = split_address(&pending.address).unwrap_or((1, 1));
            let text = formula.as_deref().unwrap_or("");
            if pending.shared_ref && !text.is_empty() {
                shared.insert(si, (col, row, text.to_string()));
            } else if let Some((anchor_col, anchor_row, anchor_text)) = shared.get(&si) {
                formula = Some(shift_references(
                    anchor_text,
                    row as i64 - *anchor_row as i64,
                    col as i64 - *anchor_col as i64,
                ));
            }
        }
        _ => {}
    }
    let raw = pending.value.as_deref();
    let value = match pending.cell_type.as_deref() {
        Some("s") => {
            let idx: usize = raw
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| malformed(part, format!("bad shared string index in {}", pending.address)))?;
            let text = shared_strings
                .get(idx)
                .ok_or_else(|| malformed(part, format!("shared string {idx} out of range in {}", pending.address)))?;
            CellValue::Text(text.clone())
        }
        Some("inlineStr") => CellValue::Text(pending.inline.clone()),
        Some("str") | Some("d") => match raw {
            Some(v) => CellValue::Text(v.to_string()),
            None => CellValue::Empty,
        },
        Some("b") => match raw {
            Some(v) => CellValue::Bool(v.trim() == "1"),
            None => CellValue::Empty,
        },
        Some("e") => match raw {
            Some(v) => CellValue::Error(v.to_string()),
            None => CellValue::Empty,
        },
        _ => match raw.map(str::trim) {
            Some(v) if !v.is_empty() => CellValue::Number(
                v.parse()
                    .map_err(|_| malformed(part, format!("bad number `{v}` in {}", pending.address)))?,
            ),
            _ => CellValue::Empty,
        },
    };
    let formula = formula.filter(|f| !f.is_empty());
    if formula.is_none() && value == CellValue::Empty {
        return Ok(());
    }
    sheet.cells.push(Cell {
        address: pending.address,
        formula,
        value,
        array_formula: array,
        style_id: pending.style,
    });
    Ok(())
}
