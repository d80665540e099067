//! Terminal questionnaire for `assess --interactive`.
//!
//! Two sections, general details then the a-f controls. Answers are kept
//! as a partial JSON object shaped like an `AssessmentInput`; the caller
//! persists it after every answer so an interrupted session can be
//! restored.

use std::fmt::Write as _;
use std::io::BufRead;

use chrono::NaiveDate;
use serde_json::{Map, Value};

use crate::risk::{AssessmentInput, ImpactCategory, CONTROL_FIELDS, DATA_FIELDS};

pub const CONTROL_QUESTIONS: [(&str, &str); 13] = [
    (
        "location_known",
        "a. Is the location of the application known and recorded?",
    ),
    ("operating_instructions", "a. Are there operating instructions?"),
    ("backup_in_place", "b. Is the application backed up?"),
    ("recovery_tested", "b. Has recovery from backup been tested?"),
    ("version_controlled", "c. Is the application under version control?"),
    ("review_current", "c. Is its independent review up to date?"),
    ("testing_evidenced", "c. Is testing of changes evidenced?"),
    (
        "access_restricted",
        "d. Is access restricted to the people who need it?",
    ),
    (
        "integrity_protected",
        "d. Are inputs and formulas protected against unintended change?",
    ),
    (
        "second_person_can_fix",
        "e. Could a second person fix it if it went wrong?",
    ),
    ("technical_docs_exist", "e. Is there technical documentation?"),
    ("holds_personal_data", "f. Does it hold personal data?"),
    (
        "holds_sensitive_personal_data",
        "f. Does it hold sensitive personal data?",
    ),
];

#[derive(Debug)]
pub enum Interrupted {
    /// Input ended before the last question.
    EndOfInput,
    Io(std::io::Error),
}

pub struct Questionnaire<'a> {
    pub input: &'a mut dyn BufRead,
    /// Prompts and notices; goes to stderr so stdout stays machine output.
    pub transcript: &'a mut String,
    pub default_complexity: Option<u8>,
    pub default_date: NaiveDate,
}

enum Answer {
    Value(Value),
    Retry(String),
}

impl Questionnaire<'_> {
    fn read_line(&mut self) -> Result<String, Interrupted> {
        let mut line = String::new();
        match self.input.read_line(&mut line) {
            Ok(0) => Err(Interrupted::EndOfInput),
            Ok(_) => Ok(line.trim().to_string()),
            Err(e) => Err(Interrupted::Io(e)),
        }
    }

    fn ask(&mut self, prompt: &str, parse: impl Fn(&str) -> Answer) -> Result<Value, Interrupted> {
        loop {
            self.transcript.push_str(prompt);
            self.transcript.push(' ');
            match parse(&self.read_line()?) {
                Answer::Value(v) => return Ok(v),
                Answer::Retry(why) => {
                    let _ = writeln!(self.transcript, "  {why}");
                }
            }
        }
    }

    /// Asks yes/no; anything else is asked again.
    pub fn confirm(&mut self, prompt: &str) -> Result<bool, Interrupted> {
        let v = self.ask(&format!("{prompt} [y/n]:"), yes_no)?;
        Ok(v == Value::Bool(true))
    }

    /// Fills every unanswered field of `partial`, calling `saved` after
    /// each answer.
    pub fn run(
        &mut self,
        partial: &mut Map<String, Value>,
        mut saved: impl FnMut(&Map<String, Value>),
    ) -> Result<(), Interrupted> {
        self.transcript.push_str("General details\n");
        if !partial.contains_key("complexity") {
            let default = self.default_complexity;
            let prompt = match default {
                Some(g) => format!("Complexity 1 Low, 2 Medium, 3 High [{g}]:"),
                None => "Complexity 1 Low, 2 Medium, 3 High:".to_string(),
            };
            let v = self.ask(&prompt, |s| match (s, default) {
                ("", Some(g)) => Answer::Value(g.into()),
                _ => grade(s, 3),
            })?;
            partial.insert("complexity".into(), v);
            saved(partial);
        }
        if !partial.contains_key("materiality") {
            let v = self.ask("Materiality 1 Low, 2 Medium, 3 High:", |s| grade(s, 3))?;
            partial.insert("materiality".into(), v);
            saved(partial);
        }
        if !partial.contains_key("impact") {
            let labels: Vec<String> = ImpactCategory::ALL
                .iter()
                .map(|i| format!("{} {}", i.value(), i.label()))
                .collect();
            let v = self.ask(&format!("Impact {}:", labels.join(", ")), |s| grade(s, 6))?;
            partial.insert("impact".into(), v);
            saved(partial);
        }
        if !partial.contains_key("assessed_on") {
            let default = self.default_date;
            let v = self.ask(&format!("Assessment date [{default}]:"), |s| {
                if s.is_empty() {
                    return Answer::Value(default.to_string().into());
                }
                match s.parse::<NaiveDate>() {
                    Ok(d) => Answer::Value(d.to_string().into()),
                    Err(_) => Answer::Retry("use YYYY-MM-DD".into()),
                }
            })?;
            partial.insert("assessed_on".into(), v);
            saved(partial);
        }

        self.transcript.push_str("Controls\n");
        for (field, question) in CONTROL_QUESTIONS {
            let answered = partial
                .get("controls")
                .and_then(Value::as_object)
                .is_some_and(|c| c.contains_key(field));
            if answered {
                continue;
            }
            let v = self.ask(&format!("{question} [y/n]:"), yes_no)?;
            partial
                .entry("controls")
                .or_insert_with(|| Value::Object(Map::new()))
                .as_object_mut()
                .expect("controls is an object")
                .insert(field.into(), v);
            saved(partial);
        }
        Ok(())
    }
}

fn grade(s: &str, max: u8) -> Answer {
    match s.parse::<u8>() {
        Ok(v) if (1..=max).contains(&v) => Answer::Value(v.into()),
        _ => Answer::Retry(format!("enter a whole number from 1 to {max}")),
    }
}

fn yes_no(s: &str) -> Answer {
    match s.to_ascii_lowercase().as_str() {
        "y" | "yes" => Answer::Value(true.into()),
        "n" | "no" => Answer::Value(false.into()),
        _ => Answer::Retry("answer y or n".into()),
    }
}

/// Converts completed answers into an input. Fails only on a hand-edited
/// draft.
pub fn finish(partial: Map<String, Value>) -> Result<AssessmentInput, serde_json::Error> {
    serde_json::from_value(Value::Object(partial))
}

/// Answer lines that reproduce `input` when fed to the questionnaire with
/// no draft and no complexity default.
pub fn script_for(input: &AssessmentInput) -> String {
    let mut lines = vec![
        input.complexity.value().to_string(),
        input.materiality.value().to_string(),
        input.impact.value().to_string(),
        input.assessed_on.to_string(),
    ];
    for field in CONTROL_FIELDS.iter().chain(DATA_FIELDS.iter()) {
        let yes = input.controls.get(field).expect("known field");
        lines.push(if yes { "y" } else { "n" }.to_string());
    }
    lines.join("\n") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::risk::{ComplexityGrade, ControlAnswers, MaterialityGrade};

    fn sample() -> AssessmentInput {
        AssessmentInput {
            complexity: ComplexityGrade::High,
            materiality: MaterialityGrade::Medium,
            impact: ImpactCategory::Financial,
            controls: ControlAnswers::from_bits(0b1_0101_0101_0101),
            assessed_on: "2019-04-02".parse().unwrap(),
        }
    }

    #[test]
    fn questions_cover_every_field_in_order() {
        let names: Vec<_> = CONTROL_QUESTIONS.iter().map(|(f, _)| *f).collect();
        let expected: Vec<_> = ControlAnswers::field_names().collect();
        assert_eq!(names, expected);
    }

    #[test]
    fn scripted_answers_reproduce_input() {
        let script = script_for(&sample());
        let mut reader = script.as_bytes();
        let mut transcript = String::new();
        let mut q = Questionnaire {
            input: &mut reader,
            transcript: &mut transcript,
            default_complexity: None,
            default_date: "2000-01-01".parse().unwrap(),
        };
        let mut partial = Map::new();
        let mut saves = 0;
        q.run(&mut partial, |_| saves += 1).unwrap();
        assert_eq!(saves, 17);
        assert_eq!(finish(partial).unwrap(), sample());
    }

    #[test]
    fn bad_answers_are_asked_again_and_eof_interrupts() {
        let mut reader = "7\nx\n2\n".as_bytes();
        let mut transcript = String::new();
        let mut q = Questionnaire {
            input: &mut reader,
            transcript: &mut transcript,
            default_complexity: None,
            default_date: "2000-01-01".parse().unwrap(),
        };
        let mut partial = Map::new();
        let r = q.run(&mut partial, |_| {});
        assert!(matches!(r, Err(Interrupted::EndOfInput)));
        assert_eq!(partial.get("complexity"), Some(&Value::from(2)));
        assert!(transcript.contains("enter a whole number from 1 to 3"));
    }
}
