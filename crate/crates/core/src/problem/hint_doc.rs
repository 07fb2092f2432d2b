//! Parser and serializer for externally authored hint documents.
//!
//! A document holds three tagged sections, each a numbered list:
//!
//! ```text
//! <PLANNING_SKELETON>
//! 1. Identify the goal.
//! 2. ...
//! </PLANNING_SKELETON>
//!
//! <KNOWLEDGE_COMPONENTS>
//! 1. ...
//! </KNOWLEDGE_COMPONENTS>
//!
//! <SOLUTION_BREAKDOWN>
//! 1. ...
//! </SOLUTION_BREAKDOWN>
//! ```
//!
//! Items are numbered `1..k` consecutively with `k >= 4`. Only the first four
//! items of a section define hint levels; extras are kept.
//! A non-numbered line inside an item continues that item.

use std::fmt::Write as _;

use crate::problem::{HintCategory, HINT_LEVELS};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HintDocError {
    #[error("missing section <{0}>")]
    MissingSection(&'static str),
    #[error("section <{0}> is not closed")]
    UnclosedSection(&'static str),
    #[error("section <{section}> has {found} items, at least {HINT_LEVELS} are required")]
    TooFewItems { section: &'static str, found: usize },
    #[error("section <{section}>: expected item {expected}, found {found:?}")]
    MalformedNumbering {
        section: &'static str,
        expected: usize,
        found: String,
    },
}

/// Parsed hint document: three ordered item lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HintDocument {
    pub planning: Vec<String>,
    pub knowledge: Vec<String>,
    pub solution: Vec<String>,
}

const SECTIONS: [(&str, HintCategory); 3] = [
    ("PLANNING_SKELETON", HintCategory::Planning),
    ("KNOWLEDGE_COMPONENTS", HintCategory::Knowledge),
    ("SOLUTION_BREAKDOWN", HintCategory::Solution),
];

pub fn section_tag(category: HintCategory) -> &'static str {
    SECTIONS
        .iter()
        .find(|(_, c)| *c == category)
        .map(|(t, _)| *t)
        .expect("every category has a tag")
}

impl HintDocument {
    pub fn items(&self, category: HintCategory) -> &[String] {
        match category {
            HintCategory::Knowledge => &self.knowledge,
            HintCategory::Planning => &self.planning,
            HintCategory::Solution => &self.solution,
        }
    }

    /// The four items that define the hint levels of `category`.
    pub fn levels(&self, category: HintCategory) -> &[String] {
        &self.items(category)[..HINT_LEVELS]
    }

    /// Cumulative hint text for `category` at `level` (items `1..=level`).
    pub fn cumulative(&self, category: HintCategory, level: usize) -> &[String] {
        &self.levels(category)[..level.clamp(1, HINT_LEVELS)]
    }

    /// Renders the document in the tagged layout, sections in canonical order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, (tag, category)) in SECTIONS.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            writeln!(out, "<{tag}>").unwrap();
            for (n, item) in self.items(*category).iter().enumerate() {
                writeln!(out, "{}. {item}", n + 1).unwrap();
            }
            writeln!(out, "</{tag}>").unwrap();
        }
        out
    }
}

pub fn parse_hint_document(text: &str) -> Result<HintDocument, HintDocError> {
    let mut lists: [Vec<String>; 3] = Default::default();
    for (slot, (tag, _)) in lists.iter_mut().zip(SECTIONS) {
        let body = section_body(text, tag)?;
        *slot = parse_items(tag, body)?;
    }
    let [planning, knowledge, solution] = lists;
    Ok(HintDocument {
        planning,
        knowledge,
        solution,
    })
}

fn section_body<'a>(text: &'a str, tag: &'static str) -> Result<&'a str, HintDocError> {
    let open = format!("<{tag}>");
    let close = format!("</{tag}>");
    let start = text.find(&open).ok_or(HintDocError::MissingSection(tag))? + open.len();
    let len = text[start..]
        .find(&close)
        .ok_or(HintDocError::UnclosedSection(tag))?;
    Ok(&text[start..start + len])
}

/// Splits `line` into its item number and text if it starts with `N.`.
fn numbered(line: &str) -> Option<(usize, &str)> {
    let trimmed = line.trim_start();
    let digits = trimmed.bytes().take_while(u8::is_ascii_digit).count();
    if digits == 0 || trimmed.as_bytes().get(digits) != Some(&b'.') {
        return None;
    }
    let n = trimmed[..digits].parse().ok()?;
    Some((n, trimmed[digits + 1..].trim()))
}

fn parse_items(tag: &'static str, body: &str) -> Result<Vec<String>, HintDocError> {
    let mut items: Vec<String> = Vec::new();
    for line in body.lines() {
        if line.trim().is_empty() {
            continue;
        }
        match numbered(line) {
            Some((n, rest)) => {
                let expected = items.len() + 1;
                if n != expected {
                    return Err(HintDocError::MalformedNumbering {
                        section: tag,
                        expected,
                        found: line.trim().to_string(),
                    });
                }
                items.push(rest.to_string());
            }
            None => match items.last_mut() {
                Some(item) => {
                    item.push('\n');
                    item.push_str(line.trim());
                }
                None => {
                    return Err(HintDocError::MalformedNumbering {
                        section: tag,
                        expected: 1,
                        found: line.trim().to_string(),
                    })
                }
            },
        }
    }
    if items.len() < HINT_LEVELS {
        return Err(HintDocError::TooFewItems {
            section: tag,
            found: items.len(),
        });
    }
    Ok(items)
}
