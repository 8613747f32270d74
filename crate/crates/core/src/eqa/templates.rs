//! The five question templates and their slot grammar. Slots hold category
//! display names (underscores become spaces) or affordance activities.

use serde::{Deserialize, Serialize};

use crate::simworld::Category;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuestionType {
    Location,
    Comparing,
    Existence,
}

pub const TEMPLATE_IDS: [u8; 5] = [1, 2, 3, 4, 5];

pub fn template_type(template_id: u8) -> QuestionType {
    match template_id {
        1 | 2 => QuestionType::Location,
        3 => QuestionType::Comparing,
        _ => QuestionType::Existence,
    }
}

/// Human-readable category name used inside question text.
pub fn display_name(category: Category) -> String {
    category.name().replace('_', " ")
}

pub fn category_from_display(name: &str) -> Option<Category> {
    Category::from_name(&name.replace(' ', "_"))
}

/// A parsed question with its slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParsedQuestion {
    /// Template 1: "What is the item on the same table as the <obj>?"
    SameTableItem { obj: String },
    /// Template 2: "Are the <obj1> and the <obj2> on the same table?"
    SameTable { a: String, b: String },
    /// Template 3: "Is the <obj1> closer to the <obj2> than to the <obj3>?"
    Closer { a: String, b: String, c: String },
    /// Template 4: "Is there any <obj> in the cafe?"
    Exists { obj: String },
    /// Template 5: "Is there anything in the cafe that I can use to <do something>?"
    Affordance { activity: String },
}

pub fn render_same_table_item(obj: &str) -> String {
    format!("What is the item on the same table as the {obj}?")
}

pub fn render_same_table(a: &str, b: &str) -> String {
    format!("Are the {a} and the {b} on the same table?")
}

pub fn render_closer(a: &str, b: &str, c: &str) -> String {
    format!("Is the {a} closer to the {b} than to the {c}?")
}

pub fn render_exists(obj: &str) -> String {
    format!("Is there any {obj} in the cafe?")
}

pub fn render_affordance(activity: &str) -> String {
    format!("Is there anything in the cafe that I can use to {activity}?")
}

fn strip<'a>(text: &'a str, prefix: &str, suffix: &str) -> Option<&'a str> {
    text.strip_prefix(prefix)?.strip_suffix(suffix)
}

/// Parse question text back into its template and slots.
pub fn parse_question(text: &str) -> Option<ParsedQuestion> {
    let text = text.trim();
    if let Some(obj) = strip(text, "What is the item on the same table as the ", "?") {
        return Some(ParsedQuestion::SameTableItem { obj: obj.to_string() });
    }
    if let Some(inner) = strip(text, "Are the ", " on the same table?") {
        let (a, b) = inner.split_once(" and the ")?;
        return Some(ParsedQuestion::SameTable { a: a.to_string(), b: b.to_string() });
    }
    if let Some(inner) = strip(text, "Is the ", "?") {
        let (a, rest) = inner.split_once(" closer to the ")?;
        let (b, c) = rest.split_once(" than to the ")?;
        return Some(ParsedQuestion::Closer {
            a: a.to_string(),
            b: b.to_string(),
            c: c.to_string(),
        });
    }
    if let Some(activity) = strip(text, "Is there anything in the cafe that I can use to ", "?") {
        return Some(ParsedQuestion::Affordance { activity: activity.to_string() });
    }
    if let Some(obj) = strip(text, "Is there any ", " in the cafe?") {
        return Some(ParsedQuestion::Exists { obj: obj.to_string() });
    }
    None
}
