use serde_json::{json, Value};

use crate::Format;

/// A result document in both renderings.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub json: Value,
    pub text: String,
    /// False when a checked identity failed.
    pub passed: bool,
}

impl Report {
    pub fn new(json: Value, text: String) -> Self {
        Report { json, text, passed: true }
    }

    pub fn checked(json: Value, text: String, passed: bool) -> Self {
        Report { json, text, passed }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => format!("{}\n", serde_json::to_string_pretty(&self.json).expect("serializable")),
            Format::Text => {
                let mut t = self.text.clone();
                if !t.ends_with('\n') {
                    t.push('\n');
                }
                t
            }
        }
    }
}

pub fn error_document(message: &str) -> String {
    let doc = json!({ "error": { "kind": "usage", "message": message } });
    format!("{}\n", serde_json::to_string_pretty(&doc).expect("serializable"))
}
