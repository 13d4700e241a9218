//! Deterministic result reports.
//!
//! Every command produces a [`Report`]: the command name, an echo of the
//! inputs it acted on, its results, and provenance notes recording the
//! truncation orders and degree windows behind each asserted equality. Keys
//! are sorted maps and scalars are exact strings, so serializing the same
//! report twice yields byte-identical output.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub command: String,
    pub inputs: BTreeMap<String, Value>,
    pub results: BTreeMap<String, Value>,
    pub notes: BTreeMap<String, String>,
}

impl Report {
    pub fn new(command: impl Into<String>) -> Self {
        Report {
            command: command.into(),
            inputs: BTreeMap::new(),
            results: BTreeMap::new(),
            notes: BTreeMap::new(),
        }
    }

    pub fn with_input(mut self, key: &str, value: impl Serialize) -> Self {
        self.inputs
            .insert(key.to_string(), serde_json::to_value(value).expect("serializable"));
        self
    }

    pub fn with_result(mut self, key: &str, value: impl Serialize) -> Self {
        self.results
            .insert(key.to_string(), serde_json::to_value(value).expect("serializable"));
        self
    }

    /// Provenance note: which window or truncation order backs a result.
    pub fn with_note(mut self, key: &str, value: impl Into<String>) -> Self {
        self.notes.insert(key.to_string(), value.into());
        self
    }

    /// Deterministic machine-readable form with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("serializable");
        out.push('\n');
        out
    }

    pub fn parse(src: &str) -> Result<Self> {
        serde_json::from_str(src).map_err(|e| Error::parse(e.to_string()))
    }

    /// Human-readable form: one line per entry, same order as the
    /// machine-readable form.
    pub fn render_text(&self) -> String {
        fn compact(v: &Value) -> String {
            match v {
                Value::String(s) => s.clone(),
                other => serde_json::to_string(other).expect("serializable"),
            }
        }
        let mut out = format!("asd {}\n", self.command);
        for (k, v) in &self.inputs {
            out.push_str(&format!("  input {k}: {}\n", compact(v)));
        }
        for (k, v) in &self.results {
            out.push_str(&format!("  {k}: {}\n", compact(v)));
        }
        for (k, v) in &self.notes {
            out.push_str(&format!("  note {k}: {v}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_and_is_deterministic() {
        let report = Report::new("katz")
            .with_input("file", "corpus/a.json")
            .with_result("rho", 2)
            .with_result("method", "pole order")
            .with_note("window", "degree 6");
        let json = report.to_json();
        let reparsed = Report::parse(&json).unwrap();
        assert_eq!(report, reparsed);
        assert_eq!(json, reparsed.to_json());
    }

    #[test]
    fn text_rendering_lists_every_entry() {
        let report = Report::new("specialize")
            .with_input("a", 2)
            .with_result("spectrum", vec!["y1 - 2*y2".to_string()])
            .with_note("truncation", "12");
        let text = report.render_text();
        assert!(text.starts_with("asd specialize\n"));
        assert!(text.contains("  input a: 2\n"));
        assert!(text.contains("  spectrum: [\"y1 - 2*y2\"]\n"));
        assert!(text.contains("  note truncation: 12\n"));
    }
}
