//! Reports: a JSON document naming every operation and its settings,
//! an optional Markdown summary and SVG plots.

pub mod json;
pub mod markdown;
pub mod svg;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::ingest::Input;
use crate::rng::GENERATOR_NAME;

pub use json::to_canonical_string;
pub use svg::{emit_heatmap, emit_scatter};

pub const TOOL: &str = "intertrain";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

impl InputDigest {
    pub fn of(input: &Input) -> Result<Self> {
        let bytes = input.read_bytes()?;
        Ok(InputDigest {
            name: input.name(),
            sha256: sha256_hex(&bytes),
            bytes: bytes.len(),
        })
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Output of one analysis together with the operation and settings that
/// produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub operation: String,
    pub settings: Value,
    pub result: Value,
}

impl Section {
    pub fn new(operation: &str, settings: impl Serialize, result: impl Serialize) -> Result<Self> {
        Ok(Section {
            operation: operation.to_string(),
            settings: serde_json::to_value(settings)?,
            result: serde_json::to_value(result)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub rng: String,
    pub inputs: Vec<InputDigest>,
    pub settings: Value,
    pub sections: BTreeMap<String, Section>,
    /// Analyses that were requested but could not run, with the reason.
    pub skipped: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<BTreeMap<String, f64>>,
}

impl AnalysisReport {
    pub fn new(command: &str, settings: impl Serialize) -> Result<Self> {
        Ok(AnalysisReport {
            tool: TOOL.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            rng: GENERATOR_NAME.to_string(),
            inputs: Vec::new(),
            settings: serde_json::to_value(settings)?,
            sections: BTreeMap::new(),
            skipped: BTreeMap::new(),
            timing_ms: None,
        })
    }

    pub fn add_inputs<'a>(&mut self, inputs: impl IntoIterator<Item = &'a Input>) -> Result<()> {
        for input in inputs {
            self.inputs.push(InputDigest::of(input)?);
        }
        Ok(())
    }

    pub fn insert(&mut self, name: &str, section: Section) {
        self.sections.insert(name.to_string(), section);
    }

    pub fn skip(&mut self, name: &str, reason: impl ToString) {
        self.skipped.insert(name.to_string(), reason.to_string());
    }

    pub fn to_json(&self) -> Result<String> {
        to_canonical_string(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_known_input() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn report_round_trips() {
        let mut r = AnalysisReport::new("gains", serde_json::json!({"seed": 1})).unwrap();
        r.add_inputs([&Input::inline("s.csv", "abc")]).unwrap();
        r.insert("x", Section::new("op", serde_json::json!({}), vec![1.5, 2.0]).unwrap());
        r.skip("y", "no metadata");
        let text = r.to_json().unwrap();
        let back: AnalysisReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
        assert_eq!(text, back.to_json().unwrap());
    }
}
