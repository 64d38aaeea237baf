//! Raw score tables: per-seed accuracies for intermediate models and for the
//! pretrained baseline, plus optional per-id metadata.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

/// Accuracy of finetuning `model_id` on `target_id` with one seed, in
/// percentage points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub model_id: String,
    pub target_id: String,
    pub seed: u64,
    pub score: f64,
}

/// Accuracy of finetuning the pretrained model directly on `target_id`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRecord {
    pub target_id: String,
    pub seed: u64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MetaValue {
    Number(f64),
    Text(String),
}

impl MetaValue {
    pub fn as_number(&self) -> Option<f64> {
        match self {
            MetaValue::Number(x) => Some(*x),
            MetaValue::Text(_) => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            MetaValue::Text(s) => Some(s),
            MetaValue::Number(_) => None,
        }
    }
}

/// id -> key -> value. Ids may name models, targets or both (in-house
/// experiments use the same datasets as sources and targets).
pub type Metadata = BTreeMap<String, BTreeMap<String, MetaValue>>;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub records: Vec<ScoreRecord>,
    pub baselines: Vec<BaselineRecord>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: Metadata,
}

impl ScoreTable {
    pub fn new(records: Vec<ScoreRecord>, baselines: Vec<BaselineRecord>) -> Self {
        ScoreTable {
            records,
            baselines,
            metadata: Metadata::new(),
        }
    }

    pub fn with_metadata(mut self, metadata: Metadata) -> Self {
        self.metadata = metadata;
        self
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn model_ids(&self) -> BTreeSet<&str> {
        self.records.iter().map(|r| r.model_id.as_str()).collect()
    }

    pub fn target_ids(&self) -> BTreeSet<&str> {
        self.records.iter().map(|r| r.target_id.as_str()).collect()
    }

    /// Numeric metadata value for `id`, if present.
    pub fn meta_number(&self, id: &str, key: &str) -> Option<f64> {
        self.metadata.get(id)?.get(key)?.as_number()
    }

    /// Records sorted by key, so that two tables holding the same records in
    /// a different order compare equal after normalization.
    pub fn normalized(mut self) -> Self {
        self.records.sort_by(|a, b| {
            (&a.model_id, &a.target_id, a.seed).cmp(&(&b.model_id, &b.target_id, b.seed))
        });
        self.baselines
            .sort_by(|a, b| (&a.target_id, a.seed).cmp(&(&b.target_id, b.seed)));
        self
    }
}
