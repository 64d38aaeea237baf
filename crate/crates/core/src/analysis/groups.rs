//! Mean gain between groups of source and target datasets (e.g. by domain or
//! task), with a one-way ANOVA across source groups for every target group.
//!
//! Cells where the source and target are the same dataset are left out.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gain::GainMatrix;
use crate::ingest::group_labels;
use crate::stats::{self, AnovaResult, PermutationSettings};
use crate::table::Metadata;

/// Group label per model id and per target id. Unlabeled ids are ignored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroupLabeling {
    pub models: BTreeMap<String, String>,
    pub targets: BTreeMap<String, String>,
}

impl GroupLabeling {
    /// Labels from the `model_group` / `target_group` keys, falling back to
    /// `group`.
    pub fn from_metadata(metadata: &Metadata, g: &GainMatrix) -> Self {
        GroupLabeling {
            models: group_labels(metadata, g.model_ids(), "model_group"),
            targets: group_labels(metadata, g.target_ids(), "target_group"),
        }
    }

    /// Labels from explicit `(group, members)` lists.
    pub fn from_groups<S: AsRef<str>>(models: &[(S, Vec<S>)], targets: &[(S, Vec<S>)]) -> Result<Self> {
        fn invert<S: AsRef<str>>(groups: &[(S, Vec<S>)]) -> Result<BTreeMap<String, String>> {
            let mut out = BTreeMap::new();
            for (name, members) in groups {
                if members.is_empty() {
                    return Err(Error::InvalidArgument(format!("group `{}` has no members", name.as_ref())));
                }
                for m in members {
                    if out.insert(m.as_ref().to_string(), name.as_ref().to_string()).is_some() {
                        return Err(Error::DuplicateId(m.as_ref().to_string()));
                    }
                }
            }
            Ok(out)
        }
        Ok(GroupLabeling {
            models: invert(models)?,
            targets: invert(targets)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupAnova {
    pub target_group: String,
    /// `None` when fewer than two source groups have two or more gains, or
    /// the gains are degenerate.
    pub result: Option<AnovaResult>,
    /// Source groups left out for having fewer than two gains.
    pub dropped_source_groups: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupGainTable {
    pub source_groups: Vec<String>,
    pub target_groups: Vec<String>,
    /// `[source group][target group]` mean gain.
    pub means: Vec<Vec<Option<f64>>>,
    pub counts: Vec<Vec<usize>>,
    /// Same-dataset cells left out.
    pub excluded_diagonal: usize,
    pub unlabeled_models: Vec<String>,
    pub unlabeled_targets: Vec<String>,
    pub anova: Vec<GroupAnova>,
}

pub fn group_gain_table(g: &GainMatrix, labels: &GroupLabeling, perm: &PermutationSettings) -> Result<GroupGainTable> {
    let label_of = |map: &BTreeMap<String, String>, ids: &[String]| -> (Vec<Option<String>>, Vec<String>) {
        let found: Vec<Option<String>> = ids.iter().map(|id| map.get(id).cloned()).collect();
        let missing = ids
            .iter()
            .zip(&found)
            .filter(|(_, l)| l.is_none())
            .map(|(id, _)| id.clone())
            .collect();
        (found, missing)
    };
    let (row_labels, unlabeled_models) = label_of(&labels.models, g.model_ids());
    let (col_labels, unlabeled_targets) = label_of(&labels.targets, g.target_ids());
    let sorted = |v: &[Option<String>]| -> Vec<String> {
        let mut s: Vec<String> = v.iter().flatten().cloned().collect();
        s.sort();
        s.dedup();
        s
    };
    let source_groups = sorted(&row_labels);
    let target_groups = sorted(&col_labels);
    if source_groups.is_empty() || target_groups.is_empty() {
        return Err(Error::InsufficientData(
            "no group labels for models or for targets".into(),
        ));
    }
    let pos = |groups: &[String], l: &str| groups.iter().position(|x| x == l).expect("label");

    let mut values: Vec<Vec<Vec<f64>>> = vec![vec![Vec::new(); target_groups.len()]; source_groups.len()];
    let mut excluded_diagonal = 0;
    for (i, rl) in row_labels.iter().enumerate() {
        let Some(rl) = rl else { continue };
        let a = pos(&source_groups, rl);
        for (j, v) in g.row(i) {
            let Some(cl) = &col_labels[j] else { continue };
            if g.model_ids()[i] == g.target_ids()[j] {
                excluded_diagonal += 1;
                continue;
            }
            values[a][pos(&target_groups, cl)].push(v);
        }
    }

    let means = values
        .iter()
        .map(|row| {
            row.iter()
                .map(|v| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64))
                .collect()
        })
        .collect();
    let counts = values.iter().map(|row| row.iter().map(Vec::len).collect()).collect();

    let anova = target_groups
        .iter()
        .enumerate()
        .map(|(b, tg)| {
            let mut groups = BTreeMap::new();
            let mut dropped = Vec::new();
            for (a, sg) in source_groups.iter().enumerate() {
                if values[a][b].len() >= 2 {
                    groups.insert(sg.clone(), values[a][b].clone());
                } else {
                    dropped.push(sg.clone());
                }
            }
            let (result, note) = if groups.len() < 2 {
                (None, Some("fewer than two source groups with at least two gains".to_string()))
            } else {
                match stats::anova_oneway(&groups, perm) {
                    Ok(r) => (Some(r), None),
                    Err(e) => (None, Some(e.to_string())),
                }
            };
            GroupAnova {
                target_group: tg.clone(),
                result,
                dropped_source_groups: dropped,
                note,
            }
        })
        .collect();

    Ok(GroupGainTable {
        source_groups,
        target_groups,
        means,
        counts,
        excluded_diagonal,
        unlabeled_models,
        unlabeled_targets,
        anova,
    })
}
