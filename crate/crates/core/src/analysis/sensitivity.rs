//! Target sensitivity through a single proxy model: if one strong
//! intermediate model's gains resemble the per-target max-gain, finetuning
//! that one model is enough to tell which targets benefit from intertraining.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gain::{max_gain, GainMatrix};
use crate::stats::{self, CorrelationResult, PermutationSettings};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivitySettings {
    /// Leave the proxy out of the max-gain it is compared against.
    pub exclude_proxy: bool,
    /// Targets whose max-gain exceeds this many points are flagged.
    pub threshold: f64,
}

impl Default for SensitivitySettings {
    fn default() -> Self {
        SensitivitySettings {
            exclude_proxy: false,
            threshold: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub proxy: String,
    pub settings: SensitivitySettings,
    pub target_ids: Vec<String>,
    pub max_gain: Vec<f64>,
    pub proxy_gain: Vec<f64>,
    /// Per target: `max_gain > threshold`.
    pub sensitive: Vec<bool>,
    /// Targets without a proxy gain or without a max-gain.
    pub dropped_targets: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    pub pearson: CorrelationResult,
    pub spearman: CorrelationResult,
}

pub fn sensitivity_analysis(
    g: &GainMatrix,
    proxy: &str,
    settings: &SensitivitySettings,
    perm: &PermutationSettings,
) -> Result<SensitivityReport> {
    let p = g
        .model_index(proxy)
        .ok_or_else(|| Error::UnknownId(proxy.to_string()))?;
    let maxima = if settings.exclude_proxy {
        let others: Vec<&String> = g.model_ids().iter().filter(|id| *id != proxy).collect();
        if others.is_empty() {
            return Err(Error::InsufficientData("no models besides the proxy".into()));
        }
        max_gain(g, Some(&others))?
    } else {
        max_gain::<&str>(g, None)?
    };
    let mut report = SensitivityReport {
        proxy: proxy.to_string(),
        settings: *settings,
        target_ids: Vec::new(),
        max_gain: Vec::new(),
        proxy_gain: Vec::new(),
        sensitive: Vec::new(),
        dropped_targets: Vec::new(),
        warnings: Vec::new(),
        pearson: placeholder(),
        spearman: placeholder(),
    };
    for (j, id) in g.target_ids().iter().enumerate() {
        match (maxima[j], g.mean(p, j)) {
            (Some(m), Some(v)) => {
                report.target_ids.push(id.clone());
                report.max_gain.push(m);
                report.proxy_gain.push(v);
                report.sensitive.push(m > settings.threshold);
            }
            _ => report.dropped_targets.push(id.clone()),
        }
    }
    if !report.dropped_targets.is_empty() {
        report.warnings.push(format!(
            "{} targets dropped for missing gains",
            report.dropped_targets.len()
        ));
    }
    match report.target_ids.len() {
        0 | 1 => {
            return Err(Error::InsufficientData(format!(
                "{} usable targets for proxy `{proxy}`, need at least 2",
                report.target_ids.len()
            )))
        }
        2 => {
            report.warnings.push("only 2 targets: any two distinct points are collinear, p-values not computed".into());
            report.pearson = two_point(stats::CorrelationMethod::Pearson, &report.proxy_gain, &report.max_gain)?;
            report.spearman = two_point(stats::CorrelationMethod::Spearman, &report.proxy_gain, &report.max_gain)?;
        }
        _ => {
            report.pearson = stats::pearson(&report.proxy_gain, &report.max_gain, perm)?;
            report.spearman = stats::spearman(&report.proxy_gain, &report.max_gain, perm)?;
        }
    }
    Ok(report)
}

fn two_point(method: stats::CorrelationMethod, x: &[f64], y: &[f64]) -> Result<CorrelationResult> {
    let (dx, dy) = (x[1] - x[0], y[1] - y[0]);
    if dx == 0.0 || dy == 0.0 {
        return Err(Error::UndefinedCorrelation("constant series over 2 targets".into()));
    }
    Ok(CorrelationResult {
        method,
        coefficient: (dx * dy).signum(),
        n: 2,
        p_value: 1.0,
        p_method: "not tested (n < 3)".into(),
        n_perm: 0,
        seed: 0,
    })
}

fn placeholder() -> CorrelationResult {
    CorrelationResult {
        method: stats::CorrelationMethod::Pearson,
        coefficient: 0.0,
        n: 0,
        p_value: 1.0,
        p_method: String::new(),
        n_perm: 0,
        seed: 0,
    }
}
