//! Static model rankings and the gain they lose.
//!
//! A ranking orders intermediate models by a quality score computed without
//! finetuning on the target (for example the gain of a linear probe on one
//! dataset). `loss_k` for a target is the best gain over all models minus
//! the best gain among the top `k` ranked models.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixtures::{LinearCoefficients, LP_PREDICTOR};
use crate::gain::GainMatrix;
use crate::stats::{self, CorrelationResult, PermutationSettings};

/// Targets whose `loss_k` exceeds this many points are counted separately.
pub const LOSS_THRESHOLD: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum QualityKind {
    LpProbe,
    AvgGain,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityScore {
    pub model_id: String,
    pub value: f64,
    pub kind: QualityKind,
}

impl QualityScore {
    pub fn new(model_id: impl Into<String>, value: f64, kind: QualityKind) -> Self {
        QualityScore {
            model_id: model_id.into(),
            value,
            kind,
        }
    }
}

/// Build quality scores of one kind from `(id, value)` pairs.
pub fn quality_scores(pairs: &[(String, f64)], kind: QualityKind) -> Vec<QualityScore> {
    pairs
        .iter()
        .map(|(id, v)| QualityScore::new(id.clone(), *v, kind))
        .collect()
}

fn check_scores(scores: &[QualityScore]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for s in scores {
        if !seen.insert(s.model_id.as_str()) {
            return Err(Error::DuplicateId(s.model_id.clone()));
        }
        if !s.value.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "non-finite quality {} for `{}`",
                s.value, s.model_id
            )));
        }
    }
    Ok(())
}

/// Model ids by descending quality; equal values go in id order.
pub fn rank_models(scores: &[QualityScore]) -> Result<Vec<String>> {
    if scores.is_empty() {
        return Err(Error::InsufficientData("no quality scores to rank".into()));
    }
    check_scores(scores)?;
    let mut order: Vec<&QualityScore> = scores.iter().collect();
    order.sort_by(|a, b| b.value.total_cmp(&a.value).then_with(|| a.model_id.cmp(&b.model_id)));
    Ok(order.into_iter().map(|s| s.model_id.clone()).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopKLoss {
    pub k: usize,
    pub target_ids: Vec<String>,
    /// `None` where neither the matrix nor the top `k` have a gain for the
    /// target.
    pub per_target: Vec<Option<f64>>,
    pub average: f64,
    pub max: f64,
    pub count_over_threshold: usize,
    pub threshold: f64,
    /// Targets with a defined loss.
    pub n_targets: usize,
}

fn ranking_indices<S: AsRef<str>>(g: &GainMatrix, ranking: &[S]) -> Result<Vec<usize>> {
    let mut seen = BTreeSet::new();
    ranking
        .iter()
        .map(|id| {
            let id = id.as_ref();
            if !seen.insert(id) {
                return Err(Error::DuplicateId(id.to_string()));
            }
            g.model_index(id).ok_or_else(|| Error::UnknownId(id.to_string()))
        })
        .collect()
}

/// Per-target `loss_k` of `ranking` on `g` and its aggregates.
pub fn topk_loss<S: AsRef<str>>(g: &GainMatrix, ranking: &[S], k: usize) -> Result<TopKLoss> {
    if k == 0 || k > ranking.len() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} outside 1..={}",
            ranking.len()
        )));
    }
    let top = &ranking_indices(g, ranking)?[..k];
    let per_target: Vec<Option<f64>> = (0..g.n_targets())
        .map(|j| {
            let best = g.column(j).map(|(_, v)| v).reduce(f64::max)?;
            let chosen = top.iter().filter_map(|&i| g.mean(i, j)).reduce(f64::max)?;
            Some(best - chosen)
        })
        .collect();
    let defined: Vec<f64> = per_target.iter().flatten().copied().collect();
    if defined.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no target has a gain among the top {k} models"
        )));
    }
    Ok(TopKLoss {
        k,
        target_ids: g.target_ids().to_vec(),
        average: defined.iter().sum::<f64>() / defined.len() as f64,
        max: defined.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        count_over_threshold: defined.iter().filter(|&&l| l > LOSS_THRESHOLD).count(),
        threshold: LOSS_THRESHOLD,
        n_targets: defined.len(),
        per_target,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingReport {
    pub quality_kind: Option<QualityKind>,
    pub ranking: Vec<String>,
    pub losses: Vec<TopKLoss>,
}

/// Rank by `scores` and evaluate `loss_k` for every `k` in `ks`. Scored
/// models missing from `g` are rejected.
pub fn ranking_report(g: &GainMatrix, scores: &[QualityScore], ks: &[usize]) -> Result<RankingReport> {
    let ranking = rank_models(scores)?;
    let kinds: BTreeSet<QualityKind> = scores.iter().map(|s| s.kind).collect();
    let losses = ks
        .iter()
        .map(|&k| topk_loss(g, &ranking, k))
        .collect::<Result<_>>()?;
    Ok(RankingReport {
        quality_kind: (kinds.len() == 1).then(|| *kinds.first().expect("one kind")),
        ranking,
        losses,
    })
}

/// Average gain predicted from a linear-probe gain with the published
/// coefficients.
pub fn predict_avg_gain(lp_value: f64) -> f64 {
    predict_with(&LP_PREDICTOR, lp_value)
}

pub fn predict_with(c: &LinearCoefficients, lp_value: f64) -> f64 {
    c.slope * lp_value + c.intercept
}

/// Mean gain of each model over `targets` (all targets when `None`), as
/// `avg_gain` quality. Models without any gain in the subset are left out.
pub fn rank_by_average<S: AsRef<str>>(g: &GainMatrix, targets: Option<&[S]>) -> Result<Vec<QualityScore>> {
    let cols: Vec<usize> = match targets {
        None => (0..g.n_targets()).collect(),
        Some(ids) => {
            if ids.is_empty() {
                return Err(Error::InvalidArgument("empty target subset".into()));
            }
            ids.iter()
                .map(|id| {
                    g.target_index(id.as_ref())
                        .ok_or_else(|| Error::UnknownId(id.as_ref().to_string()))
                })
                .collect::<Result<_>>()?
        }
    };
    Ok(g.model_ids()
        .iter()
        .enumerate()
        .filter_map(|(i, id)| {
            let vals: Vec<f64> = cols.iter().filter_map(|&j| g.mean(i, j)).collect();
            (!vals.is_empty()).then(|| {
                QualityScore::new(id.clone(), vals.iter().sum::<f64>() / vals.len() as f64, QualityKind::AvgGain)
            })
        })
        .collect())
}

/// Where a set of predictor coefficients came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientSource {
    Published,
    Fitted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpPredictorFit {
    pub source: CoefficientSource,
    pub slope: f64,
    pub intercept: f64,
    pub model_ids: Vec<String>,
    pub pearson: CorrelationResult,
    pub spearman: CorrelationResult,
}

impl LpPredictorFit {
    pub fn coefficients(&self) -> LinearCoefficients {
        LinearCoefficients {
            slope: self.slope,
            intercept: self.intercept,
        }
    }
}

/// Least-squares line `avg = slope * lp + intercept` over models present in
/// both lists, with both correlation tests.
pub fn fit_lp_predictor(
    lp: &[QualityScore],
    avg: &[QualityScore],
    perm: &PermutationSettings,
) -> Result<LpPredictorFit> {
    check_scores(lp)?;
    check_scores(avg)?;
    let avg_by_id: BTreeMap<&str, f64> = avg.iter().map(|s| (s.model_id.as_str(), s.value)).collect();
    let mut matched: Vec<(&str, f64, f64)> = lp
        .iter()
        .filter_map(|s| avg_by_id.get(s.model_id.as_str()).map(|&a| (s.model_id.as_str(), s.value, a)))
        .collect();
    matched.sort_by(|a, b| a.0.cmp(b.0));
    if matched.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} matched models, need at least 3",
            matched.len()
        )));
    }
    let x: Vec<f64> = matched.iter().map(|m| m.1).collect();
    let y: Vec<f64> = matched.iter().map(|m| m.2).collect();
    let (slope, intercept) = ols(&x, &y)?;
    Ok(LpPredictorFit {
        source: CoefficientSource::Fitted,
        slope,
        intercept,
        model_ids: matched.iter().map(|m| m.0.to_string()).collect(),
        pearson: stats::pearson(&x, &y, perm)?,
        spearman: stats::spearman(&x, &y, perm)?,
    })
}

/// Simple linear regression of `y` on `x`.
pub fn ols(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::UndefinedCorrelation("constant predictor".into()));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub rank: usize,
    pub model_id: String,
    pub lp_value: f64,
    pub predicted_avg_gain: f64,
}

/// The `k` best models by linear-probe gain with their predicted average
/// gain under `coefficients`.
pub fn recommend(lp: &[QualityScore], k: usize, coefficients: &LinearCoefficients) -> Result<Vec<Recommendation>> {
    let ranking = rank_models(lp)?;
    if k == 0 || k > ranking.len() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} outside 1..={}",
            ranking.len()
        )));
    }
    let by_id: BTreeMap<&str, f64> = lp.iter().map(|s| (s.model_id.as_str(), s.value)).collect();
    Ok(ranking
        .into_iter()
        .take(k)
        .enumerate()
        .map(|(r, id)| {
            let v = by_id[id.as_str()];
            Recommendation {
                rank: r + 1,
                predicted_avg_gain: predict_with(coefficients, v),
                lp_value: v,
                model_id: id,
            }
        })
        .collect())
}
