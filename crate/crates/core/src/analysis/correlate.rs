//! Correlations of per-id gain summaries with metadata (for example source
//! training size) or with the same summaries computed on another gain
//! matrix (for example another architecture). Ids are matched by name.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gain::{axis_means, max_gain, Axis, GainMatrix};
use crate::stats::{self, CorrelationMethod, CorrelationResult, PermutationSettings};
use crate::table::Metadata;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetadataCorrelation {
    pub axis: Axis,
    pub key: String,
    pub ids: Vec<String>,
    pub metadata_values: Vec<f64>,
    pub mean_gains: Vec<f64>,
    pub result: CorrelationResult,
}

/// Correlation between numeric metadata `key` and each id's mean gain along
/// `axis`. Ids without the key or without gains are skipped.
pub fn metadata_correlation(
    g: &GainMatrix,
    metadata: &Metadata,
    axis: Axis,
    key: &str,
    method: CorrelationMethod,
    perm: &PermutationSettings,
) -> Result<MetadataCorrelation> {
    let means = axis_means(g, axis);
    let mut out = (Vec::new(), Vec::new(), Vec::new());
    for (id, m) in g.ids(axis).iter().zip(means) {
        let value = metadata.get(id).and_then(|kv| kv.get(key)).and_then(|v| v.as_number());
        if let (Some(v), Some(m)) = (value, m) {
            out.0.push(id.clone());
            out.1.push(v);
            out.2.push(m);
        }
    }
    if out.0.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "metadata `{key}` covers {} ids with gains, need at least 3",
            out.0.len()
        )));
    }
    let result = stats::correlate(method, &out.1, &out.2, perm)?;
    Ok(MetadataCorrelation {
        axis,
        key: key.to_string(),
        ids: out.0,
        metadata_values: out.1,
        mean_gains: out.2,
        result,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CrossQuantity {
    ModelMean,
    TargetMean,
    TargetMaxGain,
}

impl CrossQuantity {
    fn axis(self) -> Axis {
        match self {
            CrossQuantity::ModelMean => Axis::Models,
            CrossQuantity::TargetMean | CrossQuantity::TargetMaxGain => Axis::Targets,
        }
    }

    fn values(self, g: &GainMatrix) -> Result<Vec<Option<f64>>> {
        match self {
            CrossQuantity::ModelMean | CrossQuantity::TargetMean => Ok(axis_means(g, self.axis())),
            CrossQuantity::TargetMaxGain => max_gain::<&str>(g, None),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCorrelation {
    pub quantity: CrossQuantity,
    pub ids: Vec<String>,
    pub first: Vec<f64>,
    pub second: Vec<f64>,
    pub result: CorrelationResult,
}

/// Correlation of `quantity` between two gain matrices over their shared ids.
pub fn cross_matrix_correlation(
    g1: &GainMatrix,
    g2: &GainMatrix,
    quantity: CrossQuantity,
    method: CorrelationMethod,
    perm: &PermutationSettings,
) -> Result<CrossCorrelation> {
    let axis = quantity.axis();
    let (v1, v2) = (quantity.values(g1)?, quantity.values(g2)?);
    let lookup = |g: &GainMatrix, id: &str| match axis {
        Axis::Models => g.model_index(id),
        Axis::Targets => g.target_index(id),
    };
    let mut out = (Vec::new(), Vec::new(), Vec::new());
    for (k, id) in g1.ids(axis).iter().enumerate() {
        let Some(k2) = lookup(g2, id) else { continue };
        if let (Some(a), Some(b)) = (v1[k], v2[k2]) {
            out.0.push(id.clone());
            out.1.push(a);
            out.2.push(b);
        }
    }
    if out.0.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} shared ids with values, need at least 3",
            out.0.len()
        )));
    }
    let result = stats::correlate(method, &out.1, &out.2, perm)?;
    Ok(CrossCorrelation {
        quantity,
        ids: out.0,
        first: out.1,
        second: out.2,
        result,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::MetaValue;
    use approx::assert_abs_diff_eq;

    fn perm() -> PermutationSettings {
        PermutationSettings::new(200, 9)
    }

    fn sample() -> GainMatrix {
        GainMatrix::from_dense(
            &["a", "b", "c", "d"],
            &["x", "y", "z"],
            &[
                vec![1.0, 2.0, 0.5],
                vec![-1.0, 0.0, 3.0],
                vec![2.0, 2.5, 1.5],
                vec![0.0, -2.0, 1.0],
            ],
        )
        .unwrap()
    }

    fn md(key: &str, pairs: &[(&str, f64)]) -> Metadata {
        pairs
            .iter()
            .map(|(id, v)| (id.to_string(), [(key.to_string(), MetaValue::Number(*v))].into()))
            .collect()
    }

    #[test]
    fn metadata_equal_to_means() {
        let g = sample();
        let means: Vec<(&str, f64)> = ["a", "b", "c", "d"]
            .iter()
            .zip(axis_means(&g, Axis::Models))
            .map(|(id, m)| (*id, m.unwrap()))
            .collect();
        let r = metadata_correlation(&g, &md("size", &means), Axis::Models, "size", CorrelationMethod::Pearson, &perm()).unwrap();
        assert_abs_diff_eq!(r.result.coefficient, 1.0, epsilon = 1e-12);

        let flat = md("size", &[("a", 1.0), ("b", 1.0), ("c", 1.0), ("d", 1.0)]);
        assert!(matches!(
            metadata_correlation(&g, &flat, Axis::Models, "size", CorrelationMethod::Pearson, &perm()),
            Err(Error::UndefinedCorrelation(_))
        ));
        let sparse = md("size", &[("a", 1.0), ("b", 2.0)]);
        assert!(matches!(
            metadata_correlation(&g, &sparse, Axis::Models, "size", CorrelationMethod::Pearson, &perm()),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn identity_and_permuted_rows() {
        let g = sample();
        for q in [CrossQuantity::ModelMean, CrossQuantity::TargetMean, CrossQuantity::TargetMaxGain] {
            let r = cross_matrix_correlation(&g, &g, q, CorrelationMethod::Pearson, &perm()).unwrap();
            assert_abs_diff_eq!(r.result.coefficient, 1.0, epsilon = 1e-12);
        }
        let permuted = g.select_models(&["d", "b", "a", "c"]).unwrap();
        let r = cross_matrix_correlation(&g, &permuted, CrossQuantity::ModelMean, CorrelationMethod::Pearson, &perm()).unwrap();
        assert_abs_diff_eq!(r.result.coefficient, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn negated_matrix() {
        let g = sample();
        let neg = GainMatrix::from_means(
            g.model_ids(),
            g.target_ids(),
            &g.mean_rows()
                .into_iter()
                .map(|r| r.into_iter().map(|v| v.map(|x| -x)).collect())
                .collect::<Vec<_>>(),
        )
        .unwrap();
        for q in [CrossQuantity::ModelMean, CrossQuantity::TargetMean] {
            let r = cross_matrix_correlation(&g, &neg, q, CorrelationMethod::Pearson, &perm()).unwrap();
            assert_abs_diff_eq!(r.result.coefficient, -1.0, epsilon = 1e-12);
        }
    }
}
