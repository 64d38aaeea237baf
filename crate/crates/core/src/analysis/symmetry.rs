//! Symmetry of gains between datasets used both as source and target.
//!
//! A square matrix splits into `S = (M + M^T) / 2` and `V = (M - M^T) / 2`;
//! `s = (|S| - |V|) / (|S| + |V|)` is `1` for symmetric and `-1` for
//! skew-symmetric matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gain::GainMatrix;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryNorm {
    #[default]
    Frobenius,
    /// Sum of absolute entries.
    L1,
    /// Largest absolute entry.
    Max,
}

impl SymmetryNorm {
    fn apply(self, entries: impl Iterator<Item = f64>) -> f64 {
        match self {
            SymmetryNorm::Frobenius => entries.map(|x| x * x).sum::<f64>().sqrt(),
            SymmetryNorm::L1 => entries.map(f64::abs).sum(),
            SymmetryNorm::Max => entries.map(f64::abs).fold(0.0, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetryResult {
    pub s: f64,
    pub norm_symmetric: f64,
    pub norm_skew: f64,
    pub norm: SymmetryNorm,
    /// Row/column ids when computed from a gain matrix.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ids: Vec<String>,
    /// Off-diagonal pairs left out because one direction is missing.
    #[serde(default)]
    pub excluded_pairs: usize,
}

pub fn symmetry_score(m: &[Vec<f64>], norm: SymmetryNorm) -> Result<SymmetryResult> {
    let n = m.len();
    if n == 0 {
        return Err(Error::Degenerate("empty matrix".into()));
    }
    if let Some(row) = m.iter().find(|r| r.len() != n) {
        return Err(Error::Degenerate(format!(
            "matrix is not square: {n} rows, a row of length {}",
            row.len()
        )));
    }
    if m.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("non-finite matrix entry".into()));
    }
    let pairs = || (0..n).flat_map(move |i| (0..n).map(move |j| (i, j)));
    let sym = norm.apply(pairs().map(|(i, j)| (m[i][j] + m[j][i]) / 2.0));
    let skew = norm.apply(pairs().map(|(i, j)| (m[i][j] - m[j][i]) / 2.0));
    let total = sym + skew;
    if total == 0.0 {
        return Err(Error::Degenerate("symmetry of a zero matrix is undefined".into()));
    }
    Ok(SymmetryResult {
        s: (sym - skew) / total,
        norm_symmetric: sym,
        norm_skew: skew,
        norm,
        ids: Vec::new(),
        excluded_pairs: 0,
    })
}

/// Symmetry over the ids that are both models and targets of `g`. A pair
/// `(i, j)` with either direction missing contributes to neither part; a
/// missing diagonal cell counts as zero.
pub fn symmetry_of_gains(g: &GainMatrix, norm: SymmetryNorm) -> Result<SymmetryResult> {
    let ids: Vec<String> = g
        .model_ids()
        .iter()
        .filter(|id| g.target_index(id).is_some())
        .cloned()
        .collect();
    if ids.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} ids are both models and targets, need at least 2",
            ids.len()
        )));
    }
    let rows: Vec<usize> = ids.iter().map(|id| g.model_index(id).expect("model")).collect();
    let cols: Vec<usize> = ids.iter().map(|id| g.target_index(id).expect("target")).collect();
    let n = ids.len();
    let mut m = vec![vec![0.0; n]; n];
    let mut excluded = 0;
    for a in 0..n {
        m[a][a] = g.mean(rows[a], cols[a]).unwrap_or(0.0);
        for b in a + 1..n {
            match (g.mean(rows[a], cols[b]), g.mean(rows[b], cols[a])) {
                (Some(x), Some(y)) => {
                    m[a][b] = x;
                    m[b][a] = y;
                }
                _ => excluded += 1,
            }
        }
    }
    let mut r = symmetry_score(&m, norm)?;
    r.ids = ids;
    r.excluded_pairs = excluded;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn reference_cases() {
        let r = symmetry_score(&[vec![1.0, 2.0], vec![2.0, 3.0]], SymmetryNorm::Frobenius).unwrap();
        assert_eq!(r.s, 1.0);
        let r = symmetry_score(&[vec![0.0, 1.0], vec![-1.0, 0.0]], SymmetryNorm::Frobenius).unwrap();
        assert_eq!(r.s, -1.0);
        let r = symmetry_score(&[vec![0.0, 2.0], vec![0.0, 0.0]], SymmetryNorm::Frobenius).unwrap();
        assert_abs_diff_eq!(r.norm_symmetric, 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(r.norm_skew, 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(r.s, 0.0);
    }

    #[test]
    fn other_norms() {
        for norm in [SymmetryNorm::L1, SymmetryNorm::Max] {
            assert_eq!(symmetry_score(&[vec![0.0, 2.0], vec![0.0, 0.0]], norm).unwrap().s, 0.0);
            assert_eq!(symmetry_score(&[vec![0.0, 1.0], vec![-1.0, 0.0]], norm).unwrap().s, -1.0);
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(symmetry_score(&[vec![1.0, 2.0]], SymmetryNorm::Frobenius).is_err());
        assert!(symmetry_score(&[vec![0.0; 2], vec![0.0; 2]], SymmetryNorm::Frobenius).is_err());
        assert!(symmetry_score(&[], SymmetryNorm::Frobenius).is_err());
    }

    #[test]
    fn shared_ids_of_gain_matrix() {
        let g = GainMatrix::from_means(
            &["a", "b", "c", "only_model"],
            &["a", "b", "c"],
            &[
                vec![Some(0.0), Some(2.0), Some(5.0)],
                vec![Some(0.0), Some(0.0), None],
                vec![Some(1.0), Some(7.0), Some(0.0)],
                vec![Some(9.0), Some(9.0), Some(9.0)],
            ],
        )
        .unwrap();
        let r = symmetry_of_gains(&g, SymmetryNorm::Frobenius).unwrap();
        assert_eq!(r.ids, ["a", "b", "c"]);
        // pair (b, c) is dropped; what remains is [[0,2,5],[0,0,0],[1,0,0]]
        assert_eq!(r.excluded_pairs, 1);
        let direct = symmetry_score(
            &[vec![0.0, 2.0, 5.0], vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]],
            SymmetryNorm::Frobenius,
        )
        .unwrap();
        assert_eq!(r.s, direct.s);
    }
}
