//! Correlation, one-way ANOVA and permutation tests.
//!
//! p-values are permutation p-values, `(1 + #{permuted >= observed}) /
//! (1 + n_perm)`, so they never reach zero and need no distribution
//! functions. Correlation tests are two-sided (the statistic is `|r|`); the
//! ANOVA test uses F directly. Replicate `i` draws from its own
//! [`rng::stream`], which makes p-values independent of the thread count.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gain::GainMatrix;
use crate::rng::{self, Domain};

pub const DEFAULT_PERMUTATIONS: usize = 10_000;
pub const MIN_PERMUTATIONS: usize = 100;

/// Relative slack when comparing a permuted statistic with the observed one,
/// so that ties that differ only by rounding count as ties.
const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationSettings {
    pub n_perm: usize,
    pub seed: u64,
}

impl Default for PermutationSettings {
    fn default() -> Self {
        PermutationSettings {
            n_perm: DEFAULT_PERMUTATIONS,
            seed: 0,
        }
    }
}

impl PermutationSettings {
    pub fn new(n_perm: usize, seed: u64) -> Self {
        PermutationSettings { n_perm, seed }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationMethod {
    Pearson,
    Spearman,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub method: CorrelationMethod,
    pub coefficient: f64,
    pub n: usize,
    pub p_value: f64,
    pub p_method: String,
    pub n_perm: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaResult {
    pub f_statistic: f64,
    pub df_between: usize,
    pub df_within: usize,
    pub ss_between: f64,
    pub ss_within: f64,
    pub p_value: f64,
    pub group_means: BTreeMap<String, f64>,
    pub n_perm: usize,
    pub seed: u64,
}

fn ge_tol(value: f64, observed: f64) -> bool {
    value >= observed - TIE_TOLERANCE * observed.abs().max(1.0)
}

/// Permutation p-value of `statistic` on `data`: each replicate shuffles a
/// copy of `data` and re-evaluates the statistic.
pub fn permutation_p<T, F>(data: &[T], statistic: F, n_perm: usize, seed: u64) -> Result<f64>
where
    T: Clone + Send + Sync,
    F: Fn(&[T]) -> f64 + Sync,
{
    if n_perm < MIN_PERMUTATIONS {
        return Err(Error::InvalidArgument(format!(
            "n_perm must be at least {MIN_PERMUTATIONS}, got {n_perm}"
        )));
    }
    let observed = statistic(data);
    let hits = (0..n_perm)
        .into_par_iter()
        .map_init(
            || data.to_vec(),
            |buf, r| {
                buf.clone_from_slice(data);
                let mut rng = rng::stream(seed, Domain::Permutation, r as u64);
                buf.shuffle(&mut rng);
                ge_tol(statistic(buf), observed)
            },
        )
        .filter(|&hit| hit)
        .count();
    Ok((1 + hits) as f64 / (1 + n_perm) as f64)
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "correlation needs at least 3 pairs, got {}",
            x.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite value in correlation input".into()));
    }
    for (name, v) in [("x", x), ("y", y)] {
        if v.iter().all(|&a| a == v[0]) {
            return Err(Error::UndefinedCorrelation(format!("{name} is constant")));
        }
    }
    Ok(())
}

fn centered(v: &[f64]) -> Vec<f64> {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|a| a - m).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Sample Pearson coefficient.
pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    let (xc, yc) = (centered(x), centered(y));
    Ok(r_from_centered(&xc, &yc))
}

fn r_from_centered(xc: &[f64], yc: &[f64]) -> f64 {
    (dot(xc, yc) / (dot(xc, xc) * dot(yc, yc)).sqrt()).clamp(-1.0, 1.0)
}

/// Mid-ranks (1-based); tied values share the mean of their positions.
pub fn ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && v[order[end]] == v[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            out[i] = rank;
        }
        start = end;
    }
    out
}

/// Spearman coefficient: Pearson over mid-ranks.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    Ok(r_from_centered(&centered(&ranks(x)), &centered(&ranks(y))))
}

fn correlation_test(
    method: CorrelationMethod,
    x: &[f64],
    y: &[f64],
    perm: &PermutationSettings,
) -> Result<CorrelationResult> {
    check_pair(x, y)?;
    let (xc, yc) = match method {
        CorrelationMethod::Pearson => (centered(x), centered(y)),
        CorrelationMethod::Spearman => (centered(&ranks(x)), centered(&ranks(y))),
    };
    let coefficient = r_from_centered(&xc, &yc);
    let norm = (dot(&xc, &xc) * dot(&yc, &yc)).sqrt();
    let p_value = permutation_p(&yc, |ys| (dot(&xc, ys) / norm).abs(), perm.n_perm, perm.seed)?;
    Ok(CorrelationResult {
        method,
        coefficient,
        n: x.len(),
        p_value,
        p_method: "permutation".into(),
        n_perm: perm.n_perm,
        seed: perm.seed,
    })
}

pub fn pearson(x: &[f64], y: &[f64], perm: &PermutationSettings) -> Result<CorrelationResult> {
    correlation_test(CorrelationMethod::Pearson, x, y, perm)
}

pub fn spearman(x: &[f64], y: &[f64], perm: &PermutationSettings) -> Result<CorrelationResult> {
    correlation_test(CorrelationMethod::Spearman, x, y, perm)
}

pub fn correlate(
    method: CorrelationMethod,
    x: &[f64],
    y: &[f64],
    perm: &PermutationSettings,
) -> Result<CorrelationResult> {
    correlation_test(method, x, y, perm)
}

/// Between- and within-group sums of squares of `values` split into
/// consecutive groups of the given sizes.
fn sums_of_squares(values: &[f64], sizes: &[usize]) -> (f64, f64, Vec<f64>) {
    let grand = values.iter().sum::<f64>() / values.len() as f64;
    let mut ss_between = 0.0;
    let mut ss_within = 0.0;
    let mut means = Vec::with_capacity(sizes.len());
    let mut offset = 0;
    for &n in sizes {
        let group = &values[offset..offset + n];
        let m = group.iter().sum::<f64>() / n as f64;
        ss_between += n as f64 * (m - grand).powi(2);
        ss_within += group.iter().map(|v| (v - m).powi(2)).sum::<f64>();
        means.push(m);
        offset += n;
    }
    (ss_between, ss_within, means)
}

fn f_ratio(ss_between: f64, ss_within: f64, df_between: usize, df_within: usize) -> f64 {
    if ss_within == 0.0 {
        return if ss_between > 0.0 { f64::INFINITY } else { 0.0 };
    }
    (ss_between / df_between as f64) / (ss_within / df_within as f64)
}

/// Classical one-way ANOVA F with a permutation p-value over group labels.
pub fn anova_oneway(
    groups: &BTreeMap<String, Vec<f64>>,
    perm: &PermutationSettings,
) -> Result<AnovaResult> {
    if groups.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "ANOVA needs at least 2 groups, got {}",
            groups.len()
        )));
    }
    for (name, g) in groups {
        if g.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "group `{name}` has {} value(s); ANOVA needs at least 2 per group",
                g.len()
            )));
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite value in group `{name}`")));
        }
    }
    let sizes: Vec<usize> = groups.values().map(Vec::len).collect();
    let values: Vec<f64> = groups.values().flatten().copied().collect();
    let k = sizes.len();
    let n = values.len();
    let (ss_between, ss_within, means) = sums_of_squares(&values, &sizes);
    let ss_total = ss_between + ss_within;
    if ss_total == 0.0 || ss_within <= 1e-14 * ss_total {
        return Err(Error::Degenerate("within-group variance is zero".into()));
    }
    let (df_between, df_within) = (k - 1, n - k);
    let f_statistic = f_ratio(ss_between, ss_within, df_between, df_within);
    let p_value = permutation_p(
        &values,
        |v| {
            let (b, w, _) = sums_of_squares(v, &sizes);
            f_ratio(b, w, df_between, df_within)
        },
        perm.n_perm,
        perm.seed,
    )?;
    Ok(AnovaResult {
        f_statistic,
        df_between,
        df_within,
        ss_between,
        ss_within,
        p_value,
        group_means: groups.keys().cloned().zip(means).collect(),
        n_perm: perm.n_perm,
        seed: perm.seed,
    })
}

/// Permute all present gains uniformly (Fisher-Yates over the flattened
/// present cells); the missing mask is kept.
pub fn shuffle_gains(g: &GainMatrix, seed: u64) -> GainMatrix {
    shuffle_gains_indexed(g, seed, 0)
}

/// Replicate `index` of a shuffle sequence keyed by `seed`.
pub fn shuffle_gains_indexed(g: &GainMatrix, seed: u64, index: u64) -> GainMatrix {
    let mut rng = rng::stream(seed, Domain::Shuffle, index);
    let mut present: Vec<_> = g.cells().iter().flatten().copied().collect();
    present.shuffle(&mut rng);
    let mut it = present.into_iter();
    let cells = g
        .cells()
        .iter()
        .map(|c| c.and_then(|_| it.next()))
        .collect();
    g.with_cells(cells).expect("same shape as the input")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn perm() -> PermutationSettings {
        PermutationSettings::new(999, 1)
    }

    #[test]
    fn pearson_examples() {
        assert_abs_diff_eq!(pearson_r(&[1., 2., 3.], &[2., 4., 6.]).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(pearson_r(&[1., 2., 3.], &[3., 2., 1.]).unwrap(), -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(pearson_r(&[1., 2., 3., 4.], &[1., 3., 2., 4.]).unwrap(), 0.8, epsilon = 1e-15);
    }

    #[test]
    fn pearson_errors() {
        assert!(matches!(pearson_r(&[1., 2., 3.], &[1., 2.]), Err(Error::LengthMismatch(3, 2))));
        assert!(matches!(pearson_r(&[1., 1., 1.], &[1., 2., 3.]), Err(Error::UndefinedCorrelation(_))));
        assert!(matches!(pearson_r(&[1., 2.], &[1., 2.]), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn spearman_examples() {
        let x = [1., 2., 3., 4., 5.];
        let y: Vec<f64> = x.iter().map(|v: &f64| v.powi(3) + 2.0).collect();
        assert_abs_diff_eq!(spearman_rho(&x, &y).unwrap(), 1.0, epsilon = 1e-15);
        let rev: Vec<f64> = x.iter().rev().copied().collect();
        assert_abs_diff_eq!(spearman_rho(&x, &rev).unwrap(), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn mid_ranks_for_ties() {
        assert_eq!(ranks(&[1., 2., 2., 4.]), vec![1.0, 2.5, 2.5, 4.0]);
        assert_eq!(ranks(&[3., 3., 3.]), vec![2.0, 2.0, 2.0]);
        assert_eq!(ranks(&[5., -1., 0.]), vec![3.0, 1.0, 2.0]);
    }

    #[test]
    fn correlation_results_carry_p_values() {
        let x: Vec<f64> = (0..20).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let r = pearson(&x, &y, &perm()).unwrap();
        assert_abs_diff_eq!(r.coefficient, 1.0, epsilon = 1e-12);
        assert_eq!(r.p_value, 1.0 / 1000.0);
        assert_eq!(r.n, 20);
        let s = spearman(&x, &y, &perm()).unwrap();
        assert_eq!(s.method, CorrelationMethod::Spearman);
        assert_eq!(s.p_value, 1.0 / 1000.0);
    }

    #[test]
    fn anova_examples() {
        let g = |a: &[f64], b: &[f64]| -> BTreeMap<String, Vec<f64>> {
            [("a".to_string(), a.to_vec()), ("b".to_string(), b.to_vec())].into()
        };
        let r = anova_oneway(&g(&[1., 2., 3.], &[1., 2., 3.]), &perm()).unwrap();
        assert_eq!(r.f_statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert_eq!((r.df_between, r.df_within), (1, 4));

        let r = anova_oneway(&g(&[1., 2.], &[3., 4.]), &perm()).unwrap();
        assert_abs_diff_eq!(r.ss_between, 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.ss_within, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.f_statistic, 8.0, epsilon = 1e-12);
        assert_eq!(r.group_means["b"], 3.5);

        assert!(matches!(anova_oneway(&g(&[0., 0.], &[10., 10.]), &perm()), Err(Error::Degenerate(_))));
        assert!(matches!(anova_oneway(&g(&[1.], &[3., 4.]), &perm()), Err(Error::InsufficientData(_))));
        let single: BTreeMap<String, Vec<f64>> = [("a".to_string(), vec![1., 2.])].into();
        assert!(anova_oneway(&single, &perm()).is_err());
    }

    #[test]
    fn permutation_p_boundaries() {
        // Identity ordering is the unique maximum of this statistic.
        let data: Vec<f64> = (0..12).map(f64::from).collect();
        let stat = |v: &[f64]| v.iter().enumerate().map(|(i, x)| i as f64 * x).sum::<f64>();
        assert_eq!(permutation_p(&data, stat, 999, 3).unwrap(), 1.0 / 1000.0);

        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let data = [0.1, 0.7, 1e-3, 12.5, -3.3];
        assert_eq!(permutation_p(&data, mean, 500, 3).unwrap(), 1.0);

        let noisy = [0.3, -1.2, 0.8, 2.0, -0.4, 1.1];
        let first = |v: &[f64]| v[0];
        let a = permutation_p(&noisy, first, 1000, 11).unwrap();
        assert_eq!(a, permutation_p(&noisy, first, 1000, 11).unwrap());

        assert!(permutation_p(&noisy, first, 99, 11).is_err());
    }

    #[test]
    fn shuffle_examples() {
        let one = GainMatrix::from_dense(&["m"], &["t"], &[vec![4.2]]).unwrap();
        assert_eq!(shuffle_gains(&one, 5), one);

        let g = GainMatrix::from_means(
            &["a", "b", "c"],
            &["x", "y"],
            &[vec![Some(1.0), None], vec![Some(2.0), Some(3.0)], vec![None, Some(4.0)]],
        )
        .unwrap();
        let s = shuffle_gains(&g, 9);
        assert_eq!(s, shuffle_gains(&g, 9));
        let mask = |m: &GainMatrix| m.cells().iter().map(Option::is_some).collect::<Vec<_>>();
        assert_eq!(mask(&s), mask(&g));
        let mut before: Vec<f64> = g.cells().iter().flatten().map(|c| c.mean).collect();
        let mut after: Vec<f64> = s.cells().iter().flatten().map(|c| c.mean).collect();
        before.sort_by(f64::total_cmp);
        after.sort_by(f64::total_cmp);
        assert_eq!(before, after);
    }

    proptest! {
        #[test]
        fn pearson_affine_is_plus_minus_one(
            x in prop::collection::vec(-100.0f64..100.0, 3..30),
            a in 0.01f64..50.0,
            b in -50.0f64..50.0,
        ) {
            prop_assume!(x.iter().any(|v| *v != x[0]));
            let up: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            let down: Vec<f64> = x.iter().map(|v| -a * v + b).collect();
            prop_assert!((pearson_r(&x, &up).unwrap() - 1.0).abs() < 1e-12);
            prop_assert!((pearson_r(&x, &down).unwrap() + 1.0).abs() < 1e-12);
        }

        #[test]
        fn spearman_monotone_invariance(
            x in prop::collection::vec(-10.0f64..10.0, 3..25),
            y in prop::collection::vec(-10.0f64..10.0, 3..25),
        ) {
            let n = x.len().min(y.len());
            let (x, y) = (&x[..n], &y[..n]);
            prop_assume!(x.iter().any(|v| *v != x[0]) && y.iter().any(|v| *v != y[0]));
            let r = spearman_rho(x, y).unwrap();
            let tx: Vec<f64> = x.iter().map(|v| v.exp()).collect();
            let ty: Vec<f64> = y.iter().map(|v| v * v * v + 3.0 * v).collect();
            prop_assert!((spearman_rho(&tx, &ty).unwrap() - r).abs() < 1e-12);
        }

        #[test]
        fn shuffle_preserves_multiset(
            vals in prop::collection::vec(prop::option::of(-20.0f64..20.0), 6),
            seed in any::<u64>(),
        ) {
            let rows: Vec<Vec<Option<f64>>> = vals.chunks(3).map(|c| c.to_vec()).collect();
            let g = GainMatrix::from_means(&["a", "b"], &["x", "y", "z"], &rows).unwrap();
            let s = shuffle_gains(&g, seed);
            let mut a: Vec<f64> = g.cells().iter().flatten().map(|c| c.mean).collect();
            let mut b: Vec<f64> = s.cells().iter().flatten().map(|c| c.mean).collect();
            a.sort_by(f64::total_cmp);
            b.sort_by(f64::total_cmp);
            prop_assert_eq!(a, b);
        }
    }
}
