//! Synthetic score tables drawn from the decomposition model, with the
//! generating parameters returned as ground truth.
//!
//! `score(m_i, t_j, seed) = baseline_level + (b_i + t_j) * t'_j + noise` and
//! baseline runs score `baseline_level + noise`, with Gaussian noise of
//! standard deviation `noise_std`. Scores are clamped to `[0, 100]` and
//! clamp events are counted.


use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::decomposition::{DecompositionModel, FitKind, Parameters};
use crate::error::{Error, Result};
use crate::rng::{self, Domain};
use crate::table::{BaselineRecord, MetaValue, Metadata, ScoreRecord, ScoreTable};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub n_models: usize,
    pub n_targets: usize,
    pub n_seeds: usize,
    pub b_range: (f64, f64),
    pub t_range: (f64, f64),
    pub t_prime_range: (f64, f64),
    pub noise_std: f64,
    pub baseline_level: f64,
    pub seed: u64,
    /// Name models and targets from one id pool (`d00`, `d01`, ...), as when
    /// every dataset serves both as source and target.
    pub shared_ids: bool,
    /// Assign round-robin `group` labels `G1..Gk` in the metadata (0 = none).
    pub n_groups: usize,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        GeneratorSpec {
            n_models: 22,
            n_targets: 22,
            n_seeds: 5,
            b_range: (-3.0, 3.0),
            t_range: (-2.0, 2.0),
            t_prime_range: (0.5, 2.0),
            noise_std: 0.5,
            baseline_level: 70.0,
            seed: 0,
            shared_ids: false,
            n_groups: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedTable {
    pub table: ScoreTable,
    /// Generating parameters in canonical gauge.
    pub truth: DecompositionModel,
    pub clamp_events: usize,
}

fn ids(prefix: &str, n: usize) -> Vec<String> {
    let width = n.saturating_sub(1).to_string().len().max(2);
    (0..n).map(|i| format!("{prefix}{i:0width$}")).collect()
}

fn uniform(rng: &mut impl Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

fn check(spec: &GeneratorSpec) -> Result<()> {
    if spec.n_models == 0 || spec.n_targets == 0 || spec.n_seeds == 0 {
        return Err(Error::InvalidArgument("model, target and seed counts must be at least 1".into()));
    }
    if !(spec.noise_std >= 0.0 && spec.noise_std.is_finite()) {
        return Err(Error::InvalidArgument(format!("invalid noise_std {}", spec.noise_std)));
    }
    for (name, (lo, hi)) in [("b", spec.b_range), ("t", spec.t_range), ("t'", spec.t_prime_range)] {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidArgument(format!("invalid {name} range ({lo}, {hi})")));
        }
    }
    if !spec.baseline_level.is_finite() {
        return Err(Error::InvalidArgument("baseline level must be finite".into()));
    }
    Ok(())
}

pub fn generate(spec: &GeneratorSpec) -> Result<GeneratedTable> {
    check(spec)?;
    let mut rng = rng::stream(spec.seed, Domain::Generator, 0);
    let (model_ids, target_ids) = if spec.shared_ids {
        (ids("d", spec.n_models), ids("d", spec.n_targets))
    } else {
        (ids("m", spec.n_models), ids("t", spec.n_targets))
    };

    let mut params = Parameters {
        b: (0..spec.n_models).map(|_| uniform(&mut rng, spec.b_range)).collect(),
        t: (0..spec.n_targets).map(|_| uniform(&mut rng, spec.t_range)).collect(),
        t_prime: (0..spec.n_targets)
            .map(|_| uniform(&mut rng, spec.t_prime_range))
            .collect(),
    };
    let noise = Normal::new(0.0, spec.noise_std).expect("validated noise");
    let mut clamp_events = 0;
    let mut draw = |mean: f64, rng: &mut rand_chacha::ChaCha8Rng| {
        let raw = mean + if spec.noise_std > 0.0 { noise.sample(rng) } else { 0.0 };
        let clamped = raw.clamp(0.0, 100.0);
        if clamped != raw {
            clamp_events += 1;
        }
        clamped
    };

    let mut baselines = Vec::with_capacity(spec.n_targets * spec.n_seeds);
    for t in &target_ids {
        for seed in 0..spec.n_seeds as u64 {
            baselines.push(BaselineRecord {
                target_id: t.clone(),
                seed,
                score: draw(spec.baseline_level, &mut rng),
            });
        }
    }
    let mut records = Vec::with_capacity(spec.n_models * spec.n_targets * spec.n_seeds);
    for (i, m) in model_ids.iter().enumerate() {
        for (j, t) in target_ids.iter().enumerate() {
            let mean = spec.baseline_level + params.predict(i, j);
            for seed in 0..spec.n_seeds as u64 {
                records.push(ScoreRecord {
                    model_id: m.clone(),
                    target_id: t.clone(),
                    seed,
                    score: draw(mean, &mut rng),
                });
            }
        }
    }
    let total = records.len() + baselines.len();
    if clamp_events == total {
        return Err(Error::Degenerate(
            "every generated score was clamped to [0, 100]".into(),
        ));
    }

    let mut metadata = Metadata::new();
    let mut put = |id: &str, key: &str, v: MetaValue| {
        metadata.entry(id.to_string()).or_default().insert(key.to_string(), v);
    };
    if spec.n_groups > 0 {
        for (k, id) in model_ids.iter().chain(&target_ids).enumerate() {
            let idx = if k < model_ids.len() { k } else { k - model_ids.len() };
            put(id, "group", MetaValue::Text(format!("G{}", idx % spec.n_groups + 1)));
        }
    }

    let canonicalization = params.canonicalize();
    for (i, id) in model_ids.iter().enumerate() {
        put(id, "true_b", MetaValue::Number(params.b[i]));
    }
    for (j, id) in target_ids.iter().enumerate() {
        put(id, "true_t", MetaValue::Number(params.t[j]));
        put(id, "true_t_prime", MetaValue::Number(params.t_prime[j]));
    }

    let truth = DecompositionModel {
        kind: FitKind::Bilinear,
        model_ids: model_ids.clone(),
        target_ids: target_ids.clone(),
        b: params.b,
        t: params.t,
        t_prime: params.t_prime,
        mse: 0.0,
        n_cells: spec.n_models * spec.n_targets,
        iterations: 0,
        converged: true,
        restart: 0,
        canonicalization,
        raw: None,
    };
    Ok(GeneratedTable {
        table: ScoreTable::new(records, baselines).with_metadata(metadata),
        truth,
        clamp_events,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gain::compute_gains;
    use crate::ingest::validate;

    fn small(noise_std: f64, seed: u64) -> GeneratorSpec {
        GeneratorSpec {
            n_models: 4,
            n_targets: 3,
            n_seeds: 2,
            noise_std,
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn noiseless_gains_equal_model_predictions() {
        let g = generate(&small(0.0, 1)).unwrap();
        assert!(validate(&g.table).is_empty());
        let gains = compute_gains(&g.table).unwrap();
        for i in 0..4 {
            for j in 0..3 {
                let expected = g.truth.predict(i, j);
                assert!((gains.mean(i, j).unwrap() - expected).abs() < 1e-9);
            }
        }
        assert_eq!(g.clamp_events, 0);
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(generate(&small(0.5, 3)).unwrap(), generate(&small(0.5, 3)).unwrap());
        assert_ne!(generate(&small(0.5, 3)).unwrap().table, generate(&small(0.5, 4)).unwrap().table);
    }

    #[test]
    fn truth_is_canonical() {
        let g = generate(&GeneratorSpec::default()).unwrap();
        let mb = g.truth.b.iter().sum::<f64>() / 22.0;
        let mtp = g.truth.t_prime.iter().sum::<f64>() / 22.0;
        assert!(mb.abs() < 1e-9 && (mtp - 1.0).abs() < 1e-9);
        assert_eq!(g.table.records.len(), 22 * 22 * 5);
        assert_eq!(g.table.baselines.len(), 22 * 5);
    }

    #[test]
    fn clamping_is_counted_and_total_clamping_rejected() {
        let spec = GeneratorSpec { baseline_level: 99.0, ..small(0.0, 2) };
        let g = generate(&spec).unwrap();
        assert!(g.clamp_events > 0);
        assert!(g.table.records.iter().all(|r| (0.0..=100.0).contains(&r.score)));

        let spec = GeneratorSpec { baseline_level: 500.0, ..small(0.0, 2) };
        assert!(matches!(generate(&spec), Err(Error::Degenerate(_))));
    }

    #[test]
    fn shared_ids_and_groups() {
        let spec = GeneratorSpec { shared_ids: true, n_groups: 2, ..small(0.1, 5) };
        let g = generate(&spec).unwrap();
        assert_eq!(g.truth.model_ids[..3], g.truth.target_ids[..]);
        assert_eq!(g.table.metadata["d01"]["group"], MetaValue::Text("G2".into()));
    }

    #[test]
    fn invalid_specs() {
        assert!(generate(&GeneratorSpec { n_seeds: 0, ..Default::default() }).is_err());
        assert!(generate(&GeneratorSpec { noise_std: -1.0, ..Default::default() }).is_err());
    }
}
