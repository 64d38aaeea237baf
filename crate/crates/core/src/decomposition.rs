//! Source/target decomposition of a gain matrix.
//!
//! The bilinear model predicts `gain(i, j) = (b[i] + t[j]) * t_prime[j]`:
//! `b` scores base-model quality, `t` is a per-target offset and `t_prime` a
//! per-target sensitivity. It has `N + 2n` parameters for `N * n` cells, so it
//! cannot memorize source/target interactions.
//!
//! The parameters are only defined up to `b -> b + c, t -> t - c` and
//! `(b, t, t_prime) -> (a b, a t, t_prime / a)`. Every returned model is
//! canonicalized to `mean(b) = 0, mean(t_prime) = 1`.
//!
//! Fitting minimizes the mean squared error over present cells with
//! deterministic full-batch gradient descent. The restricted models
//! (`b` only, `t` only) have closed forms: row and column means.

use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gain::GainMatrix;
use crate::rng::{self, Domain};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum FitKind {
    Bilinear,
    BaseOnly,
    TargetOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitSettings {
    /// Initial step size. A step that raises the loss is undone and the
    /// step size halved.
    pub lr: f64,
    pub max_iters: usize,
    /// Stop once the MSE improves by less than `tol` for `patience`
    /// consecutive steps.
    pub tol: f64,
    pub patience: usize,
    pub restarts: usize,
    /// Spread of the initial perturbation for restarts after the first. `b`
    /// and `t` get normal noise in units of the gains' standard deviation,
    /// `t'` is drawn log-normal with this sigma.
    pub init_scale: f64,
    /// Also descend from the two restricted closed-form fits, so the result
    /// is never worse than either of them.
    pub warm_start: bool,
    pub seed: u64,
    /// Keep the pre-canonicalization parameters in the output.
    pub keep_raw: bool,
}

impl Default for FitSettings {
    fn default() -> Self {
        FitSettings {
            lr: 0.5,
            max_iters: 200_000,
            tol: 1e-12,
            patience: 100,
            restarts: 5,
            init_scale: 0.2,
            warm_start: true,
            seed: 0,
            keep_raw: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    pub b: Vec<f64>,
    pub t: Vec<f64>,
    pub t_prime: Vec<f64>,
}

impl Parameters {
    pub fn initial(n_models: usize, n_targets: usize) -> Self {
        Parameters {
            b: vec![0.0; n_models],
            t: vec![0.0; n_targets],
            t_prime: vec![1.0; n_targets],
        }
    }

    pub fn predict(&self, model: usize, target: usize) -> f64 {
        (self.b[model] + self.t[target]) * self.t_prime[target]
    }

    /// Map onto the gauge representative with `mean(b) = 0` and
    /// `mean(t_prime) = 1`.
    pub fn canonicalize(&mut self) -> Canonicalization {
        let shift = mean(&self.b);
        self.b.iter_mut().for_each(|b| *b -= shift);
        self.t.iter_mut().for_each(|t| *t += shift);
        let scale = mean(&self.t_prime);
        let scale_applied = scale.abs() > 1e-12;
        if scale_applied {
            self.b.iter_mut().for_each(|b| *b *= scale);
            self.t.iter_mut().for_each(|t| *t *= scale);
            self.t_prime.iter_mut().for_each(|tp| *tp /= scale);
        }
        Canonicalization {
            shift,
            scale,
            scale_applied,
        }
    }
}

/// The gauge transform that was applied: `b -= shift, t += shift`, then
/// `b, t *= scale, t_prime /= scale` when `scale_applied`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Canonicalization {
    pub shift: f64,
    pub scale: f64,
    pub scale_applied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionModel {
    pub kind: FitKind,
    pub model_ids: Vec<String>,
    pub target_ids: Vec<String>,
    pub b: Vec<f64>,
    pub t: Vec<f64>,
    pub t_prime: Vec<f64>,
    pub mse: f64,
    pub n_cells: usize,
    pub iterations: usize,
    pub converged: bool,
    /// Index of the run whose result was kept: `0` starts from `b = t = 0,
    /// t' = 1`, `1..restarts` from random points, then the base-only and
    /// target-only warm starts.
    pub restart: usize,
    pub canonicalization: Canonicalization,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub raw: Option<Parameters>,
}

impl DecompositionModel {
    pub fn parameters(&self) -> Parameters {
        Parameters {
            b: self.b.clone(),
            t: self.t.clone(),
            t_prime: self.t_prime.clone(),
        }
    }

    pub fn predict(&self, model: usize, target: usize) -> f64 {
        (self.b[model] + self.t[target]) * self.t_prime[target]
    }

    pub fn predictions(&self) -> Vec<Vec<f64>> {
        (0..self.b.len())
            .map(|i| (0..self.t.len()).map(|j| self.predict(i, j)).collect())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineComparison {
    pub kind: FitKind,
    pub fitted_mse: f64,
    pub shuffled_mse_mean: f64,
    /// Population standard deviation of the shuffled MSEs.
    pub shuffled_mse_std: f64,
    pub shuffled_mses: Vec<f64>,
    pub n_shuffles: usize,
    pub seed: u64,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Present cells as `(model, target, gain)`.
/// Row-major gains with a 0/1 weight per cell; missing cells hold 0 with
/// weight 0.
struct Cells {
    n_targets: usize,
    values: Vec<f64>,
    weights: Vec<f64>,
    n_present: usize,
}

impl Cells {
    fn of(g: &GainMatrix) -> Self {
        let n_targets = g.n_targets();
        let mut values = vec![0.0; g.n_models() * n_targets];
        let mut weights = vec![0.0; values.len()];
        for i in 0..g.n_models() {
            for (j, v) in g.row(i) {
                values[i * n_targets + j] = v;
                weights[i * n_targets + j] = 1.0;
            }
        }
        Cells {
            n_targets,
            n_present: g.n_present(),
            values,
            weights,
        }
    }

    fn present(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().zip(&self.weights).filter(|(_, &w)| w > 0.0).map(|(&v, _)| v)
    }
}

fn check_fittable(g: &GainMatrix) -> Result<()> {
    if g.n_models() < 2 || g.n_targets() < 2 {
        return Err(Error::Degenerate(format!(
            "decomposition needs at least 2 models and 2 targets, got {}x{}",
            g.n_models(),
            g.n_targets()
        )));
    }
    for (i, id) in g.model_ids().iter().enumerate() {
        if g.row(i).next().is_none() {
            return Err(Error::Degenerate(format!("model `{id}` has no gains")));
        }
    }
    for (j, id) in g.target_ids().iter().enumerate() {
        if g.column(j).next().is_none() {
            return Err(Error::Degenerate(format!("target `{id}` has no gains")));
        }
    }
    Ok(())
}

/// Gradient of the MSE with respect to every parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub b: Vec<f64>,
    pub t: Vec<f64>,
    pub t_prime: Vec<f64>,
}

/// MSE of `p` over the present cells of `g`.
pub fn mse(g: &GainMatrix, p: &Parameters) -> f64 {
    mse_of(&Cells::of(g), p)
}

fn mse_of(cells: &Cells, p: &Parameters) -> f64 {
    let mut loss = 0.0;
    for (i, (row, w)) in cells
        .values
        .chunks_exact(cells.n_targets)
        .zip(cells.weights.chunks_exact(cells.n_targets))
        .enumerate()
    {
        for j in 0..cells.n_targets {
            let r = (p.predict(i, j) - row[j]) * w[j];
            loss += r * r;
        }
    }
    loss / cells.n_present as f64
}

/// MSE and its analytic gradient.
pub fn mse_gradient(g: &GainMatrix, p: &Parameters) -> (f64, Gradient) {
    let mut grad = Gradient {
        b: vec![0.0; p.b.len()],
        t: vec![0.0; p.t.len()],
        t_prime: vec![0.0; p.t_prime.len()],
    };
    let loss = accumulate(&Cells::of(g), p, &mut grad);
    (loss, grad)
}

fn accumulate(cells: &Cells, p: &Parameters, grad: &mut Gradient) -> f64 {
    let nt = cells.n_targets;
    let (t, tp) = (&p.t[..nt], &p.t_prime[..nt]);
    let (gt, gtp) = (&mut grad.t[..nt], &mut grad.t_prime[..nt]);
    gt.iter_mut().for_each(|x| *x = 0.0);
    gtp.iter_mut().for_each(|x| *x = 0.0);
    let mut loss = 0.0;
    for ((row, w), (bi, gb)) in cells
        .values
        .chunks_exact(nt)
        .zip(cells.weights.chunks_exact(nt))
        .zip(p.b.iter().zip(grad.b.iter_mut()))
    {
        let (row, w) = (&row[..nt], &w[..nt]);
        let mut sum_b = 0.0;
        for j in 0..nt {
            let base = bi + t[j];
            let r = (base * tp[j] - row[j]) * w[j];
            loss += r * r;
            let rs = r * tp[j];
            sum_b += rs;
            gt[j] += rs;
            gtp[j] += r * base;
        }
        *gb = sum_b;
    }
    let n = cells.n_present as f64;
    let k = 2.0 / n;
    grad.b.iter_mut().for_each(|x| *x *= k);
    gt.iter_mut().for_each(|x| *x *= k);
    gtp.iter_mut().for_each(|x| *x *= k);
    loss / n
}

struct Descent {
    params: Parameters,
    mse: f64,
    iterations: usize,
    converged: bool,
}

fn descend(cells: &Cells, mut p: Parameters, s: &FitSettings) -> Descent {
    let zeros = |v: &Vec<f64>| vec![0.0; v.len()];
    let mut grad = Gradient {
        b: zeros(&p.b),
        t: zeros(&p.t),
        t_prime: zeros(&p.t_prime),
    };
    let mut loss = accumulate(cells, &p, &mut grad);
    let mut prev = p.clone();
    let mut prev_grad = grad.clone();
    let mut lr = s.lr;
    let mut stalled = 0;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < s.max_iters {
        prev.clone_from(&p);
        prev_grad.clone_from(&grad);
        for (x, d) in p.b.iter_mut().zip(&grad.b) {
            *x -= lr * d;
        }
        for (x, d) in p.t.iter_mut().zip(&grad.t) {
            *x -= lr * d;
        }
        for (x, d) in p.t_prime.iter_mut().zip(&grad.t_prime) {
            *x -= lr * d;
        }
        iterations += 1;
        let next = accumulate(cells, &p, &mut grad);
        // A step that raises the loss is undone and retried at half the rate.
        if !(next <= loss) {
            p.clone_from(&prev);
            grad.clone_from(&prev_grad);
            lr *= 0.5;
            if lr < s.lr * 1e-12 {
                break;
            }
            continue;
        }
        if loss - next < s.tol {
            stalled += 1;
            if stalled >= s.patience {
                converged = true;
                loss = next;
                break;
            }
        } else {
            stalled = 0;
        }
        loss = next;
    }
    Descent {
        params: p,
        mse: loss,
        iterations,
        converged,
    }
}

fn starting_point(g: &GainMatrix, cells: &Cells, s: &FitSettings, restart: usize) -> Parameters {
    let mut p = Parameters::initial(g.n_models(), g.n_targets());
    if restart == 0 {
        return p;
    }
    let values: Vec<f64> = cells.present().collect();
    let spread = crate::gain::mean_std(&values).1.max(1e-3);
    let mut rng = rng::stream(s.seed, Domain::Restart, restart as u64);
    let noise = Normal::new(0.0, s.init_scale * spread).expect("finite scale");
    let tp_noise = Normal::new(0.0, s.init_scale).expect("finite scale");
    p.b.iter_mut().for_each(|x| *x = noise.sample(&mut rng));
    p.t.iter_mut().for_each(|x| *x = noise.sample(&mut rng));
    p.t_prime
        .iter_mut()
        .for_each(|x| *x = tp_noise.sample(&mut rng).exp());
    p
}

fn finish(
    g: &GainMatrix,
    kind: FitKind,
    mut params: Parameters,
    mse: f64,
    iterations: usize,
    converged: bool,
    restart: usize,
    keep_raw: bool,
) -> DecompositionModel {
    let raw = keep_raw.then(|| params.clone());
    let canonicalization = params.canonicalize();
    DecompositionModel {
        kind,
        model_ids: g.model_ids().to_vec(),
        target_ids: g.target_ids().to_vec(),
        b: params.b,
        t: params.t,
        t_prime: params.t_prime,
        mse,
        n_cells: g.n_present(),
        iterations,
        converged,
        restart,
        canonicalization,
        raw,
    }
}

/// Fit `(b_i + t_j) * t'_j` by gradient descent, keeping the best of
/// `settings.restarts` runs plus the warm starts (ties go to the lowest
/// index).
pub fn fit_bilinear(g: &GainMatrix, settings: &FitSettings) -> Result<DecompositionModel> {
    check_fittable(g)?;
    if settings.restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be at least 1".into()));
    }
    if !(settings.lr > 0.0 && settings.lr.is_finite()) {
        return Err(Error::InvalidArgument(format!("invalid learning rate {}", settings.lr)));
    }
    let cells = Cells::of(g);
    let mut starts: Vec<Parameters> = (0..settings.restarts)
        .map(|r| starting_point(g, &cells, settings, r))
        .collect();
    if settings.warm_start {
        starts.push(base_only_params(g));
        starts.push(target_only_params(g));
    }
    let runs: Vec<Descent> = starts
        .into_par_iter()
        .map(|p| descend(&cells, p, settings))
        .collect();
    let (restart, best) = runs
        .into_iter()
        .enumerate()
        .reduce(|a, b| if b.1.mse < a.1.mse { b } else { a })
        .expect("at least one restart");
    Ok(finish(
        g,
        FitKind::Bilinear,
        best.params,
        best.mse,
        best.iterations,
        best.converged,
        restart,
        settings.keep_raw,
    ))
}

fn base_only_params(g: &GainMatrix) -> Parameters {
    let mut p = Parameters::initial(g.n_models(), g.n_targets());
    for (i, b) in p.b.iter_mut().enumerate() {
        let row: Vec<f64> = g.row(i).map(|(_, v)| v).collect();
        *b = mean(&row);
    }
    p
}

fn target_only_params(g: &GainMatrix) -> Parameters {
    let mut p = Parameters::initial(g.n_models(), g.n_targets());
    for (j, t) in p.t.iter_mut().enumerate() {
        let col: Vec<f64> = g.column(j).map(|(_, v)| v).collect();
        *t = mean(&col);
    }
    p
}

/// `gain(i, j) = b_i` with `b_i` the row mean of present gains.
pub fn fit_base_only(g: &GainMatrix) -> Result<DecompositionModel> {
    check_fittable(g)?;
    let p = base_only_params(g);
    let loss = mse(g, &p);
    Ok(finish(g, FitKind::BaseOnly, p, loss, 0, true, 0, false))
}

/// `gain(i, j) = t_j` with `t_j` the column mean of present gains.
pub fn fit_target_only(g: &GainMatrix) -> Result<DecompositionModel> {
    check_fittable(g)?;
    let p = target_only_params(g);
    let loss = mse(g, &p);
    Ok(finish(g, FitKind::TargetOnly, p, loss, 0, true, 0, false))
}

pub fn fit(g: &GainMatrix, kind: FitKind, settings: &FitSettings) -> Result<DecompositionModel> {
    match kind {
        FitKind::Bilinear => fit_bilinear(g, settings),
        FitKind::BaseOnly => fit_base_only(g),
        FitKind::TargetOnly => fit_target_only(g),
    }
}

/// Fit `kind` on `g` and on `n_shuffles` uniformly shuffled copies of it.
/// Shuffle `i` draws from stream `i` of `seed`.
pub fn shuffled_baseline(
    g: &GainMatrix,
    kind: FitKind,
    n_shuffles: usize,
    seed: u64,
    settings: &FitSettings,
) -> Result<BaselineComparison> {
    if n_shuffles < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 shuffles, got {n_shuffles}"
        )));
    }
    let fitted_mse = fit(g, kind, settings)?.mse;
    let shuffled_mses = (0..n_shuffles)
        .into_par_iter()
        .map(|i| {
            let shuffled = stats::shuffle_gains_indexed(g, seed, i as u64);
            fit(&shuffled, kind, settings).map(|m| m.mse)
        })
        .collect::<Result<Vec<f64>>>()?;
    let (shuffled_mse_mean, shuffled_mse_std) = crate::gain::mean_std(&shuffled_mses);
    Ok(BaselineComparison {
        kind,
        fitted_mse,
        shuffled_mse_mean,
        shuffled_mse_std,
        shuffled_mses,
        n_shuffles,
        seed,
    })
}
