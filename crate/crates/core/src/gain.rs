//! Intertraining gains over the pretrained baseline.
//!
//! A gain is `score(model, target) - score(pretrained, target)` in accuracy
//! points and may be negative. Per-seed gains are taken against the mean of
//! the target's baseline seeds (baseline and model seeds are not paired), and
//! spread is reported as the population standard deviation over seeds with
//! `sem = std / sqrt(n_seeds)`.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest;
use crate::table::ScoreTable;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainCell {
    pub mean: f64,
    pub std: f64,
    pub sem: f64,
    pub n_seeds: u32,
}

impl GainCell {
    /// Cell from per-seed gains.
    pub fn from_samples(samples: &[f64]) -> Option<Self> {
        if samples.is_empty() {
            return None;
        }
        let (mean, std) = mean_std(samples);
        let n = samples.len();
        Some(GainCell {
            mean,
            std,
            sem: std / (n as f64).sqrt(),
            n_seeds: n as u32,
        })
    }

    /// Single-observation cell (no spread information).
    pub fn point(mean: f64) -> Self {
        GainCell {
            mean,
            std: 0.0,
            sem: 0.0,
            n_seeds: 1,
        }
    }
}

/// Population mean and standard deviation. Panics on empty input.
pub(crate) fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Models,
    Targets,
}

/// Which spread measure marks a cell as significantly positive
/// (`mean > 2 * spread`).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SignificanceRule {
    #[default]
    Std,
    Sem,
}

/// Models x targets matrix of mean gains. Missing cells are `None` and are
/// skipped by every aggregate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "GainMatrixRepr", try_from = "GainMatrixRepr")]
pub struct GainMatrix {
    model_ids: Vec<String>,
    target_ids: Vec<String>,
    cells: Vec<Option<GainCell>>,
}

impl GainMatrix {
    pub fn new(
        model_ids: Vec<String>,
        target_ids: Vec<String>,
        cells: Vec<Option<GainCell>>,
    ) -> Result<Self> {
        if model_ids.is_empty() || target_ids.is_empty() {
            return Err(Error::EmptyTable);
        }
        if cells.len() != model_ids.len() * target_ids.len() {
            return Err(Error::LengthMismatch(
                cells.len(),
                model_ids.len() * target_ids.len(),
            ));
        }
        check_unique(&model_ids)?;
        check_unique(&target_ids)?;
        for c in cells.iter().flatten() {
            if !c.mean.is_finite() {
                return Err(Error::InvalidArgument("non-finite gain".into()));
            }
        }
        Ok(GainMatrix {
            model_ids,
            target_ids,
            cells,
        })
    }

    /// Matrix of point gains (one seed, zero spread) given row by row.
    pub fn from_means<S: AsRef<str>>(
        model_ids: &[S],
        target_ids: &[S],
        rows: &[Vec<Option<f64>>],
    ) -> Result<Self> {
        if rows.len() != model_ids.len() {
            return Err(Error::LengthMismatch(rows.len(), model_ids.len()));
        }
        let mut cells = Vec::with_capacity(model_ids.len() * target_ids.len());
        for row in rows {
            if row.len() != target_ids.len() {
                return Err(Error::LengthMismatch(row.len(), target_ids.len()));
            }
            cells.extend(row.iter().map(|v| v.map(GainCell::point)));
        }
        Self::new(to_strings(model_ids), to_strings(target_ids), cells)
    }

    /// Fully populated matrix of point gains.
    pub fn from_dense<S: AsRef<str>>(
        model_ids: &[S],
        target_ids: &[S],
        rows: &[Vec<f64>],
    ) -> Result<Self> {
        let rows: Vec<Vec<Option<f64>>> = rows
            .iter()
            .map(|r| r.iter().copied().map(Some).collect())
            .collect();
        Self::from_means(model_ids, target_ids, &rows)
    }

    pub fn model_ids(&self) -> &[String] {
        &self.model_ids
    }

    pub fn target_ids(&self) -> &[String] {
        &self.target_ids
    }

    pub fn n_models(&self) -> usize {
        self.model_ids.len()
    }

    pub fn n_targets(&self) -> usize {
        self.target_ids.len()
    }

    pub fn ids(&self, axis: Axis) -> &[String] {
        match axis {
            Axis::Models => &self.model_ids,
            Axis::Targets => &self.target_ids,
        }
    }

    pub fn cells(&self) -> &[Option<GainCell>] {
        &self.cells
    }

    pub fn cell(&self, model: usize, target: usize) -> Option<&GainCell> {
        self.cells[model * self.target_ids.len() + target].as_ref()
    }

    pub fn mean(&self, model: usize, target: usize) -> Option<f64> {
        self.cell(model, target).map(|c| c.mean)
    }

    pub fn model_index(&self, id: &str) -> Option<usize> {
        self.model_ids.iter().position(|m| m == id)
    }

    pub fn target_index(&self, id: &str) -> Option<usize> {
        self.target_ids.iter().position(|t| t == id)
    }

    pub fn n_present(&self) -> usize {
        self.cells.iter().filter(|c| c.is_some()).count()
    }

    /// Same ids, different cells (used by shuffling).
    pub fn with_cells(&self, cells: Vec<Option<GainCell>>) -> Result<Self> {
        Self::new(self.model_ids.clone(), self.target_ids.clone(), cells)
    }

    /// Mean gains in row-major order, `None` for missing cells.
    pub fn mean_rows(&self) -> Vec<Vec<Option<f64>>> {
        (0..self.n_models())
            .map(|i| (0..self.n_targets()).map(|j| self.mean(i, j)).collect())
            .collect()
    }

    /// Present gains of one target column as (model index, gain).
    pub fn column(&self, target: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (0..self.n_models()).filter_map(move |i| self.mean(i, target).map(|g| (i, g)))
    }

    /// Present gains of one model row as (target index, gain).
    pub fn row(&self, model: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (0..self.n_targets()).filter_map(move |j| self.mean(model, j).map(|g| (j, g)))
    }

    /// `true` when the cell's mean gain exceeds twice its spread.
    pub fn is_significant(&self, model: usize, target: usize, rule: SignificanceRule) -> bool {
        match self.cell(model, target) {
            Some(c) => {
                let spread = match rule {
                    SignificanceRule::Std => c.std,
                    SignificanceRule::Sem => c.sem,
                };
                c.mean > 2.0 * spread
            }
            None => false,
        }
    }

    /// Matrix with models reordered (or restricted) to `ids`.
    pub fn select_models<S: AsRef<str>>(&self, ids: &[S]) -> Result<Self> {
        let idx = ids
            .iter()
            .map(|id| {
                self.model_index(id.as_ref())
                    .ok_or_else(|| Error::UnknownId(id.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut cells = Vec::with_capacity(idx.len() * self.n_targets());
        for &i in &idx {
            cells.extend((0..self.n_targets()).map(|j| self.cell(i, j).copied()));
        }
        Self::new(to_strings(ids), self.target_ids.clone(), cells)
    }

    /// Matrix with targets reordered (or restricted) to `ids`.
    pub fn select_targets<S: AsRef<str>>(&self, ids: &[S]) -> Result<Self> {
        let idx = ids
            .iter()
            .map(|id| {
                self.target_index(id.as_ref())
                    .ok_or_else(|| Error::UnknownId(id.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut cells = Vec::with_capacity(self.n_models() * idx.len());
        for i in 0..self.n_models() {
            cells.extend(idx.iter().map(|&j| self.cell(i, j).copied()));
        }
        Self::new(self.model_ids.clone(), to_strings(ids), cells)
    }
}

fn to_strings<S: AsRef<str>>(ids: &[S]) -> Vec<String> {
    ids.iter().map(|s| s.as_ref().to_string()).collect()
}

fn check_unique(ids: &[String]) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(Error::DuplicateId(id.clone()));
        }
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct GainMatrixRepr {
    model_ids: Vec<String>,
    target_ids: Vec<String>,
    mean_gain: Vec<Vec<Option<f64>>>,
    std: Vec<Vec<Option<f64>>>,
    sem: Vec<Vec<Option<f64>>>,
    n_seeds: Vec<Vec<u32>>,
}

impl From<GainMatrix> for GainMatrixRepr {
    fn from(g: GainMatrix) -> Self {
        let grid = |f: &dyn Fn(&GainCell) -> f64| -> Vec<Vec<Option<f64>>> {
            (0..g.n_models())
                .map(|i| (0..g.n_targets()).map(|j| g.cell(i, j).map(f)).collect())
                .collect()
        };
        let mean_gain = grid(&|c| c.mean);
        let std = grid(&|c| c.std);
        let sem = grid(&|c| c.sem);
        let n_seeds = (0..g.n_models())
            .map(|i| {
                (0..g.n_targets())
                    .map(|j| g.cell(i, j).map_or(0, |c| c.n_seeds))
                    .collect()
            })
            .collect();
        GainMatrixRepr {
            model_ids: g.model_ids,
            target_ids: g.target_ids,
            mean_gain,
            std,
            sem,
            n_seeds,
        }
    }
}

impl TryFrom<GainMatrixRepr> for GainMatrix {
    type Error = Error;

    fn try_from(r: GainMatrixRepr) -> Result<Self> {
        let (m, t) = (r.model_ids.len(), r.target_ids.len());
        let mut cells = Vec::with_capacity(m * t);
        for i in 0..m {
            for j in 0..t {
                let get = |grid: &Vec<Vec<Option<f64>>>| grid.get(i).and_then(|row| row.get(j)).copied().flatten();
                cells.push(get(&r.mean_gain).map(|mean| GainCell {
                    mean,
                    std: get(&r.std).unwrap_or(0.0),
                    sem: get(&r.sem).unwrap_or(0.0),
                    n_seeds: r
                        .n_seeds
                        .get(i)
                        .and_then(|row| row.get(j))
                        .copied()
                        .unwrap_or(1),
                }));
            }
        }
        GainMatrix::new(r.model_ids, r.target_ids, cells)
    }
}

/// Mean gain matrix from a validated score table. Model and target ids are
/// sorted lexicographically; (model, target) pairs without records are
/// missing.
pub fn compute_gains(table: &ScoreTable) -> Result<GainMatrix> {
    if table.is_empty() {
        return Err(Error::EmptyTable);
    }
    let violations = ingest::validate(table);
    if !violations.is_empty() {
        return Err(Error::Invalid(violations));
    }

    let mut baseline_scores: HashMap<&str, Vec<f64>> = HashMap::new();
    for b in &table.baselines {
        baseline_scores.entry(&b.target_id).or_default().push(b.score);
    }
    let baseline_mean: HashMap<&str, f64> = baseline_scores
        .into_iter()
        .map(|(t, s)| (t, s.iter().sum::<f64>() / s.len() as f64))
        .collect();

    // Seeds are sorted within a cell so the float sums do not depend on
    // record order.
    let mut per_cell: BTreeMap<(&str, &str), Vec<(u64, f64)>> = BTreeMap::new();
    for r in &table.records {
        per_cell
            .entry((&r.model_id, &r.target_id))
            .or_default()
            .push((r.seed, r.score - baseline_mean[r.target_id.as_str()]));
    }

    let model_ids: Vec<String> = table.model_ids().into_iter().map(String::from).collect();
    let target_ids: Vec<String> = table.target_ids().into_iter().map(String::from).collect();
    let mut cells = Vec::with_capacity(model_ids.len() * target_ids.len());
    for m in &model_ids {
        for t in &target_ids {
            let cell = per_cell.get_mut(&(m.as_str(), t.as_str())).and_then(|seeds| {
                seeds.sort_by_key(|&(seed, _)| seed);
                let gains: Vec<f64> = seeds.iter().map(|&(_, g)| g).collect();
                GainCell::from_samples(&gains)
            });
            cells.push(cell);
        }
    }
    GainMatrix::new(model_ids, target_ids, cells)
}

/// Per-target maximum gain over `subset` (all models when `None`). A target
/// whose cells are all missing within the subset yields `None`.
pub fn max_gain<S: AsRef<str>>(g: &GainMatrix, subset: Option<&[S]>) -> Result<Vec<Option<f64>>> {
    let rows: Vec<usize> = match subset {
        None => (0..g.n_models()).collect(),
        Some(ids) => {
            if ids.is_empty() {
                return Err(Error::InvalidArgument("empty model subset".into()));
            }
            ids.iter()
                .map(|id| {
                    g.model_index(id.as_ref())
                        .ok_or_else(|| Error::UnknownId(id.as_ref().to_string()))
                })
                .collect::<Result<_>>()?
        }
    };
    Ok((0..g.n_targets())
        .map(|j| {
            rows.iter()
                .filter_map(|&i| g.mean(i, j))
                .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x))))
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisSummary {
    pub id: String,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub sem: Option<f64>,
    pub n: usize,
}

/// Mean, population STD and SEM of each id's present cells along the other
/// axis (row statistics for `Axis::Models`, column statistics for
/// `Axis::Targets`).
pub fn descriptive(g: &GainMatrix, axis: Axis) -> Vec<AxisSummary> {
    g.ids(axis)
        .iter()
        .enumerate()
        .map(|(k, id)| {
            let values: Vec<f64> = match axis {
                Axis::Models => g.row(k).map(|(_, v)| v).collect(),
                Axis::Targets => g.column(k).map(|(_, v)| v).collect(),
            };
            if values.is_empty() {
                return AxisSummary {
                    id: id.clone(),
                    mean: None,
                    std: None,
                    sem: None,
                    n: 0,
                };
            }
            let (mean, std) = mean_std(&values);
            AxisSummary {
                id: id.clone(),
                mean: Some(mean),
                std: Some(std),
                sem: Some(std / (values.len() as f64).sqrt()),
                n: values.len(),
            }
        })
        .collect()
}

/// Per-id means along `axis`, `None` where an id has no present cells.
pub fn axis_means(g: &GainMatrix, axis: Axis) -> Vec<Option<f64>> {
    descriptive(g, axis).into_iter().map(|s| s.mean).collect()
}
