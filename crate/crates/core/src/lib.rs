//! Analysis of intertraining outcomes: finetuning a target dataset starting
//! from a model that was already finetuned on some source dataset.
//!
//! The crate works on score tables (per-seed accuracies of intermediate
//! models and of the pretrained baseline) and provides
//!
//! * gains over the baseline, max-gain and descriptive statistics ([`gain`]),
//! * parsing, validation and published reference values ([`ingest`],
//!   [`fixtures`]),
//! * correlation, ANOVA and permutation tests ([`stats`]),
//! * the `(b_i + t_j) * t'_j` decomposition regression with shuffled
//!   baselines ([`decomposition`]),
//! * static rankings and their lost gain at top-k ([`ranking`]),
//! * target sensitivity, symmetry, group tables and correlations
//!   ([`analysis`]),
//! * synthetic tables with known ground truth ([`synth`]),
//! * deterministic JSON/Markdown/SVG reports and the CLI pipeline
//!   ([`report`], [`cli`]).

pub mod analysis;
pub mod cli;
pub mod decomposition;
pub mod error;
pub mod fixtures;
pub mod gain;
pub mod ingest;
pub mod ranking;
pub mod report;
pub mod rng;
pub mod stats;
pub mod synth;
pub mod table;

pub use error::{Error, Result};
pub use gain::{compute_gains, descriptive, max_gain, Axis, GainCell, GainMatrix};
pub use table::{BaselineRecord, ScoreRecord, ScoreTable};
