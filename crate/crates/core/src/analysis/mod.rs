//! Analyses over a gain matrix: how well one proxy model tracks target
//! sensitivity, how symmetric gains between shared datasets are, mean gains
//! between dataset groups, and correlations with metadata or with the gains
//! of another architecture.

pub mod correlate;
pub mod groups;
pub mod sensitivity;
pub mod symmetry;

pub use correlate::{cross_matrix_correlation, metadata_correlation, CrossCorrelation, CrossQuantity, MetadataCorrelation};
pub use groups::{group_gain_table, GroupAnova, GroupGainTable, GroupLabeling};
pub use sensitivity::{sensitivity_analysis, SensitivityReport, SensitivitySettings};
pub use symmetry::{symmetry_of_gains, symmetry_score, SymmetryNorm, SymmetryResult};
