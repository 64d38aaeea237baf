//! Command-line front end. Every flag can also be set through an
//! `INTERTRAIN_*` environment variable (`--max-iters` is
//! `INTERTRAIN_MAX_ITERS`); command-line values win.
//!
//! Exit codes: 0 on success, 2 when the score table fails validation, 1 on
//! I/O, parse or analysis errors.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::{
    cross_matrix_correlation, group_gain_table, metadata_correlation, sensitivity_analysis,
    symmetry_of_gains, CrossQuantity, GroupLabeling, SensitivitySettings, SymmetryNorm,
};
use crate::decomposition::{self, FitKind, FitSettings};
use crate::error::{Error, Result};
use crate::fixtures::{LinearCoefficients, LP_PREDICTOR};
use crate::gain::{self, Axis, GainMatrix, SignificanceRule};
use crate::ingest::{self, Input, Scale, TableSource};
use crate::ranking::{self, QualityKind, QualityScore};
use crate::report::{self, markdown, AnalysisReport, Section};
use crate::stats::{CorrelationMethod, PermutationSettings};
use crate::synth::{self, GeneratorSpec};
use crate::table::ScoreTable;

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "intertrain",
    version,
    about = "Analyze intertraining gains from per-seed score tables",
    long_about = "Analyze intertraining gains from per-seed score tables.\n\n\
        Score tables are a scores CSV (model,target,seed,score) plus a baselines CSV \
        (target,seed,score), or a single JSON document. Each analysis writes a JSON report \
        with sorted keys and fixed float formatting; identical inputs and flags give \
        byte-identical reports.\n\n\
        Every flag can be set through an INTERTRAIN_* environment variable.\n\n\
        Exit status: 0 success, 2 validation findings, 1 I/O or parse failure."
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GlobalArgs {
    /// Seed for permutations, restarts, shuffles and synthetic data.
    #[arg(long, global = true, env = "INTERTRAIN_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Directory for reports and plots.
    #[arg(long, global = true, env = "INTERTRAIN_OUT_DIR", default_value = ".")]
    #[serde(skip)]
    pub out_dir: PathBuf,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true, env = "INTERTRAIN_THREADS")]
    #[serde(skip)]
    pub threads: Option<usize>,
    /// Permutations per p-value (at least 100).
    #[arg(long, global = true, env = "INTERTRAIN_PERMS", default_value_t = 10_000)]
    pub perms: usize,
    /// Unit of the input scores.
    #[arg(long, global = true, value_enum, env = "INTERTRAIN_SCALE", default_value_t = Scale::Percent)]
    pub scale: Scale,
    /// Also write SVG plots.
    #[arg(long, global = true, env = "INTERTRAIN_PLOTS")]
    #[serde(skip)]
    pub plots: bool,
    /// Also write a Markdown summary next to the JSON report.
    #[arg(long, global = true, env = "INTERTRAIN_MARKDOWN")]
    #[serde(skip)]
    pub markdown: bool,
    /// Record per-section wall-clock times in the report (breaks
    /// byte-for-byte reproducibility).
    #[arg(long, global = true, env = "INTERTRAIN_TIMING")]
    #[serde(skip)]
    pub timing: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct InputArgs {
    /// Per-seed scores CSV with columns model,target,seed,score.
    #[arg(long, env = "INTERTRAIN_GAINS", requires = "baselines", required_unless_present = "table")]
    pub gains: Option<PathBuf>,
    /// Baseline CSV with columns target,seed,score.
    #[arg(long, env = "INTERTRAIN_BASELINES")]
    pub baselines: Option<PathBuf>,
    /// Whole score table as one JSON document instead of CSVs.
    #[arg(long, env = "INTERTRAIN_TABLE", conflicts_with_all = ["gains", "baselines"])]
    pub table: Option<PathBuf>,
    /// Metadata CSV with columns id,key,value (sizes, group labels).
    #[arg(long, env = "INTERTRAIN_METADATA")]
    pub metadata: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    /// Report path (default: <out-dir>/<command>.json).
    #[arg(long, env = "INTERTRAIN_OUT")]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FitArgs {
    /// Initial gradient-descent step size.
    #[arg(long, env = "INTERTRAIN_LR", default_value_t = 0.5)]
    pub lr: f64,
    #[arg(long, env = "INTERTRAIN_MAX_ITERS", default_value_t = 200_000)]
    pub max_iters: usize,
    /// Stop when the MSE improves by less than this for `patience` steps.
    #[arg(long, env = "INTERTRAIN_TOL", default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, env = "INTERTRAIN_PATIENCE", default_value_t = 100)]
    pub patience: usize,
    /// Gradient-descent runs from different starting points.
    #[arg(long, env = "INTERTRAIN_RESTARTS", default_value_t = 5)]
    pub restarts: usize,
    /// Shuffled copies of the matrix for the baseline MSE.
    #[arg(long, env = "INTERTRAIN_SHUFFLES", default_value_t = 10)]
    pub shuffles: usize,
}

impl FitArgs {
    fn settings(&self, seed: u64) -> FitSettings {
        FitSettings {
            lr: self.lr,
            max_iters: self.max_iters,
            tol: self.tol,
            patience: self.patience,
            restarts: self.restarts,
            seed,
            ..FitSettings::default()
        }
    }
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Check a score table and list every problem found.
    Validate {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Gain matrix, max-gain and per-model / per-target statistics.
    Gains {
        #[command(flatten)]
        input: InputArgs,
        /// Spread used to mark significant cells (mean > 2 * spread).
        #[arg(long, value_enum, env = "INTERTRAIN_RULE", default_value_t = SignificanceRule::Std)]
        rule: SignificanceRule,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Fit the (b_i + t_j) * t'_j decomposition, its restricted variants and
    /// shuffled-gain baselines.
    Regress {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        fit: FitArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Rank models by a quality score and report the lost gain at top-k.
    Rank {
        /// Quality CSV with columns model,value (e.g. linear-probe gains).
        #[arg(long, env = "INTERTRAIN_SCORES", required_unless_present = "by_average")]
        scores: Option<PathBuf>,
        #[arg(long, value_enum, env = "INTERTRAIN_QUALITY_KIND", default_value_t = QualityKind::LpProbe)]
        quality_kind: QualityKind,
        /// Rank by average gain over targets instead of --scores.
        #[arg(long, env = "INTERTRAIN_BY_AVERAGE", conflicts_with = "scores")]
        by_average: bool,
        #[command(flatten)]
        input: InputArgs,
        /// Comma-separated k values.
        #[arg(long, env = "INTERTRAIN_K", value_delimiter = ',', default_value = "1,3")]
        k: Vec<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Shortlist models by linear-probe gain with predicted average gains.
    Recommend {
        /// Linear-probe CSV with columns model,value.
        #[arg(long, env = "INTERTRAIN_LP")]
        lp: PathBuf,
        #[arg(long, env = "INTERTRAIN_K", default_value_t = 3)]
        k: usize,
        /// Predictor slope (default: published value).
        #[arg(long, env = "INTERTRAIN_SLOPE", requires = "intercept")]
        slope: Option<f64>,
        /// Predictor intercept (default: published value).
        #[arg(long, env = "INTERTRAIN_INTERCEPT", requires = "slope")]
        intercept: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Correlate one proxy model's gains with the per-target max-gain.
    Sensitivity {
        #[command(flatten)]
        input: InputArgs,
        /// Proxy model id.
        #[arg(long, env = "INTERTRAIN_PROXY")]
        proxy: String,
        /// Leave the proxy out of the max-gain.
        #[arg(long, env = "INTERTRAIN_EXCLUDE_PROXY")]
        exclude_proxy: bool,
        #[arg(long, env = "INTERTRAIN_THRESHOLD", default_value_t = 1.0)]
        threshold: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Symmetry of gains over ids that are both models and targets.
    Symmetry {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, env = "INTERTRAIN_NORM", default_value_t = SymmetryNorm::Frobenius)]
        norm: SymmetryNorm,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Mean gain between groups of sources and targets, with ANOVA.
    Groups {
        #[command(flatten)]
        input: InputArgs,
        /// Metadata CSV holding group labels (default: --metadata).
        #[arg(long, env = "INTERTRAIN_LABELS")]
        labels: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Correlate per-id gain summaries with another gain matrix, or with a
    /// numeric metadata key.
    Xcorr {
        #[command(flatten)]
        input: InputArgs,
        /// Scores CSV of the other matrix.
        #[arg(long, env = "INTERTRAIN_OTHER", requires = "other_baselines", required_unless_present_any = ["key", "other_table"])]
        other: Option<PathBuf>,
        #[arg(long, env = "INTERTRAIN_OTHER_BASELINES")]
        other_baselines: Option<PathBuf>,
        /// Other matrix as a JSON score table.
        #[arg(long, env = "INTERTRAIN_OTHER_TABLE", conflicts_with_all = ["other", "other_baselines"])]
        other_table: Option<PathBuf>,
        #[arg(long, value_enum, env = "INTERTRAIN_QUANTITY", default_value_t = CrossQuantity::TargetMaxGain)]
        quantity: CrossQuantity,
        /// Metadata key to correlate with mean gains instead of a second
        /// matrix.
        #[arg(long, env = "INTERTRAIN_KEY", conflicts_with_all = ["other", "other_table"])]
        key: Option<String>,
        /// Axis for --key.
        #[arg(long, value_enum, env = "INTERTRAIN_AXIS", default_value_t = Axis::Models)]
        axis: Axis,
        #[arg(long, value_enum, env = "INTERTRAIN_METHOD", default_value_t = CorrelationMethod::Pearson)]
        method: CorrelationMethod,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Write a synthetic score table drawn from the decomposition model.
    Synth {
        #[arg(long, env = "INTERTRAIN_MODELS", default_value_t = 22)]
        models: usize,
        #[arg(long, env = "INTERTRAIN_TARGETS", default_value_t = 22)]
        targets: usize,
        #[arg(long, env = "INTERTRAIN_SEEDS", default_value_t = 5)]
        seeds: usize,
        /// Standard deviation of per-run score noise.
        #[arg(long, env = "INTERTRAIN_NOISE", default_value_t = 0.5)]
        noise: f64,
        #[arg(long, env = "INTERTRAIN_BASELINE_LEVEL", default_value_t = 70.0)]
        baseline_level: f64,
        /// Use one id pool for models and targets.
        #[arg(long, env = "INTERTRAIN_SHARED_IDS")]
        shared_ids: bool,
        /// Number of group labels to assign in the metadata.
        #[arg(long, env = "INTERTRAIN_GROUPS", default_value_t = 0)]
        groups: usize,
        /// Scores CSV to write.
        #[arg(long, env = "INTERTRAIN_OUT", default_value = "scores.csv")]
        out: PathBuf,
        /// Baselines CSV to write (default: baselines.csv next to --out).
        #[arg(long, env = "INTERTRAIN_BASELINES_OUT")]
        baselines_out: Option<PathBuf>,
        /// Metadata CSV to write (default: metadata.csv next to --out).
        #[arg(long, env = "INTERTRAIN_METADATA_OUT")]
        metadata_out: Option<PathBuf>,
        /// Also write the generating parameters as JSON.
        #[arg(long, env = "INTERTRAIN_TRUTH_OUT")]
        truth_out: Option<PathBuf>,
    },
    /// Run several analyses into one report.
    Analyze {
        #[command(flatten)]
        input: InputArgs,
        /// Run every analysis the inputs allow.
        #[arg(long, env = "INTERTRAIN_ALL", required_unless_present = "sections")]
        all: bool,
        /// Comma-separated analyses to run.
        #[arg(long, env = "INTERTRAIN_SECTIONS", value_enum, value_delimiter = ',', conflicts_with = "all")]
        sections: Vec<SectionName>,
        #[command(flatten)]
        fit: FitArgs,
        /// Linear-probe CSV (model,value) for ranking and the predictor fit.
        #[arg(long, env = "INTERTRAIN_LP")]
        lp: Option<PathBuf>,
        /// Proxy model (default: best model by average gain).
        #[arg(long, env = "INTERTRAIN_PROXY")]
        proxy: Option<String>,
        #[arg(long, env = "INTERTRAIN_EXCLUDE_PROXY")]
        exclude_proxy: bool,
        #[arg(long, env = "INTERTRAIN_THRESHOLD", default_value_t = 1.0)]
        threshold: f64,
        #[arg(long, env = "INTERTRAIN_K", value_delimiter = ',', default_value = "1,3")]
        k: Vec<usize>,
        #[arg(long, value_enum, env = "INTERTRAIN_NORM", default_value_t = SymmetryNorm::Frobenius)]
        norm: SymmetryNorm,
        #[arg(long, value_enum, env = "INTERTRAIN_RULE", default_value_t = SignificanceRule::Std)]
        rule: SignificanceRule,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SectionName {
    Gains,
    Decomposition,
    Ranking,
    LpPredictor,
    Sensitivity,
    Symmetry,
    Groups,
    Metadata,
}

impl SectionName {
    fn key(self) -> &'static str {
        match self {
            SectionName::Gains => "gains",
            SectionName::Decomposition => "decomposition",
            SectionName::Ranking => "ranking",
            SectionName::LpPredictor => "lp_predictor",
            SectionName::Sensitivity => "sensitivity",
            SectionName::Symmetry => "symmetry",
            SectionName::Groups => "groups",
            SectionName::Metadata => "metadata_correlation",
        }
    }
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::Gains { .. } => "gains",
            Command::Regress { .. } => "regress",
            Command::Rank { .. } => "rank",
            Command::Recommend { .. } => "recommend",
            Command::Sensitivity { .. } => "sensitivity",
            Command::Symmetry { .. } => "symmetry",
            Command::Groups { .. } => "groups",
            Command::Xcorr { .. } => "xcorr",
            Command::Synth { .. } => "synth",
            Command::Analyze { .. } => "analyze",
        }
    }
}

/// Parse `args` (including the program name) and run. Returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Run a parsed invocation on its own thread pool.
pub fn execute(cli: &Cli) -> Result<i32> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.global.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    pool.install(|| dispatch(cli))
}

struct Ctx<'a> {
    global: &'a GlobalArgs,
    perm: PermutationSettings,
}

impl Ctx<'_> {
    fn report_path(&self, output: &OutputArgs, command: &str) -> PathBuf {
        output
            .out
            .clone()
            .unwrap_or_else(|| self.global.out_dir.join(format!("{command}.json")))
    }

    fn write(&self, path: &Path, contents: &str) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        fs::write(path, contents).map_err(|e| Error::io(path, e))
    }

    fn plot(&self, name: &str, svg: &str) -> Result<()> {
        let path = self.global.out_dir.join(name);
        self.write(&path, svg)?;
        println!("wrote {}", path.display());
        Ok(())
    }

    fn finish(&self, report: &AnalysisReport, path: &Path) -> Result<()> {
        self.write(path, &report.to_json()?)?;
        println!("wrote {}", path.display());
        if self.global.markdown {
            let md = path.with_extension("md");
            self.write(&md, &markdown::render(report))?;
            println!("wrote {}", md.display());
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct Echo<'a> {
    global: &'a GlobalArgs,
    command: &'a Command,
}

fn table_source(input: &InputArgs, scale: Scale) -> Result<TableSource> {
    let src = match (&input.table, &input.gains, &input.baselines) {
        (Some(t), _, _) => TableSource::json(Input::Path(t.clone())),
        (None, Some(s), Some(b)) => TableSource::csv(Input::Path(s.clone()), Input::Path(b.clone())),
        _ => {
            return Err(Error::InvalidArgument(
                "give --gains with --baselines, or --table".into(),
            ))
        }
    };
    let src = src.with_scale(scale);
    Ok(match &input.metadata {
        Some(m) => src.with_metadata(Input::Path(m.clone())),
        None => src,
    })
}

fn load(input: &InputArgs, scale: Scale, report: &mut AnalysisReport) -> Result<(ScoreTable, GainMatrix)> {
    let src = table_source(input, scale)?;
    report.add_inputs(src.inputs())?;
    let table = ingest::parse_score_table(&src)?;
    let g = gain::compute_gains(&table)?;
    Ok((table, g))
}

fn load_quality(path: &Path, kind: QualityKind, report: &mut AnalysisReport) -> Result<Vec<QualityScore>> {
    let input = Input::Path(path.to_path_buf());
    report.add_inputs([&input])?;
    let bytes = input.read_bytes()?;
    let pairs = ingest::parse_quality_csv(&input.name(), bytes.as_slice())?;
    Ok(ranking::quality_scores(&pairs, kind))
}

#[derive(Serialize)]
struct GainsResult<'a> {
    matrix: &'a GainMatrix,
    max_gain: Vec<Option<f64>>,
    models: Vec<gain::AxisSummary>,
    targets: Vec<gain::AxisSummary>,
    significant_cells: usize,
    n_present: usize,
}

fn gains_section(g: &GainMatrix, rule: SignificanceRule) -> Result<Section> {
    let significant_cells = (0..g.n_models())
        .flat_map(|i| (0..g.n_targets()).map(move |j| (i, j)))
        .filter(|&(i, j)| g.is_significant(i, j, rule))
        .count();
    Section::new(
        "compute_gains",
        serde_json::json!({ "significance_rule": rule, "spread": "population std" }),
        GainsResult {
            matrix: g,
            max_gain: gain::max_gain::<&str>(g, None)?,
            models: gain::descriptive(g, Axis::Models),
            targets: gain::descriptive(g, Axis::Targets),
            significant_cells,
            n_present: g.n_present(),
        },
    )
}

#[derive(Serialize)]
struct DecompositionResult {
    fits: Vec<decomposition::DecompositionModel>,
    baselines: Vec<decomposition::BaselineComparison>,
}

fn decomposition_section(g: &GainMatrix, fit: &FitArgs, seed: u64) -> Result<Section> {
    let settings = fit.settings(seed);
    let kinds = [FitKind::Bilinear, FitKind::BaseOnly, FitKind::TargetOnly];
    let fits = kinds
        .iter()
        .map(|&k| decomposition::fit(g, k, &settings))
        .collect::<Result<_>>()?;
    let baselines = kinds
        .iter()
        .map(|&k| decomposition::shuffled_baseline(g, k, fit.shuffles, seed, &settings))
        .collect::<Result<_>>()?;
    Section::new(
        "fit + shuffled_baseline",
        serde_json::json!({ "fit": settings, "n_shuffles": fit.shuffles, "shuffle_seed": seed }),
        DecompositionResult { fits, baselines },
    )
}

fn usable_ks(ks: &[usize], n: usize) -> Vec<usize> {
    let mut out: Vec<usize> = ks.iter().copied().filter(|&k| k >= 1 && k <= n).collect();
    out.sort_unstable();
    out.dedup();
    out
}

fn ranking_section(g: &GainMatrix, scores: &[QualityScore], ks: &[usize], source: &str) -> Result<Section> {
    let report = ranking::ranking_report(g, scores, ks)?;
    Section::new(
        "rank_models + topk_loss",
        serde_json::json!({ "k": ks, "quality": source, "threshold": ranking::LOSS_THRESHOLD }),
        report,
    )
}

fn lp_scatter(g: &GainMatrix, lp: &[QualityScore], fit: Option<&LinearCoefficients>) -> Result<String> {
    let avg = ranking::rank_by_average::<&str>(g, None)?;
    let points: Vec<(String, f64, f64)> = lp
        .iter()
        .filter_map(|s| {
            avg.iter()
                .find(|a| a.model_id == s.model_id)
                .map(|a| (s.model_id.clone(), s.value, a.value))
        })
        .collect();
    Ok(report::emit_scatter(&points, "linear-probe gain", "average gain", fit))
}

fn dispatch(cli: &Cli) -> Result<i32> {
    let global = &cli.global;
    let ctx = Ctx {
        global,
        perm: PermutationSettings::new(global.perms, global.seed),
    };
    let command = cli.command.name();
    let mut report = AnalysisReport::new(command, Echo { global, command: &cli.command })?;
    match &cli.command {
        Command::Validate { input, output } => {
            let src = table_source(input, global.scale)?;
            report.add_inputs(src.inputs())?;
            let table = ingest::parse_score_table(&src)?;
            let violations = ingest::validate(&table);
            for v in &violations {
                println!("{v}");
            }
            report.insert(
                "validation",
                Section::new(
                    "validate",
                    serde_json::json!({}),
                    serde_json::json!({
                        "violations": violations,
                        "n_records": table.records.len(),
                        "n_baselines": table.baselines.len(),
                    }),
                )?,
            );
            ctx.finish(&report, &ctx.report_path(output, command))?;
            if violations.is_empty() {
                println!("table is valid");
                Ok(0)
            } else {
                Ok(2)
            }
        }
        Command::Gains { input, rule, output } => {
            let (_, g) = load(input, global.scale, &mut report)?;
            report.insert("gains", gains_section(&g, *rule)?);
            if global.plots {
                ctx.plot("heatmap.svg", &report::emit_heatmap(&g, *rule))?;
            }
            ctx.finish(&report, &ctx.report_path(output, command))?;
            Ok(0)
        }
        Command::Regress { input, fit, output } => {
            let (_, g) = load(input, global.scale, &mut report)?;
            report.insert("decomposition", decomposition_section(&g, fit, global.seed)?);
            ctx.finish(&report, &ctx.report_path(output, command))?;
            Ok(0)
        }
        Command::Rank {
            scores,
            quality_kind,
            by_average: _,
            input,
            k,
            output,
        } => {
            let (_, g) = load(input, global.scale, &mut report)?;
            let (quality, source) = match scores {
                Some(path) => (load_quality(path, *quality_kind, &mut report)?, "scores file"),
                None => (ranking::rank_by_average::<&str>(&g, None)?, "average gain over all targets"),
            };
            report.insert("ranking", ranking_section(&g, &quality, k, source)?);
            if global.plots && scores.is_some() {
                ctx.plot("lp_scatter.svg", &lp_scatter(&g, &quality, None)?)?;
            }
            ctx.finish(&report, &ctx.report_path(output, command))?;
            Ok(0)
        }
        Command::Recommend {
            lp,
            k,
            slope,
            intercept,
            output,
        } => {
            let quality = load_quality(lp, QualityKind::LpProbe, &mut report)?;
            let (coefficients, source) = match (slope, intercept) {
                (Some(s), Some(i)) => (LinearCoefficients { slope: *s, intercept: *i }, "user"),
                _ => (LP_PREDICTOR, "published"),
            };
            let shortlist = ranking::recommend(&quality, *k, &coefficients)?;
            for r in &shortlist {
                println!("{}. {} (predicted average gain {:.3})", r.rank, r.model_id, r.predicted_avg_gain);
            }
            report.insert(
                "recommend",
                Section::new(
                    "rank_models + predict_avg_gain",
                    serde_json::json!({ "k": k, "coefficients": coefficients, "coefficient_source": source }),
                    shortlist,
                )?,
            );
            ctx.finish(&report, &ctx.report_path(output, command))?;
            Ok(0)
        }
        Command::Sensitivity {
            input,
            proxy,
            exclude_proxy,
            threshold,
            output,
        } => {
            let (_, g) = load(input, global.scale, &mut report)?;
            let settings = SensitivitySettings {
                exclude_proxy: *exclude_proxy,
                threshold: *threshold,
            };
            let r = sensitivity_analysis(&g, proxy, &settings, &ctx.perm)?;
            report.insert(
                "sensitivity",
                Section::new("sensitivity_analysis", serde_json::json!({ "settings": settings, "permutations": ctx.perm }), r)?,
            );
            ctx.finish(&report, &ctx.report_path(output, command))?;
            Ok(0)
        }
        Command::Symmetry { input, norm, output } => {
            let (_, g) = load(input, global.scale, &mut report)?;
            let r = symmetry_of_gains(&g, *norm)?;
            report.insert("symmetry", Section::new("symmetry_score", serde_json::json!({ "norm": norm }), r)?);
            ctx.finish(&report, &ctx.report_path(output, command))?;
            Ok(0)
        }
        Command::Groups { input, labels, output } => {
            let (table, g) = load(input, global.scale, &mut report)?;
            let metadata = match labels {
                Some(path) => {
                    let inp = Input::Path(path.clone());
                    report.add_inputs([&inp])?;
                    ingest::parse_metadata_csv(&inp.name(), inp.read_bytes()?.as_slice())?
                }
                None => table.metadata.clone(),
            };
            let labeling = GroupLabeling::from_metadata(&metadata, &g);
            let r = group_gain_table(&g, &labeling, &ctx.perm)?;
            report.insert(
                "groups",
                Section::new("group_gain_table", serde_json::json!({ "permutations": ctx.perm, "diagonal": "excluded" }), r)?,
            );
            ctx.finish(&report, &ctx.report_path(output, command))?;
            Ok(0)
        }
        Command::Xcorr {
            input,
            other,
            other_baselines,
            other_table,
            quantity,
            key,
            axis,
            method,
            output,
        } => {
            let (table, g) = load(input, global.scale, &mut report)?;
            let section = if let Some(key) = key {
                let r = metadata_correlation(&g, &table.metadata, *axis, key, *method, &ctx.perm)?;
                Section::new(
                    "metadata_correlation",
                    serde_json::json!({ "key": key, "axis": axis, "method": method, "permutations": ctx.perm }),
                    r,
                )?
            } else {
                let other_input = InputArgs {
                    gains: other.clone(),
                    baselines: other_baselines.clone(),
                    table: other_table.clone(),
                    metadata: None,
                };
                let (_, g2) = load(&other_input, global.scale, &mut report)?;
                let r = cross_matrix_correlation(&g, &g2, *quantity, *method, &ctx.perm)?;
                Section::new(
                    "cross_matrix_correlation",
                    serde_json::json!({ "quantity": quantity, "method": method, "permutations": ctx.perm }),
                    r,
                )?
            };
            report.insert("xcorr", section);
            ctx.finish(&report, &ctx.report_path(output, command))?;
            Ok(0)
        }
        Command::Synth {
            models,
            targets,
            seeds,
            noise,
            baseline_level,
            shared_ids,
            groups,
            out,
            baselines_out,
            metadata_out,
            truth_out,
        } => {
            let spec = GeneratorSpec {
                n_models: *models,
                n_targets: *targets,
                n_seeds: *seeds,
                noise_std: *noise,
                baseline_level: *baseline_level,
                seed: global.seed,
                shared_ids: *shared_ids,
                n_groups: *groups,
                ..GeneratorSpec::default()
            };
            let generated = synth::generate(&spec)?;
            let sibling = |name: &str| out.parent().map_or_else(|| PathBuf::from(name), |d| d.join(name));
            let mut buf = Vec::new();
            ingest::write_scores_csv(&generated.table, &mut buf)?;
            ctx.write(out, &String::from_utf8_lossy(&buf))?;
            println!("wrote {}", out.display());
            let base_path = baselines_out.clone().unwrap_or_else(|| sibling("baselines.csv"));
            let mut buf = Vec::new();
            ingest::write_baselines_csv(&generated.table, &mut buf)?;
            ctx.write(&base_path, &String::from_utf8_lossy(&buf))?;
            println!("wrote {}", base_path.display());
            if !generated.table.metadata.is_empty() {
                let path = metadata_out.clone().unwrap_or_else(|| sibling("metadata.csv"));
                let mut buf = Vec::new();
                ingest::write_metadata_csv(&generated.table.metadata, &mut buf)?;
                ctx.write(&path, &String::from_utf8_lossy(&buf))?;
                println!("wrote {}", path.display());
            }
            if let Some(path) = truth_out {
                let truth = serde_json::json!({
                    "spec": spec,
                    "truth": generated.truth,
                    "clamp_events": generated.clamp_events,
                });
                ctx.write(path, &report::to_canonical_string(&truth)?)?;
                println!("wrote {}", path.display());
            }
            if generated.clamp_events > 0 {
                eprintln!("warning: {} scores clamped to [0, 100]", generated.clamp_events);
            }
            Ok(0)
        }
        Command::Analyze {
            input,
            all,
            sections,
            fit,
            lp,
            proxy,
            exclude_proxy,
            threshold,
            k,
            norm,
            rule,
            output,
        } => {
            let (table, g) = load(input, global.scale, &mut report)?;
            let lp_scores = lp
                .as_ref()
                .map(|p| load_quality(p, QualityKind::LpProbe, &mut report))
                .transpose()?;
            let wanted: Vec<SectionName> = if *all {
                SectionName::value_variants().to_vec()
            } else {
                let mut s = sections.clone();
                s.sort();
                s.dedup();
                s
            };
            let mut timing = std::collections::BTreeMap::new();
            for name in wanted {
                let started = Instant::now();
                let outcome = analyze_section(
                    name,
                    &ctx,
                    &table,
                    &g,
                    AnalyzeOptions {
                        fit,
                        lp: lp_scores.as_deref(),
                        proxy: proxy.as_deref(),
                        sensitivity: SensitivitySettings {
                            exclude_proxy: *exclude_proxy,
                            threshold: *threshold,
                        },
                        ks: k,
                        norm: *norm,
                        rule: *rule,
                    },
                );
                match outcome {
                    Ok(section) => report.insert(name.key(), section),
                    Err(e @ (Error::Io { .. } | Error::Json(_))) => return Err(e),
                    Err(e) => report.skip(name.key(), e),
                }
                timing.insert(name.key().to_string(), started.elapsed().as_secs_f64() * 1e3);
            }
            if global.timing {
                report.timing_ms = Some(timing);
            }
            if global.plots {
                ctx.plot("heatmap.svg", &report::emit_heatmap(&g, *rule))?;
                if let Some(lp) = &lp_scores {
                    ctx.plot("lp_scatter.svg", &lp_scatter(&g, lp, None)?)?;
                }
            }
            ctx.finish(&report, &ctx.report_path(output, command))?;
            Ok(0)
        }
    }
}

struct AnalyzeOptions<'a> {
    fit: &'a FitArgs,
    lp: Option<&'a [QualityScore]>,
    proxy: Option<&'a str>,
    sensitivity: SensitivitySettings,
    ks: &'a [usize],
    norm: SymmetryNorm,
    rule: SignificanceRule,
}

fn analyze_section(
    name: SectionName,
    ctx: &Ctx,
    table: &ScoreTable,
    g: &GainMatrix,
    o: AnalyzeOptions,
) -> Result<Section> {
    let seed = ctx.global.seed;
    match name {
        SectionName::Gains => gains_section(g, o.rule),
        SectionName::Decomposition => decomposition_section(g, o.fit, seed),
        SectionName::Ranking => {
            let ks = usable_ks(o.ks, g.n_models());
            match o.lp {
                Some(lp) => {
                    let known: Vec<QualityScore> = lp
                        .iter()
                        .filter(|s| g.model_index(&s.model_id).is_some())
                        .cloned()
                        .collect();
                    let ks = usable_ks(&ks, known.len());
                    ranking_section(g, &known, &ks, "linear-probe file")
                }
                None => ranking_section(
                    g,
                    &ranking::rank_by_average::<&str>(g, None)?,
                    &ks,
                    "average gain over all targets",
                ),
            }
        }
        SectionName::LpPredictor => {
            let lp = o
                .lp
                .ok_or_else(|| Error::InsufficientData("no linear-probe file (--lp)".into()))?;
            let avg = ranking::rank_by_average::<&str>(g, None)?;
            let fitted = ranking::fit_lp_predictor(lp, &avg, &ctx.perm)?;
            let published: Vec<serde_json::Value> = fitted
                .model_ids
                .iter()
                .map(|id| {
                    let v = lp.iter().find(|s| &s.model_id == id).expect("matched").value;
                    serde_json::json!({ "model_id": id, "lp_value": v, "predicted_avg_gain": ranking::predict_avg_gain(v) })
                })
                .collect();
            Section::new(
                "fit_lp_predictor + predict_avg_gain",
                serde_json::json!({ "permutations": ctx.perm, "published_coefficients": LP_PREDICTOR }),
                serde_json::json!({ "fitted": fitted, "published_predictions": published }),
            )
        }
        SectionName::Sensitivity => {
            let proxy = match o.proxy {
                Some(p) => p.to_string(),
                None => ranking::rank_models(&ranking::rank_by_average::<&str>(g, None)?)?
                    .into_iter()
                    .next()
                    .expect("non-empty ranking"),
            };
            let r = sensitivity_analysis(g, &proxy, &o.sensitivity, &ctx.perm)?;
            Section::new(
                "sensitivity_analysis",
                serde_json::json!({ "settings": o.sensitivity, "permutations": ctx.perm, "proxy_chosen_by": if o.proxy.is_some() { "flag" } else { "highest average gain" } }),
                r,
            )
        }
        SectionName::Symmetry => Section::new(
            "symmetry_score",
            serde_json::json!({ "norm": o.norm }),
            symmetry_of_gains(g, o.norm)?,
        ),
        SectionName::Groups => {
            let labeling = GroupLabeling::from_metadata(&table.metadata, g);
            Section::new(
                "group_gain_table",
                serde_json::json!({ "permutations": ctx.perm, "diagonal": "excluded" }),
                group_gain_table(g, &labeling, &ctx.perm)?,
            )
        }
        SectionName::Metadata => {
            let mut results = Vec::new();
            let keys: std::collections::BTreeSet<&String> = table
                .metadata
                .values()
                .flat_map(|kv| kv.iter().filter(|(_, v)| v.as_number().is_some()).map(|(k, _)| k))
                .collect();
            for axis in [Axis::Models, Axis::Targets] {
                for key in &keys {
                    match metadata_correlation(g, &table.metadata, axis, key, CorrelationMethod::Pearson, &ctx.perm) {
                        Ok(r) => results.push(r),
                        Err(Error::InsufficientData(_) | Error::UndefinedCorrelation(_)) => {}
                        Err(e) => return Err(e),
                    }
                }
            }
            if results.is_empty() {
                return Err(Error::InsufficientData(
                    "no numeric metadata key covers at least 3 ids".into(),
                ));
            }
            Section::new(
                "metadata_correlation",
                serde_json::json!({ "method": CorrelationMethod::Pearson, "permutations": ctx.perm }),
                results,
            )
        }
    }
}

