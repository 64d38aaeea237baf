//! Reading, validating and writing score tables.
//!
//! CSV inputs are comma separated, UTF-8, with a header line and `.` as the
//! decimal point:
//!
//! * scores: `model,target,seed,score`
//! * baselines: `target,seed,score`
//! * metadata: `id,key,value` (long format; non-numeric values are labels)
//!
//! JSON inputs hold a whole [`ScoreTable`] with its field names.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::{BaselineRecord, MetaValue, Metadata, ScoreRecord, ScoreTable};

pub const SCORE_COLUMNS: [&str; 4] = ["model", "target", "seed", "score"];
pub const BASELINE_COLUMNS: [&str; 3] = ["target", "seed", "score"];
pub const METADATA_COLUMNS: [&str; 3] = ["id", "key", "value"];

/// Metadata keys holding group labels.
pub const GROUP_KEYS: [&str; 3] = ["group", "model_group", "target_group"];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Unit of the incoming scores. Tables are always stored in percentage
/// points; `Fraction` inputs are multiplied by 100 on load.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Percent,
    Fraction,
}

impl Scale {
    fn factor(self) -> f64 {
        match self {
            Scale::Percent => 1.0,
            Scale::Fraction => 100.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    Path(PathBuf),
    Inline { name: String, text: String },
}

impl Input {
    pub fn inline(name: &str, text: &str) -> Self {
        Input::Inline {
            name: name.to_string(),
            text: text.to_string(),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Input::Path(p) => p.display().to_string(),
            Input::Inline { name, .. } => name.clone(),
        }
    }

    pub fn read_bytes(&self) -> Result<Vec<u8>> {
        match self {
            Input::Path(p) => std::fs::read(p).map_err(|e| Error::io(p, e)),
            Input::Inline { text, .. } => Ok(text.as_bytes().to_vec()),
        }
    }
}

/// Where a score table comes from. For `Format::Json` the `scores` input is
/// the whole table document and `baselines` must be `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct TableSource {
    pub format: Format,
    pub scores: Input,
    pub baselines: Option<Input>,
    pub metadata: Option<Input>,
    pub scale: Scale,
}

impl TableSource {
    pub fn csv(scores: Input, baselines: Input) -> Self {
        TableSource {
            format: Format::Csv,
            scores,
            baselines: Some(baselines),
            metadata: None,
            scale: Scale::Percent,
        }
    }

    pub fn json(document: Input) -> Self {
        TableSource {
            format: Format::Json,
            scores: document,
            baselines: None,
            metadata: None,
            scale: Scale::Percent,
        }
    }

    pub fn with_metadata(mut self, metadata: Input) -> Self {
        self.metadata = Some(metadata);
        self
    }

    pub fn with_scale(mut self, scale: Scale) -> Self {
        self.scale = scale;
        self
    }

    /// All inputs in a fixed order, for digests.
    pub fn inputs(&self) -> Vec<&Input> {
        std::iter::once(&self.scores)
            .chain(self.baselines.as_ref())
            .chain(self.metadata.as_ref())
            .collect()
    }
}

/// Parse a score table. Structural problems (bad rows, unknown columns,
/// duplicate keys) are errors; value-level problems are left to
/// [`validate`].
pub fn parse_score_table(src: &TableSource) -> Result<ScoreTable> {
    let mut table = match src.format {
        Format::Csv => {
            let baselines = src.baselines.as_ref().ok_or_else(|| {
                Error::InvalidArgument("CSV tables need a baselines file".into())
            })?;
            let records = parse_scores_csv(&src.scores.name(), &src.scores.read_bytes()?[..])?;
            let baselines = parse_baselines_csv(&baselines.name(), &baselines.read_bytes()?[..])?;
            ScoreTable::new(records, baselines)
        }
        Format::Json => {
            if src.baselines.is_some() {
                return Err(Error::InvalidArgument(
                    "JSON tables carry their own baselines".into(),
                ));
            }
            let table: ScoreTable = serde_json::from_slice(&src.scores.read_bytes()?)?;
            check_unique_keys(&src.scores.name(), &table)?;
            table
        }
    };
    if let Some(meta) = &src.metadata {
        let parsed = parse_metadata_csv(&meta.name(), &meta.read_bytes()?[..])?;
        for (id, kv) in parsed {
            table.metadata.entry(id).or_default().extend(kv);
        }
    }
    let k = src.scale.factor();
    if k != 1.0 {
        table.records.iter_mut().for_each(|r| r.score *= k);
        table.baselines.iter_mut().for_each(|b| b.score *= k);
    }
    Ok(table)
}

fn csv_reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input)
}

/// Map expected column names to their positions, rejecting unknown and
/// missing columns.
fn column_positions<R: Read>(
    source: &str,
    rdr: &mut csv::Reader<R>,
    expected: &[&str],
) -> Result<Vec<usize>> {
    let headers = rdr.headers().map_err(|e| csv_error(source, e))?.clone();
    let accepted = expected.join(",");
    for h in headers.iter() {
        if !expected.contains(&h) {
            return Err(Error::UnknownColumn {
                source_name: source.to_string(),
                column: h.to_string(),
                accepted,
            });
        }
    }
    expected
        .iter()
        .map(|col| {
            headers.iter().position(|h| h == *col).ok_or_else(|| Error::Parse {
                source_name: source.to_string(),
                line: 1,
                message: format!("missing column `{col}`; expected header `{accepted}`"),
            })
        })
        .collect()
}

fn csv_error(source: &str, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::Parse {
        source_name: source.to_string(),
        line,
        message: e.to_string(),
    }
}

struct Row<'a> {
    source: &'a str,
    line: u64,
    record: csv::StringRecord,
}

impl Row<'_> {
    fn err(&self, message: String) -> Error {
        Error::Parse {
            source_name: self.source.to_string(),
            line: self.line,
            message,
        }
    }

    fn token(&self, pos: usize, col: &str) -> Result<String> {
        match self.record.get(pos) {
            Some(s) if !s.is_empty() => Ok(s.to_string()),
            _ => Err(self.err(format!("empty `{col}`"))),
        }
    }

    fn seed(&self, pos: usize) -> Result<u64> {
        let s = self.record.get(pos).unwrap_or("");
        s.parse()
            .map_err(|_| self.err(format!("seed `{s}` is not a non-negative integer")))
    }

    fn score(&self, pos: usize) -> Result<f64> {
        let s = self.record.get(pos).unwrap_or("");
        match s.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => Err(self.err(format!("score `{s}` is not a finite number"))),
        }
    }
}

fn rows<'a, R: Read + 'a>(
    source: &'a str,
    rdr: &'a mut csv::Reader<R>,
) -> impl Iterator<Item = Result<Row<'a>>> + 'a {
    rdr.records().map(move |r| {
        let record = r.map_err(|e| csv_error(source, e))?;
        let line = record.position().map_or(0, |p| p.line());
        Ok(Row {
            source,
            line,
            record,
        })
    })
}

pub fn parse_scores_csv<R: Read>(source: &str, input: R) -> Result<Vec<ScoreRecord>> {
    let mut rdr = csv_reader(input);
    let pos = column_positions(source, &mut rdr, &SCORE_COLUMNS)?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for row in rows(source, &mut rdr) {
        let row = row?;
        let rec = ScoreRecord {
            model_id: row.token(pos[0], "model")?,
            target_id: row.token(pos[1], "target")?,
            seed: row.seed(pos[2])?,
            score: row.score(pos[3])?,
        };
        if !seen.insert((rec.model_id.clone(), rec.target_id.clone(), rec.seed)) {
            return Err(Error::DuplicateKey {
                source_name: source.to_string(),
                key: format!(
                    "(model={}, target={}, seed={}) at line {}",
                    rec.model_id, rec.target_id, rec.seed, row.line
                ),
            });
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn parse_baselines_csv<R: Read>(source: &str, input: R) -> Result<Vec<BaselineRecord>> {
    let mut rdr = csv_reader(input);
    let pos = column_positions(source, &mut rdr, &BASELINE_COLUMNS)?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for row in rows(source, &mut rdr) {
        let row = row?;
        let rec = BaselineRecord {
            target_id: row.token(pos[0], "target")?,
            seed: row.seed(pos[1])?,
            score: row.score(pos[2])?,
        };
        if !seen.insert((rec.target_id.clone(), rec.seed)) {
            return Err(Error::DuplicateKey {
                source_name: source.to_string(),
                key: format!(
                    "(target={}, seed={}) at line {}",
                    rec.target_id, rec.seed, row.line
                ),
            });
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn parse_metadata_csv<R: Read>(source: &str, input: R) -> Result<Metadata> {
    let mut rdr = csv_reader(input);
    let pos = column_positions(source, &mut rdr, &METADATA_COLUMNS)?;
    let mut out = Metadata::new();
    for row in rows(source, &mut rdr) {
        let row = row?;
        let id = row.token(pos[0], "id")?;
        let key = row.token(pos[1], "key")?;
        let raw = row.token(pos[2], "value")?;
        let value = match raw.parse::<f64>() {
            Ok(x) if x.is_finite() => MetaValue::Number(x),
            _ => MetaValue::Text(raw),
        };
        if out.entry(id.clone()).or_default().insert(key.clone(), value).is_some() {
            return Err(Error::DuplicateKey {
                source_name: source.to_string(),
                key: format!("(id={id}, key={key}) at line {}", row.line),
            });
        }
    }
    Ok(out)
}

/// Two-column `model,value` file of per-model quality scores.
pub fn parse_quality_csv<R: Read>(source: &str, input: R) -> Result<Vec<(String, f64)>> {
    let mut rdr = csv_reader(input);
    let pos = column_positions(source, &mut rdr, &["model", "value"])?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for row in rows(source, &mut rdr) {
        let row = row?;
        let id = row.token(pos[0], "model")?;
        let value = row.score(pos[1])?;
        if !seen.insert(id.clone()) {
            return Err(Error::DuplicateKey {
                source_name: source.to_string(),
                key: format!("(model={id}) at line {}", row.line),
            });
        }
        out.push((id, value));
    }
    Ok(out)
}

fn check_unique_keys(source: &str, table: &ScoreTable) -> Result<()> {
    let mut seen = HashSet::new();
    for r in &table.records {
        if !seen.insert((&r.model_id, &r.target_id, r.seed)) {
            return Err(Error::DuplicateKey {
                source_name: source.to_string(),
                key: format!("(model={}, target={}, seed={})", r.model_id, r.target_id, r.seed),
            });
        }
    }
    let mut seen = HashSet::new();
    for b in &table.baselines {
        if !seen.insert((&b.target_id, b.seed)) {
            return Err(Error::DuplicateKey {
                source_name: source.to_string(),
                key: format!("(target={}, seed={})", b.target_id, b.seed),
            });
        }
    }
    Ok(())
}

pub fn write_scores_csv<W: Write>(table: &ScoreTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::io("<csv writer>", e.into());
    w.write_record(SCORE_COLUMNS).map_err(io)?;
    for r in &table.records {
        w.write_record([
            r.model_id.as_str(),
            r.target_id.as_str(),
            &r.seed.to_string(),
            &r.score.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))
}

pub fn write_baselines_csv<W: Write>(table: &ScoreTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::io("<csv writer>", e.into());
    w.write_record(BASELINE_COLUMNS).map_err(io)?;
    for b in &table.baselines {
        w.write_record([b.target_id.as_str(), &b.seed.to_string(), &b.score.to_string()])
            .map_err(io)?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))
}

pub fn write_metadata_csv<W: Write>(metadata: &Metadata, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::io("<csv writer>", e.into());
    w.write_record(METADATA_COLUMNS).map_err(io)?;
    for (id, kv) in metadata {
        for (k, v) in kv {
            let value = match v {
                MetaValue::Number(x) => x.to_string(),
                MetaValue::Text(s) => s.clone(),
            };
            w.write_record([id.as_str(), k.as_str(), value.as_str()]).map_err(io)?;
        }
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))
}

/// A broken table invariant. Violations are data, not faults: [`validate`]
/// collects all of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    EmptyTable,
    EmptyId { what: String },
    NonFiniteScore { key: String },
    ScoreOutOfRange { key: String, score: f64 },
    DuplicateRecord { key: String },
    DuplicateBaseline { key: String },
    MissingBaseline { target: String },
    FractionScale,
    GroupLabelNotText { id: String, key: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyTable => write!(f, "table has no score records"),
            Violation::EmptyId { what } => write!(f, "empty id in {what}"),
            Violation::NonFiniteScore { key } => write!(f, "non-finite score at {key}"),
            Violation::ScoreOutOfRange { key, score } => {
                write!(f, "score {score} at {key} is outside [0, 100]")
            }
            Violation::DuplicateRecord { key } => write!(f, "duplicate score record {key}"),
            Violation::DuplicateBaseline { key } => write!(f, "duplicate baseline record {key}"),
            Violation::MissingBaseline { target } => {
                write!(f, "target `{target}` has scores but no baseline records")
            }
            Violation::FractionScale => write!(
                f,
                "all scores lie in [0, 1]; scores must be percentages (rescale with --scale fraction)"
            ),
            Violation::GroupLabelNotText { id, key } => {
                write!(f, "group label `{key}` of `{id}` must be text")
            }
        }
    }
}

fn score_violation(key: impl Fn() -> String, score: f64) -> Option<Violation> {
    if !score.is_finite() {
        Some(Violation::NonFiniteScore { key: key() })
    } else if !(0.0..=100.0).contains(&score) {
        Some(Violation::ScoreOutOfRange { key: key(), score })
    } else {
        None
    }
}

/// Every broken invariant of `table`; empty iff the table is valid.
pub fn validate(table: &ScoreTable) -> Vec<Violation> {
    let mut out = Vec::new();
    if table.records.is_empty() {
        out.push(Violation::EmptyTable);
    }

    let mut seen = HashMap::new();
    for r in &table.records {
        let key = || format!("(model={}, target={}, seed={})", r.model_id, r.target_id, r.seed);
        if r.model_id.is_empty() || r.target_id.is_empty() {
            out.push(Violation::EmptyId { what: key() });
        }
        out.extend(score_violation(key, r.score));
        let n = seen.entry((&r.model_id, &r.target_id, r.seed)).or_insert(0);
        *n += 1;
        if *n == 2 {
            out.push(Violation::DuplicateRecord { key: key() });
        }
    }

    let mut seen = HashMap::new();
    for b in &table.baselines {
        let key = || format!("(baseline target={}, seed={})", b.target_id, b.seed);
        if b.target_id.is_empty() {
            out.push(Violation::EmptyId { what: key() });
        }
        out.extend(score_violation(key, b.score));
        let n = seen.entry((&b.target_id, b.seed)).or_insert(0);
        *n += 1;
        if *n == 2 {
            out.push(Violation::DuplicateBaseline { key: key() });
        }
    }

    let with_baseline: HashSet<&str> = table.baselines.iter().map(|b| b.target_id.as_str()).collect();
    for t in table.target_ids() {
        if !with_baseline.contains(t) {
            out.push(Violation::MissingBaseline { target: t.to_string() });
        }
    }

    let all_scores = table
        .records
        .iter()
        .map(|r| r.score)
        .chain(table.baselines.iter().map(|b| b.score));
    let mut any_positive = false;
    let mut all_fraction = true;
    for s in all_scores {
        any_positive |= s > 0.0;
        all_fraction &= (0.0..=1.0).contains(&s);
    }
    if !table.records.is_empty() && any_positive && all_fraction {
        out.push(Violation::FractionScale);
    }

    for (id, kv) in &table.metadata {
        for key in GROUP_KEYS {
            if let Some(MetaValue::Number(_)) = kv.get(key) {
                out.push(Violation::GroupLabelNotText {
                    id: id.clone(),
                    key: key.to_string(),
                });
            }
        }
    }
    out
}

/// Group labels from metadata for ids on one axis. `axis_key` (e.g.
/// `model_group`) takes precedence over the shared `group` key.
pub fn group_labels<'a>(
    metadata: &Metadata,
    ids: impl IntoIterator<Item = &'a String>,
    axis_key: &str,
) -> BTreeMap<String, String> {
    ids.into_iter()
        .filter_map(|id| {
            let kv = metadata.get(id)?;
            let label = kv
                .get(axis_key)
                .or_else(|| kv.get("group"))
                .and_then(MetaValue::as_text)?;
            Some((id.clone(), label.to_string()))
        })
        .collect()
}
