//! Experiment-log data model and the CSV/JSON log readers and writers.
//!
//! A log holds one row per `(method, seed, split, epoch_eff)` with the
//! macro-averaged top-1 accuracy observed at the checkpoint saved after that
//! many effective Phase-2 epochs. Rows are grouped into [`AccuracyCurve`]s and
//! collected into a [`RunSet`] together with the identity of the
//! from-scratch baseline.
//!
//! CSV layout (header mandatory, exact names):
//!
//! ```text
//! # baseline_method=scratch_t2
//! method,seed,split,epoch_eff,acc
//! scratch_t2,0,t2_sc_patched,1,0.30
//! ```
//!
//! Leading `# key=value` lines carry free-form metadata. Instead of `acc`,
//! a CSV may list per-class counts as `correct:<class>,total:<class>` column
//! pairs; these are reduced to the macro average at parse time.
//!
//! JSON layout: `{"metadata": {...}, "rows": [{"method", "seed", "split",
//! "epoch_eff", "acc"}]}`, where a row may carry `class_counts` in place of
//! `acc`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Location, Result};

/// Baseline identifier assumed when a log does not name one.
pub const DEFAULT_BASELINE: &str = "scratch_t2";

/// Metadata key naming the from-scratch baseline.
pub const BASELINE_KEY: &str = "baseline_method";

/// Fractional tolerance on the logged epoch budget before two curves are
/// considered to have been trained for different lengths.
pub const EPOCH_BUDGET_TOLERANCE: f64 = 0.10;

const CSV_HEADER: [&str; 5] = ["method", "seed", "split", "epoch_eff", "acc"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalSplit {
    T2ScPatched,
    T2ScMasked,
    T2NscPatched,
    T2NscMasked,
    T1All,
    T2Val,
}

impl EvalSplit {
    pub const ALL: [EvalSplit; 6] = [
        EvalSplit::T2ScPatched,
        EvalSplit::T2ScMasked,
        EvalSplit::T2NscPatched,
        EvalSplit::T2NscMasked,
        EvalSplit::T1All,
        EvalSplit::T2Val,
    ];

    /// Splits every model needs before ERI can be computed.
    pub const REQUIRED: [EvalSplit; 3] = [EvalSplit::T2ScPatched, EvalSplit::T2ScMasked, EvalSplit::T2Val];

    pub fn as_str(self) -> &'static str {
        match self {
            EvalSplit::T2ScPatched => "t2_sc_patched",
            EvalSplit::T2ScMasked => "t2_sc_masked",
            EvalSplit::T2NscPatched => "t2_nsc_patched",
            EvalSplit::T2NscMasked => "t2_nsc_masked",
            EvalSplit::T1All => "t1_all",
            EvalSplit::T2Val => "t2_val",
        }
    }
}

impl fmt::Display for EvalSplit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EvalSplit {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        EvalSplit::ALL.into_iter().find(|split| split.as_str() == s).ok_or(())
    }
}

/// One checkpoint evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub effective_epoch: f64,
    pub accuracy: f64,
}

impl CurveSample {
    pub fn new(effective_epoch: f64, accuracy: f64) -> Self {
        Self {
            effective_epoch,
            accuracy,
        }
    }
}

/// Identity of a curve inside a [`RunSet`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CurveKey {
    pub method: String,
    pub seed: u64,
    pub split: EvalSplit,
}

impl CurveKey {
    pub fn new(method: impl Into<String>, seed: u64, split: EvalSplit) -> Self {
        Self {
            method: method.into(),
            seed,
            split,
        }
    }
}

impl fmt::Display for CurveKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} seed {} {}", self.method, self.seed, self.split)
    }
}

/// Accuracy samples for one `(method, seed, split)`, strictly increasing in
/// effective epoch and never empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyCurve {
    key: CurveKey,
    samples: Vec<CurveSample>,
}

impl AccuracyCurve {
    pub fn new(key: CurveKey, samples: Vec<CurveSample>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyCurve);
        }
        for sample in &samples {
            if !(sample.effective_epoch.is_finite() && sample.effective_epoch >= 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "effective epoch {} must be finite and non-negative",
                    sample.effective_epoch
                )));
            }
            if !(0.0..=1.0).contains(&sample.accuracy) {
                return Err(Error::InvalidConfig(format!(
                    "accuracy {} is not in [0, 1]",
                    sample.accuracy
                )));
            }
        }
        for pair in samples.windows(2) {
            if pair[1].effective_epoch <= pair[0].effective_epoch {
                return Err(Error::UnorderedCurve(pair[1].effective_epoch));
            }
        }
        Ok(Self { key, samples })
    }

    /// Builds a curve from `(epoch, accuracy)` pairs.
    pub fn from_points(method: impl Into<String>, seed: u64, split: EvalSplit, points: &[(f64, f64)]) -> Result<Self> {
        let samples = points.iter().map(|&(e, a)| CurveSample::new(e, a)).collect();
        Self::new(CurveKey::new(method, seed, split), samples)
    }

    /// Same grid, new accuracies. Callers guarantee the values stay in [0, 1].
    pub(crate) fn with_accuracies(&self, accuracies: impl IntoIterator<Item = f64>) -> Self {
        let samples = self
            .samples
            .iter()
            .zip(accuracies)
            .map(|(s, a)| CurveSample::new(s.effective_epoch, a))
            .collect::<Vec<_>>();
        debug_assert_eq!(samples.len(), self.samples.len());
        Self {
            key: self.key.clone(),
            samples,
        }
    }

    pub fn key(&self) -> &CurveKey {
        &self.key
    }

    pub fn method(&self) -> &str {
        &self.key.method
    }

    pub fn seed(&self) -> u64 {
        self.key.seed
    }

    pub fn split(&self) -> EvalSplit {
        self.key.split
    }

    pub fn samples(&self) -> &[CurveSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn epochs(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.effective_epoch)
    }

    pub fn accuracies(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.accuracy)
    }

    /// Last logged effective epoch, i.e. the training budget seen by this curve.
    pub fn max_epoch(&self) -> f64 {
        self.samples[self.samples.len() - 1].effective_epoch
    }

    /// Raw accuracy logged at exactly `epoch`, if that epoch is on the grid.
    pub fn accuracy_at(&self, epoch: f64) -> Option<f64> {
        self.samples
            .binary_search_by(|s| s.effective_epoch.total_cmp(&epoch))
            .ok()
            .map(|i| self.samples[i].accuracy)
    }
}

/// All curves of one study, keyed by `(method, seed, split)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSet {
    baseline_method: String,
    curves: BTreeMap<CurveKey, AccuracyCurve>,
    metadata: BTreeMap<String, String>,
}

impl RunSet {
    /// Assembles and validates a run set. Every baseline seed must carry the
    /// patched, masked and validation splits.
    pub fn new(
        baseline_method: impl Into<String>,
        curves: impl IntoIterator<Item = AccuracyCurve>,
        metadata: BTreeMap<String, String>,
    ) -> Result<Self> {
        let baseline_method = baseline_method.into();
        let mut map = BTreeMap::new();
        for curve in curves {
            let key = curve.key().clone();
            if map.insert(key.clone(), curve).is_some() {
                return Err(Error::InvalidConfig(format!("duplicate curve for {key}")));
            }
        }
        let run_set = Self {
            baseline_method,
            curves: map,
            metadata,
        };
        run_set.check_baseline()?;
        Ok(run_set)
    }

    fn check_baseline(&self) -> Result<()> {
        let seeds = self.seeds(&self.baseline_method);
        if seeds.is_empty() {
            return Err(Error::MissingBaseline(self.baseline_method.clone()));
        }
        for seed in seeds {
            for split in EvalSplit::REQUIRED {
                if self.curve(&self.baseline_method, seed, split).is_none() {
                    return Err(Error::MissingBaselineSplit {
                        method: self.baseline_method.clone(),
                        seed,
                        split: split.to_string(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn baseline_method(&self) -> &str {
        &self.baseline_method
    }

    pub fn metadata(&self) -> &BTreeMap<String, String> {
        &self.metadata
    }

    pub fn curves(&self) -> impl Iterator<Item = &AccuracyCurve> {
        self.curves.values()
    }

    pub fn curve(&self, method: &str, seed: u64, split: EvalSplit) -> Option<&AccuracyCurve> {
        self.curves.get(&CurveKey::new(method, seed, split))
    }

    /// Like [`RunSet::curve`] but reports the missing split as an error.
    pub fn require_curve(&self, method: &str, seed: u64, split: EvalSplit) -> Result<&AccuracyCurve> {
        self.curve(method, seed, split).ok_or_else(|| Error::MissingSplit {
            method: method.to_string(),
            seed,
            split: split.to_string(),
        })
    }

    /// Every method identifier, sorted.
    pub fn methods(&self) -> Vec<&str> {
        let set: BTreeSet<&str> = self.curves.keys().map(|k| k.method.as_str()).collect();
        set.into_iter().collect()
    }

    /// Methods other than the baseline, sorted.
    pub fn continual_methods(&self) -> Vec<&str> {
        self.methods()
            .into_iter()
            .filter(|m| *m != self.baseline_method)
            .collect()
    }

    pub fn has_method(&self, method: &str) -> bool {
        self.curves.keys().any(|k| k.method == method)
    }

    /// Seeds logged for `method`, ascending.
    pub fn seeds(&self, method: &str) -> Vec<u64> {
        let set: BTreeSet<u64> = self
            .curves
            .keys()
            .filter(|k| k.method == method)
            .map(|k| k.seed)
            .collect();
        set.into_iter().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogFormat {
    Csv,
    Json,
}

impl FromStr for LogFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(LogFormat::Csv),
            "json" => Ok(LogFormat::Json),
            other => Err(format!("unknown log format {other:?} (expected csv or json)")),
        }
    }
}

impl LogFormat {
    /// Guesses the format from a file extension; defaults to CSV.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => LogFormat::Json,
            _ => LogFormat::Csv,
        }
    }
}

/// Parses a log, taking the baseline from the `baseline_method` metadata key
/// or falling back to [`DEFAULT_BASELINE`].
pub fn parse_log<R: Read>(reader: R, format: LogFormat) -> Result<RunSet> {
    parse_log_with_baseline(reader, format, None)
}

/// Parses a log with an explicit baseline identifier. The override is
/// recorded in the run set metadata so that writing the log back preserves it.
pub fn parse_log_with_baseline<R: Read>(mut reader: R, format: LogFormat, baseline: Option<&str>) -> Result<RunSet> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    let (rows, mut metadata) = match format {
        LogFormat::Csv => read_csv_rows(&text)?,
        LogFormat::Json => read_json_rows(&text)?,
    };
    if let Some(b) = baseline {
        metadata.insert(BASELINE_KEY.to_string(), b.to_string());
    }
    let baseline = metadata
        .get(BASELINE_KEY)
        .cloned()
        .unwrap_or_else(|| DEFAULT_BASELINE.to_string());
    assemble(rows, baseline, metadata)
}

struct Row {
    at: Location,
    method: String,
    seed: u64,
    split: EvalSplit,
    epoch: f64,
    acc: f64,
}

fn assemble(rows: Vec<Row>, baseline: String, metadata: BTreeMap<String, String>) -> Result<RunSet> {
    let mut grouped: BTreeMap<CurveKey, Vec<(f64, f64, Location)>> = BTreeMap::new();
    for row in rows {
        grouped
            .entry(CurveKey::new(row.method, row.seed, row.split))
            .or_default()
            .push((row.epoch, row.acc, row.at));
    }
    let mut curves = Vec::with_capacity(grouped.len());
    for (key, mut points) in grouped {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        for pair in points.windows(2) {
            if pair[0].0 == pair[1].0 {
                // Report whichever duplicate appears later in the file.
                let at = match (pair[0].2, pair[1].2) {
                    (Location::Line(a), Location::Line(b)) => Location::Line(a.max(b)),
                    (Location::Row(a), Location::Row(b)) => Location::Row(a.max(b)),
                    (_, b) => b,
                };
                return Err(Error::DuplicateRow {
                    at,
                    method: key.method.clone(),
                    seed: key.seed,
                    split: key.split.to_string(),
                    epoch: pair[0].0,
                });
            }
        }
        let samples = points.into_iter().map(|(e, a, _)| CurveSample::new(e, a)).collect();
        curves.push(AccuracyCurve::new(key, samples)?);
    }
    RunSet::new(baseline, curves, metadata)
}

fn parse_epoch(raw: &str, at: Location) -> Result<f64> {
    let value: f64 = raw.trim().parse().map_err(|_| Error::Malformed {
        at,
        message: format!("epoch_eff {raw:?} is not a decimal number"),
    })?;
    if !value.is_finite() || value < 0.0 {
        return Err(Error::InvalidEpoch { at, value });
    }
    Ok(value)
}

fn check_accuracy(value: f64, at: Location) -> Result<f64> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::AccuracyOutOfRange { at, value });
    }
    Ok(value)
}

fn parse_split(raw: &str, at: Location) -> Result<EvalSplit> {
    raw.trim().parse().map_err(|_| Error::UnknownSplit {
        at,
        value: raw.to_string(),
    })
}

fn check_method(raw: &str, at: Location) -> Result<String> {
    let method = raw.trim();
    if method.is_empty() {
        return Err(Error::Malformed {
            at,
            message: "empty method identifier".into(),
        });
    }
    Ok(method.to_string())
}

/// Macro accuracy over per-class `(correct, total)` counts.
fn macro_accuracy(counts: &[(String, f64, f64)], at: Location) -> Result<f64> {
    if counts.is_empty() {
        return Err(Error::Malformed {
            at,
            message: "no per-class counts".into(),
        });
    }
    let mut sum = 0.0;
    for (class, correct, total) in counts {
        let valid = *total > 0.0 && *correct >= 0.0 && correct <= total;
        if !valid {
            return Err(Error::Malformed {
                at,
                message: format!("class {class}: invalid counts {correct}/{total}"),
            });
        }
        sum += correct / total;
    }
    check_accuracy((sum / counts.len() as f64).clamp(0.0, 1.0), at)
}

enum CsvLayout {
    Narrow,
    /// Column indices of `(class, correct, total)`.
    Wide(Vec<(String, usize, usize)>),
}

fn csv_layout(header: &csv::StringRecord) -> Result<CsvLayout> {
    let at = Location::Line(header.position().map_or(1, |p| p.line() as usize));
    let cols: Vec<&str> = header.iter().map(str::trim).collect();
    if cols == CSV_HEADER {
        return Ok(CsvLayout::Narrow);
    }
    if cols.len() < 6 || cols[..4] != CSV_HEADER[..4] {
        return Err(Error::Malformed {
            at,
            message: format!(
                "header must be `{}` (or the first four columns followed by correct:/total: pairs), got `{}`",
                CSV_HEADER.join(","),
                cols.join(",")
            ),
        });
    }
    let mut correct = BTreeMap::new();
    let mut total = BTreeMap::new();
    for (i, col) in cols.iter().enumerate().skip(4) {
        if let Some(class) = col.strip_prefix("correct:") {
            correct.insert(class.to_string(), i);
        } else if let Some(class) = col.strip_prefix("total:") {
            total.insert(class.to_string(), i);
        } else {
            return Err(Error::Malformed {
                at,
                message: format!("unexpected column {col:?}"),
            });
        }
    }
    if correct.keys().ne(total.keys()) {
        return Err(Error::Malformed {
            at,
            message: "every correct:<class> column needs a matching total:<class>".into(),
        });
    }
    Ok(CsvLayout::Wide(
        correct
            .into_iter()
            .map(|(class, c)| {
                let t = total[&class];
                (class, c, t)
            })
            .collect(),
    ))
}

fn read_csv_rows(text: &str) -> Result<(Vec<Row>, BTreeMap<String, String>)> {
    let mut metadata = BTreeMap::new();
    for line in text.lines() {
        let Some(comment) = line.trim_start().strip_prefix('#') else {
            continue;
        };
        if let Some((k, v)) = comment.split_once('=') {
            metadata.insert(k.trim().to_string(), v.trim().to_string());
        }
    }

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    let layout = csv_layout(&header)?;
    let width = header.len();

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let at = Location::Line(record.position().map_or(0, |p| p.line() as usize));
        if record.len() != width {
            return Err(Error::Malformed {
                at,
                message: format!("expected {width} fields, found {}", record.len()),
            });
        }
        let method = check_method(&record[0], at)?;
        let seed = record[1].trim().parse().map_err(|_| Error::Malformed {
            at,
            message: format!("seed {:?} is not a non-negative integer", &record[1]),
        })?;
        let split = parse_split(&record[2], at)?;
        let epoch = parse_epoch(&record[3], at)?;
        let acc = match &layout {
            CsvLayout::Narrow => {
                let raw = &record[4];
                let value: f64 = raw.trim().parse().map_err(|_| Error::Malformed {
                    at,
                    message: format!("acc {raw:?} is not a decimal number"),
                })?;
                check_accuracy(value, at)?
            }
            CsvLayout::Wide(columns) => {
                let mut counts = Vec::with_capacity(columns.len());
                for (class, c, t) in columns {
                    let num = |i: usize| -> Result<f64> {
                        record[i].trim().parse().map_err(|_| Error::Malformed {
                            at,
                            message: format!("class {class}: count {:?} is not a number", &record[i]),
                        })
                    };
                    counts.push((class.clone(), num(*c)?, num(*t)?));
                }
                macro_accuracy(&counts, at)?
            }
        };
        rows.push(Row {
            at,
            method,
            seed,
            split,
            epoch,
            acc,
        });
    }
    Ok((rows, metadata))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonLog {
    #[serde(default)]
    metadata: BTreeMap<String, serde_json::Value>,
    rows: Vec<JsonRow>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonRow {
    method: String,
    seed: u64,
    split: String,
    epoch_eff: f64,
    #[serde(default)]
    acc: Option<f64>,
    #[serde(default)]
    class_counts: Option<BTreeMap<String, JsonClassCount>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonClassCount {
    correct: f64,
    total: f64,
}

fn read_json_rows(text: &str) -> Result<(Vec<Row>, BTreeMap<String, String>)> {
    let log: JsonLog = serde_json::from_str(text)?;
    let metadata = log
        .metadata
        .into_iter()
        .map(|(k, v)| {
            let v = match v {
                serde_json::Value::String(s) => s,
                other => other.to_string(),
            };
            (k, v)
        })
        .collect();
    let mut rows = Vec::with_capacity(log.rows.len());
    for (i, row) in log.rows.into_iter().enumerate() {
        let at = Location::Row(i);
        let method = check_method(&row.method, at)?;
        let split = parse_split(&row.split, at)?;
        if !row.epoch_eff.is_finite() || row.epoch_eff < 0.0 {
            return Err(Error::InvalidEpoch {
                at,
                value: row.epoch_eff,
            });
        }
        let acc = match (row.acc, row.class_counts) {
            (Some(acc), None) => check_accuracy(acc, at)?,
            (None, Some(counts)) => {
                let counts: Vec<_> = counts
                    .into_iter()
                    .map(|(class, c)| (class, c.correct, c.total))
                    .collect();
                macro_accuracy(&counts, at)?
            }
            _ => {
                return Err(Error::Malformed {
                    at,
                    message: "row needs exactly one of `acc` or `class_counts`".into(),
                })
            }
        };
        rows.push(Row {
            at,
            method,
            seed: row.seed,
            split,
            epoch: row.epoch_eff,
            acc,
        });
    }
    Ok((rows, metadata))
}

#[derive(Serialize)]
struct JsonOutRow<'a> {
    method: &'a str,
    seed: u64,
    split: EvalSplit,
    epoch_eff: f64,
    acc: f64,
}

/// Writes a run set in the narrow log layout. Rows come out sorted by
/// `(method, seed, split, epoch)`; numbers use the shortest representation
/// that parses back to the same `f64`.
pub fn write_log<W: Write>(run_set: &RunSet, mut writer: W, format: LogFormat) -> Result<()> {
    match format {
        LogFormat::Csv => {
            for (k, v) in &run_set.metadata {
                if k.contains(['=', '\n', '\r']) || k.trim() != k || v.contains(['\n', '\r']) || v.trim() != v {
                    return Err(Error::InvalidConfig(format!(
                        "metadata entry {k:?} cannot be written to a CSV comment"
                    )));
                }
                writeln!(writer, "# {k}={v}")?;
            }
            let mut csv = csv::Writer::from_writer(&mut writer);
            csv.write_record(CSV_HEADER)?;
            for curve in run_set.curves() {
                for s in curve.samples() {
                    csv.write_record([
                        curve.method().to_string(),
                        curve.seed().to_string(),
                        curve.split().to_string(),
                        s.effective_epoch.to_string(),
                        s.accuracy.to_string(),
                    ])?;
                }
            }
            csv.flush()?;
        }
        LogFormat::Json => {
            let rows: Vec<JsonOutRow> = run_set
                .curves()
                .flat_map(|c| {
                    c.samples().iter().map(move |s| JsonOutRow {
                        method: c.method(),
                        seed: c.seed(),
                        split: c.split(),
                        epoch_eff: s.effective_epoch,
                        acc: s.accuracy,
                    })
                })
                .collect();
            let doc = serde_json::json!({ "metadata": run_set.metadata, "rows": rows });
            serde_json::to_writer_pretty(&mut writer, &doc)?;
            writeln!(writer)?;
        }
    }
    Ok(())
}

/// Which side of a method/baseline comparison lacks a seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingFrom {
    Method,
    Baseline,
}

/// A comparability warning between a method and the baseline.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Finding {
    MissingSeed {
        seed: u64,
        missing_from: MissingFrom,
    },
    MissingSplit {
        seed: u64,
        split: EvalSplit,
    },
    EpochBudgetMismatch {
        seed: u64,
        split: EvalSplit,
        method_max_epoch: f64,
        baseline_max_epoch: f64,
    },
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::MissingSeed { seed, missing_from } => match missing_from {
                MissingFrom::Method => write!(f, "missing seed {seed}: logged for the baseline only"),
                MissingFrom::Baseline => write!(f, "missing seed {seed}: not logged for the baseline"),
            },
            Finding::MissingSplit { seed, split } => {
                write!(f, "missing split: seed {seed} has no {split} curve")
            }
            Finding::EpochBudgetMismatch {
                seed,
                split,
                method_max_epoch,
                baseline_max_epoch,
            } => write!(
                f,
                "epoch-budget mismatch: seed {seed} {split} ends at e={method_max_epoch}, baseline at e={baseline_max_epoch}"
            ),
        }
    }
}

/// Lists everything that makes `method` less than fully comparable with the
/// baseline: unmatched seeds, missing mandatory splits, and curves whose
/// epoch budget differs from the baseline's by more than
/// [`EPOCH_BUDGET_TOLERANCE`].
pub fn validate_comparability(run_set: &RunSet, method: &str) -> Result<Vec<Finding>> {
    if !run_set.has_method(method) {
        return Err(Error::UnknownMethod(method.to_string()));
    }
    let baseline = run_set.baseline_method();
    let method_seeds: BTreeSet<u64> = run_set.seeds(method).into_iter().collect();
    let baseline_seeds: BTreeSet<u64> = run_set.seeds(baseline).into_iter().collect();

    let mut findings = Vec::new();
    for &seed in baseline_seeds.difference(&method_seeds) {
        findings.push(Finding::MissingSeed {
            seed,
            missing_from: MissingFrom::Method,
        });
    }
    for &seed in method_seeds.difference(&baseline_seeds) {
        findings.push(Finding::MissingSeed {
            seed,
            missing_from: MissingFrom::Baseline,
        });
    }
    for &seed in &method_seeds {
        for split in EvalSplit::REQUIRED {
            if run_set.curve(method, seed, split).is_none() {
                findings.push(Finding::MissingSplit { seed, split });
            }
        }
        for split in EvalSplit::ALL {
            let (Some(ours), Some(theirs)) = (run_set.curve(method, seed, split), run_set.curve(baseline, seed, split))
            else {
                continue;
            };
            let (m, b) = (ours.max_epoch(), theirs.max_epoch());
            if (m - b).abs() > EPOCH_BUDGET_TOLERANCE * b {
                findings.push(Finding::EpochBudgetMismatch {
                    seed,
                    split,
                    method_max_epoch: m,
                    baseline_max_epoch: b,
                });
            }
        }
    }
    Ok(findings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const MINIMAL: &str = "\
method,seed,split,epoch_eff,acc
scratch_t2,0,t2_sc_patched,1,0.30
scratch_t2,0,t2_sc_patched,2,0.55
scratch_t2,0,t2_sc_masked,1,0.28
scratch_t2,0,t2_val,1,0.31
";

    fn csv(text: &str) -> Result<RunSet> {
        parse_log(text.as_bytes(), LogFormat::Csv)
    }

    #[test]
    fn minimal_csv() {
        let rs = csv(MINIMAL).unwrap();
        assert_eq!(rs.baseline_method(), "scratch_t2");
        let curve = rs.curve("scratch_t2", 0, EvalSplit::T2ScPatched).unwrap();
        assert_eq!(
            curve.samples(),
            &[CurveSample::new(1.0, 0.30), CurveSample::new(2.0, 0.55)]
        );
    }

    #[test]
    fn accuracy_out_of_range_reports_line() {
        let text = MINIMAL.replace("2,0.55", "2,1.2");
        match csv(&text) {
            Err(Error::AccuracyOutOfRange { at, value }) => {
                assert_eq!(at, Location::Line(3));
                assert_eq!(value, 1.2);
            }
            other => panic!("unexpected {other:?}"),
        }
        let msg = csv(&text).unwrap_err().to_string();
        assert!(msg.contains("accuracy out of range"), "{msg}");
    }

    #[test]
    fn line_numbers_count_metadata_comments() {
        let text = format!("# dataset=cifar100\n# note=x\n{}", MINIMAL.replace("1,0.28", "1,abc"));
        match csv(&text) {
            Err(Error::Malformed { at, .. }) => assert_eq!(at, Location::Line(6)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_rows_rejected() {
        let text = format!("{MINIMAL}scratch_t2,0,t2_sc_patched,2.0,0.56\n");
        assert!(matches!(
            csv(&text),
            Err(Error::DuplicateRow {
                at: Location::Line(6),
                ..
            })
        ));
    }

    #[test]
    fn unknown_split_rejected() {
        let text = format!("{MINIMAL}scratch_t2,0,t3_whatever,1,0.5\n");
        assert!(matches!(csv(&text), Err(Error::UnknownSplit { .. })));
    }

    #[test]
    fn header_must_match_exactly() {
        let text = MINIMAL.replace("epoch_eff", "epoch");
        assert!(matches!(
            csv(&text),
            Err(Error::Malformed {
                at: Location::Line(1),
                ..
            })
        ));
    }

    #[test]
    fn baseline_needs_mandatory_splits() {
        let text: String = MINIMAL
            .lines()
            .filter(|l| !l.contains("t2_val"))
            .map(|l| format!("{l}\n"))
            .collect();
        assert!(matches!(csv(&text), Err(Error::MissingBaselineSplit { .. })));
        assert!(matches!(
            parse_log_with_baseline(MINIMAL.as_bytes(), LogFormat::Csv, Some("nope")),
            Err(Error::MissingBaseline(_))
        ));
    }

    #[test]
    fn optional_epoch_zero_and_nsc_splits_accepted() {
        let text = format!("{MINIMAL}scratch_t2,0,t2_sc_patched,0,0.5\nscratch_t2,0,t2_nsc_patched,1,0.7\n");
        let rs = csv(&text).unwrap();
        let c = rs.curve("scratch_t2", 0, EvalSplit::T2ScPatched).unwrap();
        assert_eq!(c.epochs().collect::<Vec<_>>(), vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn wide_format_reduces_to_macro_accuracy() {
        let text = "\
method,seed,split,epoch_eff,correct:c1,total:c1,correct:c2,total:c2
scratch_t2,0,t2_sc_patched,1,8,10,6,10
scratch_t2,0,t2_sc_masked,1,5,10,5,10
scratch_t2,0,t2_val,1,10,10,0,10
";
        let rs = csv(text).unwrap();
        let acc = rs.curve("scratch_t2", 0, EvalSplit::T2ScPatched).unwrap().samples()[0].accuracy;
        assert!((acc - 0.70).abs() < 1e-15);
    }

    #[test]
    fn json_log_parses_and_keeps_metadata() {
        let text = r#"{
            "metadata": {"dataset": "cifar100", "tau": 0.6},
            "rows": [
                {"method": "base", "seed": 1, "split": "t2_sc_patched", "epoch_eff": 1, "acc": 0.4},
                {"method": "base", "seed": 1, "split": "t2_sc_masked", "epoch_eff": 1, "acc": 0.3},
                {"method": "base", "seed": 1, "split": "t2_val", "epoch_eff": 1,
                 "class_counts": {"a": {"correct": 8, "total": 10}, "b": {"correct": 6, "total": 10}}}
            ]
        }"#;
        let rs = parse_log_with_baseline(text.as_bytes(), LogFormat::Json, Some("base")).unwrap();
        assert_eq!(rs.metadata()["dataset"], "cifar100");
        assert_eq!(rs.metadata()["tau"], "0.6");
        let val = rs.curve("base", 1, EvalSplit::T2Val).unwrap().samples()[0].accuracy;
        assert!((val - 0.7).abs() < 1e-15);

        let bad = text.replace("\"acc\": 0.3", "\"acc\": -0.1");
        assert!(matches!(
            parse_log_with_baseline(bad.as_bytes(), LogFormat::Json, Some("base")),
            Err(Error::AccuracyOutOfRange {
                at: Location::Row(1),
                ..
            })
        ));
    }

    fn comparable_fixture(method_seeds: &[u64], method_budget: f64) -> RunSet {
        let mut curves = Vec::new();
        let grid = |budget: f64| -> Vec<(f64, f64)> { (1..=budget as u32).map(|e| (e as f64, 0.5)).collect() };
        for seed in 0..4 {
            for split in EvalSplit::REQUIRED {
                curves.push(AccuracyCurve::from_points("scratch_t2", seed, split, &grid(50.0)).unwrap());
            }
        }
        for &seed in method_seeds {
            for split in EvalSplit::REQUIRED {
                let budget = if seed == 0 && split == EvalSplit::T2ScPatched {
                    method_budget
                } else {
                    50.0
                };
                curves.push(AccuracyCurve::from_points("sgd", seed, split, &grid(budget)).unwrap());
            }
        }
        RunSet::new("scratch_t2", curves, BTreeMap::new()).unwrap()
    }

    #[test]
    fn comparability_findings() {
        let rs = comparable_fixture(&[0, 1, 2, 3], 50.0);
        assert!(validate_comparability(&rs, "sgd").unwrap().is_empty());
        assert!(validate_comparability(&rs, "scratch_t2").unwrap().is_empty());

        let rs = comparable_fixture(&[0, 1, 2], 50.0);
        assert_eq!(
            validate_comparability(&rs, "sgd").unwrap(),
            vec![Finding::MissingSeed {
                seed: 3,
                missing_from: MissingFrom::Method
            }]
        );

        let rs = comparable_fixture(&[0, 1, 2, 3], 25.0);
        assert_eq!(
            validate_comparability(&rs, "sgd").unwrap(),
            vec![Finding::EpochBudgetMismatch {
                seed: 0,
                split: EvalSplit::T2ScPatched,
                method_max_epoch: 25.0,
                baseline_max_epoch: 50.0,
            }]
        );
        // 46/50 is within tolerance.
        let rs = comparable_fixture(&[0, 1, 2, 3], 46.0);
        assert!(validate_comparability(&rs, "sgd").unwrap().is_empty());

        assert!(matches!(
            validate_comparability(&rs, "ewc"),
            Err(Error::UnknownMethod(_))
        ));
    }

    fn arb_run_set() -> impl Strategy<Value = RunSet> {
        let methods = prop::sample::subsequence(vec!["derpp", "sgd", "gpm"], 0..=3);
        (
            methods,
            prop::collection::vec(0.0f64..=1.0, 1..6),
            1u64..4,
            prop::bool::ANY,
        )
            .prop_map(|(methods, accs, n_seeds, with_meta)| {
                let mut curves = Vec::new();
                let all: Vec<&str> = std::iter::once("scratch_t2").chain(methods).collect();
                for (mi, m) in all.iter().enumerate() {
                    for seed in 0..n_seeds {
                        for (si, split) in EvalSplit::ALL.into_iter().enumerate() {
                            let pts: Vec<(f64, f64)> = accs
                                .iter()
                                .enumerate()
                                .map(|(i, a)| (i as f64 * 0.5 + (mi + si) as f64 / 7.0, *a))
                                .collect();
                            curves.push(AccuracyCurve::from_points(*m, seed, split, &pts).unwrap());
                        }
                    }
                }
                let mut meta = BTreeMap::new();
                if with_meta {
                    meta.insert("dataset".to_string(), "cifar100 8+4".to_string());
                }
                RunSet::new("scratch_t2", curves, meta).unwrap()
            })
    }

    proptest! {
        #[test]
        fn write_then_parse_round_trips(rs in arb_run_set(), json in prop::bool::ANY) {
            let format = if json { LogFormat::Json } else { LogFormat::Csv };
            let mut buf = Vec::new();
            write_log(&rs, &mut buf, format).unwrap();
            let back = parse_log(buf.as_slice(), format).unwrap();
            prop_assert_eq!(back, rs);
        }

        #[test]
        fn row_order_does_not_matter(rs in arb_run_set(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut buf = Vec::new();
            write_log(&rs, &mut buf, LogFormat::Csv).unwrap();
            let text = String::from_utf8(buf).unwrap();
            let mut lines: Vec<&str> = text.lines().collect();
            let header_at = lines.iter().position(|l| l.starts_with("method,")).unwrap();
            let mut body = lines.split_off(header_at + 1);
            body.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            lines.extend(body);
            let shuffled = lines.join("\n");
            prop_assert_eq!(csv(&shuffled).unwrap(), rs);
        }
    }
}
