//! Report artifacts: panel time series, the AD(tau) heatmap, the summary
//! table, and synthetic curves for demos and tests.
//!
//! All CSV exports are deterministic byte-for-byte. Numbers in machine
//! readable exports use the shortest representation that round-trips;
//! the summary table is a display format rounded half-up to 3 decimals.
//!
//! Fixed headers:
//!
//! | export            | header                                                              |
//! |-------------------|---------------------------------------------------------------------|
//! | summary           | `strategy,PD,SFR_rel,acc_SC_patch,acc_SC_mask,acc_T1,acc_NSC_patch` |
//! | summary (full)    | `strategy,n_seeds,<col>_mean,<col>_sd,...`                          |
//! | heatmap           | `method,<tau>,<tau>,...`                                            |
//! | heatmap per seed  | `method,seed,tau,ad,censored`                                       |
//! | panels            | `panel,method,seed,epoch_eff,value`                                 |

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::aggregate::{GridCell, MeanSd, SummaryRow};
use crate::error::{Error, Result};
use crate::logio::{AccuracyCurve, CurveKey, CurveSample, EvalSplit, RunSet};
use crate::metrics::{self, AdAtThreshold, AdaptationDelay, CensoredSide, ThresholdConfig};

/// Sentinel for heatmap cells where no seed crossed the threshold.
pub const HATCHED: &str = "HATCHED";
/// Placeholder for absent summary cells.
pub const ABSENT: &str = "--";

pub const SUMMARY_HEADER: [&str; 7] = [
    "strategy",
    "PD",
    "SFR_rel",
    "acc_SC_patch",
    "acc_SC_mask",
    "acc_T1",
    "acc_NSC_patch",
];
pub const PANELS_HEADER: [&str; 5] = ["panel", "method", "seed", "epoch_eff", "value"];
pub const HEATMAP_SEEDS_HEADER: [&str; 5] = ["method", "seed", "tau", "ad", "censored"];

fn csv_string(rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Rounds half away from zero at `decimals` places, working on the shortest
/// decimal representation of `x` so that tabulated inputs like `0.0275`
/// round as written.
pub fn format_half_up(x: f64, decimals: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let repr = format!("{}", x.abs());
    let (int_part, frac_part) = repr.split_once('.').unwrap_or((&repr, ""));
    // Shortest repr of finite f64 never uses exponent notation with `{}`.
    let mut digits: Vec<u8> = int_part
        .bytes()
        .chain(frac_part.bytes().chain(std::iter::repeat(b'0')).take(decimals))
        .map(|b| b - b'0')
        .collect();
    let round_up = frac_part.as_bytes().get(decimals).is_some_and(|d| *d >= b'5');
    if round_up {
        let mut i = digits.len();
        loop {
            if i == 0 {
                digits.insert(0, 1);
                break;
            }
            i -= 1;
            if digits[i] == 9 {
                digits[i] = 0;
            } else {
                digits[i] += 1;
                break;
            }
        }
    }
    let split = digits.len() - decimals;
    let int_digits: String = digits[..split].iter().map(|d| char::from(b'0' + d)).collect();
    let frac_digits: String = digits[split..].iter().map(|d| char::from(b'0' + d)).collect();
    let is_zero = digits.iter().all(|d| *d == 0);
    let sign = if x < 0.0 && !is_zero { "-" } else { "" };
    let int_digits = if int_digits.is_empty() {
        "0".to_string()
    } else {
        int_digits
    };
    if decimals == 0 {
        format!("{sign}{int_digits}")
    } else {
        format!("{sign}{int_digits}.{frac_digits}")
    }
}

fn display_cell(stat: Option<&MeanSd>) -> String {
    match stat {
        None => ABSENT.to_string(),
        Some(s) => match s.sd {
            Some(sd) => format!("{}±{}", format_half_up(s.mean, 3), format_half_up(sd, 3)),
            None => format_half_up(s.mean, 3),
        },
    }
}

/// Display cells mirroring the published summary, header first: `mean±sd`
/// to 3 decimals, `mean` alone for a single seed, `--` where a value does
/// not apply.
pub fn summary_table(rows: &[SummaryRow]) -> Vec<Vec<String>> {
    let header = SUMMARY_HEADER.iter().map(|s| s.to_string()).collect();
    let body = rows.iter().map(|r| {
        vec![
            r.method.clone(),
            display_cell(r.pd.as_ref()),
            display_cell(r.sfr.as_ref()),
            display_cell(r.acc_sc_patch.as_ref()),
            display_cell(r.acc_sc_mask.as_ref()),
            display_cell(r.acc_t1.as_ref()),
            display_cell(r.acc_nsc_patch.as_ref()),
        ]
    });
    std::iter::once(header).chain(body).collect()
}

/// CSV form of [`summary_table`].
pub fn summary_export(rows: &[SummaryRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::EmptyInput("summary rows"));
    }
    csv_string(summary_table(rows))
}

/// Full-precision companion to [`summary_export`]; blank cells where absent.
pub fn summary_export_full(rows: &[SummaryRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::EmptyInput("summary rows"));
    }
    let mut header = vec!["strategy".to_string(), "n_seeds".to_string()];
    for col in &SUMMARY_HEADER[1..] {
        header.push(format!("{col}_mean"));
        header.push(format!("{col}_sd"));
    }
    let body = rows.iter().map(|r| {
        let mut row = vec![r.method.clone(), r.n_seeds.to_string()];
        for stat in [
            &r.pd,
            &r.sfr,
            &r.acc_sc_patch,
            &r.acc_sc_mask,
            &r.acc_t1,
            &r.acc_nsc_patch,
        ] {
            row.push(stat.map(|s| s.mean.to_string()).unwrap_or_default());
            row.push(stat.and_then(|s| s.sd).map(|v| v.to_string()).unwrap_or_default());
        }
        row
    });
    csv_string(std::iter::once(header).chain(body))
}

/// Two decimals when that is exact, otherwise the shortest representation.
pub fn format_tau(tau: f64) -> String {
    let two = format!("{tau:.2}");
    if two.parse::<f64>() == Ok(tau) {
        two
    } else {
        tau.to_string()
    }
}

/// Heatmap matrix: one row per method (alphabetical), one column per
/// threshold (ascending), cells hold the seed-mean AD or `HATCHED`.
pub fn heatmap_export(grid: &BTreeMap<String, Vec<GridCell>>) -> Result<String> {
    let Some(first) = grid.values().next() else {
        return Err(Error::EmptyInput("heatmap grid"));
    };
    let taus: Vec<f64> = first.iter().map(|c| c.tau).collect();
    if grid
        .values()
        .any(|cells| cells.len() != taus.len() || cells.iter().zip(&taus).any(|(c, t)| c.tau != *t))
    {
        return Err(Error::MismatchedGrid);
    }
    let header = std::iter::once("method".to_string()).chain(taus.iter().map(|t| format_tau(*t)));
    let body = grid.iter().map(|(method, cells)| {
        std::iter::once(method.clone())
            .chain(cells.iter().map(|c| match c.mean_ad {
                Some(v) if !c.is_hatched() => v.to_string(),
                _ => HATCHED.to_string(),
            }))
            .collect()
    });
    csv_string(std::iter::once(header.collect()).chain(body))
}

fn censored_label(side: Option<CensoredSide>) -> &'static str {
    match side {
        None => "",
        Some(CensoredSide::Continual) => "continual",
        Some(CensoredSide::Scratch) => "scratch",
        Some(CensoredSide::Both) => "both",
    }
}

/// Long-form per-seed AD grid.
pub fn heatmap_per_seed_export(grids: &BTreeMap<String, Vec<(u64, Vec<AdAtThreshold>)>>) -> Result<String> {
    let header = HEATMAP_SEEDS_HEADER.iter().map(|s| s.to_string()).collect();
    let mut rows = vec![header];
    for (method, per_seed) in grids {
        for (seed, grid) in per_seed {
            for point in grid {
                rows.push(vec![
                    method.clone(),
                    seed.to_string(),
                    format_tau(point.tau),
                    point.ad.value().map_or_else(|| HATCHED.to_string(), |v| v.to_string()),
                    censored_label(point.ad.censored_side()).to_string(),
                ]);
            }
        }
    }
    csv_string(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Panel {
    /// Smoothed patched shortcut-class accuracy.
    AAccuracy,
    /// `A_S(e) - A_CL(e)` on the patched shortcut classes.
    BPdTimeseries,
    /// `Delta_CL(e) - Delta_S(e)`.
    CSfrTimeseries,
}

impl Panel {
    pub fn as_str(self) -> &'static str {
        match self {
            Panel::AAccuracy => "A_ACCURACY",
            Panel::BPdTimeseries => "B_PD_TIMESERIES",
            Panel::CSfrTimeseries => "C_SFR_TIMESERIES",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PanelSeries {
    pub panel: Panel,
    pub method: String,
    pub seed: u64,
    pub points: Vec<(f64, f64)>,
    /// AD at the primary threshold, on panel A continual series.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ad: Option<AdaptationDelay>,
}

/// Epochs left out of a panel B/C series because one of the curves was not
/// evaluated there.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DroppedEpochs {
    pub panel: Panel,
    pub method: String,
    pub seed: u64,
    pub epochs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct PanelReport {
    pub series: Vec<PanelSeries>,
    pub dropped: Vec<DroppedEpochs>,
}

/// Aligns curves on the intersection of their epoch grids. Returns the common
/// epochs, per-curve accuracies on them, and the epochs dropped from the union.
fn align(curves: &[&AccuracyCurve]) -> (Vec<f64>, Vec<Vec<f64>>, Vec<f64>) {
    let bits = |c: &AccuracyCurve| c.epochs().map(f64::to_bits).collect::<BTreeSet<u64>>();
    let mut common = bits(curves[0]);
    let mut union = common.clone();
    for c in &curves[1..] {
        let b = bits(c);
        common = common.intersection(&b).copied().collect();
        union.extend(b);
    }
    let mut epochs: Vec<f64> = common.iter().map(|b| f64::from_bits(*b)).collect();
    epochs.sort_by(f64::total_cmp);
    let mut dropped: Vec<f64> = union.difference(&common).map(|b| f64::from_bits(*b)).collect();
    dropped.sort_by(f64::total_cmp);
    let values = curves
        .iter()
        .map(|c| {
            epochs
                .iter()
                .map(|e| c.accuracy_at(*e).expect("epoch in intersection"))
                .collect()
        })
        .collect();
    (epochs, values, dropped)
}

/// Builds panels A, B and C for every continual method and seed against the
/// same-seed baseline, plus panel A for the baseline itself.
pub fn panel_series(run_set: &RunSet, cfg: &ThresholdConfig) -> Result<PanelReport> {
    cfg.validate()?;
    let baseline = run_set.baseline_method();
    let mut report = PanelReport::default();

    for seed in run_set.seeds(baseline) {
        let s = run_set.require_curve(baseline, seed, EvalSplit::T2ScPatched)?;
        report.series.push(panel_a(s, cfg, None));
    }

    for method in run_set.continual_methods() {
        for seed in run_set.seeds(method) {
            if run_set.curve(baseline, seed, EvalSplit::T2ScPatched).is_none() {
                return Err(Error::MissingPairedSeed {
                    method: method.to_string(),
                    seed,
                });
            }
            let s_p = run_set.require_curve(baseline, seed, EvalSplit::T2ScPatched)?;
            let s_m = run_set.require_curve(baseline, seed, EvalSplit::T2ScMasked)?;
            let cl_p = run_set.require_curve(method, seed, EvalSplit::T2ScPatched)?;
            let cl_m = run_set.require_curve(method, seed, EvalSplit::T2ScMasked)?;

            let ad = metrics::adaptation_delay(cl_p, s_p, cfg);
            report.series.push(panel_a(cl_p, cfg, Some(ad)));

            let (epochs, v, dropped) = align(&[s_p, cl_p]);
            push_aligned(&mut report, Panel::BPdTimeseries, method, seed, &epochs, dropped, |i| {
                metrics::performance_deficit(v[0][i], v[1][i])
            })?;

            let (epochs, v, dropped) = align(&[cl_p, cl_m, s_p, s_m]);
            push_aligned(
                &mut report,
                Panel::CSfrTimeseries,
                method,
                seed,
                &epochs,
                dropped,
                |i| {
                    metrics::sfr_rel(
                        metrics::masking_delta(v[0][i], v[1][i]),
                        metrics::masking_delta(v[2][i], v[3][i]),
                    )
                },
            )?;
        }
    }
    Ok(report)
}

fn panel_a(curve: &AccuracyCurve, cfg: &ThresholdConfig, ad: Option<AdaptationDelay>) -> PanelSeries {
    let smoothed = metrics::smooth_aligned(curve, cfg.smoothing_width, cfg.alignment);
    PanelSeries {
        panel: Panel::AAccuracy,
        method: curve.method().to_string(),
        seed: curve.seed(),
        points: smoothed
            .samples()
            .iter()
            .map(|s| (s.effective_epoch, s.accuracy))
            .collect(),
        ad,
    }
}

fn push_aligned(
    report: &mut PanelReport,
    panel: Panel,
    method: &str,
    seed: u64,
    epochs: &[f64],
    dropped: Vec<f64>,
    value: impl Fn(usize) -> f64,
) -> Result<()> {
    if epochs.is_empty() {
        return Err(Error::EmptyIntersection {
            method: method.to_string(),
            seed,
            panel: panel.as_str(),
        });
    }
    report.series.push(PanelSeries {
        panel,
        method: method.to_string(),
        seed,
        points: epochs.iter().enumerate().map(|(i, e)| (*e, value(i))).collect(),
        ad: None,
    });
    if !dropped.is_empty() {
        report.dropped.push(DroppedEpochs {
            panel,
            method: method.to_string(),
            seed,
            epochs: dropped,
        });
    }
    Ok(())
}

pub fn panels_export(report: &PanelReport) -> Result<String> {
    let header = PANELS_HEADER.iter().map(|s| s.to_string()).collect();
    let mut rows = vec![header];
    for s in &report.series {
        for (e, v) in &s.points {
            rows.push(vec![
                s.panel.as_str().to_string(),
                s.method.clone(),
                s.seed.to_string(),
                e.to_string(),
                v.to_string(),
            ]);
        }
    }
    csv_string(rows)
}

/// Footnote lines listing epochs dropped from panels B and C.
pub fn panel_footnotes(report: &PanelReport) -> Vec<String> {
    report
        .dropped
        .iter()
        .map(|d| {
            let epochs: Vec<String> = d.epochs.iter().map(f64::to_string).collect();
            format!(
                "{} {} seed {}: epochs not evaluated on every curve were dropped: {}",
                d.panel.as_str(),
                d.method,
                d.seed,
                epochs.join(", ")
            )
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SynthShape {
    /// `asymptote / (1 + exp(-rate * (e - midpoint)))`.
    Logistic,
    /// 0 before `midpoint`, `asymptote` from `midpoint` on.
    Step,
    /// `asymptote * (1 - exp(-rate * e))`, approaching the asymptote from below.
    Plateau,
}

impl std::str::FromStr for SynthShape {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "logistic" => Ok(SynthShape::Logistic),
            "step" => Ok(SynthShape::Step),
            "plateau" => Ok(SynthShape::Plateau),
            other => Err(format!("unknown curve shape {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthCurveSpec {
    pub shape: SynthShape,
    pub asymptote: f64,
    pub midpoint: f64,
    pub rate: f64,
    pub noise_sd: f64,
    pub rng_seed: u64,
    /// Number of integer effective epochs, starting at 1.
    pub budget: u32,
}

impl SynthCurveSpec {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidSynthSpec(m));
        if !(0.0..=1.0).contains(&self.asymptote) {
            return fail(format!("asymptote {} must lie in [0, 1]", self.asymptote));
        }
        if !(self.midpoint > 0.0 && self.midpoint.is_finite()) {
            return fail(format!("midpoint {} must be positive", self.midpoint));
        }
        if !(self.rate > 0.0 && self.rate.is_finite()) {
            return fail(format!("rate {} must be positive", self.rate));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return fail(format!("noise_sd {} must be non-negative", self.noise_sd));
        }
        if self.budget == 0 {
            return fail("budget must be at least one epoch".into());
        }
        Ok(())
    }

    fn mean_at(&self, e: f64) -> f64 {
        match self.shape {
            SynthShape::Logistic => self.asymptote / (1.0 + (-self.rate * (e - self.midpoint)).exp()),
            SynthShape::Step => {
                if e >= self.midpoint {
                    self.asymptote
                } else {
                    0.0
                }
            }
            SynthShape::Plateau => self.asymptote * (1.0 - (-self.rate * e).exp()),
        }
    }
}

/// Generates a curve on epochs `1..=budget` with Gaussian noise from a
/// ChaCha8 stream seeded by `rng_seed`, clipped to [0, 1].
pub fn synth_curve(spec: &SynthCurveSpec, key: CurveKey) -> Result<AccuracyCurve> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let noise = Normal::new(0.0, spec.noise_sd).map_err(|e| Error::InvalidSynthSpec(e.to_string()))?;
    let samples = (1..=spec.budget)
        .map(|e| {
            let e = f64::from(e);
            let jitter = if spec.noise_sd > 0.0 {
                noise.sample(&mut rng)
            } else {
                0.0
            };
            CurveSample::new(e, (spec.mean_at(e) + jitter).clamp(0.0, 1.0))
        })
        .collect();
    AccuracyCurve::new(key, samples)
}

/// One model in a synthetic study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthModel {
    pub curve: SynthCurveSpec,
    /// Patched minus masked accuracy applied at every epoch.
    pub masking_delta: f64,
}

/// A complete synthetic study: one baseline and one continual method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthStudy {
    pub baseline_method: String,
    pub method: String,
    pub seeds: u32,
    pub baseline: SynthModel,
    pub continual: SynthModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// Cue-accelerated learner: crosses early, ends higher, leans on the cue.
    RedFlag,
    /// Faster but slightly worse and hurt by the cue, baseline mildly helped.
    BenignAvoidance,
    /// Continual learner plateaus at 0.45 and never reaches the threshold.
    CensoredContinual,
    /// Baseline plateaus at 0.45.
    PlateauScratch,
}

impl std::str::FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "red-flag" => Ok(Scenario::RedFlag),
            "benign-avoidance" => Ok(Scenario::BenignAvoidance),
            "censored-continual" => Ok(Scenario::CensoredContinual),
            "plateau-scratch" => Ok(Scenario::PlateauScratch),
            other => Err(format!(
                "unknown scenario {other:?} (red-flag, benign-avoidance, censored-continual, plateau-scratch)"
            )),
        }
    }
}

impl Scenario {
    pub fn study(self, rng_seed: u64, seeds: u32, budget: u32, noise_sd: f64) -> SynthStudy {
        let logistic = |asymptote, midpoint, rate| SynthCurveSpec {
            shape: SynthShape::Logistic,
            asymptote,
            midpoint,
            rate,
            noise_sd,
            rng_seed,
            budget,
        };
        let plateau = |asymptote, rate| SynthCurveSpec {
            shape: SynthShape::Plateau,
            asymptote,
            midpoint: 1.0,
            rate,
            noise_sd,
            rng_seed,
            budget,
        };
        let model = |curve, masking_delta| SynthModel { curve, masking_delta };
        let (baseline, continual) = match self {
            Scenario::RedFlag => (
                model(logistic(0.80, 15.0, 0.8), 0.05),
                model(logistic(0.85, 5.0, 0.8), 0.15),
            ),
            Scenario::BenignAvoidance => (
                model(logistic(0.75, 15.0, 0.5), 0.02),
                model(logistic(0.70, 5.0, 0.8), -0.08),
            ),
            Scenario::CensoredContinual => (model(logistic(0.80, 15.0, 0.8), 0.02), model(plateau(0.45, 0.3), -0.05)),
            Scenario::PlateauScratch => (
                model(plateau(0.45, 0.15), 0.02),
                model(logistic(0.80, 10.0, 0.5), -0.05),
            ),
        };
        SynthStudy {
            baseline_method: crate::logio::DEFAULT_BASELINE.to_string(),
            method: "cl".to_string(),
            seeds,
            baseline,
            continual,
        }
    }
}

/// SplitMix64 finaliser, used to derive independent noise streams.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn model_curves(model: &SynthModel, method: &str, seed: u64, stream: u64) -> Result<Vec<AccuracyCurve>> {
    if !(-1.0..=1.0).contains(&model.masking_delta) {
        return Err(Error::InvalidSynthSpec(format!(
            "masking delta {} must lie in [-1, 1]",
            model.masking_delta
        )));
    }
    let spec = |k: u64| SynthCurveSpec {
        rng_seed: mix(model.curve.rng_seed ^ mix(stream ^ mix(seed.wrapping_mul(4).wrapping_add(k)))),
        ..model.curve
    };
    let patched = synth_curve(&spec(0), CurveKey::new(method, seed, EvalSplit::T2ScPatched))?;
    let val = synth_curve(&spec(1), CurveKey::new(method, seed, EvalSplit::T2Val))?;
    let masked = AccuracyCurve::new(
        CurveKey::new(method, seed, EvalSplit::T2ScMasked),
        patched
            .samples()
            .iter()
            .map(|s| CurveSample::new(s.effective_epoch, (s.accuracy - model.masking_delta).clamp(0.0, 1.0)))
            .collect(),
    )?;
    Ok(vec![patched, masked, val])
}

/// Materialises a synthetic study as a run set ready for the log writer.
pub fn synth_run_set(study: &SynthStudy) -> Result<RunSet> {
    if study.seeds == 0 {
        return Err(Error::InvalidSynthSpec("need at least one seed".into()));
    }
    if study.method == study.baseline_method {
        return Err(Error::InvalidSynthSpec(
            "continual method must differ from the baseline".into(),
        ));
    }
    let mut curves = Vec::new();
    for seed in 0..u64::from(study.seeds) {
        curves.extend(model_curves(&study.baseline, &study.baseline_method, seed, 1)?);
        curves.extend(model_curves(&study.continual, &study.method, seed, 2)?);
    }
    let mut metadata = BTreeMap::new();
    metadata.insert(crate::logio::BASELINE_KEY.to_string(), study.baseline_method.clone());
    metadata.insert("source".to_string(), "synthetic".to_string());
    RunSet::new(study.baseline_method.clone(), curves, metadata)
}
