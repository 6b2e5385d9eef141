//! Rigidity metrics: smoothing, time-to-threshold with right-censoring,
//! adaptation delay, performance deficit, masking deltas, relative cue
//! reliance and the regime classifier built on top of them.
//!
//! Smoothing is only used to locate threshold crossings. Final-accuracy
//! quantities (PD and the masking deltas) read raw accuracies at the
//! checkpoint chosen by best validation accuracy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logio::{AccuracyCurve, EvalSplit, RunSet};

pub const DEFAULT_TAU: f64 = 0.6;
pub const DEFAULT_SMOOTHING_WIDTH: usize = 3;
pub const DEFAULT_TAU_GRID: [f64; 7] = [0.30, 0.35, 0.40, 0.45, 0.50, 0.55, 0.60];

/// Attached to AMBIGUOUS results that show faster adaptation, a small
/// deficit and a negative relative reliance.
pub const BENIGN_AVOIDANCE_NOTE: &str = "benign-avoidance pattern (AD < 0, PD > 0, SFR_rel < 0): \
     faster adaptation without shortcut reuse; the cue acts as a distractor for the continual learner";

pub const CUE_HARMFUL_NOTE: &str = "cue is harmful for the baseline (delta_S <= 0): read SFR_rel as relative harm; \
     CSR_rel > 0 means the continual learner is more sensitive to the cue";

/// Where the smoothing window sits relative to the sample it replaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmoothingAlignment {
    /// `(w - 1) / 2` samples before and `w / 2` after, truncated at the ends.
    #[default]
    Centered,
    /// The sample and up to `w - 1` samples before it.
    Trailing,
}

impl std::str::FromStr for SmoothingAlignment {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "centered" => Ok(Self::Centered),
            "trailing" => Ok(Self::Trailing),
            other => Err(format!(
                "unknown smoothing alignment {other:?} (expected centered or trailing)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdConfig {
    pub tau: f64,
    pub smoothing_width: usize,
    #[serde(default)]
    pub alignment: SmoothingAlignment,
    pub tau_grid: Vec<f64>,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        Self {
            tau: DEFAULT_TAU,
            smoothing_width: DEFAULT_SMOOTHING_WIDTH,
            alignment: SmoothingAlignment::Centered,
            tau_grid: DEFAULT_TAU_GRID.to_vec(),
        }
    }
}

impl ThresholdConfig {
    pub fn validate(&self) -> Result<()> {
        let open_unit = |t: f64| t > 0.0 && t < 1.0;
        if !open_unit(self.tau) {
            return Err(Error::InvalidConfig(format!("tau {} must lie in (0, 1)", self.tau)));
        }
        if self.smoothing_width == 0 {
            return Err(Error::InvalidConfig("smoothing width must be at least 1".into()));
        }
        if self.tau_grid.is_empty() {
            return Err(Error::InvalidConfig("tau grid is empty".into()));
        }
        if let Some(t) = self.tau_grid.iter().find(|t| !open_unit(**t)) {
            return Err(Error::InvalidConfig(format!("grid threshold {t} must lie in (0, 1)")));
        }
        if self.tau_grid.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::InvalidConfig("tau grid must be strictly increasing".into()));
        }
        Ok(())
    }
}

/// Moving-average smoothing over a centered window of width `w`, truncated
/// at the curve ends. `w = 1` is the identity.
///
/// # Panics
///
/// Panics if `w == 0`.
pub fn smooth(curve: &AccuracyCurve, w: usize) -> AccuracyCurve {
    smooth_aligned(curve, w, SmoothingAlignment::Centered)
}

pub fn smooth_aligned(curve: &AccuracyCurve, w: usize, alignment: SmoothingAlignment) -> AccuracyCurve {
    assert!(w >= 1, "smoothing width must be at least 1");
    if w == 1 {
        return curve.clone();
    }
    let raw: Vec<f64> = curve.accuracies().collect();
    let n = raw.len();
    let (before, after) = match alignment {
        SmoothingAlignment::Centered => ((w - 1) / 2, w / 2),
        SmoothingAlignment::Trailing => (w - 1, 0),
    };
    let smoothed = (0..n).map(|i| {
        let window = &raw[i.saturating_sub(before)..(i + after + 1).min(n)];
        let (lo, hi) = window.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &a| {
            (lo.min(a), hi.max(a))
        });
        // Clamping keeps constant windows exact under rounding.
        (window.iter().sum::<f64>() / window.len() as f64).clamp(lo, hi)
    });
    curve.with_accuracies(smoothed)
}

/// Effective epochs needed to reach a threshold, or the budget if the curve
/// never gets there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum TimeToThreshold {
    Crossed { epoch: f64 },
    Censored { budget: f64 },
}

impl TimeToThreshold {
    pub fn epoch(self) -> Option<f64> {
        match self {
            TimeToThreshold::Crossed { epoch } => Some(epoch),
            TimeToThreshold::Censored { .. } => None,
        }
    }

    pub fn is_censored(self) -> bool {
        matches!(self, TimeToThreshold::Censored { .. })
    }
}

fn first_crossing(smoothed: &AccuracyCurve, tau: f64) -> TimeToThreshold {
    smoothed.samples().iter().find(|s| s.accuracy >= tau).map_or(
        TimeToThreshold::Censored {
            budget: smoothed.max_epoch(),
        },
        |s| TimeToThreshold::Crossed {
            epoch: s.effective_epoch,
        },
    )
}

/// Smooths with the configured window and returns the first logged epoch
/// whose smoothed accuracy reaches `cfg.tau`.
pub fn time_to_threshold(curve: &AccuracyCurve, cfg: &ThresholdConfig) -> TimeToThreshold {
    let smoothed = smooth_aligned(curve, cfg.smoothing_width, cfg.alignment);
    first_crossing(&smoothed, cfg.tau)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CensoredSide {
    Continual,
    Scratch,
    Both,
}

/// Adaptation delay `E_CL(tau) - E_S(tau)`, undefined when either side is
/// right-censored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum AdaptationDelay {
    Defined {
        value: f64,
    },
    Undefined {
        censored: CensoredSide,
        continual: TimeToThreshold,
        scratch: TimeToThreshold,
    },
}

impl AdaptationDelay {
    pub fn from_crossings(continual: TimeToThreshold, scratch: TimeToThreshold) -> Self {
        match (continual, scratch) {
            (TimeToThreshold::Crossed { epoch: cl }, TimeToThreshold::Crossed { epoch: s }) => {
                AdaptationDelay::Defined { value: cl - s }
            }
            _ => {
                let censored = match (continual.is_censored(), scratch.is_censored()) {
                    (true, true) => CensoredSide::Both,
                    (true, false) => CensoredSide::Continual,
                    _ => CensoredSide::Scratch,
                };
                AdaptationDelay::Undefined {
                    censored,
                    continual,
                    scratch,
                }
            }
        }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            AdaptationDelay::Defined { value } => Some(*value),
            AdaptationDelay::Undefined { .. } => None,
        }
    }

    pub fn is_defined(&self) -> bool {
        self.value().is_some()
    }

    pub fn censored_side(&self) -> Option<CensoredSide> {
        match self {
            AdaptationDelay::Defined { .. } => None,
            AdaptationDelay::Undefined { censored, .. } => Some(*censored),
        }
    }
}

pub fn adaptation_delay(continual: &AccuracyCurve, scratch: &AccuracyCurve, cfg: &ThresholdConfig) -> AdaptationDelay {
    AdaptationDelay::from_crossings(time_to_threshold(continual, cfg), time_to_threshold(scratch, cfg))
}

/// AD at one grid threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdAtThreshold {
    pub tau: f64,
    pub ad: AdaptationDelay,
}

/// AD evaluated at every threshold of `cfg.tau_grid`.
pub fn ad_sensitivity(continual: &AccuracyCurve, scratch: &AccuracyCurve, cfg: &ThresholdConfig) -> Vec<AdAtThreshold> {
    let cl = smooth_aligned(continual, cfg.smoothing_width, cfg.alignment);
    let s = smooth_aligned(scratch, cfg.smoothing_width, cfg.alignment);
    cfg.tau_grid
        .iter()
        .map(|&tau| AdAtThreshold {
            tau,
            ad: AdaptationDelay::from_crossings(first_crossing(&cl, tau), first_crossing(&s, tau)),
        })
        .collect()
}

/// Epoch of the best raw validation accuracy; ties go to the earliest epoch.
pub fn select_final_checkpoint(val_curve: &AccuracyCurve) -> f64 {
    let mut best = val_curve.samples()[0];
    for s in &val_curve.samples()[1..] {
        if s.accuracy > best.accuracy {
            best = *s;
        }
    }
    best.effective_epoch
}

/// Raw accuracy at a checkpoint. No interpolation: the checkpoint must be on
/// the curve's grid.
pub fn final_accuracy(curve: &AccuracyCurve, checkpoint: f64) -> Result<f64> {
    curve
        .accuracy_at(checkpoint)
        .ok_or_else(|| Error::CheckpointNotEvaluated {
            split: curve.split().to_string(),
            epoch: checkpoint,
        })
}

pub fn performance_deficit(scratch_final: f64, continual_final: f64) -> f64 {
    scratch_final - continual_final
}

/// Patched minus masked accuracy; positive means the model leans on the cue.
pub fn masking_delta(acc_patched: f64, acc_masked: f64) -> f64 {
    acc_patched - acc_masked
}

pub fn sfr_rel(delta_cl: f64, delta_s: f64) -> f64 {
    delta_cl - delta_s
}

pub fn csr_rel(delta_cl: f64, delta_s: f64) -> f64 {
    delta_cl.abs() - delta_s.abs()
}

/// User-chosen margins for the high-rigidity flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidityMargins {
    pub delta_ad: f64,
    pub delta_pd: f64,
    pub delta_sfr: f64,
    /// Slack below zero still treated as "AD about zero".
    pub near_zero_eps: f64,
}

impl Default for RigidityMargins {
    fn default() -> Self {
        Self {
            delta_ad: 1.0,
            delta_pd: 0.01,
            delta_sfr: 0.05,
            near_zero_eps: 1e-9,
        }
    }
}

impl RigidityMargins {
    pub fn new(delta_ad: f64, delta_pd: f64, delta_sfr: f64) -> Result<Self> {
        let m = Self {
            delta_ad,
            delta_pd,
            delta_sfr,
            ..Self::default()
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("delta_ad", self.delta_ad),
            ("delta_pd", self.delta_pd),
            ("delta_sfr", self.delta_sfr),
            ("near_zero_eps", self.near_zero_eps),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RegimeLabel {
    RedFlag,
    BenignTransfer,
    CueHarmful,
    Ambiguous,
    AdUndefined,
}

impl RegimeLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            RegimeLabel::RedFlag => "RED_FLAG",
            RegimeLabel::BenignTransfer => "BENIGN_TRANSFER",
            RegimeLabel::CueHarmful => "CUE_HARMFUL",
            RegimeLabel::Ambiguous => "AMBIGUOUS",
            RegimeLabel::AdUndefined => "AD_UNDEFINED",
        }
    }
}

impl std::fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Maps an ERI triplet and the baseline's masking delta to a regime.
///
/// Rules are checked in order: undefined AD, red flag (cue helpful for the
/// baseline and all three margins met), cue harmful (`delta_s <= 0`), benign
/// transfer (cue helpful, AD not meaningfully negative, `pd >= 0`,
/// `sfr <= 0`), otherwise ambiguous.
pub fn classify_regime(ad: Option<f64>, pd: f64, sfr: f64, delta_s: f64, margins: &RigidityMargins) -> RegimeLabel {
    let Some(ad) = ad else {
        return RegimeLabel::AdUndefined;
    };
    let cue_helpful = delta_s > 0.0;
    if cue_helpful && ad <= -margins.delta_ad && pd <= -margins.delta_pd && sfr >= margins.delta_sfr {
        RegimeLabel::RedFlag
    } else if !cue_helpful {
        RegimeLabel::CueHarmful
    } else if ad >= -margins.near_zero_eps && pd >= 0.0 && sfr <= 0.0 {
        RegimeLabel::BenignTransfer
    } else {
        RegimeLabel::Ambiguous
    }
}

/// Explanatory note for labels whose reading depends on signs.
pub fn regime_note(label: RegimeLabel, ad: Option<f64>, pd: f64, sfr: f64) -> Option<&'static str> {
    match label {
        RegimeLabel::Ambiguous if ad.is_some_and(|a| a < 0.0) && pd > 0.0 && sfr < 0.0 => Some(BENIGN_AVOIDANCE_NOTE),
        RegimeLabel::CueHarmful => Some(CUE_HARMFUL_NOTE),
        _ => None,
    }
}

/// How per-seed results find their baseline counterpart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedPairing {
    /// Continual seed `k` must pair with baseline seed `k`.
    #[default]
    Strict,
    /// Use baseline seed `k` when it exists, otherwise the baseline seed mean.
    FallbackToSeedMean,
}

/// Which baseline data a result was computed against.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaselinePairing {
    Paired { seed: u64 },
    SeedMean { seeds: Vec<u64> },
}

/// Final patched/masked accuracies of one model at its selected checkpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FinalAccuracies {
    pub checkpoint: f64,
    pub sc_patched: f64,
    pub sc_masked: f64,
}

impl FinalAccuracies {
    pub fn of(run_set: &RunSet, method: &str, seed: u64) -> Result<Self> {
        let val = run_set.require_curve(method, seed, EvalSplit::T2Val)?;
        let checkpoint = select_final_checkpoint(val);
        Ok(Self {
            checkpoint,
            sc_patched: final_accuracy(run_set.require_curve(method, seed, EvalSplit::T2ScPatched)?, checkpoint)?,
            sc_masked: final_accuracy(run_set.require_curve(method, seed, EvalSplit::T2ScMasked)?, checkpoint)?,
        })
    }

    pub fn delta(&self) -> f64 {
        masking_delta(self.sc_patched, self.sc_masked)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EriResult {
    pub method: String,
    pub seed: u64,
    pub ad: AdaptationDelay,
    pub pd: f64,
    pub delta_cl: f64,
    pub delta_s: f64,
    pub sfr_rel: f64,
    pub csr_rel: f64,
    pub regime: RegimeLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub baseline: BaselinePairing,
    pub continual_final: FinalAccuracies,
    /// For seed-mean pairing the checkpoint field holds the mean checkpoint.
    pub scratch_final: FinalAccuracies,
}

/// Resolved baseline side of a comparison.
enum ScratchRef {
    Seed(u64),
    Mean(Vec<u64>),
}

impl ScratchRef {
    fn resolve(run_set: &RunSet, method: &str, seed: u64, pairing: SeedPairing) -> Result<Self> {
        let seeds = run_set.seeds(run_set.baseline_method());
        if seeds.contains(&seed) {
            return Ok(ScratchRef::Seed(seed));
        }
        match pairing {
            SeedPairing::Strict => Err(Error::MissingPairedSeed {
                method: method.to_string(),
                seed,
            }),
            SeedPairing::FallbackToSeedMean => Ok(ScratchRef::Mean(seeds)),
        }
    }

    fn pairing(&self) -> BaselinePairing {
        match self {
            ScratchRef::Seed(seed) => BaselinePairing::Paired { seed: *seed },
            ScratchRef::Mean(seeds) => BaselinePairing::SeedMean { seeds: seeds.clone() },
        }
    }

    fn seeds(&self) -> &[u64] {
        match self {
            ScratchRef::Seed(seed) => std::slice::from_ref(seed),
            ScratchRef::Mean(seeds) => seeds,
        }
    }

    fn finals(&self, run_set: &RunSet) -> Result<FinalAccuracies> {
        let per_seed = self
            .seeds()
            .iter()
            .map(|&s| FinalAccuracies::of(run_set, run_set.baseline_method(), s))
            .collect::<Result<Vec<_>>>()?;
        if per_seed.len() == 1 {
            return Ok(per_seed[0]);
        }
        let mean = |f: fn(&FinalAccuracies) -> f64| crate::aggregate::mean(per_seed.iter().map(f));
        Ok(FinalAccuracies {
            checkpoint: mean(|f| f.checkpoint),
            sc_patched: mean(|f| f.sc_patched),
            sc_masked: mean(|f| f.sc_masked),
        })
    }

    /// Smoothed patched curves of every referenced baseline seed.
    fn smoothed(&self, run_set: &RunSet, cfg: &ThresholdConfig) -> Result<Vec<AccuracyCurve>> {
        self.seeds()
            .iter()
            .map(|&s| {
                let c = run_set.require_curve(run_set.baseline_method(), s, EvalSplit::T2ScPatched)?;
                Ok(smooth_aligned(c, cfg.smoothing_width, cfg.alignment))
            })
            .collect()
    }
}

/// Baseline crossing; with several seeds, the mean crossing epoch when every
/// seed crosses, otherwise censored at the largest budget.
fn scratch_crossing(smoothed: &[AccuracyCurve], tau: f64) -> TimeToThreshold {
    let crossings: Vec<TimeToThreshold> = smoothed.iter().map(|c| first_crossing(c, tau)).collect();
    if crossings.len() == 1 {
        return crossings[0];
    }
    if crossings.iter().all(|t| !t.is_censored()) {
        TimeToThreshold::Crossed {
            epoch: crate::aggregate::mean(crossings.iter().filter_map(|t| t.epoch())),
        }
    } else {
        TimeToThreshold::Censored {
            budget: smoothed.iter().map(AccuracyCurve::max_epoch).fold(0.0, f64::max),
        }
    }
}

/// ERI for one `(method, seed)` against the same-seed baseline run.
pub fn compute_eri(
    run_set: &RunSet,
    method: &str,
    seed: u64,
    cfg: &ThresholdConfig,
    margins: &RigidityMargins,
) -> Result<EriResult> {
    compute_eri_with(run_set, method, seed, cfg, margins, SeedPairing::Strict)
}

pub fn compute_eri_with(
    run_set: &RunSet,
    method: &str,
    seed: u64,
    cfg: &ThresholdConfig,
    margins: &RigidityMargins,
    pairing: SeedPairing,
) -> Result<EriResult> {
    cfg.validate()?;
    margins.validate()?;
    if !run_set.has_method(method) {
        return Err(Error::UnknownMethod(method.to_string()));
    }
    let scratch = ScratchRef::resolve(run_set, method, seed, pairing)?;

    let cl_patched = run_set.require_curve(method, seed, EvalSplit::T2ScPatched)?;
    let cl_smoothed = smooth_aligned(cl_patched, cfg.smoothing_width, cfg.alignment);
    let ad = AdaptationDelay::from_crossings(
        first_crossing(&cl_smoothed, cfg.tau),
        scratch_crossing(&scratch.smoothed(run_set, cfg)?, cfg.tau),
    );

    let continual_final = FinalAccuracies::of(run_set, method, seed)?;
    let scratch_final = scratch.finals(run_set)?;
    let pd = performance_deficit(scratch_final.sc_patched, continual_final.sc_patched);
    let delta_cl = continual_final.delta();
    let delta_s = scratch_final.delta();
    let sfr = sfr_rel(delta_cl, delta_s);
    let regime = classify_regime(ad.value(), pd, sfr, delta_s, margins);

    Ok(EriResult {
        method: method.to_string(),
        seed,
        ad,
        pd,
        delta_cl,
        delta_s,
        sfr_rel: sfr,
        csr_rel: csr_rel(delta_cl, delta_s),
        regime,
        note: regime_note(regime, ad.value(), pd, sfr).map(str::to_string),
        baseline: scratch.pairing(),
        continual_final,
        scratch_final,
    })
}

/// ERI for every continual method and seed, ordered by `(method, seed)`.
pub fn compute_all(
    run_set: &RunSet,
    cfg: &ThresholdConfig,
    margins: &RigidityMargins,
    pairing: SeedPairing,
) -> Result<Vec<EriResult>> {
    let mut out = Vec::new();
    for method in run_set.continual_methods() {
        for seed in run_set.seeds(method) {
            out.push(compute_eri_with(run_set, method, seed, cfg, margins, pairing)?);
        }
    }
    Ok(out)
}

/// Per-seed AD(tau) grid for one continual method, keyed by seed.
pub fn ad_grid(
    run_set: &RunSet,
    method: &str,
    cfg: &ThresholdConfig,
    pairing: SeedPairing,
) -> Result<Vec<(u64, Vec<AdAtThreshold>)>> {
    cfg.validate()?;
    if !run_set.has_method(method) {
        return Err(Error::UnknownMethod(method.to_string()));
    }
    let mut out = Vec::new();
    for seed in run_set.seeds(method) {
        let scratch = ScratchRef::resolve(run_set, method, seed, pairing)?;
        let scratch_curves = scratch.smoothed(run_set, cfg)?;
        let cl = smooth_aligned(
            run_set.require_curve(method, seed, EvalSplit::T2ScPatched)?,
            cfg.smoothing_width,
            cfg.alignment,
        );
        let grid = cfg
            .tau_grid
            .iter()
            .map(|&tau| AdAtThreshold {
                tau,
                ad: AdaptationDelay::from_crossings(first_crossing(&cl, tau), scratch_crossing(&scratch_curves, tau)),
            })
            .collect();
        out.push((seed, grid));
    }
    Ok(out)
}

/// AD at the primary threshold only, for each seed of `method`.
pub fn primary_ad(
    run_set: &RunSet,
    method: &str,
    cfg: &ThresholdConfig,
    pairing: SeedPairing,
) -> Result<Vec<(u64, AdaptationDelay)>> {
    let single = ThresholdConfig {
        tau_grid: vec![cfg.tau],
        ..cfg.clone()
    };
    Ok(ad_grid(run_set, method, &single, pairing)?
        .into_iter()
        .map(|(seed, grid)| (seed, grid[0].ad))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn curve(points: &[(f64, f64)]) -> AccuracyCurve {
        AccuracyCurve::from_points("m", 0, EvalSplit::T2ScPatched, points).unwrap()
    }

    fn pts(curve: &AccuracyCurve) -> Vec<(f64, f64)> {
        curve
            .samples()
            .iter()
            .map(|s| (s.effective_epoch, s.accuracy))
            .collect()
    }

    fn cfg(tau: f64, w: usize) -> ThresholdConfig {
        ThresholdConfig {
            tau,
            smoothing_width: w,
            ..ThresholdConfig::default()
        }
    }

    #[test]
    fn smoothing_examples() {
        let c = curve(&[(1.0, 0.2), (2.0, 0.4), (3.0, 0.6)]);
        assert_eq!(smooth(&c, 1), c);

        let c = curve(&[(1.0, 0.0), (2.0, 0.6), (3.0, 0.0)]);
        let s = pts(&smooth(&c, 3));
        let expected = [(1.0, 0.3), (2.0, 0.2), (3.0, 0.3)];
        for (got, want) in s.iter().zip(expected) {
            assert_eq!(got.0, want.0);
            assert!((got.1 - want.1).abs() < 1e-15, "{got:?} vs {want:?}");
        }

        let c = curve(&[(1.0, 0.1), (2.0, 0.1), (3.0, 0.1), (4.0, 0.1)]);
        for w in 1..6 {
            assert_eq!(smooth(&c, w), c, "w={w}");
        }
    }

    #[test]
    fn trailing_window() {
        let c = curve(&[(1.0, 0.0), (2.0, 0.6), (3.0, 0.0)]);
        let s = pts(&smooth_aligned(&c, 2, SmoothingAlignment::Trailing));
        assert_eq!(s, vec![(1.0, 0.0), (2.0, 0.3), (3.0, 0.3)]);
    }

    #[test]
    fn threshold_examples() {
        let c = curve(&[(1.0, 0.1), (2.0, 0.7), (3.0, 0.8)]);
        assert_eq!(
            time_to_threshold(&c, &cfg(0.6, 1)),
            TimeToThreshold::Crossed { epoch: 2.0 }
        );
        let c = curve(&[(1.0, 0.1), (2.0, 0.2)]);
        assert_eq!(
            time_to_threshold(&c, &cfg(0.6, 1)),
            TimeToThreshold::Censored { budget: 2.0 }
        );
    }

    fn step(cross_at: u32, budget: u32) -> AccuracyCurve {
        let points: Vec<(f64, f64)> = (1..=budget)
            .map(|e| (e as f64, if e >= cross_at { 0.8 } else { 0.2 }))
            .collect();
        curve(&points)
    }

    #[test]
    fn adaptation_delay_examples() {
        let a = step(4, 20);
        assert_eq!(
            adaptation_delay(&a, &a, &cfg(0.6, 3)),
            AdaptationDelay::Defined { value: 0.0 }
        );

        let cl = step(3, 20);
        let s = step(10, 20);
        let c = cfg(0.6, 1);
        assert_eq!(time_to_threshold(&cl, &c).epoch(), Some(3.0));
        assert_eq!(time_to_threshold(&s, &c).epoch(), Some(10.0));
        assert_eq!(adaptation_delay(&cl, &s, &c), AdaptationDelay::Defined { value: -7.0 });

        let never = curve(&[(1.0, 0.1), (2.0, 0.2), (3.0, 0.3)]);
        let ad = adaptation_delay(&never, &s, &c);
        assert_eq!(ad.censored_side(), Some(CensoredSide::Continual));
        assert!(matches!(
            ad,
            AdaptationDelay::Undefined { continual: TimeToThreshold::Censored { budget }, .. } if budget == 3.0
        ));
        assert_eq!(
            adaptation_delay(&never, &never, &c).censored_side(),
            Some(CensoredSide::Both)
        );
    }

    #[test]
    fn sensitivity_marks_plateau_as_scratch_censored() {
        let cl = curve(
            &(1..=50)
                .map(|e| (e as f64, (0.02 * e as f64).min(0.9)))
                .collect::<Vec<_>>(),
        );
        let scratch = curve(
            &(1..=50)
                .map(|e| (e as f64, (0.02 * e as f64).min(0.45)))
                .collect::<Vec<_>>(),
        );
        let grid = ad_sensitivity(&cl, &scratch, &ThresholdConfig::default());
        assert_eq!(grid.len(), 7);
        for point in grid {
            if point.tau >= 0.5 {
                assert_eq!(
                    point.ad.censored_side(),
                    Some(CensoredSide::Scratch),
                    "tau {}",
                    point.tau
                );
            } else {
                assert!(point.ad.is_defined(), "tau {}", point.tau);
            }
        }
        let same = ad_sensitivity(&cl, &cl, &ThresholdConfig::default());
        assert!(same.iter().all(|p| p.ad == AdaptationDelay::Defined { value: 0.0 }));
    }

    #[test]
    fn checkpoint_selection() {
        let v = curve(&[(1.0, 0.5), (2.0, 0.9), (3.0, 0.7)]);
        assert_eq!(select_final_checkpoint(&v), 2.0);
        let v = curve(&[(1.0, 0.9), (2.0, 0.9)]);
        assert_eq!(select_final_checkpoint(&v), 1.0);
    }

    #[test]
    fn final_accuracy_requires_grid_point() {
        let c = curve(&[(1.0, 0.3), (2.0, 0.6)]);
        assert_eq!(final_accuracy(&c, 2.0).unwrap(), 0.6);
        let c = curve(&[(1.0, 0.3), (2.0, 0.5), (3.0, 0.6)]);
        let err = final_accuracy(&c, 5.0).unwrap_err();
        assert!(err.to_string().contains("checkpoint not evaluated on split"));
        let scratch = curve(&[(10.0, 0.5), (50.0, 0.628)]);
        assert_eq!(final_accuracy(&scratch, 50.0).unwrap(), 0.628);
    }

    #[test]
    fn scalar_formulas_match_tabulated_values() {
        let close = |a: f64, b: f64| (a - b).abs() < 1e-9;
        assert!(close(performance_deficit(0.628, 0.601), 0.027));
        assert!(close(performance_deficit(0.628, 0.381), 0.247));
        assert_eq!(performance_deficit(0.4, 0.4), 0.0);
        assert!(close(masking_delta(0.628, 0.608), 0.020));
        assert!(close(masking_delta(0.601, 0.676), -0.075));
        assert_eq!(masking_delta(0.3, 0.3), 0.0);
        assert!(close(sfr_rel(-0.075, 0.020), -0.095));
        assert!(close(sfr_rel(-0.121, 0.020), -0.141));
        assert_eq!(sfr_rel(0.1, 0.1), 0.0);
        assert!(close(csr_rel(-0.075, 0.020), 0.055));
        assert_eq!(csr_rel(0.0, 0.0), 0.0);
        assert_eq!(csr_rel(0.3, -0.2), csr_rel(-0.3, 0.2));
    }

    #[test]
    fn regime_examples() {
        let m = RigidityMargins::new(1.0, 0.01, 0.05).unwrap();
        assert_eq!(
            classify_regime(Some(-10.0), -0.05, 0.10, 0.05, &m),
            RegimeLabel::RedFlag
        );
        assert_eq!(
            classify_regime(Some(2.0), 0.03, -0.02, 0.01, &m),
            RegimeLabel::BenignTransfer
        );
        // Observed pattern from the sgd row: faster, slightly worse, less cue reliant.
        let label = classify_regime(Some(-5.0), 0.028, -0.115, 0.020, &m);
        assert_eq!(label, RegimeLabel::Ambiguous);
        assert_eq!(
            regime_note(label, Some(-5.0), 0.028, -0.115),
            Some(BENIGN_AVOIDANCE_NOTE)
        );
        assert_eq!(classify_regime(Some(-5.0), 0.0, 0.2, 0.0, &m), RegimeLabel::CueHarmful);
        assert_eq!(classify_regime(None, 0.0, 0.0, 0.0, &m), RegimeLabel::AdUndefined);
    }

    #[test]
    fn margins_and_config_validation() {
        assert!(RigidityMargins::new(0.0, 0.01, 0.05).is_err());
        assert!(RigidityMargins::new(1.0, -0.01, 0.05).is_err());
        assert!(ThresholdConfig::default().validate().is_ok());
        assert!(cfg(1.0, 3).validate().is_err());
        assert!(cfg(0.6, 0).validate().is_err());
        let bad = ThresholdConfig {
            tau_grid: vec![0.5, 0.4],
            ..ThresholdConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    /// Independent smoothing: membership test over every index instead of
    /// slicing.
    fn oracle_smooth(values: &[f64], w: usize) -> Vec<f64> {
        let before = (w - 1) / 2;
        let after = w / 2;
        (0..values.len())
            .map(|i| {
                let mut sum = 0.0;
                let mut count = 0usize;
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for (j, &v) in values.iter().enumerate() {
                    if j + before >= i && j <= i + after {
                        sum += v;
                        count += 1;
                        lo = lo.min(v);
                        hi = hi.max(v);
                    }
                }
                (sum / count as f64).clamp(lo, hi)
            })
            .collect()
    }

    fn oracle_crossing(epochs: &[f64], smoothed: &[f64], tau: f64) -> Option<f64> {
        let mut best: Option<f64> = None;
        for (e, a) in epochs.iter().zip(smoothed) {
            if *a >= tau && best.is_none_or(|b| *e < b) {
                best = Some(*e);
            }
        }
        best
    }

    fn arb_curve(max_len: usize) -> impl Strategy<Value = AccuracyCurve> {
        prop::collection::vec((0.01f64..3.0, 0.0f64..=1.0), 1..=max_len).prop_map(|steps| {
            let mut e = 0.0;
            let points: Vec<(f64, f64)> = steps
                .into_iter()
                .map(|(de, a)| {
                    e += de;
                    (e, a)
                })
                .collect();
            curve(&points)
        })
    }

    proptest! {
        #[test]
        fn smoothing_is_bounded_by_window(c in arb_curve(20), w in 1usize..6) {
            let raw: Vec<f64> = c.accuracies().collect();
            let s: Vec<f64> = smooth(&c, w).accuracies().collect();
            prop_assert_eq!(&s, &oracle_smooth(&raw, w));
            for (i, v) in s.iter().enumerate() {
                let window = &raw[i.saturating_sub((w - 1) / 2)..(i + w / 2 + 1).min(raw.len())];
                let lo = window.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = window.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(lo <= *v && *v <= hi);
            }
        }

        #[test]
        fn crossing_matches_exhaustive_scan(c in arb_curve(8), w in 1usize..=3, tau in 0.01f64..0.99) {
            let epochs: Vec<f64> = c.epochs().collect();
            let smoothed = oracle_smooth(&c.accuracies().collect::<Vec<_>>(), w);
            let expected = oracle_crossing(&epochs, &smoothed, tau);
            let got = time_to_threshold(&c, &cfg(tau, w));
            match expected {
                Some(e) => prop_assert_eq!(got, TimeToThreshold::Crossed { epoch: e }),
                None => prop_assert_eq!(got, TimeToThreshold::Censored { budget: c.max_epoch() }),
            }
        }

        #[test]
        fn crossing_is_monotone_in_tau(c in arb_curve(30), t1 in 0.01f64..0.99, t2 in 0.01f64..0.99) {
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            let a = time_to_threshold(&c, &cfg(lo, 3));
            let b = time_to_threshold(&c, &cfg(hi, 3));
            match (a, b) {
                (TimeToThreshold::Crossed { epoch: x }, TimeToThreshold::Crossed { epoch: y }) => prop_assert!(x <= y),
                (TimeToThreshold::Censored { .. }, other) => prop_assert!(other.is_censored()),
                _ => {}
            }
        }

        #[test]
        fn adaptation_delay_is_antisymmetric(a in arb_curve(20), b in arb_curve(20), tau in 0.05f64..0.95) {
            let c = cfg(tau, 3);
            let ab = adaptation_delay(&a, &b, &c);
            let ba = adaptation_delay(&b, &a, &c);
            match (ab.value(), ba.value()) {
                (Some(x), Some(y)) => prop_assert_eq!(x, -y),
                (None, None) => {}
                _ => prop_assert!(false, "definedness differs"),
            }
        }

        #[test]
        fn deltas_are_translation_invariant(p in 0.2f64..0.8, m in 0.2f64..0.8, shift in -0.2f64..0.2) {
            // Exact for shifts that are small integers of 2^-10.
            let shift = (shift * 1024.0).round() / 1024.0;
            let p = (p * 1024.0).round() / 1024.0;
            let m = (m * 1024.0).round() / 1024.0;
            prop_assert_eq!(masking_delta(p + shift, m + shift), masking_delta(p, m));
        }

        #[test]
        fn classifier_is_total(ad in prop::option::of(-50.0f64..50.0), pd in -1.0f64..1.0,
                               sfr in -1.0f64..1.0, ds in -1.0f64..1.0) {
            let m = RigidityMargins::default();
            let label = classify_regime(ad, pd, sfr, ds, &m);
            prop_assert_eq!(label, classify_regime(ad, pd, sfr, ds, &m));
            if ad.is_none() { prop_assert_eq!(label, RegimeLabel::AdUndefined); }
            if ad.is_some() && ds <= 0.0 { prop_assert_eq!(label, RegimeLabel::CueHarmful); }
        }
    }
}
