//! JSON config file and resolution against flags and built-in defaults.
//!
//! Precedence is flag, then config file, then default. The resolved values
//! are what ends up in the provenance sidecar.

use std::path::Path;

use anyhow::{Context, Result};
use eri_core::datasetops::{PatchSpec, SuperclassOverrides};
use eri_core::metrics::{RigidityMargins, SeedPairing, SmoothingAlignment, ThresholdConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliConfig {
    #[serde(default)]
    pub threshold: ThresholdFile,
    #[serde(default)]
    pub margins: MarginsFile,
    #[serde(default)]
    pub patch: PatchFile,
    #[serde(default)]
    pub plan: PlanFile,
    pub baseline: Option<String>,
    pub pairing: Option<SeedPairing>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdFile {
    pub tau: Option<f64>,
    pub smoothing_width: Option<usize>,
    pub alignment: Option<SmoothingAlignment>,
    pub tau_grid: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarginsFile {
    pub delta_ad: Option<f64>,
    pub delta_pd: Option<f64>,
    pub delta_sfr: Option<f64>,
    pub near_zero_eps: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchFile {
    pub top: Option<usize>,
    pub left: Option<usize>,
    pub size: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanFile {
    pub seed: Option<u64>,
    pub t1: Option<Vec<u8>>,
    pub t2: Option<Vec<u8>>,
    pub sc: Option<Vec<u8>>,
}

impl CliConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn threshold(
        &self,
        tau: Option<f64>,
        window: Option<usize>,
        alignment: Option<SmoothingAlignment>,
        grid: Option<Vec<f64>>,
    ) -> Result<ThresholdConfig> {
        let d = ThresholdConfig::default();
        let t = &self.threshold;
        let cfg = ThresholdConfig {
            tau: tau.or(t.tau).unwrap_or(d.tau),
            smoothing_width: window.or(t.smoothing_width).unwrap_or(d.smoothing_width),
            alignment: alignment.or(t.alignment).unwrap_or(d.alignment),
            tau_grid: grid.or_else(|| t.tau_grid.clone()).unwrap_or(d.tau_grid),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn margins(&self, ad: Option<f64>, pd: Option<f64>, sfr: Option<f64>) -> Result<RigidityMargins> {
        let d = RigidityMargins::default();
        let m = &self.margins;
        let margins = RigidityMargins {
            delta_ad: ad.or(m.delta_ad).unwrap_or(d.delta_ad),
            delta_pd: pd.or(m.delta_pd).unwrap_or(d.delta_pd),
            delta_sfr: sfr.or(m.delta_sfr).unwrap_or(d.delta_sfr),
            near_zero_eps: m.near_zero_eps.unwrap_or(d.near_zero_eps),
        };
        margins.validate()?;
        Ok(margins)
    }

    pub fn pairing(&self, strict: bool) -> SeedPairing {
        if strict {
            SeedPairing::Strict
        } else {
            self.pairing.unwrap_or(SeedPairing::FallbackToSeedMean)
        }
    }

    pub fn baseline(&self, flag: Option<String>) -> Option<String> {
        flag.or_else(|| self.baseline.clone())
    }

    pub fn patch(&self, top: Option<usize>, left: Option<usize>, size: Option<usize>) -> Result<PatchSpec> {
        let d = PatchSpec::default();
        let p = &self.patch;
        let size = size.or(p.size);
        let spec = PatchSpec {
            top: top.or(p.top).unwrap_or(d.top),
            left: left.or(p.left).unwrap_or(d.left),
            height: size.unwrap_or(d.height),
            width: size.unwrap_or(d.width),
            ..d
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn plan_seed(&self, flag: Option<u64>) -> Option<u64> {
        flag.or(self.plan.seed)
    }

    pub fn overrides(
        &self,
        t1: Option<Vec<u8>>,
        t2: Option<Vec<u8>>,
        sc: Option<Vec<u8>>,
    ) -> Result<Option<SuperclassOverrides>> {
        let p = &self.plan;
        match (t1.or(p.t1.clone()), t2.or(p.t2.clone()), sc.or(p.sc.clone())) {
            (None, None, None) => Ok(None),
            (Some(t1), Some(t2), Some(sc)) => Ok(Some(SuperclassOverrides { t1, t2, sc })),
            _ => anyhow::bail!("superclass overrides need all of t1, t2 and sc"),
        }
    }
}
