//! Per-method summaries across seeds (mean and sample standard deviation)
//! and the per-threshold AD grid summary behind the sensitivity heatmap.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::logio::{EvalSplit, RunSet};
use crate::metrics::{final_accuracy, AdAtThreshold, EriResult, FinalAccuracies};

fn sorted(values: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.into_iter().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Arithmetic mean, independent of input order and exact for constant
/// inputs. Returns NaN for an empty input.
pub fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let v = sorted(values);
    if v.is_empty() {
        return f64::NAN;
    }
    // Accumulate offsets from the smallest value so equal inputs sum to zero.
    let anchor = v[0];
    anchor + v.iter().map(|x| x - anchor).sum::<f64>() / v.len() as f64
}

/// Sample standard deviation (n - 1 denominator); `None` for fewer than two values.
pub fn sample_sd(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let v = sorted(values);
    if v.len() < 2 {
        return None;
    }
    let m = mean(v.iter().copied());
    let ss: f64 = v.iter().map(|x| (x - m) * (x - m)).sum();
    Some((ss / (v.len() - 1) as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanSd {
    pub mean: f64,
    /// Absent for a single observation.
    pub sd: Option<f64>,
    pub n: usize,
}

impl MeanSd {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        Some(Self {
            mean: mean(values.iter().copied()),
            sd: sample_sd(values.iter().copied()),
            n: values.len(),
        })
    }
}

/// Final accuracies of one `(method, seed)` on every split, read at the
/// checkpoint with the best validation accuracy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedAccuracies {
    pub method: String,
    pub seed: u64,
    pub checkpoint: f64,
    pub sc_patch: f64,
    pub sc_mask: f64,
    pub t1: Option<f64>,
    pub nsc_patch: Option<f64>,
}

pub fn seed_accuracies(run_set: &RunSet, method: &str, seed: u64) -> Result<SeedAccuracies> {
    let sc = FinalAccuracies::of(run_set, method, seed)?;
    let optional = |split| -> Result<Option<f64>> {
        run_set
            .curve(method, seed, split)
            .map(|c| final_accuracy(c, sc.checkpoint))
            .transpose()
    };
    Ok(SeedAccuracies {
        method: method.to_string(),
        seed,
        checkpoint: sc.checkpoint,
        sc_patch: sc.sc_patched,
        sc_mask: sc.sc_masked,
        t1: optional(EvalSplit::T1All)?,
        nsc_patch: optional(EvalSplit::T2NscPatched)?,
    })
}

/// Final accuracies for every method (baseline included) and seed.
pub fn collect_accuracies(run_set: &RunSet) -> Result<Vec<SeedAccuracies>> {
    let mut out = Vec::new();
    for method in run_set.methods() {
        for seed in run_set.seeds(method) {
            out.push(seed_accuracies(run_set, method, seed)?);
        }
    }
    Ok(out)
}

/// One line of the summary table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub method: String,
    pub n_seeds: usize,
    /// `None` for methods without ERI results, i.e. the baseline.
    pub pd: Option<MeanSd>,
    pub sfr: Option<MeanSd>,
    pub acc_sc_patch: Option<MeanSd>,
    pub acc_sc_mask: Option<MeanSd>,
    pub acc_t1: Option<MeanSd>,
    pub acc_nsc_patch: Option<MeanSd>,
}

/// Groups per-seed results by method. Rows come out sorted by method id.
pub fn summarize(results: &[EriResult], accuracies: &[SeedAccuracies]) -> Result<Vec<SummaryRow>> {
    if results.is_empty() && accuracies.is_empty() {
        return Err(Error::EmptyInput("no results to summarize"));
    }
    let methods: BTreeSet<&str> = results
        .iter()
        .map(|r| r.method.as_str())
        .chain(accuracies.iter().map(|a| a.method.as_str()))
        .collect();

    let mut rows = Vec::with_capacity(methods.len());
    for method in methods {
        let eri: Vec<&EriResult> = results.iter().filter(|r| r.method == method).collect();
        let acc: Vec<&SeedAccuracies> = accuracies.iter().filter(|a| a.method == method).collect();
        let stat = |values: Vec<f64>| MeanSd::of(&values);
        let seeds: BTreeSet<u64> = eri.iter().map(|r| r.seed).chain(acc.iter().map(|a| a.seed)).collect();
        rows.push(SummaryRow {
            method: method.to_string(),
            n_seeds: seeds.len(),
            pd: stat(eri.iter().map(|r| r.pd).collect()),
            sfr: stat(eri.iter().map(|r| r.sfr_rel).collect()),
            acc_sc_patch: stat(acc.iter().map(|a| a.sc_patch).collect()),
            acc_sc_mask: stat(acc.iter().map(|a| a.sc_mask).collect()),
            acc_t1: stat(acc.iter().filter_map(|a| a.t1).collect()),
            acc_nsc_patch: stat(acc.iter().filter_map(|a| a.nsc_patch).collect()),
        });
    }
    Ok(rows)
}

/// Seed-level summary of AD at one threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridCell {
    pub tau: f64,
    /// Mean over seeds with a defined AD.
    pub mean_ad: Option<f64>,
    pub sd_ad: Option<f64>,
    pub defined: usize,
    pub censored: usize,
}

impl GridCell {
    /// No seed crossed: rendered as a hatched cell.
    pub fn is_hatched(&self) -> bool {
        self.defined == 0
    }
}

/// Collapses per-seed AD grids into per-threshold cells. Censored seeds are
/// counted but excluded from the mean.
pub fn ad_grid_summary(per_seed_grids: &[Vec<AdAtThreshold>]) -> Result<Vec<GridCell>> {
    let Some(first) = per_seed_grids.first() else {
        return Err(Error::EmptyInput("no AD grids"));
    };
    let taus: Vec<f64> = first.iter().map(|p| p.tau).collect();
    for grid in per_seed_grids {
        if grid.len() != taus.len() || grid.iter().zip(&taus).any(|(p, t)| p.tau != *t) {
            return Err(Error::MismatchedGrid);
        }
    }
    Ok(taus
        .iter()
        .enumerate()
        .map(|(i, &tau)| {
            let defined: Vec<f64> = per_seed_grids.iter().filter_map(|g| g[i].ad.value()).collect();
            GridCell {
                tau,
                mean_ad: (!defined.is_empty()).then(|| mean(defined.iter().copied())),
                sd_ad: sample_sd(defined.iter().copied()),
                defined: defined.len(),
                censored: per_seed_grids.len() - defined.len(),
            }
        })
        .collect())
}

/// Per-method grid summaries keyed by method id.
pub fn ad_grid_by_method(
    grids: &BTreeMap<String, Vec<(u64, Vec<AdAtThreshold>)>>,
) -> Result<BTreeMap<String, Vec<GridCell>>> {
    grids
        .iter()
        .map(|(method, per_seed)| {
            let g: Vec<Vec<AdAtThreshold>> = per_seed.iter().map(|(_, g)| g.clone()).collect();
            Ok((method.clone(), ad_grid_summary(&g)?))
        })
        .collect()
}
