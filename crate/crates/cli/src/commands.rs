use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use eri_core::aggregate::{ad_grid_by_method, collect_accuracies, summarize, GridCell};
use eri_core::datasetops::{self, BenchmarkPlan, ImageRecord, PatchSpec};
use eri_core::logio::{self, LogFormat, RunSet};
use eri_core::metrics::{
    self, AdaptationDelay, BaselinePairing, EriResult, RigidityMargins, SeedPairing, ThresholdConfig,
};
use eri_core::report::{self, SynthModel, SynthShape, HATCHED};
use serde::Serialize;

use crate::config::CliConfig;
use crate::output::{
    self, color_enabled, paint_regime, prepare_dir, render_table, require_file, write_atomic, write_json,
};
use crate::{
    Cli, Command, ComputeArgs, InjectArgs, LogArgs, MaskArgs, Outcome, PatchArgs, PlanArgs, PlanSource, ReportArgs,
    SensitivityArgs, SynthArgs, ThresholdArgs, ValidateArgs,
};

#[derive(Serialize)]
struct Provenance<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    inputs: BTreeMap<&'static str, String>,
    config: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    plan: Option<&'a BenchmarkPlan>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    notes: Vec<String>,
}

impl<'a> Provenance<'a> {
    fn new(command: &'static str, config: serde_json::Value) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            inputs: BTreeMap::new(),
            config,
            plan: None,
            notes: Vec::new(),
        }
    }

    fn input(mut self, name: &'static str, path: &Path) -> Self {
        self.inputs.insert(name, path.display().to_string());
        self
    }
}

pub fn run(cli: Cli) -> Result<Outcome> {
    let config = CliConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Inject(args) => inject(&config, args),
        Command::Mask(args) => mask(&config, args),
        Command::Plan(args) => plan(&config, args),
        Command::Compute(args) => compute(&config, args),
        Command::Sensitivity(args) => sensitivity(&config, args),
        Command::Report(args) => report_all(&config, args),
        Command::Synth(args) => synth(args),
        Command::Validate(args) => validate(&config, args),
    }
}

fn load_run_set(config: &CliConfig, args: &LogArgs) -> Result<RunSet> {
    require_file(&args.log)?;
    let format = args.format.unwrap_or_else(|| LogFormat::from_path(&args.log));
    let file = std::fs::File::open(&args.log).with_context(|| format!("opening {}", args.log.display()))?;
    let baseline = config.baseline(args.baseline.clone());
    logio::parse_log_with_baseline(std::io::BufReader::new(file), format, baseline.as_deref())
        .with_context(|| format!("parsing {}", args.log.display()))
}

fn threshold(config: &CliConfig, args: &ThresholdArgs, grid: Option<Vec<f64>>) -> Result<ThresholdConfig> {
    config.threshold(args.tau, args.window, args.alignment, grid)
}

fn load_images(path: &Path) -> Result<Vec<ImageRecord>> {
    require_file(path)?;
    let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    datasetops::parse_cifar100(std::io::BufReader::new(file)).with_context(|| format!("parsing {}", path.display()))
}

fn resolve_plan(config: &CliConfig, source: &PlanSource) -> Result<BenchmarkPlan> {
    if let Some(path) = &source.plan {
        require_file(path)?;
        let text = std::fs::read_to_string(path)?;
        return BenchmarkPlan::from_json(&text).with_context(|| format!("parsing plan {}", path.display()));
    }
    let overrides = config.overrides(None, None, None)?;
    match config.plan_seed(source.seed) {
        Some(seed) => Ok(datasetops::plan_benchmark(seed, overrides.as_ref())?),
        None if overrides.is_some() => Ok(datasetops::plan_benchmark(0, overrides.as_ref())?),
        None => bail!("give either --plan or --seed"),
    }
}

fn patch(config: &CliConfig, args: &PatchArgs) -> Result<PatchSpec> {
    config.patch(args.patch_top, args.patch_left, args.patch_size)
}

fn write_images(path: &Path, records: &[ImageRecord]) -> Result<()> {
    let mut bytes = Vec::with_capacity(records.len() * datasetops::RECORD_BYTES);
    datasetops::write_cifar100(records, &mut bytes)?;
    write_atomic(path, &bytes)
}

fn dataset_outputs(
    command: &'static str,
    input: &Path,
    out: &Path,
    plan: &BenchmarkPlan,
    spec: &PatchSpec,
    records: &[ImageRecord],
) -> Result<()> {
    write_images(out, records)?;
    let mut plan_json = plan.to_json()?;
    plan_json.push('\n');
    write_atomic(&output::sidecar(out, "plan.json"), plan_json.as_bytes())?;
    let mut prov = Provenance::new(command, serde_json::json!({ "patch": spec })).input("images", input);
    prov.plan = Some(plan);
    write_json(&output::sidecar(out, "provenance.json"), &prov)?;
    println!("wrote {} records to {}", records.len(), out.display());
    Ok(())
}

fn inject(config: &CliConfig, args: InjectArgs) -> Result<Outcome> {
    let records = load_images(&args.input)?;
    let plan = resolve_plan(config, &args.plan)?;
    let spec = patch(config, &args.patch)?;
    let out = if args.shortcut_only {
        datasetops::sc_patched(&records, &plan, &spec)
    } else {
        datasetops::t2_with_patches(&records, &plan, &spec)
    };
    dataset_outputs("inject", &args.input, &args.out, &plan, &spec, &out)?;
    Ok(Outcome::Done)
}

fn mask(config: &CliConfig, args: MaskArgs) -> Result<Outcome> {
    let records = load_images(&args.input)?;
    let plan = resolve_plan(config, &args.plan)?;
    let spec = patch(config, &args.patch)?;
    let out = datasetops::sc_masked(&records, &plan, &spec);
    dataset_outputs("mask", &args.input, &args.out, &plan, &spec, &out)?;
    Ok(Outcome::Done)
}

fn plan(config: &CliConfig, args: PlanArgs) -> Result<Outcome> {
    let overrides = config.overrides(args.t1, args.t2, args.sc)?;
    let seed = match (config.plan_seed(args.seed), &overrides) {
        (Some(seed), _) => seed,
        (None, Some(_)) => 0,
        (None, None) => bail!("give --seed or explicit --t1/--t2/--sc"),
    };
    let plan = datasetops::plan_benchmark(seed, overrides.as_ref())?;
    let mut text = plan.to_json()?;
    text.push('\n');
    match args.out {
        Some(path) => write_atomic(&path, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(Outcome::Done)
}

struct Resolved {
    run_set: RunSet,
    cfg: ThresholdConfig,
    pairing: SeedPairing,
}

fn eri_config_json(r: &Resolved, margins: Option<&RigidityMargins>) -> serde_json::Value {
    serde_json::json!({
        "baseline_method": r.run_set.baseline_method(),
        "threshold": r.cfg,
        "margins": margins,
        "pairing": r.pairing,
    })
}

fn ad_text(ad: &AdaptationDelay) -> String {
    match ad {
        AdaptationDelay::Defined { value } => value.to_string(),
        AdaptationDelay::Undefined { .. } => {
            let side = match ad.censored_side() {
                Some(metrics::CensoredSide::Continual) => "continual",
                Some(metrics::CensoredSide::Scratch) => "baseline",
                _ => "both",
            };
            format!("undefined (no crossing: {side})")
        }
    }
}

fn print_results(results: &[EriResult], rows: &[eri_core::aggregate::SummaryRow]) {
    print!("{}", render_table(&report::summary_table(rows)));
    println!();
    let color = color_enabled();
    for r in results {
        let pairing = match &r.baseline {
            BaselinePairing::Paired { .. } => String::new(),
            BaselinePairing::SeedMean { .. } => "  [baseline seed mean]".to_string(),
        };
        println!(
            "{} seed {}: {}  AD={}  PD={}  SFR_rel={}{}",
            r.method,
            r.seed,
            paint_regime(r.regime, color),
            ad_text(&r.ad),
            report::format_half_up(r.pd, 3),
            report::format_half_up(r.sfr_rel, 3),
            pairing
        );
        if let Some(note) = &r.note {
            println!("  note: {note}");
        }
    }
}

fn write_compute_outputs(
    dir: &Path,
    run_set: &RunSet,
    results: &[EriResult],
) -> Result<Vec<eri_core::aggregate::SummaryRow>> {
    let rows = summarize(results, &collect_accuracies(run_set)?)?;
    write_json(&dir.join("eri_results.json"), &results)?;
    write_atomic(&dir.join("summary.csv"), report::summary_export(&rows)?.as_bytes())?;
    write_atomic(
        &dir.join("summary_full.csv"),
        report::summary_export_full(&rows)?.as_bytes(),
    )?;
    Ok(rows)
}

fn pairing_notes(results: &[EriResult]) -> Vec<String> {
    results
        .iter()
        .filter(|r| matches!(r.baseline, BaselinePairing::SeedMean { .. }))
        .map(|r| {
            format!(
                "{} seed {} has no same-seed baseline run and uses the baseline seed mean",
                r.method, r.seed
            )
        })
        .collect()
}

fn compute(config: &CliConfig, args: ComputeArgs) -> Result<Outcome> {
    let r = Resolved {
        run_set: load_run_set(config, &args.log)?,
        cfg: threshold(config, &args.threshold, None)?,
        pairing: config.pairing(args.pairing.strict_pairing),
    };
    let margins = config.margins(args.margins.delta_ad, args.margins.delta_pd, args.margins.delta_sfr)?;
    prepare_dir(&args.out_dir)?;
    let results = metrics::compute_all(&r.run_set, &r.cfg, &margins, r.pairing)?;
    let rows = write_compute_outputs(&args.out_dir, &r.run_set, &results)?;
    let mut prov = Provenance::new("compute", eri_config_json(&r, Some(&margins))).input("log", &args.log.log);
    prov.notes = pairing_notes(&results);
    write_json(&args.out_dir.join("provenance.json"), &prov)?;
    print_results(&results, &rows);
    Ok(outcome(results.iter().map(|r| &r.ad)))
}

fn outcome<'a>(ads: impl IntoIterator<Item = &'a AdaptationDelay>) -> Outcome {
    if ads.into_iter().any(|ad| !ad.is_defined()) {
        Outcome::Censored
    } else {
        Outcome::Done
    }
}

struct Sensitivity {
    per_seed: BTreeMap<String, Vec<(u64, Vec<metrics::AdAtThreshold>)>>,
    cells: BTreeMap<String, Vec<GridCell>>,
    primary: Vec<AdaptationDelay>,
}

fn sensitivity_of(r: &Resolved) -> Result<Sensitivity> {
    let mut per_seed = BTreeMap::new();
    let mut primary = Vec::new();
    for method in r.run_set.continual_methods() {
        per_seed.insert(
            method.to_string(),
            metrics::ad_grid(&r.run_set, method, &r.cfg, r.pairing)?,
        );
        primary.extend(
            metrics::primary_ad(&r.run_set, method, &r.cfg, r.pairing)?
                .into_iter()
                .map(|(_, ad)| ad),
        );
    }
    if per_seed.is_empty() {
        bail!(
            "log has no continual methods besides the baseline {}",
            r.run_set.baseline_method()
        );
    }
    let cells = ad_grid_by_method(&per_seed)?;
    Ok(Sensitivity {
        per_seed,
        cells,
        primary,
    })
}

fn write_sensitivity_outputs(dir: &Path, s: &Sensitivity) -> Result<()> {
    write_atomic(&dir.join("heatmap.csv"), report::heatmap_export(&s.cells)?.as_bytes())?;
    write_atomic(
        &dir.join("heatmap_seeds.csv"),
        report::heatmap_per_seed_export(&s.per_seed)?.as_bytes(),
    )?;
    Ok(())
}

fn print_heatmap(cells: &BTreeMap<String, Vec<GridCell>>) {
    let Some(first) = cells.values().next() else { return };
    let mut rows = vec![std::iter::once("method".to_string())
        .chain(first.iter().map(|c| report::format_tau(c.tau)))
        .collect::<Vec<_>>()];
    for (method, grid) in cells {
        rows.push(
            std::iter::once(method.clone())
                .chain(grid.iter().map(|c| match c.mean_ad {
                    Some(v) if !c.is_hatched() => report::format_half_up(v, 2),
                    _ => HATCHED.to_string(),
                }))
                .collect(),
        );
    }
    print!("{}", render_table(&rows));
}

fn sensitivity(config: &CliConfig, args: SensitivityArgs) -> Result<Outcome> {
    let r = Resolved {
        run_set: load_run_set(config, &args.log)?,
        cfg: threshold(config, &args.threshold, args.grid)?,
        pairing: config.pairing(args.pairing.strict_pairing),
    };
    prepare_dir(&args.out_dir)?;
    let s = sensitivity_of(&r)?;
    write_sensitivity_outputs(&args.out_dir, &s)?;
    let prov = Provenance::new("sensitivity", eri_config_json(&r, None)).input("log", &args.log.log);
    write_json(&args.out_dir.join("provenance.json"), &prov)?;
    print_heatmap(&s.cells);
    Ok(outcome(&s.primary))
}

fn report_all(config: &CliConfig, args: ReportArgs) -> Result<Outcome> {
    let r = Resolved {
        run_set: load_run_set(config, &args.log)?,
        cfg: threshold(config, &args.threshold, args.grid)?,
        pairing: config.pairing(args.pairing.strict_pairing),
    };
    let margins = config.margins(args.margins.delta_ad, args.margins.delta_pd, args.margins.delta_sfr)?;
    prepare_dir(&args.out_dir)?;

    let results = metrics::compute_all(&r.run_set, &r.cfg, &margins, r.pairing)?;
    let rows = write_compute_outputs(&args.out_dir, &r.run_set, &results)?;
    let s = sensitivity_of(&r)?;
    write_sensitivity_outputs(&args.out_dir, &s)?;
    let panels = report::panel_series(&r.run_set, &r.cfg)?;
    write_atomic(
        &args.out_dir.join("panels.csv"),
        report::panels_export(&panels)?.as_bytes(),
    )?;
    let footnotes = report::panel_footnotes(&panels);
    let mut text = footnotes.join("\n");
    if !text.is_empty() {
        text.push('\n');
    }
    write_atomic(&args.out_dir.join("panels_footnotes.txt"), text.as_bytes())?;

    let mut prov = Provenance::new("report", eri_config_json(&r, Some(&margins))).input("log", &args.log.log);
    prov.notes = pairing_notes(&results).into_iter().chain(footnotes).collect();
    write_json(&args.out_dir.join("provenance.json"), &prov)?;

    print_results(&results, &rows);
    println!();
    print_heatmap(&s.cells);
    Ok(outcome(results.iter().map(|r| &r.ad)))
}

fn apply(
    model: &mut SynthModel,
    shape: Option<SynthShape>,
    asymptote: Option<f64>,
    midpoint: Option<f64>,
    rate: Option<f64>,
    delta: Option<f64>,
) {
    let c = &mut model.curve;
    c.shape = shape.unwrap_or(c.shape);
    c.asymptote = asymptote.unwrap_or(c.asymptote);
    c.midpoint = midpoint.unwrap_or(c.midpoint);
    c.rate = rate.unwrap_or(c.rate);
    model.masking_delta = delta.unwrap_or(model.masking_delta);
}

fn synth(args: SynthArgs) -> Result<Outcome> {
    let mut study = args.scenario.study(args.seed, args.seeds, args.budget, args.noise_sd);
    study.method = args.method;
    study.baseline_method = args.baseline;
    let cl = &args.cl;
    apply(
        &mut study.continual,
        cl.shape,
        cl.asymptote,
        cl.midpoint,
        cl.rate,
        cl.delta,
    );
    let s = &args.scratch;
    apply(&mut study.baseline, s.shape, s.asymptote, s.midpoint, s.rate, s.delta);

    let run_set = report::synth_run_set(&study)?;
    let format = args.format.unwrap_or_else(|| LogFormat::from_path(&args.out));
    let mut bytes = Vec::new();
    logio::write_log(&run_set, &mut bytes, format)?;
    write_atomic(&args.out, &bytes)?;
    let prov = Provenance::new(
        "synth",
        serde_json::json!({ "scenario": args.scenario, "study": study }),
    );
    write_json(&output::sidecar(&args.out, "provenance.json"), &prov)?;
    println!("wrote {} curves to {}", run_set.curves().count(), args.out.display());
    Ok(Outcome::Done)
}

fn validate(config: &CliConfig, args: ValidateArgs) -> Result<Outcome> {
    let run_set = load_run_set(config, &args.log)?;
    let methods: Vec<String> = match args.method {
        Some(m) => vec![m],
        None => run_set.continual_methods().into_iter().map(str::to_string).collect(),
    };
    let mut count = 0;
    for method in &methods {
        for finding in logio::validate_comparability(&run_set, method)? {
            println!("{method}: {finding}");
            count += 1;
        }
    }
    if count > 0 {
        bail!("{count} comparability finding(s)");
    }
    println!(
        "ok: {} method(s) comparable with {}",
        methods.len(),
        run_set.baseline_method()
    );
    Ok(Outcome::Done)
}
