//! `mrc` — rank-based regression for response-biased samples.
//!
//! Subcommands: `fit` (point estimate from a CSV), `infer` (fit plus
//! random-weighting standard errors and intervals), `simulate` (Monte Carlo
//! scenarios, data emission, the efficiency study), and `compare` (rank
//! estimator vs inverse-probability-weighted least squares side by side).

mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use mrc_core::data::ModelSpec;
use mrc_core::datasets::{
    complete_cases, dataset_to_records, load_csv, write_csv as write_data_csv, ColumnMap,
    Provenance,
};
use mrc_core::harness::{
    run_efficiency_study, run_scenario, EfficiencyReport, Estimator, ScenarioSpec,
    SimulationReport,
};
use mrc_core::inference::{derived_ratio_ci, resample_fit, RatioInference, ResampleConfig};
use mrc_core::optimize::{mrc_fit, mrc_fit_smoothed, OptimizerConfig};
use mrc_core::sampling::draw_biased_sample;
use mrc_core::{Dataset, Error};

use config::{CliConfig, OutputFormat};
use output::{cell_opt, write_csv, write_json, CsvTable};

#[derive(Parser)]
#[command(name = "mrc", version, about = "Rank-based regression with response-biased sampling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate coefficients from a CSV file.
    Fit(RunArgs),
    /// Fit plus resampling standard errors and confidence intervals.
    Infer(RunArgs),
    /// Run simulation scenarios, emit generated data, or run the
    /// efficiency study.
    Simulate(RunArgs),
    /// Run the rank estimator and the IPW baseline on the same replicates.
    Compare(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Input CSV path (fit/infer).
    #[arg(long)]
    input: Option<String>,
    /// Column mapping, e.g. "y=resp,z=anchor,x=a+b,delta=ev,trunc=t0".
    #[arg(long)]
    columns: Option<String>,
    /// Anchor column name (shorthand for the z entry of --columns).
    #[arg(long)]
    anchor: Option<String>,
    /// Resampling replicates (0 disables resampling).
    #[arg(long)]
    resamples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Sampling scheme: 1..5 or custom (with --regions).
    #[arg(long)]
    scheme: Option<String>,
    /// Acceptance regions for the custom scheme: "lo:hi,lo:hi" (inf ok).
    #[arg(long, allow_hyphen_values = true)]
    regions: Option<String>,
    /// Error distribution: dexp|normal|ev|logistic|mixture.
    #[arg(long)]
    error: Option<String>,
    /// Sample size per replication.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    replications: Option<usize>,
    /// Output format: json|csv.
    #[arg(long)]
    format: Option<String>,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<String>,
    /// Write one generated sample as CSV instead of simulating.
    #[arg(long)]
    emit_data: bool,
    /// Use the bivariate-normal simulation design (the default).
    #[arg(long)]
    table1: bool,
    /// Run the biased-vs-prospective efficiency study.
    #[arg(long)]
    efficiency: bool,
    /// Maximize the logistic-smoothed objective at this bandwidth instead
    /// of the exact pair count.
    #[arg(long)]
    smoothed_bandwidth: Option<f64>,
    /// Ratio inference "NUM[/DEN|/anchor]" over coefficient indices.
    #[arg(long)]
    ratio: Option<String>,
    /// Interval construction: normal|percentile.
    #[arg(long)]
    ci: Option<String>,
    #[arg(long)]
    ci_level: Option<f64>,
    /// Run replications serially (results are identical to parallel).
    #[arg(long)]
    serial: bool,
    /// Key-value config file; entries override flags.
    #[arg(long)]
    config: Option<String>,
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = match &cli.command {
        Command::Fit(a) => ("fit", a),
        Command::Infer(a) => ("infer", a),
        Command::Simulate(a) => ("simulate", a),
        Command::Compare(a) => ("compare", a),
    };

    let (cfg, scheme_set) = match resolve_config(args) {
        Ok(v) => v,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };

    let result = match name {
        "fit" => cmd_fit(&cfg),
        "infer" => cmd_infer(&cfg),
        "simulate" => cmd_simulate(&cfg, scheme_set),
        "compare" => cmd_compare(&cfg, scheme_set),
        _ => unreachable!(),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let report = serde_json::json!({
                "error": { "code": err.code(), "message": err.to_string() }
            });
            eprintln!("{report}");
            ExitCode::FAILURE
        }
    }
}

fn resolve_config(args: &RunArgs) -> Result<(CliConfig, bool), String> {
    let mut cfg = CliConfig::default();
    let mut scheme_set = args.scheme.is_some();

    if let Some(v) = &args.input {
        cfg.input = Some(v.clone());
    }
    if let Some(v) = &args.columns {
        cfg.apply_columns_flag(v)?;
    }
    if let Some(v) = &args.anchor {
        cfg.columns.z = v.clone();
    }
    if let Some(v) = args.resamples {
        cfg.resamples = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = &args.scheme {
        cfg.scheme = v.clone();
    }
    if let Some(v) = &args.regions {
        cfg.apply_regions_flag(v)?;
    }
    if let Some(v) = &args.error {
        cfg.error = v.clone();
    }
    if let Some(v) = args.n {
        cfg.n = v;
    }
    if let Some(v) = args.replications {
        cfg.replications = v;
    }
    if let Some(v) = &args.format {
        cfg.format = match v.as_str() {
            "json" => OutputFormat::Json,
            "csv" => OutputFormat::Csv,
            other => return Err(format!("unknown format '{other}' (json|csv)")),
        };
    }
    if let Some(v) = &args.out {
        cfg.out = Some(v.clone());
    }
    cfg.emit_data |= args.emit_data;
    cfg.table1 |= args.table1;
    cfg.efficiency |= args.efficiency;
    if let Some(v) = args.smoothed_bandwidth {
        cfg.smoothed_bandwidth = Some(v);
    }
    if let Some(v) = &args.ratio {
        cfg.ratio = Some(v.clone());
    }
    if let Some(v) = &args.ci {
        cfg.ci_method = match v.as_str() {
            "normal" => mrc_core::inference::CiMethod::Normal,
            "percentile" => mrc_core::inference::CiMethod::Percentile,
            other => return Err(format!("unknown ci method '{other}'")),
        };
    }
    if let Some(v) = args.ci_level {
        cfg.ci_level = v;
    }
    cfg.serial |= args.serial;
    cfg.verbosity = args.verbose;

    if let Some(path) = &args.config {
        let keys = cfg.apply_config_file(Path::new(path))?;
        scheme_set |= keys.iter().any(|k| k == "scheme");
    }
    Ok((cfg, scheme_set))
}

fn out_path(cfg: &CliConfig) -> Option<PathBuf> {
    cfg.out.as_ref().map(PathBuf::from)
}

// ---------------------------------------------------------------------------
// fit / infer
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct FitPayload {
    anchor: String,
    beta_hat: Vec<f64>,
    objective_raw: f64,
    objective_normalized: f64,
    evals: usize,
    start_used: usize,
    converged: bool,
    warnings: Vec<String>,
    provenance: Provenance,
    rejected_rows: usize,
}

impl CsvTable for FitPayload {
    fn header(&self) -> Vec<&'static str> {
        vec!["coefficient", "estimate"]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        self.beta_hat
            .iter()
            .enumerate()
            .map(|(j, b)| vec![j.to_string(), b.to_string()])
            .collect()
    }
}

fn load_input(cfg: &CliConfig) -> Result<(Dataset, Provenance, usize, ColumnMap), Error> {
    let input = cfg
        .input
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("--input is required".into()))?;
    let map = resolve_column_map(cfg, Path::new(input))?;
    let report = load_csv(input, &map)?;
    for reject in &report.rejects {
        eprintln!("warning: line {} rejected: {}", reject.line, reject.reason);
    }
    let (data, prov) = complete_cases(&report.records)?;
    Ok((data, prov, report.rejects.len(), map))
}

/// Column map resolution; when no x columns were named, every header column
/// not otherwise mapped becomes a covariate.
fn resolve_column_map(cfg: &CliConfig, input: &Path) -> Result<ColumnMap, Error> {
    let mut map = ColumnMap::new(cfg.columns.y.clone(), cfg.columns.z.clone(), cfg.columns.x.clone());
    map.delta = cfg.columns.delta.clone();
    map.trunc = cfg.columns.trunc.clone();
    if map.x.is_empty() {
        let text = std::fs::read_to_string(input).map_err(|e| {
            Error::Schema(format!("cannot read input '{}': {e}", input.display()))
        })?;
        let header = text
            .lines()
            .find(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
            .ok_or_else(|| Error::Schema(format!("'{}' has no header row", input.display())))?;
        map.x = header
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|c| {
                *c != map.y
                    && *c != map.z
                    && Some(c) != map.delta.as_ref()
                    && Some(c) != map.trunc.as_ref()
            })
            .collect();
        if map.x.is_empty() {
            return Err(Error::Schema(
                "no covariate columns left after mapping y/z; use --columns x=...".into(),
            ));
        }
    }
    Ok(map)
}

fn fit_dataset(cfg: &CliConfig, data: &Dataset, anchor: &str) -> Result<mrc_core::FitResult, Error> {
    let spec = ModelSpec::with_anchor(data.dim(), anchor);
    let ocfg = OptimizerConfig::default();
    match cfg.smoothed_bandwidth {
        Some(h) => mrc_fit_smoothed(data, &spec, &ocfg, h),
        None => mrc_fit(data, &spec, &ocfg),
    }
}

fn cmd_fit(cfg: &CliConfig) -> Result<(), Error> {
    let (data, prov, rejected, map) = load_input(cfg)?;
    let fit = fit_dataset(cfg, &data, &map.z)?;
    let payload = FitPayload {
        anchor: map.z.clone(),
        beta_hat: fit.beta_hat,
        objective_raw: fit.objective.raw,
        objective_normalized: fit.objective.normalized,
        evals: fit.evals,
        start_used: fit.start_used,
        converged: fit.converged,
        warnings: fit.warnings,
        provenance: prov,
        rejected_rows: rejected,
    };
    emit("fit", cfg, &payload)
}

#[derive(Serialize)]
struct RatioPayload {
    spec: String,
    estimate: f64,
    se: f64,
    ci: (f64, f64),
    n_dropped: usize,
}

#[derive(Serialize)]
struct InferPayload {
    fit: FitPayload,
    se: Option<Vec<f64>>,
    ci: Option<Vec<(f64, f64)>>,
    resample_failures: Option<usize>,
    ratio: Option<RatioPayload>,
    warnings: Vec<String>,
}

impl CsvTable for InferPayload {
    fn header(&self) -> Vec<&'static str> {
        vec!["coefficient", "estimate", "se", "ci_lo", "ci_hi"]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        let mut rows: Vec<Vec<String>> = self
            .fit
            .beta_hat
            .iter()
            .enumerate()
            .map(|(j, b)| {
                vec![
                    j.to_string(),
                    b.to_string(),
                    cell_opt(self.se.as_ref().map(|s| s[j])),
                    cell_opt(self.ci.as_ref().map(|c| c[j].0)),
                    cell_opt(self.ci.as_ref().map(|c| c[j].1)),
                ]
            })
            .collect();
        if let Some(r) = &self.ratio {
            rows.push(vec![
                format!("ratio:{}", r.spec),
                r.estimate.to_string(),
                r.se.to_string(),
                r.ci.0.to_string(),
                r.ci.1.to_string(),
            ]);
        }
        rows
    }
}

fn cmd_infer(cfg: &CliConfig) -> Result<(), Error> {
    let (data, prov, rejected, map) = load_input(cfg)?;
    let fit = fit_dataset(cfg, &data, &map.z)?;
    let spec = ModelSpec::with_anchor(data.dim(), &map.z);

    let mut warnings = Vec::new();
    let (se, ci, failures, ratio) = if cfg.resamples == 0 {
        warnings.push("resamples = 0: no standard errors computed".to_string());
        eprintln!("warning: resamples = 0: no standard errors computed");
        (None, None, None, None)
    } else {
        let rcfg = ResampleConfig {
            replicates: cfg.resamples,
            seed: cfg.seed,
            ci_level: cfg.ci_level,
            ci_method: cfg.ci_method,
            parallel: !cfg.serial,
            ..ResampleConfig::default()
        };
        let summary = resample_fit(&data, &spec, &fit, &rcfg, &OptimizerConfig::default())?;
        let ratio = match cfg.ratio_coords()? {
            None => None,
            Some((num, den)) => {
                let r: RatioInference<f64> =
                    derived_ratio_ci(&summary, &fit, num, den, cfg.ci_level)?;
                Some(RatioPayload {
                    spec: cfg.ratio.clone().unwrap_or_default(),
                    estimate: r.estimate,
                    se: r.se,
                    ci: r.ci,
                    n_dropped: r.n_dropped,
                })
            }
        };
        (
            Some(summary.se),
            Some(summary.ci),
            Some(summary.n_failed),
            ratio,
        )
    };

    let payload = InferPayload {
        fit: FitPayload {
            anchor: map.z.clone(),
            beta_hat: fit.beta_hat.clone(),
            objective_raw: fit.objective.raw,
            objective_normalized: fit.objective.normalized,
            evals: fit.evals,
            start_used: fit.start_used,
            converged: fit.converged,
            warnings: fit.warnings.clone(),
            provenance: prov,
            rejected_rows: rejected,
        },
        se,
        ci,
        resample_failures: failures,
        ratio,
        warnings,
    };
    emit("infer", cfg, &payload)
}

// ---------------------------------------------------------------------------
// simulate / compare
// ---------------------------------------------------------------------------

impl CsvTable for SimulationReport {
    fn header(&self) -> Vec<&'static str> {
        vec!["estimator", "coefficient", "bias", "se", "see", "cp"]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.estimator.clone(),
                    r.coefficient.to_string(),
                    r.bias.to_string(),
                    r.se.to_string(),
                    cell_opt(r.see),
                    cell_opt(r.cp),
                ]
            })
            .collect()
    }
}

impl CsvTable for EfficiencyReport {
    fn header(&self) -> Vec<&'static str> {
        vec![
            "mean_biased",
            "sd_biased",
            "mean_prospective",
            "sd_prospective",
            "relative_efficiency",
        ]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        vec![vec![
            self.mean_biased.to_string(),
            self.sd_biased.to_string(),
            self.mean_prospective.to_string(),
            self.sd_prospective.to_string(),
            self.relative_efficiency.to_string(),
        ]]
    }
}

fn scenario_from(cfg: &CliConfig, scheme_set: bool, estimators: Vec<Estimator>) -> Result<ScenarioSpec, Error> {
    let model = cfg.population_model()?;
    let scheme = cfg.simulate_scheme(scheme_set)?;
    let mut spec = ScenarioSpec::new(model, scheme, cfg.seed);
    spec.n = cfg.n;
    spec.replications = cfg.replications;
    spec.resamples = cfg.resamples;
    spec.estimators = estimators;
    spec.ci_level = cfg.ci_level;
    spec.ci_method = cfg.ci_method;
    spec.parallel = !cfg.serial;
    Ok(spec)
}

fn cmd_simulate(cfg: &CliConfig, scheme_set: bool) -> Result<(), Error> {
    if cfg.efficiency {
        let report = run_efficiency_study(cfg.seed, cfg.replications, cfg.n, !cfg.serial)?;
        return emit("simulate", cfg, &report);
    }

    if cfg.emit_data {
        let out = out_path(cfg).ok_or_else(|| {
            Error::InvalidArgument("--emit-data needs --out <path>".into())
        })?;
        let model = cfg.population_model()?;
        let scheme = cfg.simulate_scheme(scheme_set)?;
        let (data, rate) = draw_biased_sample(&model, &scheme, cfg.n, cfg.seed)?;
        let d = data.dim();
        let map = ColumnMap::new(
            "y",
            "z",
            (1..=d).map(|k| format!("x{k}")).collect(),
        );
        write_data_csv(&out, &dataset_to_records(&data), &map)?;
        if cfg.verbosity > 0 {
            eprintln!("emitted {} rows (acceptance rate {rate:.4})", data.n());
        }
        return Ok(());
    }

    let spec = scenario_from(cfg, scheme_set, vec![Estimator::Mrc])?;
    let report = run_scenario(&spec)?;
    if cfg.verbosity > 0 {
        eprintln!("scenario runtime: {:?}", report.runtime);
    }
    emit("simulate", cfg, &report)
}

fn cmd_compare(cfg: &CliConfig, scheme_set: bool) -> Result<(), Error> {
    let spec = scenario_from(cfg, scheme_set, vec![Estimator::Mrc, Estimator::Ipw])?;
    let report = run_scenario(&spec)?;
    if cfg.verbosity > 0 {
        eprintln!("scenario runtime: {:?}", report.runtime);
    }
    emit("compare", cfg, &report)
}

fn emit<T: Serialize + CsvTable>(command: &str, cfg: &CliConfig, payload: &T) -> Result<(), Error> {
    let out = out_path(cfg);
    match cfg.format {
        OutputFormat::Json => write_json(command, cfg, payload, out.as_deref())?,
        OutputFormat::Csv => write_csv(command, cfg, payload, out.as_deref())?,
    }
    Ok(())
}
