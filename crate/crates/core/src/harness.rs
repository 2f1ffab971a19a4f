//! Monte Carlo scenario runner.
//!
//! A scenario is (population model, sampling scheme, sample size,
//! replication counts, estimators). Each replication draws a biased sample,
//! fits the requested estimators, optionally resamples for standard errors,
//! and the harness aggregates the usual simulation-study metrics: BIAS
//! (mean estimate minus truth), SE (SD of estimates across replications),
//! SEE (mean of resampling standard errors) and CP (fraction of
//! nominal-level intervals covering the truth).
//!
//! Replication `r` derives all of its randomness from substreams of the
//! scenario seed indexed by `r`, so replications can run on any thread
//! schedule and the report is identical.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::comparator::ipw_least_squares;
use crate::data::ModelSpec;
use crate::error::{Error, Result};
use crate::inference::{resample_fit, CiMethod, ResampleConfig, WeightLaw};
use crate::optimize::{mrc_fit, OptimizerConfig};
use crate::rng::substream_seed;
use crate::sampling::{
    draw_biased_sample, CovariateLaw, ErrorDist, PopulationModel, SamplingScheme,
};
use crate::stats::{mean, sample_sd};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Mrc,
    Ipw,
}

impl Estimator {
    pub fn label(&self) -> &'static str {
        match self {
            Estimator::Mrc => "mrc",
            Estimator::Ipw => "ipw",
        }
    }
}

/// Full description of one simulation scenario.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub model: PopulationModel,
    pub scheme: SamplingScheme,
    pub n: usize,
    pub replications: usize,
    /// Random-weighting replicates per replication; 0 skips resampling
    /// (SEE and CP are then absent).
    pub resamples: usize,
    pub estimators: Vec<Estimator>,
    pub seed: u64,
    pub ci_level: f64,
    pub ci_method: CiMethod,
    pub optimizer: OptimizerConfig<f64>,
    /// Replicate resampling from the full start grid as well as the warm
    /// start (slower, usually unnecessary).
    pub full_grid_resampling: bool,
    /// Initial simplex edge for the weighted re-maximizations.
    pub resample_step: f64,
    /// Distribute replications across threads. A schedule detail, not part
    /// of the scenario: results are identical either way, so it is excluded
    /// from serialized reports.
    #[serde(skip_serializing, default = "default_parallel")]
    pub parallel: bool,
}

fn default_parallel() -> bool {
    true
}

impl ScenarioSpec {
    pub fn new(model: PopulationModel, scheme: SamplingScheme, seed: u64) -> Self {
        ScenarioSpec {
            model,
            scheme,
            n: 200,
            replications: 100,
            resamples: 500,
            estimators: vec![Estimator::Mrc],
            seed,
            ci_level: 0.95,
            ci_method: CiMethod::Normal,
            optimizer: OptimizerConfig::default(),
            full_grid_resampling: false,
            resample_step: 0.2,
            parallel: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.replications < 2 {
            return Err(Error::InvalidArgument(
                "need at least 2 replications".into(),
            ));
        }
        if self.n < 2 {
            return Err(Error::InvalidArgument("need n >= 2".into()));
        }
        if self.estimators.is_empty() {
            return Err(Error::InvalidArgument("no estimators requested".into()));
        }
        Ok(())
    }
}

/// Everything recorded about one replication.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub replication: usize,
    pub acceptance_rate: f64,
    pub mrc_estimate: Option<Vec<f64>>,
    pub mrc_se: Option<Vec<f64>>,
    pub mrc_ci: Option<Vec<(f64, f64)>>,
    pub ipw_estimate: Option<Vec<f64>>,
    pub failure: Option<String>,
}

/// One estimator/coefficient cell of the aggregate table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricRow {
    pub estimator: String,
    pub coefficient: usize,
    pub bias: f64,
    pub se: f64,
    pub see: Option<f64>,
    pub cp: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationReport {
    pub rows: Vec<MetricRow>,
    pub replications_used: usize,
    pub failures: usize,
    /// Wall-clock time; excluded from serialized reports so runs with the
    /// same seed emit byte-identical artifacts.
    #[serde(skip)]
    pub runtime: Duration,
    /// The resolved scenario, echoed for reproducibility.
    pub scenario: ScenarioSpec,
}

/// Run the scenario and aggregate metrics.
pub fn run_scenario(spec: &ScenarioSpec) -> Result<SimulationReport> {
    run_scenario_detailed(spec).map(|(report, _)| report)
}

/// Like [`run_scenario`], also returning the per-replication records.
pub fn run_scenario_detailed(
    spec: &ScenarioSpec,
) -> Result<(SimulationReport, Vec<ReplicationRecord>)> {
    spec.validate()?;
    let start = Instant::now();

    let run_one = |r: usize| run_replication(spec, r);
    let records: Vec<ReplicationRecord> = if spec.parallel {
        (0..spec.replications).into_par_iter().map(run_one).collect()
    } else {
        (0..spec.replications).map(run_one).collect()
    };

    // Scheme infeasibility poisons the whole scenario.
    if let Some(rec) = records
        .iter()
        .find(|r| r.failure.as_deref().is_some_and(|f| f.contains("infeasible")))
    {
        return Err(Error::ScenarioFailure(format!(
            "replication {}: {}",
            rec.replication,
            rec.failure.as_deref().unwrap_or("")
        )));
    }

    let failures = records.iter().filter(|r| r.failure.is_some()).count();
    if failures * 20 > spec.replications {
        return Err(Error::ScenarioFailure(format!(
            "{failures} of {} replications failed",
            spec.replications
        )));
    }

    let report = aggregate(spec, &records, failures, start.elapsed())?;
    Ok((report, records))
}

fn run_replication(spec: &ScenarioSpec, r: usize) -> ReplicationRecord {
    let data_seed = substream_seed(spec.seed, 2 * r as u64);
    let resample_seed = substream_seed(spec.seed, 2 * r as u64 + 1);

    let mut record = ReplicationRecord {
        replication: r,
        acceptance_rate: f64::NAN,
        mrc_estimate: None,
        mrc_se: None,
        mrc_ci: None,
        ipw_estimate: None,
        failure: None,
    };

    let (data, rate) = match draw_biased_sample(&spec.model, &spec.scheme, spec.n, data_seed) {
        Ok(v) => v,
        Err(e) => {
            record.failure = Some(e.to_string());
            return record;
        }
    };
    record.acceptance_rate = rate;

    for estimator in &spec.estimators {
        match estimator {
            Estimator::Mrc => {
                let model_spec = ModelSpec::new(data.dim());
                let fit = match mrc_fit(&data, &model_spec, &spec.optimizer) {
                    Ok(f) => f,
                    Err(e) => {
                        record.failure = Some(format!("mrc fit: {e}"));
                        return record;
                    }
                };
                if spec.resamples > 0 {
                    let rcfg = ResampleConfig {
                        replicates: spec.resamples,
                        weight_law: WeightLaw::Exponential,
                        seed: resample_seed,
                        ci_level: spec.ci_level,
                        ci_method: spec.ci_method,
                        full_grid: spec.full_grid_resampling,
                        resample_step: spec.resample_step,
                        // Replications own the outer parallelism.
                        parallel: false,
                    };
                    match resample_fit(&data, &model_spec, &fit, &rcfg, &spec.optimizer) {
                        Ok(summary) => {
                            record.mrc_se = Some(summary.se);
                            record.mrc_ci = Some(summary.ci);
                        }
                        Err(e) => {
                            record.failure = Some(format!("resampling: {e}"));
                            return record;
                        }
                    }
                }
                record.mrc_estimate = Some(fit.beta_hat);
            }
            Estimator::Ipw => match ipw_least_squares(&data, &spec.scheme) {
                Ok(fit) => {
                    record.ipw_estimate = Some(fit.x_coefficients().to_vec());
                }
                Err(e) => {
                    record.failure = Some(format!("ipw fit: {e}"));
                    return record;
                }
            },
        }
    }
    record
}

fn aggregate(
    spec: &ScenarioSpec,
    records: &[ReplicationRecord],
    failures: usize,
    runtime: Duration,
) -> Result<SimulationReport> {
    let beta0 = &spec.model.beta0;
    let d = beta0.len();
    let ok: Vec<&ReplicationRecord> = records.iter().filter(|r| r.failure.is_none()).collect();
    let mut rows = Vec::new();

    for estimator in &spec.estimators {
        for j in 0..d {
            let estimates: Vec<f64> = ok
                .iter()
                .filter_map(|r| match estimator {
                    Estimator::Mrc => r.mrc_estimate.as_ref(),
                    Estimator::Ipw => r.ipw_estimate.as_ref(),
                })
                .map(|b| b[j])
                .collect();
            if estimates.is_empty() {
                return Err(Error::ScenarioFailure(format!(
                    "no successful replications for {}",
                    estimator.label()
                )));
            }
            let bias = mean(&estimates) - beta0[j];
            let se = sample_sd(&estimates);

            let (see, cp) = if *estimator == Estimator::Mrc && spec.resamples > 0 {
                let ses: Vec<f64> = ok
                    .iter()
                    .filter_map(|r| r.mrc_se.as_ref())
                    .map(|s| s[j])
                    .collect();
                let covered = ok
                    .iter()
                    .filter_map(|r| r.mrc_ci.as_ref())
                    .filter(|ci| ci[j].0 <= beta0[j] && beta0[j] <= ci[j].1)
                    .count();
                let total = ok.iter().filter(|r| r.mrc_ci.is_some()).count();
                (
                    Some(mean(&ses)),
                    Some(covered as f64 / total.max(1) as f64),
                )
            } else {
                (None, None)
            };

            rows.push(MetricRow {
                estimator: estimator.label().to_string(),
                coefficient: j,
                bias,
                se,
                see,
                cp,
            });
        }
    }

    Ok(SimulationReport {
        rows,
        replications_used: ok.len(),
        failures,
        runtime,
        scenario: spec.clone(),
    })
}

/// Result of the biased-vs-prospective efficiency comparison.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EfficiencyReport {
    pub mean_biased: f64,
    pub sd_biased: f64,
    pub mean_prospective: f64,
    pub sd_prospective: f64,
    /// Variance ratio, prospective over biased.
    pub relative_efficiency: f64,
}

/// The extreme-efficiency design: scalar model with near-noiseless errors
/// and a three-piece covariate density, sampled either on `|y| > 4.5` or
/// prospectively. Estimator spread is compared across `replications` fits
/// per arm.
pub fn run_efficiency_study(
    seed: u64,
    replications: usize,
    n: usize,
    parallel: bool,
) -> Result<EfficiencyReport> {
    if replications < 2 {
        return Err(Error::InvalidArgument(
            "need at least 2 replications".into(),
        ));
    }
    let model = PopulationModel::new(
        vec![1.0],
        ErrorDist::ScaledNormal { sd: 0.01 },
        CovariateLaw::PiecewiseX,
    );
    let biased_scheme = SamplingScheme::two_sided_tails(4.5);
    let prospective = SamplingScheme::Scheme4;
    let ocfg = OptimizerConfig::default();

    let fit_arm = |scheme: &SamplingScheme, tag: u64| -> Result<Vec<f64>> {
        let run_one = |r: usize| -> Result<f64> {
            let s = substream_seed(seed, tag + r as u64);
            let (data, _) = draw_biased_sample(&model, scheme, n, s)?;
            let fit = mrc_fit(&data, &ModelSpec::new(1), &ocfg)?;
            Ok(fit.beta_hat[0])
        };
        if parallel {
            (0..replications).into_par_iter().map(run_one).collect()
        } else {
            (0..replications).map(run_one).collect()
        }
    };

    let biased = fit_arm(&biased_scheme, 0)?;
    let pro = fit_arm(&prospective, 1_000_000_007)?;

    let sd_biased = sample_sd(&biased);
    let sd_prospective = sample_sd(&pro);
    Ok(EfficiencyReport {
        mean_biased: mean(&biased),
        sd_biased,
        mean_prospective: mean(&pro),
        sd_prospective,
        relative_efficiency: (sd_prospective / sd_biased).powi(2),
    })
}
