//! Random-weighting resampling inference.
//!
//! The limiting covariance of the rank estimator involves derivatives of
//! conditional expectations that are unpleasant to estimate directly.
//! Instead, each replicate multiplies the pair terms by products of i.i.d.
//! mean-1/variance-1 exponential weights and re-maximizes; conditionally on
//! the data, the spread of the perturbed maximizers around the point
//! estimate approximates the sampling spread of the point estimate itself.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, ModelSpec, WeightVector};
use crate::error::{Error, Result};
use crate::num::Real;
use crate::optimize::{nelder_mead_max, FitResult, OptimizerConfig};
use crate::rankcorr::evaluate_weighted;
use crate::rng::stream_rng;
use crate::stats::{mean, normal_quantile, quantile, sample_sd};

/// Law of the random weights. Mean 1, variance 1 is required by the theory;
/// standard exponential is the working choice. The degenerate law keeps
/// every weight at exactly 1 and is a diagnostic hook: it must reproduce
/// the point estimate with zero spread.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightLaw {
    Exponential,
    DegenerateOnes,
}

/// Confidence interval construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CiMethod {
    /// `beta_hat +- z * se` (the asymptotic-normality recipe).
    Normal,
    /// Empirical quantiles of the replicate draws.
    Percentile,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResampleConfig<F: Real> {
    pub replicates: usize,
    pub weight_law: WeightLaw,
    pub seed: u64,
    /// Nominal coverage, e.g. 0.95.
    pub ci_level: F,
    pub ci_method: CiMethod,
    /// Also run each replicate from the default start grid in addition to
    /// the warm start at `beta_hat`. Slower; the warm start alone is the
    /// default.
    pub full_grid: bool,
    /// Initial simplex edge for the weighted re-maximizations. The
    /// perturbed maximizer is a local perturbation of `beta_hat`, so the
    /// refit explores a neighborhood of the warm start rather than the
    /// whole fitting grid; a wide simplex here lets the refit hop to
    /// distant near-tie plateaus and overstates the spread.
    pub resample_step: F,
    /// Run replicates across threads. Output is identical either way, so
    /// the flag never appears in serialized configs.
    #[serde(skip_serializing, default = "default_parallel")]
    pub parallel: bool,
}

fn default_parallel() -> bool {
    true
}

impl<F: Real> Default for ResampleConfig<F> {
    fn default() -> Self {
        ResampleConfig {
            replicates: 500,
            weight_law: WeightLaw::Exponential,
            seed: 0,
            ci_level: F::from_f64_lossy(0.95),
            ci_method: CiMethod::Normal,
            full_grid: false,
            resample_step: F::from_f64_lossy(0.2),
            parallel: true,
        }
    }
}

/// Replicate draws and the summaries derived from them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResampleSummary<F: Real> {
    /// One row per successful replicate.
    pub draws: Vec<Vec<F>>,
    /// Per-coordinate sample SD of the draws.
    pub se: Vec<F>,
    /// Per-coordinate confidence interval.
    pub ci: Vec<(F, F)>,
    pub n_failed: usize,
}

/// Ratio-of-coefficients inference derived from the replicate draws.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RatioInference<F: Real> {
    pub estimate: F,
    pub se: F,
    /// Percentile interval of the replicate ratios.
    pub ci: (F, F),
    /// Replicates dropped for a near-zero denominator.
    pub n_dropped: usize,
}

/// Resample the fitted model: draw weights, re-maximize the weighted
/// objective warm-started at `beta_hat`, and summarize the draws.
///
/// Replicate `k` uses substream `k` of `config.seed` only, so serial and
/// parallel schedules give bit-identical output.
pub fn resample_fit<F: Real>(
    data: &Dataset<F>,
    spec: &ModelSpec,
    fit: &FitResult<F>,
    rcfg: &ResampleConfig<F>,
    ocfg: &OptimizerConfig<F>,
) -> Result<ResampleSummary<F>> {
    spec.validate_against(data)?;
    if fit.beta_hat.len() != data.dim() {
        return Err(Error::DimensionMismatch(format!(
            "fit has {} coefficients, data has {}",
            fit.beta_hat.len(),
            data.dim()
        )));
    }
    if rcfg.replicates == 0 {
        return Err(Error::InvalidArgument("replicates must be >= 1".into()));
    }
    let level = rcfg.ci_level.to_f64_lossy();
    if !(level.is_finite() && level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "ci_level must be in (0,1), got {level}"
        )));
    }

    let run_one = |k: usize| -> Option<Vec<F>> { replicate_draw(data, fit, rcfg, ocfg, k) };
    let results: Vec<Option<Vec<F>>> = if rcfg.parallel {
        (0..rcfg.replicates).into_par_iter().map(run_one).collect()
    } else {
        (0..rcfg.replicates).map(run_one).collect()
    };

    let n_failed = results.iter().filter(|r| r.is_none()).count();
    if n_failed * 10 > rcfg.replicates {
        return Err(Error::InferenceUnreliable(format!(
            "{n_failed} of {} replicate optimizations failed",
            rcfg.replicates
        )));
    }
    let draws: Vec<Vec<F>> = results.into_iter().flatten().collect();

    let d = data.dim();
    let mut se = Vec::with_capacity(d);
    let mut ci = Vec::with_capacity(d);
    let z = F::from_f64_lossy(normal_quantile(1.0 - (1.0 - level) / 2.0));
    for j in 0..d {
        let col: Vec<F> = draws.iter().map(|row| row[j]).collect();
        let sd = sample_sd(&col);
        se.push(sd);
        match rcfg.ci_method {
            CiMethod::Normal => {
                ci.push((fit.beta_hat[j] - z * sd, fit.beta_hat[j] + z * sd));
            }
            CiMethod::Percentile => {
                let mut sorted = col;
                sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite draws"));
                let alpha = (F::one() - rcfg.ci_level) / F::from_f64_lossy(2.0);
                ci.push((
                    quantile(&sorted, alpha),
                    quantile(&sorted, F::one() - alpha),
                ));
            }
        }
    }

    Ok(ResampleSummary {
        draws,
        se,
        ci,
        n_failed,
    })
}

fn replicate_draw<F: Real>(
    data: &Dataset<F>,
    fit: &FitResult<F>,
    rcfg: &ResampleConfig<F>,
    ocfg: &OptimizerConfig<F>,
    k: usize,
) -> Option<Vec<F>> {
    let weights = draw_weights::<F>(rcfg.weight_law, data.n(), rcfg.seed, k as u64);

    // Unit weights leave the objective — and hence its maximizer — exactly
    // as fitted; skip the redundant optimization and return the estimate.
    if weights.values().iter().all(|&w| w == F::one()) {
        return Some(fit.beta_hat.clone());
    }

    let mut cfg = ocfg.clone();
    cfg.initial_step = rcfg.resample_step;
    cfg.starts = vec![fit.beta_hat.clone()];
    if rcfg.full_grid {
        cfg.starts
            .extend(crate::optimize::default_start_grid(data.dim(), ocfg.initial_step));
    }
    let objective = |beta: &[F]| match evaluate_weighted(data, beta, &weights) {
        Ok(v) => v.raw,
        Err(_) => F::nan(),
    };
    nelder_mead_max(objective, data.dim(), &cfg)
        .ok()
        .map(|m| m.point)
}

fn draw_weights<F: Real>(law: WeightLaw, n: usize, seed: u64, replicate: u64) -> WeightVector<F> {
    match law {
        WeightLaw::DegenerateOnes => WeightVector::unit(n),
        WeightLaw::Exponential => {
            let mut rng = stream_rng(seed, replicate);
            let e: Vec<F> = (0..n)
                .map(|_| {
                    let u: f64 = rng.gen();
                    F::from_f64_lossy(-f64::ln_1p(-u))
                })
                .collect();
            WeightVector::new(e).expect("exponential draws are nonnegative")
        }
    }
}

/// Inference for `beta_num / beta_den`; `den = None` divides by the anchor
/// coefficient, which is the constant 1.
pub fn derived_ratio_ci<F: Real>(
    summary: &ResampleSummary<F>,
    fit: &FitResult<F>,
    num: usize,
    den: Option<usize>,
    ci_level: F,
) -> Result<RatioInference<F>> {
    let d = fit.beta_hat.len();
    if num >= d || den.is_some_and(|j| j >= d) {
        return Err(Error::InvalidArgument(format!(
            "coordinate out of range for d = {d}"
        )));
    }
    let level = ci_level.to_f64_lossy();
    if !(level.is_finite() && level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "ci_level must be in (0,1), got {level}"
        )));
    }
    let tiny = F::from_f64_lossy(1e-12);

    let estimate = match den {
        None => fit.beta_hat[num],
        Some(j) => {
            if fit.beta_hat[j].abs() <= tiny {
                return Err(Error::InvalidArgument(format!(
                    "denominator estimate beta[{j}] = {} is zero",
                    fit.beta_hat[j]
                )));
            }
            fit.beta_hat[num] / fit.beta_hat[j]
        }
    };

    let mut ratios = Vec::with_capacity(summary.draws.len());
    let mut n_dropped = 0usize;
    for row in &summary.draws {
        match den {
            None => ratios.push(row[num]),
            Some(j) => {
                if row[j].abs() <= tiny {
                    n_dropped += 1;
                } else {
                    ratios.push(row[num] / row[j]);
                }
            }
        }
    }
    if n_dropped * 10 > summary.draws.len() {
        return Err(Error::InferenceUnreliable(format!(
            "{n_dropped} of {} replicate denominators were within 1e-12 of zero",
            summary.draws.len()
        )));
    }

    let se = sample_sd(&ratios);
    let mut sorted = ratios;
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite ratios"));
    let alpha = (F::one() - ci_level) / F::from_f64_lossy(2.0);
    let ci = (
        quantile(&sorted, alpha),
        quantile(&sorted, F::one() - alpha),
    );
    Ok(RatioInference {
        estimate,
        se,
        ci,
        n_dropped,
    })
}

/// Mean of the per-replicate standard errors, the "SEE" column aggregation.
pub fn mean_se<F: Real>(ses: &[F]) -> F {
    mean(ses)
}
