//! Population generators for the transformation model and response-biased
//! sampling schemes.
//!
//! A biased draw is plain rejection sampling: population units are generated
//! and each is kept with a probability that depends on its response alone.
//! That restriction is structural — [`SamplingScheme::acceptance_prob`] takes
//! only `y` — which is exactly what makes the conditional law of the
//! covariates given the response match the population's.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::stats::normal_cdf;

/// Error distribution of the latent linear model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorDist {
    /// Laplace with rate 1 (variance 2).
    DoubleExponential,
    /// N(0, 1).
    StdNormal,
    /// Minimum-type Gumbel, i.e. `log E` with `E ~ Exp(1)`; the convention
    /// under which the transformation model is the proportional hazards
    /// model. Mean is minus the Euler-Mascheroni constant.
    StdExtremeValue,
    /// Standard logistic (variance pi^2/3); gives the proportional odds
    /// model.
    StdLogistic,
    /// With probability 1/2 a N(0,1) draw, otherwise a Bernoulli(1/2) point
    /// mass at 0 or 1. Not log-concave.
    NormalBernoulliMixture,
    /// N(0, sd^2); `sd = 0` degenerates to zero noise.
    ScaledNormal { sd: f64 },
}

impl ErrorDist {
    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            ErrorDist::DoubleExponential => {
                let u: f64 = rng.gen();
                let mag = -f64::ln_1p(-u);
                if rng.gen::<bool>() {
                    mag
                } else {
                    -mag
                }
            }
            ErrorDist::StdNormal => StandardNormal.sample(rng),
            ErrorDist::StdExtremeValue => {
                let u: f64 = rng.gen();
                let e = (-f64::ln_1p(-u)).max(f64::MIN_POSITIVE);
                e.ln()
            }
            ErrorDist::StdLogistic => {
                let u: f64 = rng.gen::<f64>().clamp(1e-16, 1.0 - 1e-16);
                (u / (1.0 - u)).ln()
            }
            ErrorDist::NormalBernoulliMixture => {
                if rng.gen::<bool>() {
                    StandardNormal.sample(rng)
                } else if rng.gen::<bool>() {
                    1.0
                } else {
                    0.0
                }
            }
            ErrorDist::ScaledNormal { sd } => {
                let g: f64 = StandardNormal.sample(rng);
                sd * g
            }
        }
    }
}

/// Joint law of the anchor covariate `Z` and the free covariates `X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovariateLaw {
    /// `Z ~ N(0,1)`; `(X1, X2)` bivariate normal with mean `(1, -0.5)`,
    /// unit variances and covariance 0.2.
    Table1,
    /// `Z, X ~ N(0,1)` independent, one free covariate.
    ScalarNormal,
    /// `Z ~ N(0,1)`; scalar `X` from the three-piece density
    /// `5e-5` on `[-105, -5]`, `9.99` on `[-0.05, 0.05]`, `5e-5` on
    /// `[5, 105]`. The printed density integrates to 1.009, not 1, so the
    /// segment masses are renormalized by that total.
    PiecewiseX,
}

/// Segment masses of the piecewise density before renormalization.
const PIECEWISE_TAIL_MASS: f64 = 5e-5 * 100.0;
const PIECEWISE_MID_MASS: f64 = 9.99 * 0.1;
const PIECEWISE_TOTAL: f64 = 2.0 * PIECEWISE_TAIL_MASS + PIECEWISE_MID_MASS;

impl CovariateLaw {
    /// Number of free covariates this law produces.
    pub fn dim(&self) -> usize {
        match self {
            CovariateLaw::Table1 => 2,
            CovariateLaw::ScalarNormal | CovariateLaw::PiecewiseX => 1,
        }
    }

    /// Draw `(z, x_row)`.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> (f64, Vec<f64>) {
        let z: f64 = StandardNormal.sample(rng);
        match self {
            CovariateLaw::Table1 => {
                let u: f64 = StandardNormal.sample(rng);
                let v: f64 = StandardNormal.sample(rng);
                let rho = 0.2;
                let x1 = 1.0 + u;
                let x2 = -0.5 + rho * u + (1.0 - rho * rho).sqrt() * v;
                (z, vec![x1, x2])
            }
            CovariateLaw::ScalarNormal => {
                let x: f64 = StandardNormal.sample(rng);
                (z, vec![x])
            }
            CovariateLaw::PiecewiseX => {
                let p_tail = PIECEWISE_TAIL_MASS / PIECEWISE_TOTAL;
                let u: f64 = rng.gen();
                let x = if u < p_tail {
                    rng.gen_range(-105.0..-5.0)
                } else if u < 1.0 - p_tail {
                    rng.gen_range(-0.05..0.05)
                } else {
                    rng.gen_range(5.0..105.0)
                };
                (z, vec![x])
            }
        }
    }
}

/// Strictly increasing map applied to the linear index to form the response.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    Identity,
    Exp,
    Cube,
}

impl Transform {
    pub fn apply(&self, v: f64) -> f64 {
        match self {
            Transform::Identity => v,
            Transform::Exp => v.exp(),
            Transform::Cube => v * v * v,
        }
    }
}

/// Population `Y = g(Z + beta0' X + eps)` with `g` strictly increasing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PopulationModel {
    pub beta0: Vec<f64>,
    pub error: ErrorDist,
    pub covariates: CovariateLaw,
    pub transform: Transform,
}

impl PopulationModel {
    pub fn new(beta0: Vec<f64>, error: ErrorDist, covariates: CovariateLaw) -> Self {
        PopulationModel {
            beta0,
            error,
            covariates,
            transform: Transform::Identity,
        }
    }

    /// The benchmark simulation design: `beta0 = (1, -1)` with
    /// bivariate-normal covariates.
    pub fn table1(error: ErrorDist) -> Self {
        PopulationModel::new(vec![1.0, -1.0], error, CovariateLaw::Table1)
    }

    fn validate(&self) -> Result<()> {
        if self.beta0.len() != self.covariates.dim() {
            return Err(Error::DimensionMismatch(format!(
                "beta0 has length {}, covariate law produces {}",
                self.beta0.len(),
                self.covariates.dim()
            )));
        }
        if self.beta0.iter().any(|b| !b.is_finite()) {
            return Err(Error::NonFinite("beta0".into()));
        }
        Ok(())
    }

    fn draw_unit<R: Rng>(&self, rng: &mut R) -> (f64, f64, Vec<f64>) {
        let (z, x) = self.covariates.sample(rng);
        let eps = self.error.sample(rng);
        let index = z
            + self
                .beta0
                .iter()
                .zip(&x)
                .map(|(b, xv)| b * xv)
                .sum::<f64>()
            + eps;
        (self.transform.apply(index), z, x)
    }
}

/// Response-biased acceptance rule. The probability is a function of the
/// response alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingScheme {
    /// Keep iff `y < -2` or `y > 4`.
    Scheme1,
    /// Keep iff `y > 2.5`.
    Scheme2,
    /// Keep with probability `Phi(y - 2)`.
    Scheme3,
    /// Prospective sampling: keep everything.
    Scheme4,
    /// Keep iff `3.8 < y < 4.2`.
    Scheme5,
    /// Keep iff `y` falls in any of the open intervals.
    Custom { regions: Vec<(f64, f64)> },
}

impl SamplingScheme {
    pub fn acceptance_prob(&self, y: f64) -> f64 {
        match self {
            SamplingScheme::Scheme1 => {
                if !(-2.0..=4.0).contains(&y) {
                    1.0
                } else {
                    0.0
                }
            }
            SamplingScheme::Scheme2 => {
                if y > 2.5 {
                    1.0
                } else {
                    0.0
                }
            }
            SamplingScheme::Scheme3 => normal_cdf(y - 2.0),
            SamplingScheme::Scheme4 => 1.0,
            SamplingScheme::Scheme5 => {
                if y > 3.8 && y < 4.2 {
                    1.0
                } else {
                    0.0
                }
            }
            SamplingScheme::Custom { regions } => {
                if regions.iter().any(|&(lo, hi)| y > lo && y < hi) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// The second simulation design's region: `y < -1.5` or `y > 2.5`.
    pub fn mixture_design() -> Self {
        SamplingScheme::Custom {
            regions: vec![(f64::NEG_INFINITY, -1.5), (2.5, f64::INFINITY)],
        }
    }

    /// The efficiency design's region: `|y| > 4.5`.
    pub fn two_sided_tails(cut: f64) -> Self {
        SamplingScheme::Custom {
            regions: vec![(f64::NEG_INFINITY, -cut), (cut, f64::INFINITY)],
        }
    }
}

/// Prospective i.i.d. draws from the population model.
pub fn draw_population(model: &PopulationModel, n: usize, seed: u64) -> Result<Dataset<f64>> {
    model.validate()?;
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need n >= 2, got {n}")));
    }
    let mut rng = stream_rng(seed, 0);
    let d = model.covariates.dim();
    let mut y = Vec::with_capacity(n);
    let mut z = Vec::with_capacity(n);
    let mut x = Vec::with_capacity(n * d);
    for _ in 0..n {
        let (yi, zi, xi) = model.draw_unit(&mut rng);
        y.push(yi);
        z.push(zi);
        x.extend(xi);
    }
    Dataset::new(y, z, x, d)
}

/// A response-biased sample of exactly `n` rows, by rejection.
///
/// Unit draws and acceptance uniforms use separate substreams of `seed`, so
/// the prospective scheme reproduces [`draw_population`] row for row.
/// Returns the dataset and the realized acceptance rate.
pub fn draw_biased_sample(
    model: &PopulationModel,
    scheme: &SamplingScheme,
    n: usize,
    seed: u64,
) -> Result<(Dataset<f64>, f64)> {
    model.validate()?;
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need n >= 2, got {n}")));
    }
    let mut unit_rng = stream_rng(seed, 0);
    let mut accept_rng = stream_rng(seed, 1);
    let d = model.covariates.dim();
    let budget: u64 = 10_000_000.max(n as u64 * 100);

    let mut y = Vec::with_capacity(n);
    let mut z = Vec::with_capacity(n);
    let mut x = Vec::with_capacity(n * d);
    let mut attempts: u64 = 0;
    while y.len() < n {
        if attempts >= budget {
            let rate = y.len() as f64 / attempts as f64;
            return Err(Error::SchemeInfeasible(format!(
                "accepted {} of {attempts} draws (rate {rate:.2e}); scheme looks \
                 infeasible under this population",
                y.len()
            )));
        }
        attempts += 1;
        let (yi, zi, xi) = model.draw_unit(&mut unit_rng);
        let p = scheme.acceptance_prob(yi);
        let u: f64 = accept_rng.gen();
        if u < p {
            y.push(yi);
            z.push(zi);
            x.extend(xi);
        }
    }
    let rate = n as f64 / attempts as f64;
    Ok((Dataset::new(y, z, x, d)?, rate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{mean, sample_sd};

    const EULER_MASCHERONI: f64 = 0.5772156649015329;

    fn draw_errors(dist: &ErrorDist, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = stream_rng(seed, 5);
        (0..n).map(|_| dist.sample(&mut rng)).collect()
    }

    #[test]
    fn error_moments_match_their_distributions() {
        let n = 200_000;
        let cases = [
            (ErrorDist::DoubleExponential, 0.0, 2.0),
            (ErrorDist::StdNormal, 0.0, 1.0),
            (
                ErrorDist::StdExtremeValue,
                -EULER_MASCHERONI,
                std::f64::consts::PI.powi(2) / 6.0,
            ),
            (
                ErrorDist::StdLogistic,
                0.0,
                std::f64::consts::PI.powi(2) / 3.0,
            ),
            (ErrorDist::NormalBernoulliMixture, 0.25, 0.6875),
            (ErrorDist::ScaledNormal { sd: 0.01 }, 0.0, 1e-4),
        ];
        for (dist, want_mean, want_var) in cases {
            let v = draw_errors(&dist, n, 0xE44);
            let m = mean(&v);
            let sd = sample_sd(&v);
            assert!(
                (m - want_mean).abs() < 0.02,
                "{dist:?}: mean {m} vs {want_mean}"
            );
            assert!(
                (sd * sd - want_var).abs() < 0.05 * want_var.max(0.01),
                "{dist:?}: var {} vs {want_var}",
                sd * sd
            );
        }
    }

    #[test]
    fn extreme_value_mean_verified_by_quadrature() {
        // Density of log E, E ~ Exp(1): f(t) = e^t exp(-e^t). Its mean is
        // computed by Simpson's rule before being asserted against the
        // known closed form.
        let f = |t: f64| t * (t - t.exp()).exp();
        let (a, b, m) = (-32.0, 5.0, 64_000);
        let h = (b - a) / m as f64;
        let mut integral = f(a) + f(b);
        for k in 1..m {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            integral += w * f(a + k as f64 * h);
        }
        integral *= h / 3.0;
        assert!(
            (integral + EULER_MASCHERONI).abs() < 1e-8,
            "quadrature mean {integral}"
        );
    }

    #[test]
    fn zero_noise_zero_beta_gives_y_equal_z() {
        let model = PopulationModel::new(
            vec![0.0],
            ErrorDist::ScaledNormal { sd: 0.0 },
            CovariateLaw::ScalarNormal,
        );
        let data = draw_population(&model, 100, 3).unwrap();
        for i in 0..data.n() {
            assert_eq!(data.y()[i], data.z()[i]);
        }
    }

    #[test]
    fn table1_covariate_moments() {
        let model = PopulationModel::table1(ErrorDist::StdNormal);
        let data = draw_population(&model, 100_000, 11).unwrap();
        let x1: Vec<f64> = (0..data.n()).map(|i| data.x_row(i)[0]).collect();
        let x2: Vec<f64> = (0..data.n()).map(|i| data.x_row(i)[1]).collect();
        let m1 = mean(&x1);
        let m2 = mean(&x2);
        assert!((m1 - 1.0).abs() < 0.02, "mean x1 {m1}");
        assert!((m2 + 0.5).abs() < 0.02, "mean x2 {m2}");
        let cov = x1
            .iter()
            .zip(&x2)
            .map(|(a, b)| (a - m1) * (b - m2))
            .sum::<f64>()
            / (data.n() - 1) as f64;
        assert!((cov - 0.2).abs() < 0.02, "cov {cov}");
    }

    #[test]
    fn piecewise_x_segment_masses_renormalized() {
        let model = PopulationModel::new(
            vec![1.0],
            ErrorDist::ScaledNormal { sd: 0.01 },
            CovariateLaw::PiecewiseX,
        );
        let data = draw_population(&model, 200_000, 17).unwrap();
        let mut mid = 0usize;
        let mut lo = 0usize;
        let mut hi = 0usize;
        for i in 0..data.n() {
            let x = data.x_row(i)[0];
            if (-0.05..0.05).contains(&x) {
                mid += 1;
            } else if (-105.0..=-5.0).contains(&x) {
                lo += 1;
            } else if (5.0..=105.0).contains(&x) {
                hi += 1;
            } else {
                panic!("x = {x} outside the support");
            }
        }
        let n = data.n() as f64;
        let p_tail = PIECEWISE_TAIL_MASS / PIECEWISE_TOTAL;
        let p_mid = PIECEWISE_MID_MASS / PIECEWISE_TOTAL;
        // 3 binomial SEs.
        let tol_tail = 3.0 * (p_tail * (1.0 - p_tail) / n).sqrt();
        let tol_mid = 3.0 * (p_mid * (1.0 - p_mid) / n).sqrt();
        assert!((lo as f64 / n - p_tail).abs() < tol_tail);
        assert!((hi as f64 / n - p_tail).abs() < tol_tail);
        assert!((mid as f64 / n - p_mid).abs() < tol_mid);
    }

    #[test]
    fn indicator_schemes_are_region_constraints() {
        let model = PopulationModel::table1(ErrorDist::StdNormal);
        let (d1, _) = draw_biased_sample(&model, &SamplingScheme::Scheme1, 300, 23).unwrap();
        assert!(d1.y().iter().all(|&y| !(-2.0..=4.0).contains(&y)));
        let (d2, _) = draw_biased_sample(&model, &SamplingScheme::Scheme2, 300, 23).unwrap();
        assert!(d2.y().iter().all(|&y| y > 2.5));
        let (d5, _) = draw_biased_sample(&model, &SamplingScheme::Scheme5, 100, 23).unwrap();
        assert!(d5.y().iter().all(|&y| y > 3.8 && y < 4.2));
        let (dm, _) =
            draw_biased_sample(&model, &SamplingScheme::mixture_design(), 300, 23).unwrap();
        assert!(dm.y().iter().all(|&y| !(-1.5..=2.5).contains(&y)));
    }

    #[test]
    fn prospective_scheme_reproduces_population_rows() {
        let model = PopulationModel::table1(ErrorDist::StdLogistic);
        let pop = draw_population(&model, 500, 31).unwrap();
        let (bia, rate) = draw_biased_sample(&model, &SamplingScheme::Scheme4, 500, 31).unwrap();
        assert_eq!(rate, 1.0);
        assert_eq!(pop.y(), bia.y());
        assert_eq!(pop.z(), bia.z());
        assert_eq!(pop.x(), bia.x());
    }

    #[test]
    fn draws_are_seed_deterministic() {
        let model = PopulationModel::table1(ErrorDist::DoubleExponential);
        let (a, ra) = draw_biased_sample(&model, &SamplingScheme::Scheme2, 100, 77).unwrap();
        let (b, rb) = draw_biased_sample(&model, &SamplingScheme::Scheme2, 100, 77).unwrap();
        assert_eq!(a.y(), b.y());
        assert_eq!(a.x(), b.x());
        assert_eq!(ra, rb);
        let (c, _) = draw_biased_sample(&model, &SamplingScheme::Scheme2, 100, 78).unwrap();
        assert_ne!(a.y(), c.y());
    }

    #[test]
    fn infeasible_scheme_reports_budget_exhaustion() {
        let model = PopulationModel::table1(ErrorDist::StdNormal);
        let empty = SamplingScheme::Custom {
            regions: vec![(1e9, f64::INFINITY)],
        };
        let err = draw_biased_sample(&model, &empty, 2, 5).unwrap_err();
        assert!(matches!(err, Error::SchemeInfeasible(_)));
    }

    #[test]
    fn scheme3_accepted_density_matches_quadrature() {
        // Under the benchmark design with normal error, Y ~ N(1.5, 3.6).
        // Accepted responses have density proportional to
        // f_Y(t) * Phi(t - 2); bin frequencies are checked against bin
        // probabilities computed by Simpson's rule.
        let model = PopulationModel::table1(ErrorDist::StdNormal);
        let (data, _) = draw_biased_sample(&model, &SamplingScheme::Scheme3, 20_000, 41).unwrap();

        let mu = 1.5;
        let sd = 3.6f64.sqrt();
        let target = |t: f64| {
            let phi = (-0.5 * ((t - mu) / sd).powi(2)).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt());
            phi * normal_cdf(t - 2.0)
        };
        let simpson = |a: f64, b: f64| {
            let m = 2000;
            let h = (b - a) / m as f64;
            let mut s = target(a) + target(b);
            for k in 1..m {
                s += if k % 2 == 1 { 4.0 } else { 2.0 } * target(a + k as f64 * h);
            }
            s * h / 3.0
        };
        let total = simpson(mu - 10.0 * sd, mu + 10.0 * sd);

        let edges: Vec<f64> = (0..=12).map(|k| -1.0 + 0.5 * k as f64).collect();
        let n = data.n() as f64;
        for w in edges.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let p = simpson(lo, hi) / total;
            let count = data.y().iter().filter(|&&t| t >= lo && t < hi).count() as f64;
            let se = (p * (1.0 - p) / n).sqrt();
            assert!(
                (count / n - p).abs() <= 3.0 * se + 1e-4,
                "bin [{lo},{hi}): freq {} vs p {p}",
                count / n
            );
        }
    }

    #[test]
    fn scheme2_conditional_covariate_law_is_preserved() {
        // Bin accepted rows by response quartile; within each bin the mean
        // of X1 must match a large prospective sample restricted to the
        // same bin, within 3 combined standard errors.
        let model = PopulationModel::table1(ErrorDist::StdNormal);
        let (biased, _) = draw_biased_sample(&model, &SamplingScheme::Scheme2, 4000, 53).unwrap();
        let pop = draw_population(&model, 400_000, 54).unwrap();

        let mut ys: Vec<f64> = biased.y().to_vec();
        ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let q = |p: f64| crate::stats::quantile(&ys, p);
        let edges = [q(0.0), q(0.25), q(0.5), q(0.75), f64::INFINITY];

        for w in edges.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let in_bin = |y: f64| y >= lo && y < hi;
            let bx: Vec<f64> = (0..biased.n())
                .filter(|&i| in_bin(biased.y()[i]))
                .map(|i| biased.x_row(i)[0])
                .collect();
            let px: Vec<f64> = (0..pop.n())
                .filter(|&i| in_bin(pop.y()[i]))
                .map(|i| pop.x_row(i)[0])
                .collect();
            assert!(bx.len() > 100 && px.len() > 100, "bin [{lo},{hi}) too thin");
            let se = (sample_sd(&bx).powi(2) / bx.len() as f64
                + sample_sd(&px).powi(2) / px.len() as f64)
                .sqrt();
            let diff = mean(&bx) - mean(&px);
            assert!(
                diff.abs() <= 3.0 * se,
                "bin [{lo},{hi}): conditional mean gap {diff} > 3se {se}"
            );
        }
    }
}
