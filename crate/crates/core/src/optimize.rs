//! Derivative-free maximization of the rank objective.
//!
//! The pair-counting objective is piecewise constant in `beta`: between
//! score-order breakpoints it is exactly flat, and it jumps at them. A
//! Nelder-Mead simplex handles this because it never divides by objective
//! differences; termination comes from the simplex diameter or the
//! evaluation budget, never from a function-value tolerance (differences
//! are frequently exactly zero). Sign-flipped local maxima are the dominant
//! trap, so fits run from a small multi-start grid by default.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, ModelSpec};
use crate::error::{Error, Result};
use crate::num::Real;
use crate::rankcorr::{evaluate_fast, evaluate_smoothed, ObjectiveValue};

/// Simplex parameters, evaluation budget, and start points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizerConfig<F: Real> {
    pub reflection: F,
    pub expansion: F,
    pub contraction: F,
    pub shrink: F,
    /// Soft evaluation budget per start.
    pub max_evals: usize,
    /// Stop when every vertex is within this distance of the best vertex.
    pub simplex_tol: F,
    /// Per-coordinate edge length of the initial simplex, and the scale of
    /// the default start grid.
    pub initial_step: F,
    /// Search box half-width: candidates are clamped to `[-bound, bound]^d`.
    pub bound: F,
    /// Explicit start points; when empty, the default grid
    /// (origin plus sign combinations of `initial_step` over the first
    /// `min(d, 4)` coordinates) is used.
    pub starts: Vec<Vec<F>>,
}

impl<F: Real> Default for OptimizerConfig<F> {
    fn default() -> Self {
        OptimizerConfig {
            reflection: F::one(),
            expansion: F::from_f64_lossy(2.0),
            contraction: F::from_f64_lossy(0.5),
            shrink: F::from_f64_lossy(0.5),
            max_evals: 2000,
            simplex_tol: F::from_f64_lossy(1e-6),
            initial_step: F::from_f64_lossy(0.5),
            bound: F::from_f64_lossy(100.0),
            starts: Vec::new(),
        }
    }
}

impl<F: Real> OptimizerConfig<F> {
    fn validate(&self, dim: usize) -> Result<()> {
        // NaN parameters must fail every check, hence the explicit tests.
        let positive = |v: F| v.is_finite() && v > F::zero();
        let in_unit = |v: F| v.is_finite() && v > F::zero() && v < F::one();
        if !positive(self.reflection) {
            return Err(Error::InvalidArgument("reflection must be > 0".into()));
        }
        if !(self.expansion.is_finite() && self.expansion > F::one()) {
            return Err(Error::InvalidArgument("expansion must be > 1".into()));
        }
        if !in_unit(self.contraction) {
            return Err(Error::InvalidArgument("contraction must be in (0,1)".into()));
        }
        if !in_unit(self.shrink) {
            return Err(Error::InvalidArgument("shrink must be in (0,1)".into()));
        }
        if self.max_evals < dim + 2 {
            return Err(Error::InvalidArgument(format!(
                "max_evals must be at least d+2 = {}",
                dim + 2
            )));
        }
        if !positive(self.simplex_tol) || !positive(self.initial_step) {
            return Err(Error::InvalidArgument(
                "simplex_tol and initial_step must be > 0".into(),
            ));
        }
        if !positive(self.bound) {
            return Err(Error::InvalidArgument("bound must be > 0".into()));
        }
        Ok(())
    }

    /// Start points for dimension `dim`: explicit ones if provided,
    /// otherwise the default grid.
    pub fn start_points(&self, dim: usize) -> Vec<Vec<F>> {
        if self.starts.is_empty() {
            default_start_grid(dim, self.initial_step)
        } else {
            self.starts.clone()
        }
    }
}

/// Origin plus every `{-1, 0, +1} * step` combination over the first
/// `min(dim, 4)` coordinates (remaining coordinates zero), deduplicated.
pub fn default_start_grid<F: Real>(dim: usize, step: F) -> Vec<Vec<F>> {
    let vary = dim.min(4);
    let mut grid: Vec<Vec<F>> = vec![vec![F::zero(); dim]];
    for combo in 0..3usize.pow(vary as u32) {
        let mut point = vec![F::zero(); dim];
        let mut c = combo;
        for coord in point.iter_mut().take(vary) {
            *coord = match c % 3 {
                0 => F::zero(),
                1 => step,
                _ => -step,
            };
            c /= 3;
        }
        if !grid.contains(&point) {
            grid.push(point);
        }
    }
    grid
}

/// Outcome of a generic simplex maximization.
#[derive(Debug, Clone)]
pub struct MaximizeResult<F: Real> {
    pub point: Vec<F>,
    pub value: F,
    /// Total function evaluations across all starts.
    pub evals: usize,
    /// Index (into the start list) of the winning start.
    pub start_used: usize,
    /// Winning start met the simplex tolerance within budget.
    pub converged: bool,
    /// Starts aborted on a non-finite objective value, with diagnostics.
    pub failed_starts: Vec<(usize, String)>,
}

/// MRC point estimate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult<F: Real> {
    pub beta_hat: Vec<F>,
    /// Exact rank objective at `beta_hat`.
    pub objective: ObjectiveValue<F>,
    pub evals: usize,
    pub start_used: usize,
    pub converged: bool,
    /// Diagnostics (e.g. identifiability warnings); empty on a clean fit.
    pub warnings: Vec<String>,
}

/// Maximize `objective` over `dim` coordinates with restarted Nelder-Mead.
///
/// Deterministic: no internal randomness, stable sorts, and equal-value
/// ties resolved toward the lexicographically smallest point.
pub fn nelder_mead_max<F, O>(
    objective: O,
    dim: usize,
    config: &OptimizerConfig<F>,
) -> Result<MaximizeResult<F>>
where
    F: Real,
    O: Fn(&[F]) -> F,
{
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be >= 1".into()));
    }
    config.validate(dim)?;
    let starts = config.start_points(dim);
    if starts.is_empty() {
        return Err(Error::InvalidArgument("no start points configured".into()));
    }

    let mut best: Option<(Vec<F>, F, bool, usize)> = None;
    let mut total_evals = 0usize;
    let mut failed_starts = Vec::new();

    for (k, start) in starts.iter().enumerate() {
        if start.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "start {k} has length {}, expected {dim}",
                start.len()
            )));
        }
        match single_start(&objective, start, config) {
            Ok(run) => {
                total_evals += run.evals;
                let replace = match &best {
                    None => true,
                    Some((bp, bv, _, _)) => {
                        run.value > *bv || (run.value == *bv && lex_less(&run.point, bp))
                    }
                };
                if replace {
                    best = Some((run.point, run.value, run.converged, k));
                }
            }
            Err(diag) => {
                total_evals += diag.evals;
                failed_starts.push((k, diag.message));
            }
        }
    }

    match best {
        Some((point, value, converged, start_used)) => Ok(MaximizeResult {
            point,
            value,
            evals: total_evals,
            start_used,
            converged,
            failed_starts,
        }),
        None => Err(Error::OptimizerFailure(format!(
            "all {} starts aborted on non-finite objective values",
            starts.len()
        ))),
    }
}

/// Maximize the exact rank objective over the free coefficients.
pub fn mrc_fit<F: Real>(
    data: &Dataset<F>,
    spec: &ModelSpec,
    config: &OptimizerConfig<F>,
) -> Result<FitResult<F>> {
    spec.validate_against(data)?;
    let warnings = identifiability_warnings(data);
    let objective = |beta: &[F]| match evaluate_fast(data, beta) {
        Ok(v) => v.raw,
        Err(_) => F::nan(),
    };
    let max = nelder_mead_max(objective, data.dim(), config)?;
    let objective = evaluate_fast(data, &max.point)?;
    Ok(FitResult {
        beta_hat: max.point,
        objective,
        evals: max.evals,
        start_used: max.start_used,
        converged: max.converged,
        warnings,
    })
}

/// Maximize the logistic-smoothed objective instead of the exact count.
/// The reported objective value is still the exact count at the maximizer,
/// so results stay comparable with [`mrc_fit`].
pub fn mrc_fit_smoothed<F: Real>(
    data: &Dataset<F>,
    spec: &ModelSpec,
    config: &OptimizerConfig<F>,
    bandwidth: F,
) -> Result<FitResult<F>> {
    spec.validate_against(data)?;
    if !(bandwidth.is_finite() && bandwidth > F::zero()) {
        return Err(Error::InvalidArgument("bandwidth must be > 0".into()));
    }
    let warnings = identifiability_warnings(data);
    let objective = |beta: &[F]| match evaluate_smoothed(data, beta, bandwidth) {
        Ok(v) => v,
        Err(_) => F::nan(),
    };
    let max = nelder_mead_max(objective, data.dim(), config)?;
    let objective = evaluate_fast(data, &max.point)?;
    Ok(FitResult {
        beta_hat: max.point,
        objective,
        evals: max.evals,
        start_used: max.start_used,
        converged: max.converged,
        warnings,
    })
}

fn identifiability_warnings<F: Real>(data: &Dataset<F>) -> Vec<String> {
    let mut warnings = Vec::new();
    for j in 0..data.dim() {
        if data.column_is_constant(j) {
            warnings.push(format!(
                "free covariate column {j} is constant; the coefficient is not identified"
            ));
        }
    }
    warnings
}

struct RunOutcome<F> {
    point: Vec<F>,
    value: F,
    evals: usize,
    converged: bool,
}

struct RunAbort {
    evals: usize,
    message: String,
}

/// One simplex descent on the negated objective.
fn single_start<F, O>(
    objective: &O,
    start: &[F],
    config: &OptimizerConfig<F>,
) -> std::result::Result<RunOutcome<F>, RunAbort>
where
    F: Real,
    O: Fn(&[F]) -> F,
{
    let dim = start.len();
    let clamp = |v: F| v.max(-config.bound).min(config.bound);
    let mut evals = 0usize;
    let eval = |p: &[F], evals: &mut usize| -> std::result::Result<F, RunAbort> {
        *evals += 1;
        let v = objective(p);
        if v.is_finite() {
            Ok(-v)
        } else {
            Err(RunAbort {
                evals: *evals,
                message: format!("objective returned {v} at {p:?}"),
            })
        }
    };

    // Initial simplex: start plus a step along each axis, stepping inward
    // when the box boundary would swallow the vertex.
    let base: Vec<F> = start.iter().map(|&v| clamp(v)).collect();
    let mut simplex: Vec<Vec<F>> = Vec::with_capacity(dim + 1);
    simplex.push(base.clone());
    for i in 0..dim {
        let mut v = base.clone();
        let stepped = v[i] + config.initial_step;
        v[i] = if stepped <= config.bound {
            stepped
        } else {
            v[i] - config.initial_step
        };
        simplex.push(v);
    }
    let mut values: Vec<F> = Vec::with_capacity(dim + 1);
    for v in &simplex {
        values.push(eval(v, &mut evals).map_err(|mut a| {
            a.evals = evals;
            a
        })?);
    }

    let mut converged = false;
    loop {
        // Stable sort: equal values keep their order, so the walk is
        // reproducible on flat regions.
        let mut idx: Vec<usize> = (0..=dim).collect();
        idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));
        let reordered: Vec<Vec<F>> = idx.iter().map(|&i| simplex[i].clone()).collect();
        let revalues: Vec<F> = idx.iter().map(|&i| values[i]).collect();
        simplex = reordered;
        values = revalues;

        let diameter = simplex[1..]
            .iter()
            .map(|v| distance(v, &simplex[0]))
            .fold(F::zero(), F::max);
        if diameter < config.simplex_tol {
            converged = true;
            break;
        }
        if evals >= config.max_evals {
            break;
        }

        let mut centroid = vec![F::zero(); dim];
        for v in &simplex[..dim] {
            for (c, t) in centroid.iter_mut().zip(v) {
                *c += *t;
            }
        }
        let dn = F::from_usize(dim).unwrap();
        for c in centroid.iter_mut() {
            *c /= dn;
        }

        let worst = simplex[dim].clone();
        let reflected: Vec<F> = centroid
            .iter()
            .zip(&worst)
            .map(|(&c, &w)| clamp(c + config.reflection * (c - w)))
            .collect();
        let fr = eval(&reflected, &mut evals)?;

        if fr < values[0] {
            let expanded: Vec<F> = centroid
                .iter()
                .zip(&reflected)
                .map(|(&c, &r)| clamp(c + config.expansion * (r - c)))
                .collect();
            let fe = eval(&expanded, &mut evals)?;
            if fe < fr {
                simplex[dim] = expanded;
                values[dim] = fe;
            } else {
                simplex[dim] = reflected;
                values[dim] = fr;
            }
        } else if fr < values[dim - 1] {
            simplex[dim] = reflected;
            values[dim] = fr;
        } else {
            let contracted: Vec<F> = if fr < values[dim] {
                centroid
                    .iter()
                    .zip(&reflected)
                    .map(|(&c, &r)| clamp(c + config.contraction * (r - c)))
                    .collect()
            } else {
                centroid
                    .iter()
                    .zip(&worst)
                    .map(|(&c, &w)| clamp(c + config.contraction * (w - c)))
                    .collect()
            };
            let fc = eval(&contracted, &mut evals)?;
            if fc < values[dim].min(fr) {
                simplex[dim] = contracted;
                values[dim] = fc;
            } else {
                for i in 1..=dim {
                    let shrunk: Vec<F> = simplex[0]
                        .iter()
                        .zip(&simplex[i])
                        .map(|(&b, &v)| clamp(b + config.shrink * (v - b)))
                        .collect();
                    values[i] = eval(&shrunk, &mut evals)?;
                    simplex[i] = shrunk;
                }
            }
        }
    }

    // Lexicographically smallest vertex among the equal-best ones.
    let best_val = values
        .iter()
        .cloned()
        .fold(F::infinity(), F::min);
    let mut best_point: Option<&Vec<F>> = None;
    for (v, p) in values.iter().zip(&simplex) {
        if *v == best_val && best_point.is_none_or(|bp| lex_less(p, bp)) {
            best_point = Some(p);
        }
    }
    let point = best_point.expect("nonempty simplex").clone();
    Ok(RunOutcome {
        point,
        value: -best_val,
        evals,
        converged,
    })
}

fn distance<F: Real>(a: &[F], b: &[F]) -> F {
    let mut s = F::zero();
    for (&x, &y) in a.iter().zip(b) {
        let d = x - y;
        s += d * d;
    }
    s.sqrt()
}

fn lex_less<F: Real>(a: &[F], b: &[F]) -> bool {
    for (&x, &y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::random_dataset;

    fn cfg() -> OptimizerConfig<f64> {
        OptimizerConfig::default()
    }

    #[test]
    fn smooth_quadratic_sanity() {
        let config = OptimizerConfig {
            starts: vec![vec![0.0]],
            ..cfg()
        };
        let r = nelder_mead_max(|b: &[f64]| -(b[0] - 3.0).powi(2), 1, &config).unwrap();
        assert!((r.point[0] - 3.0).abs() < 1e-3, "got {}", r.point[0]);
        assert!(r.converged);
    }

    #[test]
    fn plateau_objective_lands_on_plateau() {
        let config = OptimizerConfig {
            starts: vec![vec![0.8]],
            ..cfg()
        };
        let f = |b: &[f64]| if (b[0] - 1.0).abs() < 0.5 { 1.0 } else { 0.0 };
        let r = nelder_mead_max(f, 1, &config).unwrap();
        assert_eq!(r.value, 1.0);
        assert!(f(&r.point) == 1.0);
    }

    #[test]
    fn constant_objective_terminates() {
        let config = OptimizerConfig {
            starts: vec![vec![0.0, 0.0]],
            ..cfg()
        };
        let r = nelder_mead_max(|_: &[f64]| 1.25, 2, &config).unwrap();
        assert_eq!(r.value, 1.25);
        assert!(r.converged, "flat simplex must stop on diameter");
        assert!(r.evals < 2000);
    }

    #[test]
    fn non_finite_objective_fails_cleanly() {
        let r = nelder_mead_max(|_: &[f64]| f64::NAN, 1, &cfg());
        assert!(matches!(r, Err(Error::OptimizerFailure(_))));
    }

    #[test]
    fn search_respects_bound() {
        // Unbounded linear objective: the maximizer must stay in the box.
        let config = OptimizerConfig {
            starts: vec![vec![0.0]],
            bound: 5.0,
            ..cfg()
        };
        let r = nelder_mead_max(|b: &[f64]| b[0], 1, &config).unwrap();
        assert!(r.point[0] <= 5.0 + 1e-12);
        assert!(r.point[0] > 4.0);
    }

    #[test]
    fn default_grid_shape() {
        let g1 = default_start_grid(1, 0.5);
        assert_eq!(g1.len(), 3); // 0, +step, -step
        let g2 = default_start_grid(2, 0.5);
        assert_eq!(g2.len(), 9);
        let g5 = default_start_grid(5, 0.5);
        assert_eq!(g5.len(), 81);
        assert!(g5.iter().all(|p| p.len() == 5 && p[4] == 0.0));
    }

    #[test]
    fn noiseless_mrc_recovers_full_concordance() {
        // y equals the true index exactly, so the rank maximum n(n-1)/2 is
        // attainable and directly countable.
        let n = 50;
        let mut rng = crate::rng::stream_rng(0x5EED, 7);
        use rand::Rng;
        let z: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let y: Vec<f64> = z.iter().zip(&x).map(|(&zi, &xi)| zi + xi).collect();
        let data = Dataset::new(y, z, x, 1).unwrap();
        let fit = mrc_fit(&data, &ModelSpec::new(1), &cfg()).unwrap();
        assert_eq!(fit.objective.raw, (n * (n - 1) / 2) as f64);

        // Any strictly increasing response map preserves full concordance.
        let mapped = data.map_response(|v| v.exp() + v).unwrap();
        let fit2 = mrc_fit(&mapped, &ModelSpec::new(1), &cfg()).unwrap();
        assert_eq!(fit2.objective.raw, (n * (n - 1) / 2) as f64);
        assert_eq!(fit2.beta_hat, fit.beta_hat);
    }

    #[test]
    fn fit_is_deterministic_and_transform_invariant() {
        let data = random_dataset(60, 2, 0x1234);
        let spec = ModelSpec::new(2);
        let a = mrc_fit(&data, &spec, &cfg()).unwrap();
        let b = mrc_fit(&data, &spec, &cfg()).unwrap();
        assert_eq!(a.beta_hat, b.beta_hat);
        assert_eq!(a.evals, b.evals);

        let exp_data = data.map_response(f64::exp).unwrap();
        let c = mrc_fit(&exp_data, &spec, &cfg()).unwrap();
        assert_eq!(a.beta_hat, c.beta_hat, "fit must not see response values");
        assert_eq!(a.objective.raw, c.objective.raw);
    }

    #[test]
    fn best_of_starts_invariant() {
        let data = random_dataset(40, 2, 0x4242);
        let spec = ModelSpec::new(2);
        let config = cfg();
        let fit = mrc_fit(&data, &spec, &config).unwrap();
        for start in config.start_points(2) {
            let at_start = evaluate_fast(&data, &start).unwrap().raw;
            assert!(
                fit.objective.raw >= at_start,
                "fit {} worse than start {:?} ({})",
                fit.objective.raw,
                start,
                at_start
            );
        }
    }

    #[test]
    fn constant_covariate_warns() {
        let data = Dataset::new(
            vec![1.0, 2.0, 3.0, 4.0],
            vec![0.1, 0.7, 0.2, 0.9],
            vec![1.0, 1.0, 1.0, 1.0],
            1,
        )
        .unwrap();
        let fit = mrc_fit(&data, &ModelSpec::new(1), &cfg()).unwrap();
        assert!(!fit.warnings.is_empty());
    }

    #[test]
    fn smoothed_fit_runs_and_reports_exact_objective() {
        let data = random_dataset(40, 1, 0x99);
        let spec = ModelSpec::new(1);
        let fit = mrc_fit_smoothed(&data, &spec, &cfg(), 0.1).unwrap();
        let exact = evaluate_fast(&data, &fit.beta_hat).unwrap();
        assert_eq!(fit.objective.raw, exact.raw);
    }
}
