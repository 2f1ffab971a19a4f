//! Inverse-probability-weighted least squares (Horvitz-Thompson) baseline.
//!
//! Regresses the response on `(1, z, x)` with row weights `1/pi(y_i)`. For
//! indicator schemes every sampled row has `pi = 1`, so the "correction"
//! degenerates to plain least squares on the biased sample — the method
//! needs a sampling probability that is positive over the whole response
//! range, which is exactly where it loses to the rank estimator.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::num::Real;
use crate::sampling::SamplingScheme;

/// Weighted least-squares fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IpwFit<F: Real> {
    /// `[z, x_1..x_d]`, or `[intercept, z, x_1..x_d]` with an intercept.
    pub coef: Vec<F>,
    /// Row weights `1/pi(y_i)`.
    pub weights_used: Vec<F>,
    /// Whether an intercept column was included.
    pub intercept: bool,
    /// Cheap condition proxy (squared ratio of extreme Cholesky pivots).
    pub condition_estimate: F,
}

impl<F: Real> IpwFit<F> {
    /// Coefficients of the free covariates (the columns compared across
    /// estimators in simulation reports).
    pub fn x_coefficients(&self) -> &[F] {
        let skip = if self.intercept { 2 } else { 1 };
        &self.coef[skip..]
    }

    pub fn condition_warning(&self) -> bool {
        self.condition_estimate > F::from_f64_lossy(1e10)
    }
}

/// IPW least squares without an intercept, the generating model's own form.
/// On truncated samples the intercept choice moves the covariate
/// coefficients substantially; the no-intercept fit is the one whose biases
/// line up with the documented reference biases.
pub fn ipw_least_squares<F: Real>(
    data: &Dataset<F>,
    scheme: &SamplingScheme,
) -> Result<IpwFit<F>> {
    ipw_least_squares_opts(data, scheme, false)
}

/// IPW least squares, intercept switchable.
pub fn ipw_least_squares_opts<F: Real>(
    data: &Dataset<F>,
    scheme: &SamplingScheme,
    intercept: bool,
) -> Result<IpwFit<F>> {
    let n = data.n();
    let d = data.dim();
    let p = d + 1 + usize::from(intercept);

    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let pi = scheme.acceptance_prob(data.y()[i].to_f64_lossy());
        if !(pi.is_finite() && pi > 0.0) {
            return Err(Error::InvalidWeight(format!(
                "sampling probability is {pi} at y = {}; every observed row \
                 needs pi > 0",
                data.y()[i]
            )));
        }
        weights.push(F::from_f64_lossy(1.0 / pi));
    }

    // Row of the design matrix for observation i.
    let design_row = |i: usize, out: &mut Vec<F>| {
        out.clear();
        if intercept {
            out.push(F::one());
        }
        out.push(data.z()[i]);
        out.extend_from_slice(data.x_row(i));
    };

    // Weighted normal equations.
    let mut gram = vec![F::zero(); p * p];
    let mut rhs = vec![F::zero(); p];
    let mut row = Vec::with_capacity(p);
    for (i, &w) in weights.iter().enumerate() {
        design_row(i, &mut row);
        for a in 0..p {
            let wa = w * row[a];
            rhs[a] += wa * data.y()[i];
            for b in a..p {
                gram[a * p + b] += wa * row[b];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            gram[a * p + b] = gram[b * p + a];
        }
    }

    let (coef, condition_estimate) = cholesky_solve(&gram, &rhs, p)?;
    Ok(IpwFit {
        coef,
        weights_used: weights,
        intercept,
        condition_estimate,
    })
}

/// Solve `G c = b` for symmetric positive-definite `G` (row-major, p x p).
/// Returns the solution and a condition proxy from the Cholesky pivots.
fn cholesky_solve<F: Real>(gram: &[F], rhs: &[F], p: usize) -> Result<(Vec<F>, F)> {
    let mut l = vec![F::zero(); p * p];
    let mut min_pivot = F::infinity();
    let mut max_pivot = F::zero();
    for k in 0..p {
        let mut pivot = gram[k * p + k];
        for j in 0..k {
            pivot -= l[k * p + j] * l[k * p + j];
        }
        if !(pivot.is_finite() && pivot > F::zero()) {
            return Err(Error::RankDeficient(format!(
                "weighted Gram matrix is singular at pivot {k}"
            )));
        }
        let root = pivot.sqrt();
        min_pivot = min_pivot.min(root);
        max_pivot = max_pivot.max(root);
        l[k * p + k] = root;
        for i in (k + 1)..p {
            let mut v = gram[i * p + k];
            for j in 0..k {
                v -= l[i * p + j] * l[k * p + j];
            }
            l[i * p + k] = v / root;
        }
    }

    // Forward then back substitution.
    let mut y = vec![F::zero(); p];
    for i in 0..p {
        let mut v = rhs[i];
        for j in 0..i {
            v -= l[i * p + j] * y[j];
        }
        y[i] = v / l[i * p + i];
    }
    let mut c = vec![F::zero(); p];
    for i in (0..p).rev() {
        let mut v = y[i];
        for j in (i + 1)..p {
            v -= l[j * p + i] * c[j];
        }
        c[i] = v / l[i * p + i];
    }

    let cond = (max_pivot / min_pivot) * (max_pivot / min_pivot);
    Ok((c, cond))
}
