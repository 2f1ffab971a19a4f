//! Core data containers: response/covariate samples and resampling weights.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

/// An observed sample `(y_i, z_i, x_i), i = 1..n`.
///
/// `z` is the anchor covariate (its coefficient is fixed to 1 for
/// identifiability); `x` holds the `d` free covariates, row-major.
///
/// The ordering of `y` is precomputed at construction: the rank objective
/// depends on responses only through their order, so every kernel evaluation
/// reuses it instead of re-sorting.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dataset<F: Real> {
    y: Vec<F>,
    z: Vec<F>,
    x: Vec<F>,
    d: usize,
    /// Row indices sorted by ascending `y` (ties kept in input order).
    y_order: Vec<u32>,
    /// Exclusive end offsets of tied-`y` groups within `y_order`.
    y_group_ends: Vec<u32>,
}

impl<F: Real> Dataset<F> {
    /// Build and validate a dataset. `x` is row-major with `d` columns.
    pub fn new(y: Vec<F>, z: Vec<F>, x: Vec<F>, d: usize) -> Result<Self> {
        let n = y.len();
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 observations, got {n}"
            )));
        }
        if d < 1 {
            return Err(Error::InvalidArgument(
                "need at least one free covariate (d >= 1)".into(),
            ));
        }
        if z.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "y has {n} rows but z has {}",
                z.len()
            )));
        }
        if x.len() != n * d {
            return Err(Error::DimensionMismatch(format!(
                "x has {} entries, expected {n} x {d}",
                x.len()
            )));
        }
        for (name, v) in [("y", &y), ("z", &z), ("x", &x)] {
            if let Some(i) = v.iter().position(|t| !t.is_finite()) {
                return Err(Error::NonFinite(format!("{name}[{i}] = {}", v[i])));
            }
        }

        let (y_order, y_group_ends) = order_and_groups(&y);
        Ok(Dataset {
            y,
            z,
            x,
            d,
            y_order,
            y_group_ends,
        })
    }

    /// Number of observations.
    pub fn n(&self) -> usize {
        self.y.len()
    }

    /// Number of free covariates.
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn y(&self) -> &[F] {
        &self.y
    }

    pub fn z(&self) -> &[F] {
        &self.z
    }

    /// Row-major free covariate matrix.
    pub fn x(&self) -> &[F] {
        &self.x
    }

    /// Free covariate row `i`.
    pub fn x_row(&self, i: usize) -> &[F] {
        &self.x[i * self.d..(i + 1) * self.d]
    }

    pub(crate) fn y_order(&self) -> &[u32] {
        &self.y_order
    }

    pub(crate) fn y_group_ends(&self) -> &[u32] {
        &self.y_group_ends
    }

    /// Composite score `s_i = z_i + beta' x_i` written into `out`.
    pub(crate) fn scores_into(&self, beta: &[F], out: &mut Vec<F>) -> Result<()> {
        if beta.len() != self.d {
            return Err(Error::DimensionMismatch(format!(
                "beta has length {}, expected {}",
                beta.len(),
                self.d
            )));
        }
        if let Some(i) = beta.iter().position(|t| !t.is_finite()) {
            return Err(Error::NonFinite(format!("beta[{i}] = {}", beta[i])));
        }
        out.clear();
        out.reserve(self.n());
        for i in 0..self.n() {
            let mut s = self.z[i];
            let row = self.x_row(i);
            for (b, xv) in beta.iter().zip(row) {
                s += *b * *xv;
            }
            out.push(s);
        }
        Ok(())
    }

    /// Apply a strictly increasing map to the responses, e.g. for invariance
    /// checks. The transformed values must stay finite.
    pub fn map_response<G: Fn(F) -> F>(&self, g: G) -> Result<Self> {
        let y: Vec<F> = self.y.iter().map(|&v| g(v)).collect();
        Dataset::new(y, self.z.clone(), self.x.clone(), self.d)
    }

    /// Column `j` of the free covariates is constant (identifiability hazard).
    pub(crate) fn column_is_constant(&self, j: usize) -> bool {
        let first = self.x[j];
        (1..self.n()).all(|i| self.x[i * self.d + j] == first)
    }
}

/// Composite score vector `s_i = z_i + beta' x_i`.
#[derive(Debug, Clone)]
pub struct ScoreVector<F: Real> {
    values: Vec<F>,
}

impl<F: Real> ScoreVector<F> {
    pub fn compute(data: &Dataset<F>, beta: &[F]) -> Result<Self> {
        let mut values = Vec::new();
        data.scores_into(beta, &mut values)?;
        Ok(ScoreVector { values })
    }

    pub fn values(&self) -> &[F] {
        &self.values
    }
}

/// Nonnegative resampling weights `e_1..e_n`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightVector<F: Real> {
    e: Vec<F>,
}

impl<F: Real> WeightVector<F> {
    pub fn new(e: Vec<F>) -> Result<Self> {
        for (i, w) in e.iter().enumerate() {
            if !w.is_finite() {
                return Err(Error::InvalidWeight(format!("e[{i}] = {w} is not finite")));
            }
            if *w < F::zero() {
                return Err(Error::InvalidWeight(format!("e[{i}] = {w} is negative")));
            }
        }
        Ok(WeightVector { e })
    }

    /// All-ones weights of length `n` (collapses the weighted objective to
    /// the plain pair count).
    pub fn unit(n: usize) -> Self {
        WeightVector {
            e: vec![F::one(); n],
        }
    }

    pub fn values(&self) -> &[F] {
        &self.e
    }

    pub fn len(&self) -> usize {
        self.e.len()
    }

    pub fn is_empty(&self) -> bool {
        self.e.is_empty()
    }
}

/// Model description: which covariate is the anchor and how many free
/// coefficients are estimated.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelSpec {
    /// Label of the anchor covariate (coefficient fixed to 1), for reporting.
    pub anchor: String,
    /// Number of free coefficients `d`.
    pub dim: usize,
}

impl ModelSpec {
    pub fn new(dim: usize) -> Self {
        ModelSpec {
            anchor: "z".to_string(),
            dim,
        }
    }

    pub fn with_anchor(dim: usize, anchor: impl Into<String>) -> Self {
        ModelSpec {
            anchor: anchor.into(),
            dim,
        }
    }

    pub fn validate_against<F: Real>(&self, data: &Dataset<F>) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidArgument(
                "nothing to estimate: model has zero free coefficients".into(),
            ));
        }
        if self.dim != data.dim() {
            return Err(Error::DimensionMismatch(format!(
                "model expects {} free covariates, data has {}",
                self.dim,
                data.dim()
            )));
        }
        Ok(())
    }
}

/// Argsort of `v` plus exclusive end offsets of tied-value groups.
fn order_and_groups<F: Real>(v: &[F]) -> (Vec<u32>, Vec<u32>) {
    let mut order: Vec<u32> = (0..v.len() as u32).collect();
    order.sort_by(|&a, &b| {
        v[a as usize]
            .partial_cmp(&v[b as usize])
            .expect("values validated finite")
    });
    let mut ends = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && v[order[j] as usize] == v[order[i] as usize] {
            j += 1;
        }
        ends.push(j as u32);
        i = j;
    }
    (order, ends)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_short_and_mismatched_input() {
        assert!(Dataset::new(vec![1.0], vec![1.0], vec![0.0], 1).is_err());
        assert!(Dataset::new(vec![1.0, 2.0], vec![1.0], vec![0.0, 0.0], 1).is_err());
        assert!(Dataset::new(vec![1.0, 2.0], vec![1.0, 2.0], vec![0.0], 1).is_err());
        assert!(Dataset::new(vec![1.0, 2.0], vec![1.0, 2.0], vec![0.0, 0.0], 0).is_err());
    }

    #[test]
    fn rejects_non_finite() {
        let e = Dataset::new(vec![1.0, f64::NAN], vec![0.0, 0.0], vec![0.0, 0.0], 1);
        assert!(matches!(e, Err(Error::NonFinite(_))));
    }

    #[test]
    fn y_order_groups_ties() {
        let d = Dataset::new(
            vec![2.0, 1.0, 2.0, 0.5],
            vec![0.0; 4],
            vec![0.0; 4],
            1,
        )
        .unwrap();
        assert_eq!(d.y_order(), &[3, 1, 0, 2]);
        assert_eq!(d.y_group_ends(), &[1, 2, 4]);
    }

    #[test]
    fn weight_vector_validation() {
        assert!(WeightVector::new(vec![0.0, 1.5]).is_ok());
        assert!(WeightVector::new(vec![-0.1, 1.0]).is_err());
        assert!(WeightVector::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn scores_match_hand_computation() {
        let d = Dataset::new(
            vec![1.0, 2.0],
            vec![0.5, -0.5],
            vec![1.0, 2.0, 3.0, 4.0],
            2,
        )
        .unwrap();
        let s = ScoreVector::compute(&d, &[1.0, -1.0]).unwrap();
        assert_eq!(s.values(), &[0.5 + 1.0 - 2.0, -0.5 + 3.0 - 4.0]);
        assert!(ScoreVector::compute(&d, &[1.0]).is_err());
    }
}
