//! Test-only oracles and generators. The brute-force counters here are the
//! reference the production kernels are checked against; they must stay
//! independent of the swept implementations.

use rand::Rng;

use crate::data::Dataset;
use crate::rng::stream_rng;

/// Pair-enumeration oracle for the unweighted objective.
pub fn brute_force_count(data: &Dataset<f64>, beta: &[f64]) -> u64 {
    let n = data.n();
    let s: Vec<f64> = (0..n)
        .map(|i| {
            data.z()[i]
                + beta
                    .iter()
                    .zip(data.x_row(i))
                    .map(|(b, x)| b * x)
                    .sum::<f64>()
        })
        .collect();
    let mut count = 0u64;
    for i in 0..n {
        for j in 0..n {
            if i != j && s[i] > s[j] && data.y()[i] > data.y()[j] {
                count += 1;
            }
        }
    }
    count
}

/// Pair-enumeration oracle for the weighted objective.
pub fn brute_force_weighted(data: &Dataset<f64>, beta: &[f64], e: &[f64]) -> f64 {
    let n = data.n();
    let s: Vec<f64> = (0..n)
        .map(|i| {
            data.z()[i]
                + beta
                    .iter()
                    .zip(data.x_row(i))
                    .map(|(b, x)| b * x)
                    .sum::<f64>()
        })
        .collect();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j && s[i] > s[j] && data.y()[i] > data.y()[j] {
                total += e[i] * e[j];
            }
        }
    }
    total
}

/// Continuous seeded dataset: y follows the linear index plus noise, so the
/// objective has genuine structure.
pub fn random_dataset(n: usize, d: usize, seed: u64) -> Dataset<f64> {
    let mut rng = stream_rng(seed, 90);
    let mut y = Vec::with_capacity(n);
    let mut z = Vec::with_capacity(n);
    let mut x = Vec::with_capacity(n * d);
    for _ in 0..n {
        let zi: f64 = rng.gen_range(-2.0..2.0);
        let mut idx = zi;
        for k in 0..d {
            let xv: f64 = rng.gen_range(-2.0..2.0);
            let b = if k % 2 == 0 { 1.0 } else { -1.0 };
            idx += b * xv;
            x.push(xv);
        }
        z.push(zi);
        y.push(idx + rng.gen_range(-1.0..1.0));
    }
    Dataset::new(y, z, x, d).unwrap()
}

/// Seeded dataset with deliberate ties in both `y` and the covariates (hence
/// in scores): values are snapped to a coarse grid.
pub fn random_dataset_with_ties(n: usize, d: usize, seed: u64) -> Dataset<f64> {
    let mut rng = stream_rng(seed, 91);
    let snap = |v: f64| (v * 2.0).round() / 2.0;
    let mut y = Vec::with_capacity(n);
    let mut z = Vec::with_capacity(n);
    let mut x = Vec::with_capacity(n * d);
    for _ in 0..n {
        let zi = snap(rng.gen_range(-2.0..2.0));
        let mut idx = zi;
        for _ in 0..d {
            let xv = snap(rng.gen_range(-2.0..2.0));
            idx += xv;
            x.push(xv);
        }
        z.push(zi);
        y.push(snap(idx + rng.gen_range(-1.0..1.0)));
    }
    Dataset::new(y, z, x, d).unwrap()
}
