//! Shared oracles and generators for the integration suites. The counting
//! oracles here are plain pair enumerations, independent of the library's
//! swept kernels.
#![allow(dead_code)] // each test binary uses a different subset

use rand::Rng;

use mrc_core::data::Dataset;
use mrc_core::rng::stream_rng;

pub fn brute_force_count(data: &Dataset<f64>, beta: &[f64]) -> u64 {
    let n = data.n();
    let s = scores(data, beta);
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

pub fn brute_force_weighted(data: &Dataset<f64>, beta: &[f64], e: &[f64]) -> f64 {
    let n = data.n();
    let s = scores(data, beta);
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

fn scores(data: &Dataset<f64>, beta: &[f64]) -> Vec<f64> {
    (0..data.n())
        .map(|i| {
            data.z()[i]
                + beta
                    .iter()
                    .zip(data.x_row(i))
                    .map(|(b, x)| b * x)
                    .sum::<f64>()
        })
        .collect()
}

/// Continuous dataset with linear-index structure plus noise.
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

/// Dataset with values snapped to a coarse grid, forcing ties in both the
/// responses and the scores.
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
