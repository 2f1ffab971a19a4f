//! Small statistical helpers shared across modules.

use crate::num::Real;

/// Running (Welford) mean: exact on constant input.
pub fn mean<F: Real>(v: &[F]) -> F {
    if v.is_empty() {
        return F::nan();
    }
    let mut m = F::zero();
    for (k, &t) in v.iter().enumerate() {
        m += (t - m) / F::from_usize(k + 1).unwrap();
    }
    m
}

/// Sample standard deviation (n-1 denominator), Welford accumulation so a
/// constant sequence yields exactly zero.
pub fn sample_sd<F: Real>(v: &[F]) -> F {
    if v.len() < 2 {
        return F::zero();
    }
    let mut m = F::zero();
    let mut s = F::zero();
    for (k, &t) in v.iter().enumerate() {
        let k1 = F::from_usize(k + 1).unwrap();
        let delta = t - m;
        m += delta / k1;
        s += delta * (t - m);
    }
    (s / F::from_usize(v.len() - 1).unwrap()).sqrt()
}

/// Empirical quantile with linear interpolation between order statistics
/// (the common "type 7" definition). `p` in [0, 1].
pub fn quantile<F: Real>(sorted: &[F], p: F) -> F {
    if sorted.is_empty() {
        return F::nan();
    }
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = p * F::from_usize(n - 1).unwrap();
    let lo = h.floor().to_usize().unwrap_or(0).min(n - 1);
    let hi = (lo + 1).min(n - 1);
    let frac = h - F::from_usize(lo).unwrap();
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + libm::erf(x / std::f64::consts::SQRT_2))
}

/// Inverse standard normal CDF (Acklam's rational approximation, refined by
/// one Halley step; absolute error well below 1e-9 on (0, 1)).
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile needs p in (0,1), got {p}");

    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.38357751867269e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };

    // One Halley refinement against the exact CDF.
    let e = normal_cdf(x) - p;
    let u = e * (2.0 * std::f64::consts::PI).sqrt() * (x * x / 2.0).exp();
    x - u / (1.0 + x * u / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_sd() {
        let v = [1.0f64, 2.0, 3.0, 4.0];
        assert!((mean(&v) - 2.5).abs() < 1e-15);
        let sd: f64 = sample_sd(&v);
        assert!((sd - (5.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(sample_sd(&[7.0f64]), 0.0);
    }

    #[test]
    fn quantile_interpolates() {
        let v = [1.0f64, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 5.0);
        assert!((quantile(&v, 0.5) - 3.0).abs() < 1e-15);
        assert!((quantile(&v, 0.25) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn normal_quantile_reference_values() {
        assert!((normal_quantile(0.975) - 1.959963984540054).abs() < 1e-9);
        assert!((normal_quantile(0.995) - 2.575829303548901).abs() < 1e-9);
        assert!((normal_quantile(0.5)).abs() < 1e-12);
        assert!((normal_quantile(0.025) + 1.959963984540054).abs() < 1e-9);
    }

    #[test]
    fn cdf_quantile_roundtrip() {
        for &p in &[0.001, 0.01, 0.1, 0.3, 0.5, 0.9, 0.99, 0.999] {
            let x = normal_quantile(p);
            assert!((normal_cdf(x) - p).abs() < 1e-10, "p={p}");
        }
    }
}
