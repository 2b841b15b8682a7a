//! Small numeric helpers shared across the pipeline.

use statrs::distribution::{ContinuousCDF, Normal};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance (n-1 denominator).
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn std_dev(xs: &[f64]) -> f64 {
    variance(xs).sqrt()
}

pub fn normal_cdf(z: f64) -> f64 {
    Normal::standard().cdf(z)
}

pub fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// Two-sided p-value for a Wald statistic `estimate / se`.
pub fn wald_pvalue(estimate: f64, se: f64) -> f64 {
    if !se.is_finite() || se <= 0.0 {
        return f64::NAN;
    }
    2.0 * (1.0 - normal_cdf((estimate / se).abs()))
}

/// Lower empirical quantile by order statistic: x_(ceil(p*n)) with 1-based
/// ranks, clamped to the sample. `sorted` must be ascending.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    let n = sorted.len();
    let rank = (p * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

/// Kolmogorov-Smirnov p-value for `us` being i.i.d. Uniform(0,1).
///
/// Asymptotic Kolmogorov distribution with the small-sample correction of
/// Stephens; adequate for the large samples used in the goodness-of-fit
/// checks here.
pub fn ks_pvalue_uniform(us: &[f64]) -> f64 {
    let n = us.len();
    if n == 0 {
        return 1.0;
    }
    let mut sorted = us.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, u) in sorted.iter().enumerate() {
        let lo = i as f64 / nf;
        let hi = (i + 1) as f64 / nf;
        d = d.max((u - lo).abs()).max((hi - u).abs());
    }
    let x = (nf.sqrt() + 0.12 + 0.11 / nf.sqrt()) * d;
    let mut p = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        p += if k % 2 == 1 { 2.0 * term } else { -2.0 * term };
        if term < 1e-12 {
            break;
        }
    }
    p.clamp(0.0, 1.0)
}
