//! Poisson-binomial distribution: the law of a sum of independent Bernoulli
//! variables with heterogeneous success probabilities.
//!
//! The pmf is built by dynamic-programming convolution, one Bernoulli at a
//! time, in O(N^2). That is exact up to floating-point rounding and is the
//! work-horse of the per-minute cross-sectional independence test.

/// Full pmf of `sum_i Bernoulli(p_i)`; entry `j` is `P(J = j)`.
pub fn pmf(probs: &[f64]) -> Vec<f64> {
    for &p in probs {
        assert!((0.0..=1.0).contains(&p), "success probability {p} outside [0,1]");
    }
    let mut dp = vec![0.0; probs.len() + 1];
    dp[0] = 1.0;
    for (i, &p) in probs.iter().enumerate() {
        let q = 1.0 - p;
        // walk down so dp[j-1] is still the previous round's value
        for j in (1..=i + 1).rev() {
            dp[j] = dp[j] * q + dp[j - 1] * p;
        }
        dp[0] *= q;
    }
    dp
}

/// Upper tail `P(J >= j)`.
pub fn tail_ge(probs: &[f64], j: usize) -> f64 {
    if j == 0 {
        return 1.0;
    }
    if j > probs.len() {
        return 0.0;
    }
    // summing the smaller side keeps the tail accurate when it is tiny
    let pmf = pmf(probs);
    let upper: f64 = pmf[j..].iter().sum();
    let lower: f64 = pmf[..j].iter().sum();
    if upper <= lower {
        upper
    } else {
        (1.0 - lower).max(0.0)
    }
}
