//! Maximum-likelihood calibration.
//!
//! Parameters are optimized in log space, which keeps them strictly positive
//! without explicit constraints. The univariate protocol is a multi-start
//! conjugate-gradient search with the analytic gradient; the multivariate
//! protocol runs `n_ann` simulated-annealing searches (geometric cooling)
//! from a jittered diagonal initialization suggested by the univariate fits
//! and refines the best candidate with conjugate gradient. Standard errors
//! come from the inverse observed information (finite differences of the
//! analytic gradient at the optimum in natural space) and p-values from the
//! asymptotic normal.

use super::likelihood::{loglik_multi, loglik_uni, LogLikConvention};
use super::{FitReport, HawkesModel};
use crate::error::{Error, Result};
use crate::linalg::invert;
use crate::optim::{anneal, minimize_cg};
use crate::rng::stream_rng;
use crate::stats::wald_pvalue;
use rand::Rng;
use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct FitOptions {
    pub convention: LogLikConvention,
    /// Multi-start count for the univariate gradient search.
    pub multistarts: usize,
    pub max_iter: usize,
    pub grad_tol: f64,
    /// Simulated-annealing restarts for the multivariate search.
    pub n_ann: usize,
    pub anneal_steps: usize,
    pub cooling: f64,
    pub anneal_temp: f64,
    pub anneal_scale: f64,
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            convention: LogLikConvention::Standard,
            multistarts: 8,
            max_iter: 600,
            grad_tol: 1e-6,
            n_ann: 100,
            anneal_steps: 200,
            cooling: 0.95,
            anneal_temp: 2.0,
            anneal_scale: 0.4,
            seed: 0,
        }
    }
}

/// Natural parameter vector layout: `[lambda_0.., alpha_00, alpha_01, ..,
/// beta_00, ..]` row-major.
fn pack(model: &HawkesModel) -> Vec<f64> {
    let k = model.dims();
    let mut x = Vec::with_capacity(k + 2 * k * k);
    x.extend(&model.lambda);
    x.extend(model.alpha.iter().flatten());
    x.extend(model.beta.iter().flatten());
    x
}

fn unpack(x: &[f64], k: usize) -> HawkesModel {
    let lambda = x[..k].to_vec();
    let alpha = (0..k).map(|i| x[k + i * k..k + (i + 1) * k].to_vec()).collect();
    let off = k + k * k;
    let beta = (0..k).map(|i| x[off + i * k..off + (i + 1) * k].to_vec()).collect();
    HawkesModel { lambda, alpha, beta }
}

/// Analytic gradient of the multivariate log-likelihood in the packed
/// natural parameterization.
pub(crate) fn grad_loglik_multi(model: &HawkesModel, events: &[Vec<f64>], t_n: f64) -> Vec<f64> {
    let k = model.dims();
    let dim = k + 2 * k * k;
    let mut g = vec![0.0; dim];

    // compensator parts
    for kk in 0..k {
        g[kk] -= t_n;
        for m in 0..k {
            let a = model.alpha[kk][m];
            let b = model.beta[kk][m];
            let mut s = 0.0;
            let mut s_db = 0.0;
            for &t in &events[m] {
                let d = t_n - t;
                let e = (-b * d).exp();
                s += 1.0 - e;
                s_db += d * e;
            }
            g[k + kk * k + m] -= s / b;
            g[k + k * k + kk * k + m] += a / (b * b) * s - a / b * s_db;
        }
    }

    // merged sweep for the ln-intensity parts
    let mut merged: Vec<(f64, usize)> = Vec::new();
    for (dim_idx, stream) in events.iter().enumerate() {
        merged.extend(stream.iter().map(|&t| (t, dim_idx)));
    }
    merged.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut s = vec![vec![0.0; k]; k]; // decayed counts
    let mut sp = vec![vec![0.0; k]; k]; // d/dbeta of s
    let mut last_t = 0.0;
    let mut i = 0;
    while i < merged.len() {
        let t = merged[i].0;
        let dt = t - last_t;
        for kk in 0..k {
            for m in 0..k {
                let decay = (-model.beta[kk][m] * dt).exp();
                sp[kk][m] = (sp[kk][m] - dt * s[kk][m]) * decay;
                s[kk][m] *= decay;
            }
        }
        last_t = t;
        let mut j = i;
        while j < merged.len() && merged[j].0 == t {
            let dk = merged[j].1;
            let mut intensity = model.lambda[dk];
            for m in 0..k {
                intensity += model.alpha[dk][m] * s[dk][m];
            }
            g[dk] += 1.0 / intensity;
            for m in 0..k {
                g[k + dk * k + m] += s[dk][m] / intensity;
                g[k + k * k + dk * k + m] += model.alpha[dk][m] * sp[dk][m] / intensity;
            }
            j += 1;
        }
        for gi in i..j {
            let src = merged[gi].1;
            for kk in 0..k {
                s[kk][src] += 1.0;
            }
        }
        i = j;
    }
    g
}

fn loglik_packed(x_nat: &[f64], k: usize, events: &[Vec<f64>], t_n: f64) -> f64 {
    let model = unpack(x_nat, k);
    if k == 1 {
        loglik_uni(model.lambda[0], model.alpha[0][0], model.beta[0][0], &events[0], t_n, LogLikConvention::Standard)
            .unwrap_or(f64::NEG_INFINITY)
    } else {
        loglik_multi(&model, events, t_n, LogLikConvention::Standard).unwrap_or(f64::NEG_INFINITY)
    }
}

/// Objective and gradient in log space (minimization of -loglik).
fn objective(xlog: &[f64], k: usize, events: &[Vec<f64>], t_n: f64) -> f64 {
    if xlog.iter().any(|v| !v.is_finite() || *v > 12.0 || *v < -46.0) {
        return f64::INFINITY;
    }
    let nat: Vec<f64> = xlog.iter().map(|v| v.exp()).collect();
    -loglik_packed(&nat, k, events, t_n)
}

fn objective_grad(xlog: &[f64], k: usize, events: &[Vec<f64>], t_n: f64) -> Vec<f64> {
    let nat: Vec<f64> = xlog.iter().map(|v| v.exp()).collect();
    let model = unpack(&nat, k);
    let g = grad_loglik_multi(&model, events, t_n);
    g.iter().zip(&nat).map(|(gi, xi)| -gi * xi).collect()
}

/// Observed information: central finite differences of the analytic gradient
/// in natural space, symmetrized, then inverted.
fn standard_errors(model: &HawkesModel, events: &[Vec<f64>], t_n: f64) -> Option<Vec<f64>> {
    let k = model.dims();
    let theta = pack(model);
    let dim = theta.len();
    let mut hess = vec![vec![0.0; dim]; dim];
    for i in 0..dim {
        let h = 1e-5 * theta[i].abs().max(1e-10);
        let mut up = theta.clone();
        up[i] += h;
        let mut dn = theta.clone();
        dn[i] -= h;
        if dn[i] <= 0.0 && i >= k {
            dn[i] = theta[i] * 0.5; // keep rates positive
        }
        let gu = grad_loglik_multi(&unpack(&up, k), events, t_n);
        let gd = grad_loglik_multi(&unpack(&dn, k), events, t_n);
        let denom = up[i] - dn[i];
        for j in 0..dim {
            hess[j][i] = (gu[j] - gd[j]) / denom;
        }
    }
    // observed information = -hessian of the log-likelihood, symmetrized
    let mut info = vec![vec![0.0; dim]; dim];
    for i in 0..dim {
        for j in 0..dim {
            info[i][j] = -(hess[i][j] + hess[j][i]) / 2.0;
        }
    }
    let cov = invert(&info)?;
    let mut se = Vec::with_capacity(dim);
    for (i, row) in cov.iter().enumerate() {
        if row[i] > 0.0 && row[i].is_finite() {
            se.push(row[i].sqrt());
        } else {
            return None;
        }
    }
    Some(se)
}

fn build_report(
    xlog: &[f64],
    k: usize,
    events: &[Vec<f64>],
    t_n: f64,
    iterations: usize,
    converged: bool,
    convention: LogLikConvention,
) -> FitReport {
    let nat: Vec<f64> = xlog.iter().map(|v| v.exp()).collect();
    let model = unpack(&nat, k);
    let loglik = if k == 1 {
        loglik_uni(model.lambda[0], model.alpha[0][0], model.beta[0][0], &events[0], t_n, convention)
            .unwrap_or(f64::NAN)
    } else {
        loglik_multi(&model, events, t_n, convention).unwrap_or(f64::NAN)
    };
    let se = standard_errors(&model, events, t_n);
    let theta = pack(&model);
    let (se_l, se_a, se_b, p_l, p_a, p_b) = match &se {
        Some(se) => {
            let pv: Vec<f64> = theta.iter().zip(se).map(|(t, s)| wald_pvalue(*t, *s)).collect();
            let split_vec = |v: &[f64]| -> (Vec<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>) {
                let lam = v[..k].to_vec();
                let al = (0..k).map(|i| v[k + i * k..k + (i + 1) * k].to_vec()).collect();
                let off = k + k * k;
                let be = (0..k).map(|i| v[off + i * k..off + (i + 1) * k].to_vec()).collect();
                (lam, al, be)
            };
            let (sl, sa, sb) = split_vec(se);
            let (pl, pa, pb) = split_vec(&pv);
            (Some(sl), Some(sa), Some(sb), Some(pl), Some(pa), Some(pb))
        }
        None => (None, None, None, None, None, None),
    };
    FitReport {
        model,
        se_lambda: se_l,
        se_alpha: se_a,
        se_beta: se_b,
        p_lambda: p_l,
        p_alpha: p_a,
        p_beta: p_b,
        loglik,
        iterations,
        converged,
    }
}

/// Calibrate a univariate Hawkes model on event times in `(0, t_n]`.
pub fn fit_univariate(times: &[f64], t_n: f64, opts: &FitOptions) -> Result<FitReport> {
    if times.len() < 5 {
        return Err(Error::InvalidParameter(format!(
            "univariate fit needs at least 5 events, got {}",
            times.len()
        )));
    }
    let events = vec![times.to_vec()];
    let rate = times.len() as f64 / t_n;
    let mean_gap = 1.0 / rate;

    let mut starts: Vec<[f64; 3]> = Vec::new();
    for &branching in &[0.05, 0.2, 0.5, 0.8] {
        for &beta in &[0.5 / mean_gap, 2.0 / mean_gap] {
            starts.push([rate * (1.0 - branching), branching * beta, beta]);
        }
    }
    starts.truncate(opts.multistarts.max(1));

    let f = |x: &[f64]| objective(x, 1, &events, t_n);
    let g = |x: &[f64]| objective_grad(x, 1, &events, t_n);
    // the achievable log-space gradient norm is limited by rounding in a sum
    // over n events; the MLE localization error stays far below one standard
    // error at this tolerance
    let tol = opts.grad_tol.max(2e-5 * (times.len() as f64).sqrt());
    let mut best: Option<crate::optim::CgResult> = None;
    for s in &starts {
        let x0: Vec<f64> = s.iter().map(|v| v.ln()).collect();
        let res = minimize_cg(&f, &g, &x0, opts.max_iter, tol);
        if best.as_ref().map_or(true, |b| res.value < b.value) {
            best = Some(res);
        }
    }
    let best = best.unwrap();
    Ok(build_report(&best.x, 1, &events, t_n, best.iterations, best.converged, opts.convention))
}

/// Calibrate a K-variate Hawkes model: annealing restarts from the diagonal
/// initialization suggested by the univariate fits, then conjugate-gradient
/// refinement of the best candidate.
pub fn fit_multivariate(events: &[Vec<f64>], t_n: f64, opts: &FitOptions) -> Result<FitReport> {
    let k = events.len();
    if k < 2 {
        return Err(Error::InvalidParameter("multivariate fit needs K >= 2 streams".into()));
    }
    for stream in events {
        if stream.len() < 5 {
            return Err(Error::InvalidParameter("each dimension needs at least 5 events".into()));
        }
    }

    // diagonal initialization from univariate fits
    let mut init = HawkesModel {
        lambda: vec![0.0; k],
        alpha: vec![vec![0.0; k]; k],
        beta: vec![vec![0.0; k]; k],
    };
    for (d, stream) in events.iter().enumerate() {
        let uni = fit_univariate(stream, t_n, &FitOptions { multistarts: 4, ..opts.clone() })?;
        init.lambda[d] = uni.model.lambda[0];
        for m in 0..k {
            if m == d {
                init.alpha[d][d] = uni.model.alpha[0][0].max(1e-8);
                init.beta[d][d] = uni.model.beta[0][0];
            } else {
                init.alpha[d][m] = (uni.model.alpha[0][0] * 0.1).max(1e-8);
                init.beta[d][m] = uni.model.beta[0][0];
            }
        }
    }
    let x0: Vec<f64> = pack(&init).iter().map(|v| v.ln()).collect();

    let f = |x: &[f64]| objective(x, k, events, t_n);
    let candidates: Vec<(Vec<f64>, f64)> = (0..opts.n_ann.max(1))
        .into_par_iter()
        .map(|restart| {
            let mut rng = stream_rng(opts.seed, 0x0a17 + restart as u64);
            let start: Vec<f64> = if restart == 0 {
                x0.clone()
            } else {
                x0.iter()
                    .map(|v| v + 0.8 * rng.sample::<f64, _>(rand_distr::StandardNormal))
                    .collect()
            };
            anneal(&f, &start, opts.anneal_steps, opts.cooling, opts.anneal_temp, opts.anneal_scale, &mut rng)
        })
        .collect();
    let (xa, _) = candidates
        .into_iter()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap();

    let g = |x: &[f64]| objective_grad(x, k, events, t_n);
    let total_events: usize = events.iter().map(Vec::len).sum();
    let tol = opts.grad_tol.max(2e-5 * (total_events as f64).sqrt());
    let refined = minimize_cg(&f, &g, &xa, opts.max_iter, tol);
    Ok(build_report(
        &refined.x,
        k,
        events,
        t_n,
        refined.iterations,
        refined.converged,
        opts.convention,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hawkes::simulate_uni;
    use crate::optim::numeric_gradient;

    #[test]
    fn multi_gradient_reduces_to_univariate() {
        let model = HawkesModel::univariate(0.1, 0.3, 0.9);
        let events = vec![vec![1.0, 2.0, 7.0, 7.5, 20.0]];
        let g1 = grad_loglik_multi(&model, &events, 30.0);
        let g2 = super::super::grad_loglik_uni(0.1, 0.3, 0.9, &events[0], 30.0).unwrap();
        for (a, b) in g1.iter().zip(g2.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn multi_gradient_matches_finite_differences() {
        let model = HawkesModel {
            lambda: vec![0.2, 0.3],
            alpha: vec![vec![0.4, 0.1], vec![0.2, 0.5]],
            beta: vec![vec![1.1, 0.8], vec![0.9, 1.3]],
        };
        let events = vec![vec![1.0, 4.0, 11.0, 17.5], vec![2.0, 4.0, 9.0, 25.0]];
        let t_n = 30.0;
        let g = grad_loglik_multi(&model, &events, t_n);
        let x = pack(&model);
        let f = |x: &[f64]| loglik_packed(x, 2, &events, t_n);
        let fd = numeric_gradient(&f, &x, 1e-7);
        for (i, (a, b)) in g.iter().zip(fd.iter()).enumerate() {
            assert!((a - b).abs() / b.abs().max(1e-6) < 1e-4, "param {i}: {a} vs {b}");
        }
    }

    #[test]
    fn recovers_parameters_on_long_sample() {
        let (lambda, alpha, beta) = (0.02, 0.1, 0.4);
        let mut rng = crate::rng::stream_rng(314, 0);
        let times = simulate_uni(lambda, alpha, beta, 300_000.0, &mut rng).unwrap();
        let fit = fit_univariate(&times, 300_000.0, &FitOptions::default()).unwrap();
        let m = &fit.model;
        assert!(fit.converged);
        assert!((m.lambda[0] - lambda).abs() / lambda < 0.1, "{:?}", m.lambda);
        assert!((m.alpha[0][0] - alpha).abs() / alpha < 0.2, "{:?}", m.alpha);
        assert!((m.beta[0][0] - beta).abs() / beta < 0.2, "{:?}", m.beta);
        // standard errors available and sane
        let se = fit.se_lambda.as_ref().unwrap();
        assert!(se[0] > 0.0 && se[0] < lambda);
    }

    #[test]
    fn poisson_truth_yields_small_branching() {
        let mut rng = crate::rng::stream_rng(217, 0);
        let times = simulate_uni(0.01, 0.0, 1.0, 50_000.0, &mut rng).unwrap();
        let fit = fit_univariate(&times, 50_000.0, &FitOptions::default()).unwrap();
        let m = &fit.model;
        assert!(m.alpha[0][0] / m.beta[0][0] < 0.15, "branching {}", m.alpha[0][0] / m.beta[0][0]);
        // lambda close to the event rate
        let rate = times.len() as f64 / 50_000.0;
        assert!((m.lambda[0] - rate).abs() / rate < 0.1);
    }

    #[test]
    fn bivariate_fit_recovers_coupling() {
        use crate::hawkes::simulate_multi;
        let truth = HawkesModel {
            lambda: vec![3e-3, 2e-3],
            alpha: vec![vec![4e-2, 2e-2], vec![1.5e-2, 5e-2]],
            beta: vec![vec![2e-1, 1.5e-1], vec![1e-1, 2.5e-1]],
        };
        let t_n = 120_000.0;
        let mut rng = crate::rng::stream_rng(88, 0);
        let events = simulate_multi(&truth, t_n, &mut rng).unwrap();
        assert!(events.iter().all(|e| e.len() > 200));
        let opts = FitOptions {
            n_ann: 20,
            anneal_steps: 150,
            multistarts: 4,
            seed: 1,
            ..FitOptions::default()
        };
        let fit = fit_multivariate(&events, t_n, &opts).unwrap();
        // the maximum-likelihood point dominates the truth in-sample
        let l_truth =
            super::super::loglik_multi(&truth, &events, t_n, LogLikConvention::Standard).unwrap();
        assert!(fit.loglik >= l_truth - 1e-6, "{} vs {l_truth}", fit.loglik);
        // base rates recovered tightly, diagonal excitations roughly
        for d in 0..2 {
            let rel = (fit.model.lambda[d] - truth.lambda[d]).abs() / truth.lambda[d];
            assert!(rel < 0.25, "lambda[{d}] off by {rel}");
            let ratio = fit.model.alpha[d][d] / truth.alpha[d][d];
            assert!((0.4..2.5).contains(&ratio), "alpha[{d}][{d}] ratio {ratio}");
        }
        assert!(fit.model.is_stationary());
        // standard errors computed for every one of the ten parameters
        assert!(fit.se_lambda.is_some() && fit.se_alpha.is_some() && fit.se_beta.is_some());
    }

    #[test]
    fn argmax_is_invariant_under_the_additive_convention() {
        let mut rng = crate::rng::stream_rng(9, 0);
        let times = simulate_uni(0.02, 0.2, 0.8, 20_000.0, &mut rng).unwrap();
        let std = fit_univariate(&times, 20_000.0, &FitOptions::default()).unwrap();
        let paper = fit_univariate(
            &times,
            20_000.0,
            &FitOptions { convention: LogLikConvention::PaperConstant, ..Default::default() },
        )
        .unwrap();
        for (a, b) in pack(&std.model).iter().zip(pack(&paper.model).iter()) {
            assert!((a - b).abs() / b.abs() < 1e-6);
        }
        assert!((paper.loglik - std.loglik - 20_000.0).abs() < 1e-6);
    }
}
