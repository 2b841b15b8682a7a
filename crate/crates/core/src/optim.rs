//! Unconstrained minimizers used by the likelihood calibrations: nonlinear
//! conjugate gradient for the deterministic refinement and simulated
//! annealing for the stochastic search.

use rand::Rng;

pub struct CgResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Polak-Ribiere conjugate gradient with backtracking Armijo line search and
/// periodic direction restarts. Minimizes `f`; `grad` must return the
/// gradient of `f`.
pub fn minimize_cg(
    f: &dyn Fn(&[f64]) -> f64,
    grad: &dyn Fn(&[f64]) -> Vec<f64>,
    x0: &[f64],
    max_iter: usize,
    grad_tol: f64,
) -> CgResult {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut g = grad(&x);
    let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
    let mut step = 1.0;

    for iter in 0..max_iter {
        let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if gnorm < grad_tol {
            return CgResult { x, value: fx, iterations: iter, converged: true };
        }
        let slope: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
        if slope >= 0.0 {
            // not a descent direction: restart along the gradient
            d = g.iter().map(|v| -v).collect();
            step = 1.0;
            continue;
        }
        // backtracking Armijo
        let mut t = step;
        let mut accepted = false;
        for _ in 0..60 {
            let xt: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            let ft = f(&xt);
            if ft.is_finite() && ft <= fx + 1e-4 * t * slope {
                let gt = grad(&xt);
                // Polak-Ribiere+
                let num: f64 = gt.iter().zip(&g).map(|(a, b)| a * (a - b)).sum();
                let den: f64 = g.iter().map(|v| v * v).sum();
                let beta = (num / den).max(0.0);
                let restart = iter % (2 * n + 1) == 2 * n;
                d = gt
                    .iter()
                    .zip(&d)
                    .map(|(gi, di)| -gi + if restart { 0.0 } else { beta * di })
                    .collect();
                x = xt;
                fx = ft;
                g = gt;
                step = (t * 2.0).min(1.0);
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            return CgResult { x, value: fx, iterations: iter, converged: gnorm < grad_tol * 100.0 };
        }
    }
    let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    CgResult { x, value: fx, iterations: max_iter, converged: gnorm < grad_tol }
}

/// Central-difference gradient for objectives without an analytic one.
pub fn numeric_gradient(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        let hi = h * x[i].abs().max(1.0);
        xp[i] = x[i] + hi;
        let up = f(&xp);
        xp[i] = x[i] - hi;
        let dn = f(&xp);
        xp[i] = x[i];
        g[i] = (up - dn) / (2.0 * hi);
    }
    g
}

/// One simulated-annealing search: geometric cooling by `cooling` per step,
/// isotropic Gaussian proposals whose scale shrinks with the temperature.
/// Returns the best point seen.
pub fn anneal(
    f: &dyn Fn(&[f64]) -> f64,
    x0: &[f64],
    steps: usize,
    cooling: f64,
    initial_temp: f64,
    initial_scale: f64,
    rng: &mut impl Rng,
) -> (Vec<f64>, f64) {
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut best = x.clone();
    let mut fbest = fx;
    let mut temp = initial_temp;
    for _ in 0..steps {
        let scale = initial_scale * (temp / initial_temp).max(0.05);
        let cand: Vec<f64> = x
            .iter()
            .map(|&v| v + scale * rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect();
        let fc = f(&cand);
        if fc.is_finite() && (fc < fx || rng.random::<f64>() < ((fx - fc) / temp).exp()) {
            x = cand;
            fx = fc;
            if fx < fbest {
                best = x.clone();
                fbest = fx;
            }
        }
        temp *= cooling;
    }
    (best, fbest)
}
