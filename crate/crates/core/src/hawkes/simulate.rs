//! Exact simulation by thinning (Ogata's variant of Shedler-Lewis).
//!
//! Between events the intensity only decays, so the intensity at the moment
//! just after the last candidate dominates the future path until the next
//! event. Candidates arrive as exponentials at that dominating rate and are
//! accepted with probability I(t)/I_bar; the acceptance ratio can never
//! exceed one, which is asserted on every candidate.

use super::HawkesModel;
use crate::error::{Error, Result};
use rand::Rng;

/// Simulate a univariate exponential Hawkes process on `(0, horizon]`.
pub fn simulate_uni(
    lambda: f64,
    alpha: f64,
    beta: f64,
    horizon: f64,
    rng: &mut impl Rng,
) -> Result<Vec<f64>> {
    let model = HawkesModel::univariate(lambda, alpha, beta);
    model.validate()?;
    let rho = model.branching_spectral_radius();
    if rho >= 1.0 {
        return Err(Error::NonStationary { rho });
    }

    let mut events = Vec::new();
    let mut t = 0.0;
    let mut excited = 0.0; // sum of alpha e^{-beta (t - t_i)} at current t
    loop {
        let bound = lambda + excited;
        let wait = -rng.random::<f64>().ln() / bound;
        t += wait;
        if t > horizon {
            break;
        }
        excited *= (-beta * wait).exp();
        let intensity = lambda + excited;
        debug_assert!(intensity <= bound * (1.0 + 1e-12), "thinning bound violated");
        if rng.random::<f64>() * bound <= intensity {
            events.push(t);
            excited += alpha;
        }
    }
    Ok(events)
}

/// Simulate a K-variate exponential Hawkes process on `(0, horizon]`.
/// Returns one ascending time list per dimension.
pub fn simulate_multi(
    model: &HawkesModel,
    horizon: f64,
    rng: &mut impl Rng,
) -> Result<Vec<Vec<f64>>> {
    model.validate()?;
    let rho = model.branching_spectral_radius();
    if rho >= 1.0 {
        return Err(Error::NonStationary { rho });
    }
    let k = model.dims();
    let mut events: Vec<Vec<f64>> = vec![Vec::new(); k];
    // excited[kk][m]: sum of alpha_km e^{-beta_km (t - t_i^m)}
    let mut excited = vec![vec![0.0; k]; k];
    let mut t = 0.0;
    loop {
        let bound: f64 = (0..k)
            .map(|kk| model.lambda[kk] + excited[kk].iter().sum::<f64>())
            .sum();
        let wait = -rng.random::<f64>().ln() / bound;
        t += wait;
        if t > horizon {
            break;
        }
        let mut total = 0.0;
        let mut per_dim = vec![0.0; k];
        for kk in 0..k {
            for m in 0..k {
                excited[kk][m] *= (-model.beta[kk][m] * wait).exp();
            }
            per_dim[kk] = model.lambda[kk] + excited[kk].iter().sum::<f64>();
            total += per_dim[kk];
        }
        debug_assert!(total <= bound * (1.0 + 1e-12), "thinning bound violated");
        let u = rng.random::<f64>() * bound;
        if u <= total {
            // attribute the event to a dimension proportionally to intensity
            let mut acc = 0.0;
            let mut dim = k - 1;
            for (kk, &p) in per_dim.iter().enumerate() {
                acc += p;
                if u <= acc {
                    dim = kk;
                    break;
                }
            }
            events[dim].push(t);
            for kk in 0..k {
                excited[kk][dim] += model.alpha[kk][dim];
            }
        }
    }
    Ok(events)
}

/// Simulate and quantize to the integer-minute grid used by the jump
/// pipeline: event at time `t` lands in minute `ceil(t)`, duplicates within
/// one dimension collapse.
pub fn simulate_minutes(
    model: &HawkesModel,
    n_minutes: u32,
    rng: &mut impl Rng,
) -> Result<Vec<Vec<u32>>> {
    let streams = simulate_multi(model, n_minutes as f64, rng)?;
    Ok(streams
        .into_iter()
        .map(|s| {
            let mut minutes: Vec<u32> =
                s.iter().map(|&t| (t.ceil() as u32).clamp(1, n_minutes)).collect();
            minutes.dedup();
            minutes
        })
        .collect())
}
