//! Exponential-kernel Hawkes processes: simulation, likelihood, calibration.
//!
//! The K-variate intensity with an order-one exponential kernel is
//!
//! ```text
//! I_k(t) = lambda_k + sum_m sum_{t_i^m < t} alpha_km * exp(-beta_km (t - t_i^m))
//! ```
//!
//! Stationarity holds when the spectral radius of the branching matrix
//! `Gamma_km = alpha_km / beta_km` is below one (univariate: alpha/beta < 1),
//! in which case a univariate process produces `lambda T / (1 - alpha/beta)`
//! events on a horizon `T` in expectation.

mod fit;
mod likelihood;
mod simulate;

pub use fit::{fit_multivariate, fit_univariate, FitOptions};
pub use likelihood::{
    compensator_uni, grad_loglik_uni, intensity, loglik_multi, loglik_uni, LogLikConvention,
};
pub use simulate::{simulate_minutes, simulate_multi, simulate_uni};

use crate::error::{Error, Result};
use crate::linalg::spectral_radius;
use serde::{Deserialize, Serialize};

/// Parameters of a K-variate Hawkes process. `alpha[k][m]` and `beta[k][m]`
/// describe the excitation of process `k` by events of process `m`; rates are
/// per minute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HawkesModel {
    pub lambda: Vec<f64>,
    pub alpha: Vec<Vec<f64>>,
    pub beta: Vec<Vec<f64>>,
}

impl HawkesModel {
    pub fn univariate(lambda: f64, alpha: f64, beta: f64) -> Self {
        Self { lambda: vec![lambda], alpha: vec![vec![alpha]], beta: vec![vec![beta]] }
    }

    pub fn dims(&self) -> usize {
        self.lambda.len()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.dims();
        if k == 0 {
            return Err(Error::InvalidParameter("empty Hawkes model".into()));
        }
        if self.alpha.len() != k
            || self.beta.len() != k
            || self.alpha.iter().any(|r| r.len() != k)
            || self.beta.iter().any(|r| r.len() != k)
        {
            return Err(Error::InvalidParameter("Hawkes parameter shapes disagree".into()));
        }
        if self.lambda.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::InvalidParameter("base intensities must be positive".into()));
        }
        // alpha = 0 is allowed: the Poisson reduction
        if self.alpha.iter().flatten().any(|&x| x < 0.0 || !x.is_finite()) {
            return Err(Error::InvalidParameter("excitation scales must be non-negative".into()));
        }
        if self.beta.iter().flatten().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::InvalidParameter("decay rates must be positive".into()));
        }
        Ok(())
    }

    /// Branching matrix `Gamma_km = alpha_km / beta_km`.
    pub fn branching_matrix(&self) -> Vec<Vec<f64>> {
        self.alpha
            .iter()
            .zip(&self.beta)
            .map(|(ar, br)| ar.iter().zip(br).map(|(a, b)| a / b).collect())
            .collect()
    }

    pub fn branching_spectral_radius(&self) -> f64 {
        spectral_radius(&self.branching_matrix())
    }

    pub fn is_stationary(&self) -> bool {
        self.branching_spectral_radius() < 1.0
    }

    /// Expected event count over a horizon of `t` minutes (univariate,
    /// stationary case): `lambda t / (1 - alpha/beta)`.
    pub fn expected_count_uni(&self, t: f64) -> f64 {
        assert_eq!(self.dims(), 1, "closed-form count is univariate");
        self.lambda[0] * t / (1.0 - self.alpha[0][0] / self.beta[0][0])
    }

    /// The model scaled into the stationary region when necessary: if the
    /// branching spectral radius reaches `cap`, all excitation scales shrink
    /// proportionally until it equals `cap`. Unconstrained maximum-likelihood
    /// estimates occasionally land outside the stationary region; simulation
    /// (for instance a Monte-Carlo null band) needs the projected model.
    pub fn capped_at_branching(&self, cap: f64) -> HawkesModel {
        assert!(cap > 0.0 && cap < 1.0);
        let rho = self.branching_spectral_radius();
        if rho < cap {
            return self.clone();
        }
        let shrink = cap / rho;
        let mut out = self.clone();
        for row in out.alpha.iter_mut() {
            for a in row.iter_mut() {
                *a *= shrink;
            }
        }
        out
    }
}

/// Result of a maximum-likelihood calibration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitReport {
    pub model: HawkesModel,
    /// Standard errors in the same shape as the parameters; `None` when the
    /// observed information matrix was not positive definite.
    pub se_lambda: Option<Vec<f64>>,
    pub se_alpha: Option<Vec<Vec<f64>>>,
    pub se_beta: Option<Vec<Vec<f64>>>,
    pub p_lambda: Option<Vec<f64>>,
    pub p_alpha: Option<Vec<Vec<f64>>>,
    pub p_beta: Option<Vec<Vec<f64>>>,
    pub loglik: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl FitReport {
    /// Significance code for a p-value: `***` below 0.1%, `**` below 1%,
    /// `*` below 5%, blank otherwise.
    pub fn significance_code(p: f64) -> &'static str {
        if p < 0.001 {
            "***"
        } else if p < 0.01 {
            "**"
        } else if p < 0.05 {
            "*"
        } else {
            ""
        }
    }
}
