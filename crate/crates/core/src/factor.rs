//! Factor models for systemic cojumps.
//!
//! The bivariate Poisson factor model couples two jump streams through an
//! unobserved factor of intensity `lambda_F` that transmits to stock `i`
//! with probability `p_i`. Matching expected jump and cojump counts to the
//! observed `n_1`, `n_2`, `n_12` inverts in closed form:
//!
//! ```text
//! lambda_F = n1 n2 / (n12 T),   p1 = n12 / n2,   p2 = n12 / n1
//! ```
//!
//! The N-dimensional Hawkes factor model identifies systemic minutes
//! iteratively: fit one univariate Hawkes per stock, convert the fitted
//! intensities into per-minute jump probabilities `pi_t^s = I_t^s dt`, and
//! reject cross-sectional independence at minute `t` when the upper tail
//! `P(J >= J_t^obs)` of the Poisson-binomial law with success vector `pi_t`
//! falls below the Bonferroni-corrected significance. Rejected minutes move
//! into the factor stream, every stock jumping there loses that event, and
//! the procedure repeats until nothing is rejected. Transmission
//! probabilities then balance the expected factor cojumps against the
//! realized ones:
//!
//! ```text
//! p_s * lambda_F T / (1 - alpha_F/beta_F) = n_s - n'_s
//! ```

use crate::error::{Error, Result};
use crate::hawkes::{fit_univariate, simulate_uni, FitOptions, FitReport, HawkesModel};
use crate::pbinom;
use crate::rng::stream_rng;
use crate::series::EventSeries;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Closed-form bivariate Poisson factor calibration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonFactor2 {
    /// Factor intensity per minute.
    pub lambda_f: f64,
    pub p1: f64,
    pub p2: f64,
}

pub fn fit_poisson_factor2(n1: u64, n2: u64, n12: u64, t: f64) -> Result<PoissonFactor2> {
    if n12 == 0 {
        return Err(Error::NoCoupling);
    }
    if n12 > n1.min(n2) {
        return Err(Error::InvalidParameter("cojumps exceed a marginal jump count".into()));
    }
    if !(t > 0.0) {
        return Err(Error::InvalidParameter("horizon must be positive".into()));
    }
    Ok(PoissonFactor2 {
        lambda_f: (n1 as f64) * (n2 as f64) / (n12 as f64 * t),
        p1: n12 as f64 / n2 as f64,
        p2: n12 as f64 / n1 as f64,
    })
}

impl PoissonFactor2 {
    /// One replica of the factor model: Poisson factor times on `(0, t]`,
    /// thinned independently by `p1` and `p2`.
    pub fn simulate(&self, t: f64, rng: &mut impl Rng) -> (Vec<f64>, Vec<f64>) {
        let mut s1 = Vec::new();
        let mut s2 = Vec::new();
        let mut clock = 0.0;
        loop {
            clock += -rng.random::<f64>().ln() / self.lambda_f;
            if clock > t {
                break;
            }
            let keep1 = rng.random::<f64>() < self.p1;
            let keep2 = rng.random::<f64>() < self.p2;
            if keep1 {
                s1.push(clock);
            }
            if keep2 {
                s2.push(clock);
            }
        }
        (s1, s2)
    }
}

/// Per-minute simultaneous jump counts and their histogram.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CojumpTally {
    /// `counts[t-1]` = number of stocks jumping in minute `t`.
    pub counts: Vec<u16>,
    /// `histogram[j]` = number of minutes with exactly `j` stocks jumping,
    /// for `j >= 1`; index 0 unused. Minutes count once however many stocks
    /// jump in them.
    pub histogram: Vec<u32>,
}

impl CojumpTally {
    pub fn minutes_with_at_least(&self, j: usize) -> u32 {
        self.histogram.iter().skip(j).sum()
    }
}

pub fn cojump_tally(events: &[EventSeries], n_minutes: u32) -> CojumpTally {
    let mut counts = vec![0u16; n_minutes as usize];
    for series in events {
        for &t in &series.times {
            counts[(t - 1) as usize] += 1;
        }
    }
    let max_j = events.len();
    let mut histogram = vec![0u32; max_j + 1];
    for &c in &counts {
        if c >= 1 {
            histogram[c as usize] += 1;
        }
    }
    CojumpTally { counts, histogram }
}

/// Diagnostic on cojump minutes: how often the stocks jumping together move
/// in the same direction. Reported alongside the decomposition, never
/// enforced by the model. Minutes without direction data are skipped.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct DirectionDiagnostic {
    /// Minutes where at least two stocks jump (with known directions).
    pub cojump_minutes: u32,
    /// Of those, minutes where not all directions agree.
    pub mixed_direction_minutes: u32,
}

pub fn direction_consistency(events: &[EventSeries], n_minutes: u32) -> DirectionDiagnostic {
    let mut per_minute: std::collections::HashMap<u32, (u32, u32)> =
        std::collections::HashMap::new();
    for series in events {
        let Some(directions) = &series.directions else { continue };
        for (&t, &d) in series.times.iter().zip(directions) {
            if t <= n_minutes {
                let entry = per_minute.entry(t).or_insert((0, 0));
                if d > 0 {
                    entry.0 += 1;
                } else {
                    entry.1 += 1;
                }
            }
        }
    }
    let mut diag = DirectionDiagnostic::default();
    for (up, down) in per_minute.values() {
        if up + down >= 2 {
            diag.cojump_minutes += 1;
            if *up > 0 && *down > 0 {
                diag.mixed_direction_minutes += 1;
            }
        }
    }
    diag
}

/// How the Bonferroni divisor of the per-minute test is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BonferroniScope {
    /// Divide by the sample length T (one test per minute).
    SampleLength,
    /// Divide by the number of informative tests actually performed
    /// (minutes with at least two simultaneous jumps; minutes with fewer can
    /// never reject).
    TestedMinutes,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanConfig {
    /// Probability scale: `pi = I dt`; event times are minutes, so 1.0.
    pub dt: f64,
    /// Global significance before the Bonferroni correction.
    pub significance: f64,
    pub scope: BonferroniScope,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self { dt: 1.0, significance: 0.01, scope: BonferroniScope::SampleLength }
    }
}

/// Outcome of one systemic scan pass.
#[derive(Debug, Clone)]
pub struct ScanReport {
    /// Minutes where cross-sectional independence is rejected.
    pub rejected: Vec<u32>,
    /// Number of per-minute tests that were informative (J_t >= 2).
    pub tested: usize,
    /// The per-test threshold actually applied.
    pub threshold: f64,
    /// Count of probabilities clamped at 1 (intensity * dt >= 1).
    pub clamped: usize,
}

/// Fitted intensity of one stock at every integer minute `1..=n`, using the
/// stock's own history strictly before each minute.
fn intensity_per_minute(model: &HawkesModel, events: &[u32], n: usize) -> Vec<f64> {
    let lambda = model.lambda[0];
    let alpha = model.alpha[0][0];
    let beta = model.beta[0][0];
    let decay = (-beta).exp();
    let mut out = vec![0.0; n];
    let mut state = 0.0; // sum of alpha e^{-beta (t - t_i)} at the current minute
    let mut idx = 0;
    for t in 1..=n {
        state *= decay;
        out[t - 1] = lambda + state;
        if idx < events.len() && events[idx] as usize == t {
            state += alpha;
            idx += 1;
        }
    }
    out
}

/// Test every minute for an excess of simultaneous jumps under independence.
///
/// Minutes with `J_t <= 1` are never rejected (their tail is at least
/// `P(J >= 1)`, orders of magnitude above any sane threshold), so the exact
/// Poisson-binomial tail is evaluated only where `J_t >= 2`.
pub fn systemic_scan(
    events: &[EventSeries],
    models: &[HawkesModel],
    cfg: &ScanConfig,
    n_minutes: u32,
) -> Result<ScanReport> {
    if events.len() != models.len() || events.is_empty() {
        return Err(Error::InvalidParameter("one model per stock is required".into()));
    }
    if !(cfg.significance > 0.0 && cfg.significance < 1.0) {
        return Err(Error::InvalidParameter("significance must lie in (0,1)".into()));
    }
    let n = n_minutes as usize;
    let n_stocks = events.len();

    let mut counts = vec![0u16; n];
    for series in events {
        for &t in &series.times {
            counts[(t - 1) as usize] += 1;
        }
    }
    let candidates: Vec<usize> =
        (0..n).filter(|&i| counts[i] >= 2).collect();

    let tested = candidates.len();
    let divisor = match cfg.scope {
        BonferroniScope::SampleLength => n as f64,
        BonferroniScope::TestedMinutes => tested.max(1) as f64,
    };
    let threshold = cfg.significance / divisor;

    if candidates.is_empty() {
        return Ok(ScanReport { rejected: vec![], tested, threshold, clamped: 0 });
    }

    let intensities: Vec<Vec<f64>> = events
        .par_iter()
        .zip(models.par_iter())
        .map(|(series, model)| intensity_per_minute(model, &series.times, n))
        .collect();

    let mut clamped = 0usize;
    let mut rejected = Vec::new();
    let results: Vec<(u32, bool, usize)> = candidates
        .par_iter()
        .map(|&i| {
            let mut clamps = 0;
            let pi: Vec<f64> = (0..n_stocks)
                .map(|s| {
                    let p = intensities[s][i] * cfg.dt;
                    if p >= 1.0 {
                        clamps += 1;
                        1.0 - 1e-12
                    } else {
                        p
                    }
                })
                .collect();
            let tail = pbinom::tail_ge(&pi, counts[i] as usize);
            (i as u32 + 1, tail < threshold, clamps)
        })
        .collect();
    for (minute, reject, clamps) in results {
        clamped += clamps;
        if reject {
            rejected.push(minute);
        }
    }
    rejected.sort_unstable();
    Ok(ScanReport { rejected, tested, threshold, clamped })
}

/// Full factor decomposition of a panel of jump series.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FactorDecomposition {
    pub factor_minutes: Vec<u32>,
    /// Idiosyncratic event minutes per stock (originals minus factor minutes).
    pub idiosyncratic: Vec<Vec<u32>>,
    pub factor_fit: Option<FitReport>,
    pub idio_fits: Vec<Option<FitReport>>,
    /// Transmission probabilities per stock.
    pub p: Vec<f64>,
    /// Extraction passes performed.
    pub iterations: usize,
    pub hit_max_iters: bool,
    /// Count of transmission estimates clipped into [0, 1].
    pub p_clipped: usize,
}

#[derive(Debug, Clone)]
pub struct ExtractConfig {
    pub scan: ScanConfig,
    pub max_iters: usize,
    pub fit: FitOptions,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        Self { scan: ScanConfig::default(), max_iters: 20, fit: FitOptions::default() }
    }
}

/// Fit one stock's current event set; stocks that drop below the minimum
/// event count during extraction degrade to the Poisson reduction.
fn fit_stock(times: &[u32], n_minutes: u32, fit: &FitOptions) -> Option<FitReport> {
    let t_n = n_minutes as f64;
    if times.len() >= 5 {
        let times_f: Vec<f64> = times.iter().map(|&t| t as f64).collect();
        if let Ok(report) = fit_univariate(&times_f, t_n, fit) {
            return Some(report);
        }
    }
    if times.is_empty() {
        return None;
    }
    // Poisson reduction: lambda = n / T, L = -lambda T + n ln lambda
    let n = times.len() as f64;
    let lambda = n / t_n;
    Some(FitReport {
        model: HawkesModel::univariate(lambda, 0.0, 1.0),
        se_lambda: None,
        se_alpha: None,
        se_beta: None,
        p_lambda: None,
        p_alpha: None,
        p_beta: None,
        loglik: -lambda * t_n + n * lambda.ln(),
        iterations: 0,
        converged: false,
    })
}

/// Iteratively separate systemic minutes from idiosyncratic jumps.
pub fn extract_factor(
    events: &[EventSeries],
    n_minutes: u32,
    cfg: &ExtractConfig,
) -> Result<FactorDecomposition> {
    if events.is_empty() {
        return Err(Error::EmptyInput("no jump series".into()));
    }
    for series in events {
        if series.len() < 5 {
            return Err(Error::InvalidParameter(format!(
                "stock {} has {} events; extraction needs at least 5",
                series.symbol,
                series.len()
            )));
        }
    }

    let mut current: Vec<Vec<u32>> = events.iter().map(|e| e.times.clone()).collect();
    let mut factor_minutes: Vec<u32> = Vec::new();
    let mut iterations = 0;
    let mut hit_max = false;

    loop {
        if iterations >= cfg.max_iters {
            hit_max = true;
            break;
        }
        iterations += 1;

        let fits: Vec<Option<FitReport>> = current
            .par_iter()
            .map(|times| fit_stock(times, n_minutes, &cfg.fit))
            .collect();
        let series: Vec<EventSeries> = current
            .iter()
            .enumerate()
            .map(|(s, times)| EventSeries {
                symbol: events[s].symbol.clone(),
                times: times.clone(),
                directions: None,
                sample_len: n_minutes,
            })
            .collect();
        let models: Vec<HawkesModel> = fits
            .iter()
            .map(|f| {
                f.as_ref()
                    .map(|r| r.model.clone())
                    .unwrap_or_else(|| HawkesModel::univariate(1e-12, 0.0, 1.0))
            })
            .collect();

        let scan = systemic_scan(&series, &models, &cfg.scan, n_minutes)?;
        if scan.rejected.is_empty() {
            break;
        }
        for &minute in &scan.rejected {
            factor_minutes.push(minute);
            for times in current.iter_mut() {
                if let Ok(pos) = times.binary_search(&minute) {
                    times.remove(pos);
                }
            }
        }
    }
    factor_minutes.sort_unstable();

    let factor_fit = if factor_minutes.is_empty() {
        None
    } else {
        fit_stock(&factor_minutes, n_minutes, &cfg.fit)
    };
    let idio_fits: Vec<Option<FitReport>> = current
        .par_iter()
        .map(|times| fit_stock(times, n_minutes, &cfg.fit))
        .collect();

    let mut decomp = FactorDecomposition {
        factor_minutes,
        idiosyncratic: current,
        factor_fit,
        idio_fits,
        p: vec![0.0; events.len()],
        iterations,
        hit_max_iters: hit_max,
        p_clipped: 0,
    };

    if decomp.factor_minutes.is_empty() || decomp.factor_fit.is_none() {
        // no systemic component detected: p stays all-zero
        return Ok(decomp);
    }
    let original_counts: Vec<usize> = events.iter().map(|e| e.len()).collect();
    let (p, clipped) = estimate_transmission(
        &original_counts,
        &decomp.idiosyncratic.iter().map(|v| v.len()).collect::<Vec<_>>(),
        &decomp.factor_fit.as_ref().unwrap().model,
        decomp.factor_minutes.len(),
        n_minutes as f64,
    )?;
    decomp.p = p;
    decomp.p_clipped = clipped;
    Ok(decomp)
}

/// Invert `p_s * lambda_F T / (1 - alpha_F/beta_F) = n_s - n'_s`, clipping
/// into [0, 1]. Returns the probabilities and how many were clipped.
///
/// `factor_count` is the realized number of factor events; it replaces the
/// closed-form expectation when the fitted factor model is not stationary
/// (the expectation is undefined there, while for any sane fit the two agree
/// closely).
pub fn estimate_transmission(
    original_counts: &[usize],
    idio_counts: &[usize],
    factor_model: &HawkesModel,
    factor_count: usize,
    t: f64,
) -> Result<(Vec<f64>, usize)> {
    if original_counts.len() != idio_counts.len() {
        return Err(Error::InvalidParameter("count vectors differ in length".into()));
    }
    let expected_factor_jumps = if factor_model.is_stationary() {
        factor_model.expected_count_uni(t)
    } else {
        factor_count as f64
    };
    if !(expected_factor_jumps > 0.0) {
        return Err(Error::InvalidParameter("factor model implies no jumps".into()));
    }
    let mut clipped = 0;
    let p = original_counts
        .iter()
        .zip(idio_counts)
        .map(|(&n_s, &n_idio)| {
            let raw = (n_s as f64 - n_idio as f64) / expected_factor_jumps;
            if !(0.0..=1.0).contains(&raw) {
                clipped += 1;
            }
            raw.clamp(0.0, 1.0)
        })
        .collect();
    Ok((p, clipped))
}

/// Simulate the N-stock factor model: a univariate Hawkes factor whose
/// events copy into stock `s` with probability `p[s]`, superposed with an
/// independent idiosyncratic Hawkes stream per stock. Returns the stock
/// series and the factor series, both on the integer-minute grid.
pub fn simulate_factor_model(
    factor: &HawkesModel,
    p: &[f64],
    idio: &[HawkesModel],
    n_minutes: u32,
    seed: u64,
) -> Result<(Vec<EventSeries>, EventSeries)> {
    if p.len() != idio.len() {
        return Err(Error::InvalidParameter("one transmission probability per stock".into()));
    }
    if p.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
        return Err(Error::InvalidParameter("transmission probabilities must lie in [0,1]".into()));
    }
    let horizon = n_minutes as f64;
    let mut rng = stream_rng(seed, 0);
    let factor_cont =
        simulate_uni(factor.lambda[0], factor.alpha[0][0], factor.beta[0][0], horizon, &mut rng)?;
    let mut factor_minutes: Vec<u32> =
        factor_cont.iter().map(|&t| (t.ceil() as u32).clamp(1, n_minutes)).collect();
    factor_minutes.dedup();

    let mut stocks = Vec::with_capacity(p.len());
    for (s, model) in idio.iter().enumerate() {
        let mut rng_s = stream_rng(seed, 1 + s as u64);
        let idio_cont = simulate_uni(
            model.lambda[0],
            model.alpha[0][0],
            model.beta[0][0],
            horizon,
            &mut rng_s,
        )?;
        let mut minutes: Vec<u32> = idio_cont
            .iter()
            .map(|&t| (t.ceil() as u32).clamp(1, n_minutes))
            .collect();
        for &fm in &factor_minutes {
            if rng_s.random::<f64>() < p[s] {
                minutes.push(fm);
            }
        }
        minutes.sort_unstable();
        minutes.dedup();
        stocks.push(EventSeries {
            symbol: format!("S{s:02}"),
            times: minutes,
            directions: None,
            sample_len: n_minutes,
        });
    }
    let factor_series = EventSeries {
        symbol: "FACTOR".into(),
        times: factor_minutes,
        directions: None,
        sample_len: n_minutes,
    };
    Ok((stocks, factor_series))
}

/// Bundled 20-stock calibration (factor model, transmission vector and
/// idiosyncratic models) used by the simulation demo and the validation
/// suite. Rates are per minute over a 44440-minute sample.
pub fn reference_calibration() -> (HawkesModel, Vec<f64>, Vec<HawkesModel>) {
    let factor = HawkesModel::univariate(2.0e-3, 4.9e-2, 3.3e-1);
    let p = vec![
        0.31, 0.12, 0.10, 0.24, 0.48, 0.08, 0.17, 0.31, 0.39, 0.37, 0.18, 0.31, 0.11, 0.14,
        0.16, 0.15, 0.21, 0.37, 0.17, 0.22,
    ];
    let rows: [(f64, f64, f64); 20] = [
        (1.4e-3, 2.6e-2, 2.2e-1),
        (1.1e-3, 1.1e-2, 2.3e-1),
        (2.2e-3, 3.7e-2, 2.6e-1),
        (1.2e-3, 0.9e-2, 0.3e-1),
        (1.6e-3, 0.6e-2, 1.0e-1),
        (1.0e-3, 0.6e-2, 0.6e-1),
        (2.9e-3, 6.2e-2, 3.0e-1),
        (1.7e-3, 2.8e-2, 1.7e-1),
        (2.6e-3, 2.4e-2, 1.2e-1),
        (2.2e-3, 1.3e-2, 0.9e-1),
        (1.0e-3, 5.1e-2, 3.9e-1),
        (1.8e-3, 0.7e-2, 0.4e-1),
        (1.6e-3, 0.8e-2, 0.7e-1),
        (0.9e-3, 0.7e-2, 0.2e-1),
        (1.7e-3, 1.8e-2, 1.5e-1),
        (1.8e-3, 2.4e-2, 1.0e-1),
        (1.4e-3, 3.6e-2, 1.9e-1),
        (1.4e-3, 1.0e-2, 0.5e-1),
        (0.8e-3, 1.0e-2, 0.7e-1),
        (1.0e-3, 3.2e-2, 1.2e-1),
    ];
    let idio = rows
        .iter()
        .map(|&(l, a, b)| HawkesModel::univariate(l, a, b))
        .collect();
    (factor, p, idio)
}
