//! Jump identification: jump-robust EWMA volatility estimators and the
//! six-variant threshold test.
//!
//! Local volatility comes from exponentially weighted versions of the
//! realized absolute variation and the realized bipower variation,
//!
//! ```text
//! abs:  sigma_t = mu1^-1 * alpha * |r_t'| + (1 - alpha) * sigma_{t-1}
//! bv:   sigma_t^2 = mu1^-2 * alpha * |r_t''| * |r_t'| + (1 - alpha) * sigma_{t-1}^2
//! ```
//!
//! where `t'' < t' <= t-1` are the most recent returns that were finite and
//! not themselves flagged as jumps, and `mu1 = sqrt(2/pi)`. The estimator
//! state advances only when such an admissible return arrives; flagged or NA
//! minutes leave it untouched, which makes the estimators exactly oblivious
//! to isolated jumps. A minute is a jump when `|r_t| / sigma_t > theta` with
//! `sigma_t` built from information up to `t-1`.
//!
//! A detection run produces one jump set per (missing-observation method,
//! estimator) pair; the final series is the intersection of all six.

use crate::error::{Error, Result};
use crate::series::{EventSeries, MoMethod, ReturnSeries};

pub const MU1: f64 = 0.797_884_560_802_865_4; // sqrt(2/pi)

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VolEstimator {
    Abs,
    Bv,
}

impl VolEstimator {
    pub const ALL: [VolEstimator; 2] = [VolEstimator::Abs, VolEstimator::Bv];

    pub fn label(self) -> &'static str {
        match self {
            VolEstimator::Abs => "abs",
            VolEstimator::Bv => "bv",
        }
    }
}

/// Per-minute local volatility. `values[t]` is the estimate available when
/// testing slot `t` (state after consuming admissible returns before `t`);
/// `None` during warm-up.
#[derive(Debug, Clone)]
pub struct VolatilitySeries {
    pub estimator: VolEstimator,
    pub alpha: f64,
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionConfig {
    /// Detection threshold.
    pub theta: f64,
    /// EWMA memory M; alpha = 2 / (M + 1).
    pub ewma_m: usize,
    /// Number of finite returns that seed the estimator with a plain EWMA;
    /// no detection is performed there.
    pub warmup: usize,
}

impl DetectionConfig {
    pub fn alpha(&self) -> f64 {
        2.0 / (self.ewma_m as f64 + 1.0)
    }
}

impl Default for DetectionConfig {
    fn default() -> Self {
        Self { theta: 4.0, ewma_m: 60, warmup: 60 }
    }
}

/// Shared EWMA walk. `flag(t, sigma)` decides whether slot `t` counts as a
/// jump (and is therefore skipped); the online detector passes the threshold
/// test, the fixed-flag variants pass a lookup.
fn ewma_walk(
    returns: &ReturnSeries,
    estimator: VolEstimator,
    alpha: f64,
    warmup: usize,
    mut flag: impl FnMut(usize, f64) -> bool,
) -> Result<(VolatilitySeries, Vec<u32>, Vec<i8>)> {
    if !(0.0..=1.0).contains(&alpha) || alpha <= 0.0 {
        return Err(Error::InvalidParameter("EWMA weight must lie in (0, 1]".into()));
    }
    if warmup < 2 {
        return Err(Error::InvalidParameter("warm-up needs at least 2 finite returns".into()));
    }
    if returns.finite_count() == 0 {
        return Err(Error::EmptyInput("all-NA return series".into()));
    }

    let n = returns.len();
    let mut values = vec![None; n];
    let mut jumps = Vec::new();
    let mut directions = Vec::new();

    let mut seen_finite = 0usize;
    let mut state: f64 = 0.0; // sigma for abs, sigma^2 for bv
    let mut prev_abs: f64 = 0.0; // last admissible |r| (bv product partner)

    for (t, v) in returns.values.iter().enumerate() {
        let warm = seen_finite >= warmup;
        if warm {
            if !(state > 0.0) {
                return Err(Error::InvalidParameter(
                    "zero volatility after warm-up; series is degenerate".into(),
                ));
            }
            let sigma = match estimator {
                VolEstimator::Abs => state,
                VolEstimator::Bv => state.sqrt(),
            };
            values[t] = Some(sigma);
            let Some(r) = *v else { continue };
            seen_finite += 1;
            if flag(t, sigma) {
                jumps.push(t as u32 + 1);
                directions.push(if r >= 0.0 { 1 } else { -1 });
                continue; // jumps never enter the estimator
            }
            let a = r.abs();
            match estimator {
                VolEstimator::Abs => state = (1.0 - alpha) * state + alpha * a / MU1,
                VolEstimator::Bv => {
                    state = (1.0 - alpha) * state + alpha * a * prev_abs / (MU1 * MU1);
                    prev_abs = a;
                }
            }
        } else {
            // warm-up: plain (non-robust) EWMA over the first finite returns
            let Some(r) = *v else { continue };
            let a = r.abs();
            seen_finite += 1;
            match estimator {
                VolEstimator::Abs => {
                    state = if seen_finite == 1 { a / MU1 } else { (1.0 - alpha) * state + alpha * a / MU1 };
                }
                VolEstimator::Bv => {
                    if seen_finite == 2 {
                        state = a * prev_abs / (MU1 * MU1);
                    } else if seen_finite > 2 {
                        state = (1.0 - alpha) * state + alpha * a * prev_abs / (MU1 * MU1);
                    }
                    prev_abs = a;
                }
            }
        }
    }

    Ok((VolatilitySeries { estimator, alpha, values }, jumps, directions))
}

/// Robust EWMA of absolute returns with externally supplied jump flags
/// (`jump_flags[t]` marks slot `t` as skipped).
pub fn ewma_abs_vol(
    returns: &ReturnSeries,
    jump_flags: &[bool],
    alpha: f64,
    warmup: usize,
) -> Result<VolatilitySeries> {
    assert_eq!(jump_flags.len(), returns.len());
    let (vol, _, _) =
        ewma_walk(returns, VolEstimator::Abs, alpha, warmup, |t, _| jump_flags[t])?;
    Ok(vol)
}

/// Robust EWMA bipower estimator with externally supplied jump flags.
pub fn ewma_bv_vol(
    returns: &ReturnSeries,
    jump_flags: &[bool],
    alpha: f64,
    warmup: usize,
) -> Result<VolatilitySeries> {
    assert_eq!(jump_flags.len(), returns.len());
    let (vol, _, _) = ewma_walk(returns, VolEstimator::Bv, alpha, warmup, |t, _| jump_flags[t])?;
    Ok(vol)
}

/// Threshold test against a precomputed volatility series: slot `t` is a
/// jump iff `|r_t| / sigma_t > theta` (strict). NA slots never jump.
pub fn detect_jumps(returns: &ReturnSeries, vol: &VolatilitySeries, theta: f64) -> Result<EventSeries> {
    if vol.values.len() != returns.len() {
        return Err(Error::InvalidParameter("volatility series length mismatch".into()));
    }
    let mut times = Vec::new();
    let mut directions = Vec::new();
    for (t, (v, s)) in returns.values.iter().zip(&vol.values).enumerate() {
        if let (Some(r), Some(sigma)) = (v, s) {
            if r.abs() / sigma > theta {
                times.push(t as u32 + 1);
                directions.push(if *r >= 0.0 { 1 } else { -1 });
            }
        }
    }
    EventSeries::new(returns.symbol.clone(), times, returns.len() as u32)?
        .with_directions(directions)
}

/// One self-consistent pass: the flag decision at `t` uses the estimator
/// state built from flags at earlier minutes, exactly as the recursions are
/// defined. Returns the jump series and the volatility path.
pub fn detect_online(
    returns: &ReturnSeries,
    estimator: VolEstimator,
    cfg: &DetectionConfig,
) -> Result<(EventSeries, VolatilitySeries)> {
    let theta = cfg.theta;
    let (vol, times, directions) =
        ewma_walk(returns, estimator, cfg.alpha(), cfg.warmup, |t, sigma| {
            returns.values[t].map(|r| r.abs() / sigma > theta).unwrap_or(false)
        })?;
    let events = EventSeries::new(returns.symbol.clone(), times, returns.len() as u32)?
        .with_directions(directions)?;
    Ok((events, vol))
}

/// Intersection of jump series: minutes present in every input. Directions
/// must agree wherever two inputs both carry them.
pub fn intersect_jumps(series: &[EventSeries]) -> Result<EventSeries> {
    let first = series
        .first()
        .ok_or_else(|| Error::EmptyInput("no jump series to intersect".into()))?;
    for s in series {
        if s.sample_len != first.sample_len {
            return Err(Error::InvalidParameter("jump series cover different sample lengths".into()));
        }
        if s.symbol != first.symbol {
            return Err(Error::InvalidParameter("jump series belong to different symbols".into()));
        }
    }

    let mut times = Vec::new();
    let mut directions = Vec::new();
    'outer: for (i, &t) in first.times.iter().enumerate() {
        let mut dir = first.directions.as_ref().map(|d| d[i]);
        for other in &series[1..] {
            match other.times.binary_search(&t) {
                Ok(j) => {
                    if let Some(d2) = other.directions.as_ref().map(|d| d[j]) {
                        match dir {
                            Some(d1) if d1 != d2 => {
                                return Err(Error::DirectionMismatch { minute: t })
                            }
                            None => dir = Some(d2),
                            _ => {}
                        }
                    }
                }
                Err(_) => continue 'outer,
            }
        }
        times.push(t);
        directions.push(dir.unwrap_or(1));
    }
    EventSeries::new(first.symbol.clone(), times, first.sample_len)?.with_directions(directions)
}

/// Identifier of one of the six detection variants and its bit in the
/// `method_mask` field (MO1/abs = bit 0, MO1/bv = bit 1, ..., MO3/bv = bit 5).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VariantId {
    pub method: MoMethod,
    pub estimator: VolEstimator,
}

impl VariantId {
    pub const ALL: [VariantId; 6] = [
        VariantId { method: MoMethod::Mo1, estimator: VolEstimator::Abs },
        VariantId { method: MoMethod::Mo1, estimator: VolEstimator::Bv },
        VariantId { method: MoMethod::Mo2, estimator: VolEstimator::Abs },
        VariantId { method: MoMethod::Mo2, estimator: VolEstimator::Bv },
        VariantId { method: MoMethod::Mo3, estimator: VolEstimator::Abs },
        VariantId { method: MoMethod::Mo3, estimator: VolEstimator::Bv },
    ];

    pub fn bit(self) -> u8 {
        let m = match self.method {
            MoMethod::Mo1 => 0,
            MoMethod::Mo2 => 1,
            MoMethod::Mo3 => 2,
        };
        let e = match self.estimator {
            VolEstimator::Abs => 0,
            VolEstimator::Bv => 1,
        };
        m * 2 + e
    }

    pub fn label(self) -> String {
        format!("{}/{}", self.method.label(), self.estimator.label())
    }
}

/// Output of a full six-variant run on one symbol.
#[derive(Debug, Clone)]
pub struct DetectionOutcome {
    pub variants: Vec<(VariantId, EventSeries)>,
    pub intersection: EventSeries,
    /// Union of all variant detections: (minute, direction, fired mask).
    pub union_mask: Vec<(u32, i8, u8)>,
}

/// Run a non-empty selection of variants over the three deseasonalized
/// return series and intersect them.
pub fn run_variants(
    mo1: &ReturnSeries,
    mo2: &ReturnSeries,
    mo3: &ReturnSeries,
    cfg: &DetectionConfig,
    selection: &[VariantId],
) -> Result<DetectionOutcome> {
    if selection.is_empty() {
        return Err(Error::InvalidParameter("variant selection must be non-empty".into()));
    }
    let by_method = |m: MoMethod| match m {
        MoMethod::Mo1 => mo1,
        MoMethod::Mo2 => mo2,
        MoMethod::Mo3 => mo3,
    };
    let mut variants = Vec::with_capacity(selection.len());
    for &id in selection {
        let (events, _) = detect_online(by_method(id.method), id.estimator, cfg)?;
        variants.push((id, events));
    }
    let intersection = intersect_jumps(&variants.iter().map(|(_, e)| e.clone()).collect::<Vec<_>>())?;

    let mut union: std::collections::BTreeMap<u32, (i8, u8)> = std::collections::BTreeMap::new();
    for (id, events) in &variants {
        for (i, &t) in events.times.iter().enumerate() {
            let dir = events.directions.as_ref().map(|d| d[i]).unwrap_or(1);
            let entry = union.entry(t).or_insert((dir, 0));
            if entry.0 != dir {
                return Err(Error::DirectionMismatch { minute: t });
            }
            entry.1 |= 1 << id.bit();
        }
    }
    let union_mask = union.into_iter().map(|(t, (d, m))| (t, d, m)).collect();

    Ok(DetectionOutcome { variants, intersection, union_mask })
}

/// All six variants: the default detection protocol.
pub fn run_six_variants(
    mo1: &ReturnSeries,
    mo2: &ReturnSeries,
    mo3: &ReturnSeries,
    cfg: &DetectionConfig,
) -> Result<DetectionOutcome> {
    run_variants(mo1, mo2, mo3, cfg, &VariantId::ALL)
}
