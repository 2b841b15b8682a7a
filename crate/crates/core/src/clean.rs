//! Tick cleaning and return construction: outlier removal, volatility-auction
//! detection, the three missing-observation conventions and deseasonalization.
//!
//! The outlier filter removes a price `p_i` when
//!
//! ```text
//! |p_i - mean_i(k)| >= c * s_i(k) + gamma
//! ```
//!
//! where the mean and sample standard deviation are delta-trimmed over the
//! closest `k` observations around `i` (excluding `i` itself) and `gamma`
//! guards against zero variance from k equal prices. Passes repeat until no
//! tick is removed, so the operation is idempotent.

use crate::error::{Error, Result};
use crate::series::{MoMethod, ReturnSeries, SessionSpec, Tick, TickSeries};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CleanConfig {
    /// Neighborhood size.
    pub k: usize,
    /// Trim fraction.
    pub delta: f64,
    /// Standard-deviation multiplier.
    pub c: f64,
    /// Granularity floor.
    pub gamma: f64,
}

impl Default for CleanConfig {
    fn default() -> Self {
        Self { k: 60, delta: 0.10, c: 3.0, gamma: 0.05 }
    }
}

/// A closed time interval `[start_s, end_s]` between two consecutive ticks,
/// flagged as a volatility auction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuctionInterval {
    pub start_s: f64,
    pub end_s: f64,
}

/// Trimmed mean and sample standard deviation of `values`, dropping the
/// `ceil(delta*k/2)` lowest and highest entries.
fn trimmed_stats(values: &mut [f64], delta: f64) -> (f64, f64) {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = values.len();
    let drop = ((delta * k as f64) / 2.0).ceil() as usize;
    let core = &values[drop..k - drop];
    let n = core.len() as f64;
    let mean = core.iter().sum::<f64>() / n;
    let var = if core.len() < 2 {
        0.0
    } else {
        core.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
    };
    (mean, var.sqrt())
}

/// Remove anomalous ticks. Returns the cleaned series and the removed ticks.
pub fn remove_outliers(ticks: &TickSeries, cfg: &CleanConfig) -> Result<(TickSeries, Vec<Tick>)> {
    if cfg.k < 3 {
        return Err(Error::InvalidParameter("cleaning needs k >= 3".into()));
    }
    if !(0.0..0.5).contains(&cfg.delta) {
        return Err(Error::InvalidParameter("trim fraction must lie in [0, 0.5)".into()));
    }
    if cfg.c <= 0.0 || cfg.gamma < 0.0 {
        return Err(Error::InvalidParameter("need c > 0 and gamma >= 0".into()));
    }
    if ticks.len() < cfg.k + 1 {
        return Err(Error::InsufficientNeighborhood { len: ticks.len(), need: cfg.k + 1 });
    }

    let k = cfg.k;
    let mut alive: Vec<Tick> = ticks.ticks.clone();
    let mut removed = Vec::new();
    // First pass tests everything; later passes only re-test ticks whose
    // neighborhood could have changed.
    let mut dirty: Option<Vec<bool>> = None;

    loop {
        let n = alive.len();
        if n < k + 1 {
            break;
        }
        let mut drop_idx = Vec::new();
        let mut window = Vec::with_capacity(k);
        for i in 0..n {
            if let Some(d) = &dirty {
                if !d[i] {
                    continue;
                }
            }
            // window of k+1 consecutive ticks containing i; neighbors = window \ {i}
            let start = i.saturating_sub(k / 2).min(n - k - 1);
            window.clear();
            for (j, tick) in alive.iter().enumerate().skip(start).take(k + 1) {
                if j != i {
                    window.push(tick.price);
                }
            }
            let (mean, sd) = trimmed_stats(&mut window, cfg.delta);
            if (alive[i].price - mean).abs() >= cfg.c * sd + cfg.gamma {
                drop_idx.push(i);
            }
        }
        if drop_idx.is_empty() {
            break;
        }
        let mut next_dirty = vec![false; n - drop_idx.len()];
        let mut out = Vec::with_capacity(n - drop_idx.len());
        let mut di = 0;
        for (i, tick) in alive.iter().enumerate() {
            if di < drop_idx.len() && drop_idx[di] == i {
                removed.push(*tick);
                di += 1;
            } else {
                out.push(*tick);
            }
        }
        // mark survivors within k+1 positions of any removal as dirty
        for &d in &drop_idx {
            let pos = d - drop_idx.partition_point(|&x| x < d); // index in `out` space
            let lo = pos.saturating_sub(k + 1);
            let hi = (pos + k + 1).min(next_dirty.len());
            for flag in next_dirty[lo..hi].iter_mut() {
                *flag = true;
            }
        }
        alive = out;
        dirty = Some(next_dirty);
    }

    Ok((TickSeries { symbol: ticks.symbol.clone(), ticks: alive }, removed))
}

/// Flag every maximal intertrade gap of at least `threshold_minutes` as a
/// volatility-auction interval.
pub fn detect_auctions(ticks: &TickSeries, threshold_minutes: f64) -> Result<Vec<AuctionInterval>> {
    if threshold_minutes <= 0.0 {
        return Err(Error::InvalidParameter("auction threshold must be positive".into()));
    }
    let thr = threshold_minutes * 60.0;
    Ok(ticks
        .ticks
        .windows(2)
        .filter(|w| w[1].time_s - w[0].time_s >= thr)
        .map(|w| AuctionInterval { start_s: w[0].time_s, end_s: w[1].time_s })
        .collect())
}

/// Last-price sampling of one trading day.
/// `boundary[m]` holds, for sampling instant `m` (0..=mpd), the last tick at
/// or before it and whether a fresh trade occurred in `(m-1, m]`.
struct DaySamples {
    price: Vec<Option<f64>>,
    tick_time: Vec<f64>,
    fresh: Vec<bool>,
}

fn sample_day(ticks: &[Tick], day_start_s: f64, mpd: usize, interval_s: f64) -> DaySamples {
    let mut price = vec![None; mpd + 1];
    let mut tick_time = vec![0.0; mpd + 1];
    let mut fresh = vec![false; mpd + 1];
    let mut j = 0;
    let mut last: Option<(f64, f64)> = None;
    for m in 0..=mpd {
        let bound = day_start_s + m as f64 * interval_s;
        let window_start = bound - if m == 0 { 0.0 } else { interval_s };
        while j < ticks.len() && ticks[j].time_s <= bound {
            last = Some((ticks[j].price, ticks[j].time_s));
            fresh[m] = fresh[m]
                || ticks[j].time_s > window_start
                || (m == 0 && ticks[j].time_s == bound);
            j += 1;
        }
        if let Some((p, t)) = last {
            price[m] = Some(p);
            tick_time[m] = t;
        }
    }
    DaySamples { price, tick_time, fresh }
}

/// Build the raw (not yet deseasonalized) return series for one
/// missing-observation convention.
///
/// Sampling instants sit at integer multiples of the sampling interval inside
/// each day's trading window. A slot is NA when its sampling instant falls
/// strictly inside an auction, when the day has produced no anchor price yet,
/// or (MO2/MO3) when the minute is tradeless. Returns never span an auction:
/// the anchor resets to the first traded instant after it.
pub fn build_returns(
    ticks: &TickSeries,
    session: &SessionSpec,
    method: MoMethod,
    auctions: &[AuctionInterval],
) -> Result<ReturnSeries> {
    session.validate()?;
    ticks.validate()?;
    let mpd = session.minutes_per_day;
    let n = session.total_len();
    let interval_s = session.sampling_interval as f64 * 60.0;
    let day_clock_s = session.day_clock_minutes as f64 * 60.0;
    let mut values: Vec<Option<f64>> = vec![None; n];

    let in_auction =
        |t: f64| auctions.iter().any(|a| a.start_s < t && t < a.end_s);
    let spans_auction = |from: f64, to: f64| {
        auctions.iter().any(|a| a.start_s >= from && a.end_s <= to && a.end_s > a.start_s)
    };

    let mut tick_lo = 0;
    for day in 0..session.days {
        let day_start = day as f64 * day_clock_s;
        let day_end = day_start + mpd as f64 * interval_s;
        let mut tick_hi = tick_lo;
        while tick_hi < ticks.ticks.len() && ticks.ticks[tick_hi].time_s <= day_end {
            tick_hi += 1;
        }
        let day_ticks = &ticks.ticks[tick_lo..tick_hi];
        tick_lo = tick_hi;

        let samples = sample_day(day_ticks, day_start, mpd, interval_s);
        // anchor: (price, tick time, boundary index)
        let mut anchor: Option<(f64, f64, usize)> = None;
        if samples.fresh[0] {
            anchor = Some((samples.price[0].unwrap(), samples.tick_time[0], 0));
        }
        for m in 1..=mpd {
            let slot = day * mpd + m - 1;
            let bound = day_start + m as f64 * interval_s;
            if in_auction(bound) {
                continue; // NA in every method
            }
            if samples.fresh[m] {
                let p = samples.price[m].unwrap();
                let t = samples.tick_time[m];
                match anchor {
                    None => {} // no intraday anchor yet -> NA
                    Some((ap, at, ab)) => {
                        if spans_auction(at, t) {
                            // severed by an auction -> NA, restart from here
                        } else {
                            let gap = (m - ab) as f64;
                            let mut r = (p / ap).ln();
                            if method == MoMethod::Mo3 && gap > 1.0 {
                                r /= gap.sqrt();
                            }
                            values[slot] = Some(r);
                        }
                    }
                }
                anchor = Some((p, t, m));
            } else if method == MoMethod::Mo1 && anchor.is_some() {
                values[slot] = Some(0.0);
            }
        }
    }

    Ok(ReturnSeries {
        symbol: ticks.symbol.clone(),
        method,
        values,
        session: *session,
        pattern: Vec::new(),
    })
}

/// Indices whose absolute return exceeds `bound` strictly; candidates for
/// unadjusted splits or merges. The pipeline aborts the symbol when this is
/// non-empty.
pub fn check_splits(returns: &ReturnSeries, bound: f64) -> Vec<usize> {
    returns
        .values
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.filter(|r| r.abs() > bound).map(|_| i))
        .collect()
}

/// Remove the intraday volatility pattern.
///
/// The factor for intraday minute `t` is the average over days of
/// `|r_{d,t}| / s_d`, where `s_d` is the sample standard deviation of the
/// day's absolute returns. NA slots are excluded from the average; days
/// without a usable `s_d` contribute nothing. Output returns are `r / zeta`.
pub fn deseasonalize(raw: &ReturnSeries, session: &SessionSpec) -> Result<ReturnSeries> {
    if session.days < 2 {
        return Err(Error::InvalidParameter("deseasonalization needs at least 2 days".into()));
    }
    let mpd = session.minutes_per_day;

    // per-day std of absolute returns
    let mut day_scale = vec![None; session.days];
    for (day, scale) in day_scale.iter_mut().enumerate() {
        let abs: Vec<f64> = raw.values[day * mpd..(day + 1) * mpd]
            .iter()
            .flatten()
            .map(|r| r.abs())
            .collect();
        if abs.len() >= 2 {
            let s = crate::stats::std_dev(&abs);
            if s > 0.0 {
                *scale = Some(s);
            }
        }
    }

    let mut pattern = vec![0.0; mpd];
    for (t, zeta) in pattern.iter_mut().enumerate() {
        let mut sum = 0.0;
        let mut count = 0;
        for (day, scale) in day_scale.iter().enumerate() {
            if let (Some(s), Some(r)) = (scale, raw.values[day * mpd + t]) {
                sum += r.abs() / s;
                count += 1;
            }
        }
        if count == 0 || sum == 0.0 {
            return Err(Error::UndefinedPatternSlot { minute: t });
        }
        *zeta = sum / count as f64;
    }

    let values = raw
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| v.map(|r| r / pattern[i % mpd]))
        .collect();

    Ok(ReturnSeries {
        symbol: raw.symbol.clone(),
        method: raw.method,
        values,
        session: *session,
        pattern,
    })
}
