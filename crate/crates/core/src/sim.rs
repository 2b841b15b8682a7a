//! Synthetic tick-level market data for validating the detection pipeline.
//!
//! The efficient log-price follows a jump diffusion
//!
//! ```text
//! dX = mu dt + sigma(t) dW + kappa dJ
//! d log sigma^2 = -(a + b log sigma^2) dt + s dW',   corr(W, W') = rho
//! ```
//!
//! simulated with an Euler scheme on a one-minute grid (`dt` = one minute as
//! a fraction of the day clock). Each day exposes a trading window of
//! `minutes_per_day` sampled minutes; the volatility keeps evolving on the
//! full grid between windows. The diffusive scale inside a window is
//! multiplied by a deterministic intraday pattern. Jumps arrive at
//! `jump_rate` per day, uniformly over the trading window, with size a
//! configurable multiple of the spot per-minute volatility and random sign.
//! Observed prices add i.i.d. Gaussian microstructure noise per tick, and
//! trades are thinned by drawing intertrade gaps from a configurable
//! distribution; a minute without a trade produces no tick, which is how
//! missing observations enter downstream.

use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::series::{EventSeries, SessionSpec, Tick, TickSeries};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GouParams {
    /// Constant drift coefficient of `log sigma^2`.
    pub a: f64,
    /// Mean-reversion coefficient.
    pub b: f64,
    /// Volatility of volatility.
    pub s: f64,
    /// Correlation between the price and volatility Brownian drivers.
    pub rho: f64,
}

impl Default for GouParams {
    fn default() -> Self {
        Self { a: 0.6802, b: 0.1, s: 0.25, rho: -0.62 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum JumpSizeDist {
    /// Multiplier drawn uniformly from `[lo, hi]` (times spot volatility).
    Uniform { lo: f64, hi: f64 },
    /// Fixed multiplier.
    Fixed(f64),
}

impl JumpSizeDist {
    fn sample(&self, rng: &mut impl Rng) -> f64 {
        match self {
            JumpSizeDist::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            JumpSizeDist::Fixed(m) => *m,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum IntertradeSampler {
    /// Exponential gaps with the given mean (seconds).
    Exponential { mean_s: f64 },
    /// Resample a supplied empirical gap sample (seconds) with replacement.
    Empirical { gaps_s: Vec<f64> },
}

impl IntertradeSampler {
    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        match self {
            IntertradeSampler::Exponential { mean_s } => {
                -rng.random::<f64>().ln() * mean_s
            }
            IntertradeSampler::Empirical { gaps_s } => {
                gaps_s[rng.random_range(0..gaps_s.len())]
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            IntertradeSampler::Exponential { mean_s } if !(*mean_s > 0.0) => {
                Err(Error::InvalidParameter("intertrade mean must be positive".into()))
            }
            IntertradeSampler::Empirical { gaps_s }
                if gaps_s.is_empty() || gaps_s.iter().any(|g| !(*g > 0.0)) =>
            {
                Err(Error::InvalidParameter("empirical gaps must be positive".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub days: usize,
    pub minutes_per_day: usize,
    /// Grid length of one day; `dt = 1 / day_clock_minutes`.
    pub day_clock_minutes: usize,
    pub mu: f64,
    /// Standard deviation of the log-price microstructure noise.
    pub noise_std: f64,
    /// Expected planted jumps per day (uniform over the trading window).
    pub jump_rate_per_day: f64,
    pub jump_size: JumpSizeDist,
    pub gou: GouParams,
    /// Intraday volatility pattern over the trading window; `None` uses a
    /// built-in open/close U-shape. Normalized to mean one either way.
    pub pattern: Option<Vec<f64>>,
    pub intertrade: IntertradeSampler,
    /// Initial price in currency units.
    pub initial_price: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        let day_clock = 1440;
        Self {
            days: 4_400,
            minutes_per_day: 505,
            day_clock_minutes: day_clock,
            mu: 0.0,
            noise_std: 1e-5 / day_clock as f64,
            jump_rate_per_day: 3.0,
            jump_size: JumpSizeDist::Uniform { lo: 4.5, hi: 8.0 },
            gou: GouParams::default(),
            pattern: None,
            intertrade: IntertradeSampler::Exponential { mean_s: 2.0 },
            initial_price: 10.0,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn session(&self) -> SessionSpec {
        SessionSpec {
            minutes_per_day: self.minutes_per_day,
            days: self.days,
            sampling_interval: 1,
            day_clock_minutes: self.day_clock_minutes,
        }
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.day_clock_minutes as f64
    }

    fn validate(&self) -> Result<()> {
        self.session().validate()?;
        self.intertrade.validate()?;
        if !(self.gou.rho >= -1.0 && self.gou.rho <= 1.0) {
            return Err(Error::InvalidParameter("correlation must lie in [-1,1]".into()));
        }
        if self.jump_rate_per_day < 0.0 || self.noise_std < 0.0 {
            return Err(Error::InvalidParameter("rates and scales must be non-negative".into()));
        }
        if !(self.initial_price > 0.0) {
            return Err(Error::InvalidParameter("initial price must be positive".into()));
        }
        if let JumpSizeDist::Uniform { lo, hi } = self.jump_size {
            if !(lo > 0.0 && hi >= lo) {
                return Err(Error::InvalidParameter("jump multiplier range is invalid".into()));
            }
        }
        Ok(())
    }
}

/// Built-in open/close volatility profile, normalized to mean one.
pub fn default_pattern(minutes_per_day: usize) -> Vec<f64> {
    let l = minutes_per_day as f64;
    let mut z: Vec<f64> = (0..minutes_per_day)
        .map(|m| {
            let m = m as f64;
            1.0 + 1.2 * (-m / 45.0).exp() + 0.4 * (-(l - 1.0 - m) / 90.0).exp()
        })
        .collect();
    let mean = z.iter().sum::<f64>() / l;
    for v in z.iter_mut() {
        *v /= mean;
    }
    z
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantedJump {
    /// Global trading-window minute (1-based return slot).
    pub minute: u32,
    /// Signed log-return contribution.
    pub size: f64,
    /// Size as a multiple of spot volatility.
    pub multiple: f64,
}

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub ticks: TickSeries,
    pub true_jumps: Vec<PlantedJump>,
    /// Spot per-minute diffusive volatility (pattern included) per trading
    /// window slot.
    pub true_vol: Vec<f64>,
    pub session: SessionSpec,
}

impl SimOutput {
    /// Distinct minutes carrying at least one planted jump.
    pub fn true_jump_minutes(&self) -> Vec<u32> {
        let mut m: Vec<u32> = self.true_jumps.iter().map(|j| j.minute).collect();
        m.sort_unstable();
        m.dedup();
        m
    }

    pub fn truth_series(&self) -> EventSeries {
        EventSeries {
            symbol: self.ticks.symbol.clone(),
            times: self.true_jump_minutes(),
            directions: None,
            sample_len: self.session.total_len() as u32,
        }
    }
}

/// Generate one symbol's tick history plus ground truth.
pub fn simulate_market(cfg: &SimConfig) -> Result<SimOutput> {
    cfg.validate()?;
    let mpd = cfg.minutes_per_day;
    let clock = cfg.day_clock_minutes;
    let n = cfg.days * mpd;
    let dt = cfg.dt();
    let sqrt_dt = dt.sqrt();
    let pattern = match &cfg.pattern {
        Some(p) => {
            if p.len() != mpd || p.iter().any(|z| !(*z > 0.0)) {
                return Err(Error::InvalidParameter(
                    "pattern must be positive with one entry per trading minute".into(),
                ));
            }
            let mean = p.iter().sum::<f64>() / mpd as f64;
            p.iter().map(|z| z / mean).collect()
        }
        None => default_pattern(mpd),
    };

    let mut rng_path = stream_rng(cfg.seed, 0);
    let mut rng_jump = stream_rng(cfg.seed, 1);
    let mut rng_tick = stream_rng(cfg.seed, 2);

    let gou = cfg.gou;
    let rho_c = (1.0 - gou.rho * gou.rho).sqrt();
    let mut v = -gou.a / gou.b; // stationary mean of log sigma^2
    let mut x = cfg.initial_price.ln();

    // per-day planted jumps: slot (1-based within window) -> (size, multiple)
    let mut true_jumps: Vec<PlantedJump> = Vec::new();
    let mut true_vol = vec![0.0; n];
    // log price at each window boundary 0..=mpd per day
    let mut boundary_log = vec![0.0; mpd + 1];

    let mut ticks: Vec<Tick> = Vec::with_capacity(n + n / 8);
    let normal =
        |rng: &mut rand_chacha::ChaCha12Rng| -> f64 { rng.sample(rand_distr::StandardNormal) };

    for day in 0..cfg.days {
        // jump plan for the day
        let mut planned: Vec<(usize, f64)> = Vec::new(); // (slot 1..=mpd, multiple)
        let count = poisson_draw(cfg.jump_rate_per_day, &mut rng_jump);
        for _ in 0..count {
            let slot = rng_jump.random_range(0..mpd) + 1;
            let mult = cfg.jump_size.sample(&mut rng_jump);
            planned.push((slot, mult));
        }

        boundary_log[0] = x;
        for g in 0..clock {
            let in_window = g < mpd;
            let z_x = normal(&mut rng_path);
            let z_i = normal(&mut rng_path);
            let z_v = gou.rho * z_x + rho_c * z_i;
            let sigma_unit = (v / 2.0).exp();
            let scale = if in_window { pattern[g] } else { 1.0 };
            let step_vol = sigma_unit * sqrt_dt * scale;
            let mut dx = cfg.mu * dt + step_vol * z_x;
            if in_window {
                let slot = g + 1;
                for &(js, mult) in planned.iter().filter(|(js, _)| *js == slot) {
                    let sign = if rng_jump.random::<f64>() < 0.5 { 1.0 } else { -1.0 };
                    let size = sign * mult * step_vol;
                    dx += size;
                    true_jumps.push(PlantedJump {
                        minute: (day * mpd + js) as u32,
                        size,
                        multiple: mult,
                    });
                }
                true_vol[day * mpd + g] = step_vol;
            }
            x += dx;
            v += -(gou.a + gou.b * v) * dt + gou.s * sqrt_dt * z_v;
            if in_window {
                boundary_log[g + 1] = x;
            }
        }

        // thin the window into trades: a minute is traded iff at least one
        // tick lands in it; the emitted tick carries the price at the
        // minute's boundary plus fresh microstructure noise
        let window_end_s = mpd as f64 * 60.0;
        let day_start_s = (day * clock) as f64 * 60.0;
        let mut traded = vec![false; mpd + 1];
        traded[0] = true;
        let mut t_s = 0.0;
        loop {
            t_s += cfg.intertrade.sample(&mut rng_tick);
            if t_s > window_end_s {
                break;
            }
            let minute = (t_s / 60.0).ceil() as usize;
            traded[minute.min(mpd)] = true;
        }
        for (m, &is_traded) in traded.iter().enumerate() {
            if !is_traded {
                continue;
            }
            let noise =
                if cfg.noise_std > 0.0 { cfg.noise_std * normal(&mut rng_tick) } else { 0.0 };
            ticks.push(Tick {
                time_s: day_start_s + m as f64 * 60.0,
                price: (boundary_log[m] + noise).exp(),
            });
        }
    }

    true_jumps.sort_by_key(|j| j.minute);
    Ok(SimOutput {
        ticks: TickSeries { symbol: format!("SIM{:04}", cfg.seed % 10_000), ticks },
        true_jumps,
        true_vol,
        session: cfg.session(),
    })
}

fn poisson_draw(rate: f64, rng: &mut impl Rng) -> usize {
    if rate <= 0.0 {
        return 0;
    }
    // inversion by multiplication; fine for small rates
    let limit = (-rate).exp();
    let mut prod: f64 = rng.random();
    let mut count = 0;
    while prod > limit {
        prod *= rng.random::<f64>();
        count += 1;
    }
    count
}

/// Size and power of one detector output against the planted truth.
/// A detection matches a true jump iff their minutes differ by at most
/// `match_window`; each true jump is credited once.
pub fn size_power_one(
    truth_minutes: &[u32],
    detected: &[u32],
    n_minutes: u32,
    match_window: u32,
) -> SizePowerCell {
    let matched_truth = truth_minutes
        .iter()
        .filter(|&&t| {
            let lo = t.saturating_sub(match_window);
            let hi = t + match_window;
            detected.iter().any(|&d| d >= lo && d <= hi)
        })
        .count();
    let false_pos = detected
        .iter()
        .filter(|&&d| {
            let lo = d.saturating_sub(match_window);
            let hi = d + match_window;
            !truth_minutes.iter().any(|&t| t >= lo && t <= hi)
        })
        .count();
    let non_jump_minutes = n_minutes as usize - truth_minutes.len();
    SizePowerCell {
        label: String::new(),
        size: false_pos as f64 / non_jump_minutes as f64,
        power: if truth_minutes.is_empty() {
            0.0
        } else {
            matched_truth as f64 / truth_minutes.len() as f64
        },
        false_pos,
        right_pos: matched_truth,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SizePowerCell {
    pub label: String,
    pub size: f64,
    pub power: f64,
    pub false_pos: usize,
    pub right_pos: usize,
}

/// The full size/power table: each missing-observation method, each
/// volatility estimator, their per-axis intersections and the grand
/// intersection.
pub fn size_power_table(
    truth_minutes: &[u32],
    variants: &[(crate::detect::VariantId, EventSeries)],
    n_minutes: u32,
    match_window: u32,
) -> Vec<SizePowerCell> {
    use crate::series::MoMethod;
    let mo_sets: [&[MoMethod]; 4] = [
        &[MoMethod::Mo1],
        &[MoMethod::Mo2],
        &[MoMethod::Mo3],
        &MoMethod::ALL,
    ];
    let est_sets: [&[crate::detect::VolEstimator]; 3] = [
        &[crate::detect::VolEstimator::Abs],
        &[crate::detect::VolEstimator::Bv],
        &crate::detect::VolEstimator::ALL,
    ];
    let mut cells = Vec::new();
    for est_set in est_sets {
        for mo_set in mo_sets {
            let selected: Vec<&EventSeries> = variants
                .iter()
                .filter(|(id, _)| mo_set.contains(&id.method) && est_set.contains(&id.estimator))
                .map(|(_, e)| e)
                .collect();
            let mut inter: Vec<u32> = selected
                .first()
                .map(|e| e.times.clone())
                .unwrap_or_default();
            for e in &selected[1..] {
                inter.retain(|t| e.times.binary_search(t).is_ok());
            }
            let mut cell = size_power_one(truth_minutes, &inter, n_minutes, match_window);
            let mo_label = if mo_set.len() == 3 {
                "ALL".to_string()
            } else {
                mo_set[0].label().to_string()
            };
            let est_label = if est_set.len() == 2 {
                "both".to_string()
            } else {
                est_set[0].label().to_string()
            };
            cell.label = format!("{mo_label}/{est_label}");
            cells.push(cell);
        }
    }
    cells
}
