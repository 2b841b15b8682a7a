//! Domain types shared by the whole pipeline: tick series, sampled return
//! series, event (jump) series and the session layout.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// One trade: time in seconds since the start of the sample clock, price in
/// currency units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tick {
    pub time_s: f64,
    pub price: f64,
}

/// Irregular timestamped trade prices for one symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct TickSeries {
    pub symbol: String,
    pub ticks: Vec<Tick>,
}

impl TickSeries {
    pub fn new(symbol: impl Into<String>, ticks: Vec<Tick>) -> Result<Self> {
        let series = Self { symbol: symbol.into(), ticks };
        series.validate()?;
        Ok(series)
    }

    pub fn validate(&self) -> Result<()> {
        for pair in self.ticks.windows(2) {
            if pair[1].time_s < pair[0].time_s {
                return Err(Error::InvalidParameter(
                    "tick timestamps must be non-decreasing".into(),
                ));
            }
        }
        if self.ticks.iter().any(|t| !(t.price > 0.0)) {
            return Err(Error::InvalidParameter("tick prices must be strictly positive".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.ticks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ticks.is_empty()
    }
}

/// Session layout. A day occupies `day_clock_minutes` on the tick clock and
/// exposes a trading window of `minutes_per_day` sampled returns, so the
/// total sample length is `N = minutes_per_day * days`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SessionSpec {
    pub minutes_per_day: usize,
    pub days: usize,
    /// Sampling interval in minutes.
    pub sampling_interval: usize,
    /// Minutes between consecutive day starts on the tick clock.
    pub day_clock_minutes: usize,
}

impl SessionSpec {
    pub fn new(minutes_per_day: usize, days: usize) -> Self {
        Self { minutes_per_day, days, sampling_interval: 1, day_clock_minutes: 1440 }
    }

    /// Total number of return slots.
    pub fn total_len(&self) -> usize {
        self.minutes_per_day * self.days
    }

    pub fn validate(&self) -> Result<()> {
        if self.minutes_per_day == 0 || self.days == 0 || self.sampling_interval == 0 {
            return Err(Error::InvalidParameter("session dimensions must be positive".into()));
        }
        if self.day_clock_minutes < self.minutes_per_day {
            return Err(Error::InvalidParameter(
                "day clock must be at least as long as the trading window".into(),
            ));
        }
        Ok(())
    }
}

impl Default for SessionSpec {
    fn default() -> Self {
        Self::new(505, 88)
    }
}

/// Missing-observation convention for tradeless sampling intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MoMethod {
    /// Zero-fill tradeless minutes.
    Mo1,
    /// Tradeless minutes are NA; the next available return spans the gap.
    Mo2,
    /// As MO2, with the spanning return divided by sqrt(gap length).
    Mo3,
}

impl MoMethod {
    pub const ALL: [MoMethod; 3] = [MoMethod::Mo1, MoMethod::Mo2, MoMethod::Mo3];

    pub fn label(self) -> &'static str {
        match self {
            MoMethod::Mo1 => "MO1",
            MoMethod::Mo2 => "MO2",
            MoMethod::Mo3 => "MO3",
        }
    }
}

/// Regular 1-minute log-returns with explicit NA slots. `values[i]` is the
/// return of global minute `i + 1`; NA is encoded as `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    pub symbol: String,
    pub method: MoMethod,
    pub values: Vec<Option<f64>>,
    pub session: SessionSpec,
    /// Deseasonalization factors per intraday minute; empty until
    /// `deseasonalize` has run.
    pub pattern: Vec<f64>,
}

impl ReturnSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn finite_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    /// Day and intraday slot (both 0-based) of global slot `i`.
    pub fn day_slot(&self, i: usize) -> (usize, usize) {
        (i / self.session.minutes_per_day, i % self.session.minutes_per_day)
    }
}

/// Strictly increasing integer jump minutes in `[1, N]` for one process,
/// with optional per-event directions.
#[derive(Debug, Clone, PartialEq)]
pub struct EventSeries {
    pub symbol: String,
    pub times: Vec<u32>,
    pub directions: Option<Vec<i8>>,
    /// Sample length N in minutes.
    pub sample_len: u32,
}

impl EventSeries {
    pub fn new(symbol: impl Into<String>, times: Vec<u32>, sample_len: u32) -> Result<Self> {
        let series = Self { symbol: symbol.into(), times, directions: None, sample_len };
        series.validate()?;
        Ok(series)
    }

    pub fn with_directions(mut self, directions: Vec<i8>) -> Result<Self> {
        if directions.len() != self.times.len() {
            return Err(Error::InvalidParameter("directions length mismatch".into()));
        }
        if directions.iter().any(|&d| d != 1 && d != -1) {
            return Err(Error::InvalidParameter("directions must be +1 or -1".into()));
        }
        self.directions = Some(directions);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        for pair in self.times.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::BadEventTimes);
            }
        }
        if let (Some(first), Some(last)) = (self.times.first(), self.times.last()) {
            if *first < 1 || *last > self.sample_len {
                return Err(Error::BadEventTimes);
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Event times as floats, for the point-process likelihood.
    pub fn times_f64(&self) -> Vec<f64> {
        self.times.iter().map(|&t| t as f64).collect()
    }
}
