//! Multi-scale MJ/CJ window statistics with analytic Poisson bands and
//! Monte-Carlo bands for arbitrary null models.
//!
//! The sample of length `N` minutes is cut into `floor(N/w)` disjoint
//! left-aligned windows (the trailing remainder is discarded). The MJ
//! statistic is the fraction of windows holding at least two events of one
//! process; the CJ statistic is the fraction where two processes both have at
//! least one event. Confidence bands are evaluated per window length and
//! Bonferroni-corrected across the whole w-grid: a band at level `l` uses the
//! per-w two-sided level `(1 - l) / |grid|`.
//!
//! Under a Poisson null the exact moments are
//!
//! ```text
//! MJ: mean = 1 - e^{-lw} (1 + lw),          var = (mean - mean^2) / floor(N/w)
//! CJ: mean = (1 - e^{-l1 w})(1 - e^{-l2 w}), var = (mean - mean^2) / floor(N/w)
//! ```
//!
//! with normal-approximation bands per the central limit theorem.

use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::series::EventSeries;
use crate::stats::{normal_quantile, quantile_sorted};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const DEFAULT_LEVELS: [f64; 2] = [0.95, 0.99];

fn check_window(w: u32, n: u32) -> Result<usize> {
    if w == 0 || w > n {
        return Err(Error::InvalidParameter(format!("window {w} outside [1, {n}]")));
    }
    Ok((n / w) as usize)
}

/// Window `i` covers minutes `(i*w, (i+1)*w]`; continuous times use the same
/// half-open convention. Events are sorted, so window indices come out
/// sorted too and the statistics sweep them without materializing counts.
fn window_index_int(t: u32, w: u32) -> usize {
    ((t - 1) / w) as usize
}

fn window_index_cont(t: f64, w: f64) -> usize {
    (t / w).ceil() as usize - 1
}

/// Number of windows holding at least two events, from sorted window indices.
fn count_multi(indices: impl Iterator<Item = usize>, n_windows: usize) -> usize {
    let mut hits = 0;
    let mut prev = usize::MAX;
    let mut run = 0usize;
    for idx in indices {
        if idx >= n_windows {
            continue;
        }
        if idx == prev {
            run += 1;
            if run == 2 {
                hits += 1;
            }
        } else {
            prev = idx;
            run = 1;
        }
    }
    hits
}

/// Number of windows where both sorted index streams appear.
fn count_common(
    a: impl Iterator<Item = usize>,
    b: impl Iterator<Item = usize>,
    n_windows: usize,
) -> usize {
    let mut a = a.filter(|&i| i < n_windows).peekable();
    let mut b = b.filter(|&i| i < n_windows).peekable();
    let mut hits = 0;
    while let (Some(&x), Some(&y)) = (a.peek(), b.peek()) {
        match x.cmp(&y) {
            std::cmp::Ordering::Less => {
                a.next();
            }
            std::cmp::Ordering::Greater => {
                b.next();
            }
            std::cmp::Ordering::Equal => {
                hits += 1;
                while a.peek() == Some(&x) {
                    a.next();
                }
                while b.peek() == Some(&x) {
                    b.next();
                }
            }
        }
    }
    hits
}

/// Fraction of disjoint windows containing at least two events.
pub fn mj_stat(events: &EventSeries, w: u32, n: u32) -> Result<f64> {
    let m = check_window(w, n)?;
    let hits = count_multi(events.times.iter().map(|&t| window_index_int(t, w)), m);
    Ok(hits as f64 / m as f64)
}

/// Fraction of disjoint windows where both processes have at least one event.
pub fn cj_stat(a: &EventSeries, b: &EventSeries, w: u32, n: u32) -> Result<f64> {
    let m = check_window(w, n)?;
    let hits = count_common(
        a.times.iter().map(|&t| window_index_int(t, w)),
        b.times.iter().map(|&t| window_index_int(t, w)),
        m,
    );
    Ok(hits as f64 / m as f64)
}

/// MJ statistic on continuous event times (used by Monte-Carlo replicas).
pub fn mj_stat_times(times: &[f64], w: u32, n: u32) -> Result<f64> {
    let m = check_window(w, n)?;
    let hits = count_multi(times.iter().map(|&t| window_index_cont(t, w as f64)), m);
    Ok(hits as f64 / m as f64)
}

/// CJ statistic on continuous event times.
pub fn cj_stat_times(a: &[f64], b: &[f64], w: u32, n: u32) -> Result<f64> {
    let m = check_window(w, n)?;
    let hits = count_common(
        a.iter().map(|&t| window_index_cont(t, w as f64)),
        b.iter().map(|&t| window_index_cont(t, w as f64)),
        m,
    );
    Ok(hits as f64 / m as f64)
}

/// Observed statistic per window length.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindowStat {
    pub w_grid: Vec<u32>,
    pub values: Vec<f64>,
    pub sample_len: u32,
}

impl WindowStat {
    pub fn mj(events: &EventSeries, w_grid: &[u32]) -> Result<Self> {
        let values = w_grid
            .iter()
            .map(|&w| mj_stat(events, w, events.sample_len))
            .collect::<Result<_>>()?;
        Ok(Self { w_grid: w_grid.to_vec(), values, sample_len: events.sample_len })
    }

    pub fn cj(a: &EventSeries, b: &EventSeries, w_grid: &[u32]) -> Result<Self> {
        let values = w_grid
            .iter()
            .map(|&w| cj_stat(a, b, w, a.sample_len))
            .collect::<Result<_>>()?;
        Ok(Self { w_grid: w_grid.to_vec(), values, sample_len: a.sample_len })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BandSource {
    AnalyticPoisson,
    MonteCarlo { n_mc: usize, null: String },
}

impl std::fmt::Display for BandSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BandSource::AnalyticPoisson => write!(f, "analytic-poisson"),
            BandSource::MonteCarlo { n_mc, null } => write!(f, "monte-carlo({null},{n_mc})"),
        }
    }
}

/// Bonferroni-corrected confidence band over a w-grid at the two standard
/// levels (95% and 99% by default).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfidenceBand {
    pub w_grid: Vec<u32>,
    pub levels: [f64; 2],
    pub mean: Vec<f64>,
    /// `lo[i][j]` bounds window `w_grid[j]` at level `levels[i]`.
    pub lo: [Vec<f64>; 2],
    pub hi: [Vec<f64>; 2],
    pub source: BandSource,
}

impl ConfidenceBand {
    /// Per-w two-sided significance at band level `level`.
    pub fn adjusted_alpha(level: f64, grid_len: usize) -> f64 {
        (1.0 - level) / grid_len as f64
    }
}

/// Exact Poisson probability of at least two events in a window of `w`
/// minutes at rate `lambda`.
pub fn poisson_mj_mean(lambda: f64, w: f64) -> f64 {
    1.0 - (-lambda * w).exp() * (1.0 + lambda * w)
}

/// Exact Poisson probability that two independent processes both produce at
/// least one event in the window.
pub fn poisson_cj_mean(lambda_l: f64, lambda_k: f64, w: f64) -> f64 {
    (1.0 - (-lambda_l * w).exp()) * (1.0 - (-lambda_k * w).exp())
}

fn analytic_band(
    mean_of_w: impl Fn(f64) -> f64,
    w_grid: &[u32],
    n: u32,
    levels: [f64; 2],
) -> Result<ConfidenceBand> {
    let mut mean = Vec::with_capacity(w_grid.len());
    let mut lo = [Vec::new(), Vec::new()];
    let mut hi = [Vec::new(), Vec::new()];
    for &w in w_grid {
        let m = check_window(w, n)? as f64;
        let p = mean_of_w(w as f64);
        let sd = ((p - p * p) / m).max(0.0).sqrt();
        mean.push(p);
        for (i, &level) in levels.iter().enumerate() {
            let z = normal_quantile(1.0 - ConfidenceBand::adjusted_alpha(level, w_grid.len()) / 2.0);
            lo[i].push((p - z * sd).clamp(0.0, 1.0));
            hi[i].push((p + z * sd).clamp(0.0, 1.0));
        }
    }
    Ok(ConfidenceBand {
        w_grid: w_grid.to_vec(),
        levels,
        mean,
        lo,
        hi,
        source: BandSource::AnalyticPoisson,
    })
}

/// Analytic MJ band under a Poisson null of intensity `lambda` (per minute).
pub fn poisson_mj_band(lambda: f64, w_grid: &[u32], n: u32, levels: [f64; 2]) -> Result<ConfidenceBand> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter("Poisson intensity must be positive".into()));
    }
    analytic_band(|w| poisson_mj_mean(lambda, w), w_grid, n, levels)
}

/// Analytic CJ band under independent Poisson nulls.
pub fn poisson_cj_band(
    lambda_l: f64,
    lambda_k: f64,
    w_grid: &[u32],
    n: u32,
    levels: [f64; 2],
) -> Result<ConfidenceBand> {
    if !(lambda_l >= 0.0) || !(lambda_k >= 0.0) {
        return Err(Error::InvalidParameter("Poisson intensities must be non-negative".into()));
    }
    analytic_band(|w| poisson_cj_mean(lambda_l, lambda_k, w), w_grid, n, levels)
}

/// What a Monte-Carlo replica evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestStat {
    Mj,
    Cj,
}

/// Monte-Carlo band: empirical per-w quantiles at Bonferroni-adjusted levels
/// over `n_mc` simulated samples. `simulate` draws the continuous event
/// stream(s) of one replica (one stream for MJ, two for CJ) from the null
/// model; replica `i` sees an RNG derived from `(seed, i)`, so the band is
/// deterministic for a given seed regardless of parallelism.
pub fn mc_band<F>(
    simulate: F,
    stat: TestStat,
    w_grid: &[u32],
    n: u32,
    n_mc: usize,
    levels: [f64; 2],
    seed: u64,
    null_label: &str,
) -> Result<ConfidenceBand>
where
    F: Fn(&mut ChaCha12Rng) -> Result<Vec<Vec<f64>>> + Sync,
{
    if n_mc < 100 {
        return Err(Error::InvalidParameter("Monte-Carlo band needs at least 100 replicas".into()));
    }
    for &w in w_grid {
        check_window(w, n)?;
    }

    let stats: Vec<Vec<f64>> = (0..n_mc)
        .into_par_iter()
        .map(|replica| {
            let mut rng = stream_rng(seed, replica as u64);
            let streams = simulate(&mut rng)?;
            w_grid
                .iter()
                .map(|&w| match stat {
                    TestStat::Mj => mj_stat_times(&streams[0], w, n),
                    TestStat::Cj => cj_stat_times(&streams[0], &streams[1], w, n),
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;

    let mut mean = Vec::with_capacity(w_grid.len());
    let mut lo = [Vec::new(), Vec::new()];
    let mut hi = [Vec::new(), Vec::new()];
    for j in 0..w_grid.len() {
        let mut col: Vec<f64> = stats.iter().map(|row| row[j]).collect();
        col.sort_by(|a, b| a.partial_cmp(b).unwrap());
        mean.push(col.iter().sum::<f64>() / col.len() as f64);
        for (i, &level) in levels.iter().enumerate() {
            let a = ConfidenceBand::adjusted_alpha(level, w_grid.len());
            lo[i].push(quantile_sorted(&col, a / 2.0));
            hi[i].push(quantile_sorted(&col, 1.0 - a / 2.0));
        }
    }
    Ok(ConfidenceBand {
        w_grid: w_grid.to_vec(),
        levels,
        mean,
        lo,
        hi,
        source: BandSource::MonteCarlo { n_mc, null: null_label.to_string() },
    })
}

/// Verdict of comparing an observed statistic against a band.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestOutcome {
    pub levels: [f64; 2],
    /// Rejection flag per level.
    pub reject: [bool; 2],
    /// Window lengths falling outside the band, per level.
    pub offending_w: [Vec<u32>; 2],
}

/// Reject the null at a level iff any window's observed value lies strictly
/// outside that level's band.
pub fn run_test(observed: &WindowStat, band: &ConfidenceBand) -> Result<TestOutcome> {
    if observed.w_grid != band.w_grid {
        return Err(Error::InvalidParameter("observed statistic and band use different grids".into()));
    }
    let mut reject = [false; 2];
    let mut offending: [Vec<u32>; 2] = [Vec::new(), Vec::new()];
    for (i, _) in band.levels.iter().enumerate() {
        for (j, &w) in band.w_grid.iter().enumerate() {
            let v = observed.values[j];
            if v < band.lo[i][j] || v > band.hi[i][j] {
                offending[i].push(w);
            }
        }
        reject[i] = !offending[i].is_empty();
    }
    Ok(TestOutcome { levels: band.levels, reject, offending_w: offending })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hawkes::simulate_uni;
    use rand::Rng;

    fn ev(times: Vec<u32>, n: u32) -> EventSeries {
        EventSeries::new("T", times, n).unwrap()
    }

    #[test]
    fn mj_hand_examples() {
        assert_eq!(mj_stat(&ev(vec![], 10), 5, 10).unwrap(), 0.0);
        // events {1,2}: first window (minutes 1..=5) has 2, second has 0
        assert_eq!(mj_stat(&ev(vec![1, 2], 10), 5, 10).unwrap(), 0.5);
        // every window holds >= 2
        assert_eq!(mj_stat(&ev(vec![1, 2, 6, 7], 10), 5, 10).unwrap(), 1.0);
        // trailing partial window is discarded: minute 10 with w=3 -> 3 windows
        assert_eq!(mj_stat(&ev(vec![10], 10), 3, 10).unwrap(), 0.0);
    }

    #[test]
    fn cj_hand_examples() {
        // disjoint supports at w=1
        let a = ev(vec![1, 3], 10);
        let b = ev(vec![2, 4], 10);
        assert_eq!(cj_stat(&a, &b, 1, 10).unwrap(), 0.0);
        // a = {1}, b = {2}, w = 5 -> first window hits for both
        assert_eq!(cj_stat(&ev(vec![1], 10), &ev(vec![2], 10), 5, 10).unwrap(), 0.5);
        // identical non-empty series: cj = fraction of windows with >= 1 event
        let c = ev(vec![2, 8], 10);
        assert_eq!(cj_stat(&c, &c, 5, 10).unwrap(), 1.0);
    }

    /// Brute-force enumeration over explicit windows.
    fn mj_brute(times: &[u32], w: u32, n: u32) -> f64 {
        let m = n / w;
        let mut hits = 0;
        for i in 0..m {
            let lo = i * w + 1;
            let hi = (i + 1) * w;
            let c = times.iter().filter(|&&t| t >= lo && t <= hi).count();
            if c >= 2 {
                hits += 1;
            }
        }
        hits as f64 / m as f64
    }

    fn cj_brute(a: &[u32], b: &[u32], w: u32, n: u32) -> f64 {
        let m = n / w;
        let mut hits = 0;
        for i in 0..m {
            let lo = i * w + 1;
            let hi = (i + 1) * w;
            let ca = a.iter().filter(|&&t| t >= lo && t <= hi).count();
            let cb = b.iter().filter(|&&t| t >= lo && t <= hi).count();
            if ca >= 1 && cb >= 1 {
                hits += 1;
            }
        }
        hits as f64 / m as f64
    }

    #[test]
    fn stats_match_brute_force_on_random_instances() {
        let mut rng = stream_rng(21, 0);
        for _ in 0..300 {
            let n = 2 + rng.random_range(0..199u32);
            let draw = |rng: &mut ChaCha12Rng| {
                let mut t: Vec<u32> =
                    (0..rng.random_range(0..30)).map(|_| rng.random_range(1..=n)).collect();
                t.sort_unstable();
                t.dedup();
                t
            };
            let a = draw(&mut rng);
            let b = draw(&mut rng);
            let w = rng.random_range(1..=n);
            let ea = ev(a.clone(), n);
            let eb = ev(b.clone(), n);
            assert_eq!(mj_stat(&ea, w, n).unwrap(), mj_brute(&a, w, n));
            assert_eq!(cj_stat(&ea, &eb, w, n).unwrap(), cj_brute(&a, &b, w, n));
        }
    }

    #[test]
    fn poisson_mj_mean_values() {
        // series expansion for small lw
        let p = poisson_mj_mean(1e-3, 1.0);
        assert!((p - 5.0e-7).abs() / 5.0e-7 < 0.01, "{p}");
        // reference value at lambda = 2.4e-3, w = 10
        let p10 = poisson_mj_mean(2.4e-3, 10.0);
        assert!((p10 - 2.84e-4).abs() < 1e-6, "{p10}");
    }

    #[test]
    fn poisson_cj_mean_symmetry_and_zero() {
        assert_eq!(poisson_cj_mean(0.0, 1.0, 5.0), 0.0);
        let q = 1.0 - (-0.01f64 * 5.0).exp();
        assert!((poisson_cj_mean(0.01, 0.01, 5.0) - q * q).abs() < 1e-15);
    }

    #[test]
    fn bands_are_nested_and_bonferroni_adjusted() {
        let grid: Vec<u32> = (1..=30).collect();
        let band = poisson_mj_band(2.4e-3, &grid, 44_440, DEFAULT_LEVELS).unwrap();
        assert!((ConfidenceBand::adjusted_alpha(0.95, 30) - 0.05 / 30.0).abs() < 1e-15);
        for j in 0..grid.len() {
            assert!(band.lo[1][j] <= band.lo[0][j]);
            assert!(band.hi[1][j] >= band.hi[0][j]);
            assert!(band.lo[0][j] <= band.mean[j] && band.mean[j] <= band.hi[0][j]);
        }
    }

    #[test]
    fn mc_band_is_reproducible() {
        let grid = [1u32, 5, 10];
        let sim = |rng: &mut ChaCha12Rng| Ok(vec![simulate_uni(2.4e-3, 0.0, 1.0, 5_000.0, rng)?]);
        let b1 = mc_band(sim, TestStat::Mj, &grid, 5_000, 200, DEFAULT_LEVELS, 7, "poisson").unwrap();
        let b2 = mc_band(sim, TestStat::Mj, &grid, 5_000, 200, DEFAULT_LEVELS, 7, "poisson").unwrap();
        assert_eq!(b1.hi, b2.hi);
        assert_eq!(b1.lo, b2.lo);
        assert_eq!(b1.mean, b2.mean);
    }

    #[test]
    fn run_test_verdicts() {
        let grid: Vec<u32> = (1..=10).collect();
        let band = poisson_mj_band(2.4e-3, &grid, 44_440, DEFAULT_LEVELS).unwrap();
        // observed equal to the mean: no rejection
        let obs = WindowStat { w_grid: grid.clone(), values: band.mean.clone(), sample_len: 44_440 };
        let out = run_test(&obs, &band).unwrap();
        assert!(!out.reject[0] && !out.reject[1]);
        // push one w above the 99% bound: reject at both levels (nesting)
        let mut values = band.mean.clone();
        values[4] = band.hi[1][4] + 1e-3;
        let out = run_test(
            &WindowStat { w_grid: grid.clone(), values, sample_len: 44_440 },
            &band,
        )
        .unwrap();
        assert!(out.reject[0] && out.reject[1]);
        assert_eq!(out.offending_w[1], vec![5]);
    }

    #[test]
    fn poisson_mc_mean_tracks_analytic_mean() {
        let grid = [1u32, 10, 30];
        let n = 44_440u32;
        let band = mc_band(
            |rng| Ok(vec![simulate_uni(2.4e-3, 0.0, 1.0, n as f64, rng)?]),
            TestStat::Mj,
            &grid,
            n,
            400,
            DEFAULT_LEVELS,
            3,
            "poisson",
        )
        .unwrap();
        for (j, &w) in grid.iter().enumerate() {
            let p = poisson_mj_mean(2.4e-3, w as f64);
            let m = (n / w) as f64;
            let se = ((p - p * p) / m / 400.0).sqrt();
            assert!(
                (band.mean[j] - p).abs() < 4.0 * se.max(1e-7),
                "w={w}: {} vs {p}",
                band.mean[j]
            );
        }
    }
}
