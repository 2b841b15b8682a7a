//! Validation suite: one test per quantitative claim the artifact must
//! reproduce, each printing a single pass/fail line. Run with
//! `cargo test --test acceptance -- --nocapture` to see the lines.

use cojump_core::clean::{build_returns, deseasonalize, detect_auctions, remove_outliers, CleanConfig};
use cojump_core::detect::{run_six_variants, DetectionConfig};
use cojump_core::factor::{
    extract_factor, fit_poisson_factor2, reference_calibration, simulate_factor_model,
    BonferroniScope, ExtractConfig, ScanConfig,
};
use cojump_core::hawkes::{
    fit_univariate, grad_loglik_uni, loglik_uni, simulate_uni, FitOptions, HawkesModel,
    LogLikConvention,
};
use cojump_core::mctest::{
    cj_stat, mc_band, mj_stat_times, poisson_mj_band, run_test, ConfidenceBand, TestStat,
    WindowStat, DEFAULT_LEVELS,
};
use cojump_core::pbinom;
use cojump_core::rng::stream_rng;
use cojump_core::series::MoMethod;
use cojump_core::sim::{simulate_market, size_power_table, IntertradeSampler, JumpSizeDist, SimConfig};
use cojump_core::stats::{mean, quantile_sorted, std_dev};
use rand::Rng;
use rayon::prelude::*;
use std::time::Instant;

/// Master seed of the suite; sub-streams are derived per criterion.
const SEED: u64 = 20_120_305;

/// The criteria carry their own runtime bounds and saturate the machine via
/// rayon, so they run one at a time; the harness still reports them
/// individually.
static GATE: std::sync::Mutex<()> = std::sync::Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    GATE.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

fn verdict(criterion: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "criterion {criterion:02} [{name}]: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

#[test]
fn criterion_01_poisson_factor_inversion() {
    let _gate = serial();
    let start = Instant::now();
    let fit = fit_poisson_factor2(103, 127, 26, 44_440.0).unwrap();
    let elapsed = start.elapsed();
    let lambda_ok = (fit.lambda_f - 1.132e-2).abs() <= 0.005 * 1.1e-2;
    let p1_ok = (fit.p1 - 0.2047).abs() < 5e-5;
    let p2_ok = (fit.p2 - 0.2524).abs() < 5e-5;
    let time_ok = elapsed.as_micros() < 1_000;
    let pass = lambda_ok && p1_ok && p2_ok && time_ok;
    verdict(
        1,
        "poisson-factor-inversion",
        pass,
        &format!(
            "lambda_F={:.4e} p1={:.4} p2={:.4} in {:?}",
            fit.lambda_f, fit.p1, fit.p2, elapsed
        ),
    );
    assert!(pass);
}

/// Independent O(n^2) evaluation of the univariate log-likelihood.
fn naive_loglik(lambda: f64, alpha: f64, beta: f64, times: &[f64], t_n: f64) -> f64 {
    let mut sum_ln = 0.0;
    for (i, &t) in times.iter().enumerate() {
        let mut intensity = lambda;
        for &u in &times[..i] {
            intensity += alpha * (-beta * (t - u)).exp();
        }
        sum_ln += intensity.ln();
    }
    let comp: f64 = times.iter().map(|&t| 1.0 - (-beta * (t_n - t)).exp()).sum();
    -lambda * t_n - alpha / beta * comp + sum_ln
}

#[test]
fn criterion_02_likelihood_oracle() {
    let _gate = serial();
    let start = Instant::now();
    let mut rng = stream_rng(SEED, 2);
    let mut worst_gap = 0.0f64;
    for _ in 0..1_000 {
        let n = 1 + rng.random_range(0..50usize);
        let t_n = 50.0 + rng.random::<f64>() * 200.0;
        let mut times: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * t_n).collect();
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        times.dedup();
        let lambda = 0.01 + rng.random::<f64>() * 0.5;
        let beta = 0.1 + rng.random::<f64>() * 2.0;
        let alpha = beta * rng.random::<f64>() * 0.9;
        let fast = loglik_uni(lambda, alpha, beta, &times, t_n, LogLikConvention::Standard)
            .unwrap();
        let slow = naive_loglik(lambda, alpha, beta, &times, t_n);
        worst_gap = worst_gap.max((fast - slow).abs());
    }

    let mut worst_rel = 0.0f64;
    for _ in 0..200 {
        let n = 5 + rng.random_range(0..45usize);
        let t_n = 300.0;
        let mut times: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * t_n).collect();
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        times.dedup();
        let theta = [
            0.05 + rng.random::<f64>() * 0.3,
            0.05 + rng.random::<f64>() * 0.3,
            0.3 + rng.random::<f64>(),
        ];
        let grad = grad_loglik_uni(theta[0], theta[1], theta[2], &times, t_n).unwrap();
        for p in 0..3 {
            let h = 1e-6 * theta[p];
            let f = |v: [f64; 3]| {
                loglik_uni(v[0], v[1], v[2], &times, t_n, LogLikConvention::Standard).unwrap()
            };
            let mut up = theta;
            up[p] += h;
            let mut dn = theta;
            dn[p] -= h;
            let fd = (f(up) - f(dn)) / (2.0 * h);
            worst_rel = worst_rel.max((grad[p] - fd).abs() / fd.abs().max(1e-8));
        }
    }
    let elapsed = start.elapsed();
    let pass = worst_gap < 1e-10 && worst_rel < 1e-5 && elapsed.as_secs() < 10;
    verdict(
        2,
        "likelihood-oracle",
        pass,
        &format!("max |Delta L|={worst_gap:.2e}, max grad rel err={worst_rel:.2e}, {elapsed:?}"),
    );
    assert!(pass);
}

#[test]
fn criterion_03_hawkes_mean_count_law() {
    let _gate = serial();
    let (lambda, alpha, beta) = (2.1e-3, 3.1e-2, 2.5e-1);
    let horizon = 44_440.0;
    let replicas = 10_000u64;
    let counts: Vec<f64> = (0..replicas)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(SEED, 3_000_000 + i);
            simulate_uni(lambda, alpha, beta, horizon, &mut rng).unwrap().len() as f64
        })
        .collect();
    let want = lambda * horizon / (1.0 - alpha / beta);
    let m = mean(&counts);
    let se = std_dev(&counts) / (replicas as f64).sqrt();
    let pass = (m - want).abs() < 3.0 * se;
    verdict(
        3,
        "hawkes-mean-count",
        pass,
        &format!("mean {m:.3} vs {want:.3} (3 se = {:.3})", 3.0 * se),
    );
    assert!(pass);
}

#[test]
fn criterion_04_estimator_coverage() {
    let _gate = serial();
    let (lambda, alpha, beta) = (2.1e-3, 3.1e-2, 2.5e-1);
    let horizon = 44_440.0;
    let replicas = 100u64;
    let opts = FitOptions::default();
    let covered: Vec<[bool; 3]> = (0..replicas)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(SEED, 4_000_000 + i);
            let times = simulate_uni(lambda, alpha, beta, horizon, &mut rng).unwrap();
            let fit = fit_univariate(&times, horizon, &opts).unwrap();
            let (Some(sl), Some(sa), Some(sb)) =
                (&fit.se_lambda, &fit.se_alpha, &fit.se_beta)
            else {
                return [false; 3];
            };
            [
                (fit.model.lambda[0] - lambda).abs() <= 2.0 * sl[0],
                (fit.model.alpha[0][0] - alpha).abs() <= 2.0 * sa[0][0],
                (fit.model.beta[0][0] - beta).abs() <= 2.0 * sb[0][0],
            ]
        })
        .collect();
    // per-parameter coverage: a +-2 se Wald interval holds ~95.4% nominally,
    // so the 90/100 bar is the per-parameter reading (jointly, three such
    // intervals only cover ~87-93% even asymptotically)
    let hits: [usize; 3] =
        [0, 1, 2].map(|p| covered.iter().filter(|c| c[p]).count());
    let joint = covered.iter().filter(|c| c.iter().all(|&x| x)).count();
    let pass = hits.iter().all(|&h| h >= 90);
    verdict(
        4,
        "estimator-coverage",
        pass,
        &format!(
            "coverage lambda {}/100, alpha {}/100, beta {}/100 (jointly {joint}/100)",
            hits[0], hits[1], hits[2]
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_05_mj_cj_brute_force() {
    let _gate = serial();
    use cojump_core::series::EventSeries;
    let start = Instant::now();
    let mut rng = stream_rng(SEED, 5);
    for case in 0..1_000 {
        let n = 2 + rng.random_range(0..199u32);
        let draw = |rng: &mut rand_chacha::ChaCha12Rng| {
            let mut t: Vec<u32> =
                (0..rng.random_range(0..40)).map(|_| rng.random_range(1..=n)).collect();
            t.sort_unstable();
            t.dedup();
            t
        };
        let a = draw(&mut rng);
        let b = draw(&mut rng);
        let w = rng.random_range(1..=n);
        let m = n / w;
        // brute-force window enumeration
        let mut mj_hits = 0;
        let mut cj_hits = 0;
        for i in 0..m {
            let lo = i * w + 1;
            let hi = (i + 1) * w;
            let ca = a.iter().filter(|&&t| t >= lo && t <= hi).count();
            let cb = b.iter().filter(|&&t| t >= lo && t <= hi).count();
            if ca >= 2 {
                mj_hits += 1;
            }
            if ca >= 1 && cb >= 1 {
                cj_hits += 1;
            }
        }
        let ea = EventSeries::new("A", a, n).unwrap();
        let eb = EventSeries::new("B", b, n).unwrap();
        let mj = cojump_core::mctest::mj_stat(&ea, w, n).unwrap();
        let cj = cj_stat(&ea, &eb, w, n).unwrap();
        assert_eq!(mj, mj_hits as f64 / m as f64, "case {case} MJ");
        assert_eq!(cj, cj_hits as f64 / m as f64, "case {case} CJ");
    }
    let elapsed = start.elapsed();
    let pass = elapsed.as_secs_f64() < 1.0;
    verdict(
        5,
        "mj-cj-brute-force",
        pass,
        &format!("1000 instances exact in {elapsed:?}"),
    );
    assert!(pass);
}

#[test]
fn criterion_06_analytic_vs_mc_poisson_bands() {
    let _gate = serial();
    let lambda = 2.4e-3;
    let n = 44_440u32;
    let grid: Vec<u32> = (1..=30).collect();
    let n_mc = 10_000usize;

    // replica statistics, reproducing exactly what mc_band sees
    let stats: Vec<Vec<f64>> = (0..n_mc)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(SEED ^ 6, i as u64);
            let times = simulate_uni(lambda, 0.0, 1.0, n as f64, &mut rng).unwrap();
            grid.iter().map(|&w| mj_stat_times(&times, w, n).unwrap()).collect()
        })
        .collect();
    let band = mc_band(
        |rng| Ok(vec![simulate_uni(lambda, 0.0, 1.0, n as f64, rng)?]),
        TestStat::Mj,
        &grid,
        n,
        n_mc,
        DEFAULT_LEVELS,
        SEED ^ 6,
        "poisson",
    )
    .unwrap();
    let analytic = poisson_mj_band(lambda, &grid, n, DEFAULT_LEVELS).unwrap();

    // Monte-Carlo standard error of an empirical quantile: order-statistic
    // bracket at +-1 binomial sd of the target rank, floored by one lattice
    // step of the discrete statistic (the bracket collapses to zero whenever
    // the quantile sits flat on a lattice value, and the estimator cannot
    // resolve below its own lattice).
    let quantile_se = |col: &[f64], p: f64, windows: f64| -> f64 {
        let nn = col.len() as f64;
        let sd = (nn * p * (1.0 - p)).sqrt();
        let r_lo = ((nn * p - sd).floor().max(1.0) as usize).min(col.len());
        let r_hi = ((nn * p + sd).ceil() as usize).clamp(1, col.len());
        let bracket = (col[r_hi - 1] - col[r_lo - 1]) / 2.0;
        let floor = 1.0 / windows;
        (bracket * bracket + floor * floor).sqrt()
    };

    let mut worst: (f64, u32, &str) = (0.0, 0, "");
    let mut pass = true;
    for (j, &w) in grid.iter().enumerate() {
        let mut col: Vec<f64> = stats.iter().map(|r| r[j]).collect();
        col.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // confirm the reconstruction matches the public band
        assert_eq!(
            quantile_sorted(&col, 1.0 - ConfidenceBand::adjusted_alpha(0.95, grid.len()) / 2.0),
            band.hi[0][j]
        );
        let windows = (n / w) as f64;
        for (which, a_end, m_end, level) in [
            ("lo95", analytic.lo[0][j], band.lo[0][j], 0.95),
            ("hi95", analytic.hi[0][j], band.hi[0][j], 0.95),
            ("lo99", analytic.lo[1][j], band.lo[1][j], 0.99),
            ("hi99", analytic.hi[1][j], band.hi[1][j], 0.99),
        ] {
            let alpha_w = ConfidenceBand::adjusted_alpha(level, grid.len()) / 2.0;
            let p = if which.starts_with("lo") { alpha_w } else { 1.0 - alpha_w };
            let se = quantile_se(&col, p, windows);
            let gap = (a_end - m_end).abs();
            if gap > 3.0 * se {
                pass = false;
            }
            if se > 0.0 && gap / se > worst.0 {
                worst = (gap / se, w, which);
            }
        }
    }
    verdict(
        6,
        "analytic-vs-mc-bands",
        pass,
        &format!("worst endpoint gap {:.2} MC se at w={} ({})", worst.0, worst.1, worst.2),
    );
    assert!(pass);
}

#[test]
fn criterion_07_poisson_binomial_dp_vs_enumeration() {
    let _gate = serial();
    let start = Instant::now();
    let worst = (0..10_000u64)
        .into_par_iter()
        .map(|case| {
            let mut rng = stream_rng(SEED, 7_000_000 + case);
            let n = 1 + (case % 12) as usize;
            let probs: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let j = rng.random_range(0..=n);
            let dp = pbinom::tail_ge(&probs, j);
            // subset-sum enumeration over all 2^n outcomes
            let mut brute = 0.0;
            for mask in 0u32..(1 << n) {
                let mut prob = 1.0;
                let mut count = 0;
                for (i, &p) in probs.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        prob *= p;
                        count += 1;
                    } else {
                        prob *= 1.0 - p;
                    }
                }
                if count >= j {
                    brute += prob;
                }
            }
            (dp - brute).abs()
        })
        .reduce(|| 0.0, f64::max);
    let elapsed = start.elapsed();
    let pass = worst < 1e-12 && elapsed.as_secs() < 10;
    verdict(
        7,
        "poisson-binomial-dp",
        pass,
        &format!("max |Delta| = {worst:.2e} over 10^4 vectors in {elapsed:?}"),
    );
    assert!(pass);
}

#[test]
fn criterion_08_bootstrap_cojump_null() {
    let _gate = serial();
    let n_minutes = 44_440u32;
    let lambda = 108.0 / n_minutes as f64;
    let replicas = 10_000u64;
    let max_j: Vec<u8> = (0..replicas)
        .into_par_iter()
        .map(|rep| {
            let mut rng = stream_rng(SEED, 8_000_000 + rep);
            // J counts distinct stocks per minute, so duplicate minutes
            // within one stream collapse first
            let mut counts: std::collections::HashMap<u32, u8> = std::collections::HashMap::new();
            for _ in 0..20 {
                let mut t = 0.0f64;
                let mut prev = 0u32;
                loop {
                    t += -rng.random::<f64>().ln() / lambda;
                    if t > n_minutes as f64 {
                        break;
                    }
                    let minute = (t.ceil() as u32).clamp(1, n_minutes);
                    if minute != prev {
                        *counts.entry(minute).or_insert(0) += 1;
                        prev = minute;
                    }
                }
            }
            counts.values().copied().max().unwrap_or(0)
        })
        .collect::<Vec<u8>>();
    let max_of_max = max_j.iter().copied().max().unwrap_or(0);
    let violating = max_j.iter().filter(|&&m| m >= 5).count();
    let pass = max_of_max < 5;
    verdict(
        8,
        "bootstrap-cojump-null",
        pass,
        &format!(
            "max simultaneous jumps over 10^4 replicas = {max_of_max} ({violating} replica(s) reach 5)"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_09_factor_recovery() {
    let _gate = serial();
    let (factor, p_true, idio) = reference_calibration();
    let n = 44_440u32;
    let replicas = 1_000u64;
    // the documented defaults of the systemic scan
    let cfg = ExtractConfig {
        scan: ScanConfig {
            dt: 1.0,
            significance: 0.01,
            scope: BonferroniScope::SampleLength,
        },
        max_iters: 20,
        fit: FitOptions { multistarts: 4, ..FitOptions::default() },
    };
    let results: Vec<(f64, Vec<f64>)> = (0..replicas)
        .into_par_iter()
        .map(|rep| {
            let (stocks, truth) =
                simulate_factor_model(&factor, &p_true, &idio, n, SEED ^ (9_000_000 + rep))
                    .unwrap();
            let decomp = extract_factor(&stocks, n, &cfg).unwrap();
            let truth_set: std::collections::HashSet<u32> = truth.times.iter().copied().collect();
            let hits = decomp.factor_minutes.iter().filter(|t| truth_set.contains(t)).count();
            let recall = hits as f64 / truth.len() as f64;
            (recall, decomp.p)
        })
        .collect();
    let miss = 1.0 - mean(&results.iter().map(|(r, _)| *r).collect::<Vec<_>>());
    let mut p_gap_max = 0.0f64;
    for (s, &pt) in p_true.iter().enumerate() {
        let mean_p = mean(&results.iter().map(|(_, p)| p[s]).collect::<Vec<_>>());
        p_gap_max = p_gap_max.max((mean_p - pt).abs());
    }
    let miss_ok = (miss - 0.075).abs() <= 0.02;
    let p_ok = p_gap_max <= 0.08;
    let pass = miss_ok && p_ok;
    verdict(
        9,
        "factor-recovery",
        pass,
        &format!(
            "mis-identification {:.1}% (target 7.5% +- 2pp), max |mean p_hat - p| = {p_gap_max:.3}",
            miss * 100.0
        ),
    );
    assert!(pass, "mis-identification {miss:.4}, p gap {p_gap_max:.4}");
}

/// Full pipeline from ticks to the six-variant detection table.
fn run_pipeline(cfg: &SimConfig) -> (Vec<cojump_core::sim::SizePowerCell>, u32) {
    let out = simulate_market(cfg).unwrap();
    let session = out.session;
    let (cleaned, _) = remove_outliers(&out.ticks, &CleanConfig::default()).unwrap();
    let auctions = detect_auctions(&cleaned, 10.0).unwrap();
    let mut des = Vec::new();
    for method in MoMethod::ALL {
        let raw = build_returns(&cleaned, &session, method, &auctions).unwrap();
        des.push(deseasonalize(&raw, &session).unwrap());
    }
    let outcome =
        run_six_variants(&des[0], &des[1], &des[2], &DetectionConfig::default()).unwrap();
    let truth = out.true_jump_minutes();
    let table = size_power_table(&truth, &outcome.variants, session.total_len() as u32, 0);
    (table, session.total_len() as u32)
}

#[test]
fn criterion_10_size_power_reproduction() {
    let _gate = serial();
    // high liquidity: dense trading, jump multipliers calibrated to the
    // documented operating point (intersection size <= 0.05%, power 61% +- 10pp)
    let base = SimConfig {
        days: 4_400,
        jump_size: JumpSizeDist::Uniform { lo: 2.5, hi: 7.0 },
        intertrade: IntertradeSampler::Exponential { mean_s: 2.0 },
        seed: SEED ^ 10,
        ..SimConfig::default()
    };
    let (table_high, _) = run_pipeline(&base);
    let all = table_high.iter().find(|c| c.label == "ALL/both").unwrap();
    let high_ok = all.size <= 0.0005 && (all.power - 0.61).abs() <= 0.10;

    // low liquidity: heavy thinning exposes the missing-observation handling
    let low = SimConfig {
        intertrade: IntertradeSampler::Exponential { mean_s: 31.6 },
        seed: SEED ^ 11,
        ..base
    };
    let (table_low, _) = run_pipeline(&low);
    let fp = |label: &str| table_low.iter().find(|c| c.label == label).unwrap().false_pos;
    let (f1, f2, f3, fa) = (fp("MO1/both"), fp("MO2/both"), fp("MO3/both"), fp("ALL/both"));
    let order_ok = f1 > f2 && f2 > f3 && f3 >= fa;
    let reduction_ok = f1 as f64 >= 5.0 * fa.max(1) as f64;
    let pass = high_ok && order_ok && reduction_ok;
    verdict(
        10,
        "size-power",
        pass,
        &format!(
            "high-liq ALL: size {:.4}% power {:.1}%; low-liq FP MO1/MO2/MO3/ALL = {f1}/{f2}/{f3}/{fa}",
            all.size * 100.0,
            all.power * 100.0
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_11_test_self_consistency() {
    let _gate = serial();
    let n = 44_440u32;
    let grid: Vec<u32> = (1..=30).collect();
    let n_mc = 10_000usize;

    // (a) data simulated from a fitted univariate Hawkes stays inside its own
    // 99% Bonferroni MJ band
    let model = HawkesModel::univariate(2.1e-3, 3.1e-2, 2.5e-1);
    let m = model.clone();
    let band = mc_band(
        move |rng| {
            Ok(vec![simulate_uni(m.lambda[0], m.alpha[0][0], m.beta[0][0], n as f64, rng)?])
        },
        TestStat::Mj,
        &grid,
        n,
        n_mc,
        DEFAULT_LEVELS,
        SEED ^ 110,
        "hawkes",
    )
    .unwrap();
    let trials = 500u64;
    let inside: usize = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(SEED, 11_000_000 + i);
            let times =
                simulate_uni(model.lambda[0], model.alpha[0][0], model.beta[0][0], n as f64, &mut rng)
                    .unwrap();
            let observed = WindowStat {
                w_grid: grid.clone(),
                values: grid.iter().map(|&w| mj_stat_times(&times, w, n).unwrap()).collect(),
                sample_len: n,
            };
            let outcome = run_test(&observed, &band).unwrap();
            usize::from(!outcome.reject[1])
        })
        .sum();
    let part_a = inside >= 495;

    // (b) the CJ test under an independent-Hawkes null rejects
    // factor-simulated pairs
    let (factor, p_all, idio_all) = reference_calibration();
    let pair_p = vec![p_all[0], p_all[4]];
    let pair_idio = vec![idio_all[0].clone(), idio_all[4].clone()];
    let pair_trials = 200u64;
    let opts = FitOptions { multistarts: 4, ..FitOptions::default() };
    let rejected: usize = (0..pair_trials)
        .into_par_iter()
        .map(|i| {
            let (stocks, _) =
                simulate_factor_model(&factor, &pair_p, &pair_idio, n, SEED ^ (12_000_000 + i))
                    .unwrap();
            // unconstrained fits occasionally land outside the stationary
            // region; the null simulator needs the projected model
            let fa = fit_univariate(&stocks[0].times_f64(), n as f64, &opts)
                .unwrap()
                .model
                .capped_at_branching(0.99);
            let fb = fit_univariate(&stocks[1].times_f64(), n as f64, &opts)
                .unwrap()
                .model
                .capped_at_branching(0.99);
            let band = mc_band(
                |rng| {
                    let a = simulate_uni(fa.lambda[0], fa.alpha[0][0], fa.beta[0][0], n as f64, rng)?;
                    let b = simulate_uni(fb.lambda[0], fb.alpha[0][0], fb.beta[0][0], n as f64, rng)?;
                    Ok(vec![a, b])
                },
                TestStat::Cj,
                &grid,
                n,
                n_mc,
                DEFAULT_LEVELS,
                SEED ^ (13_000_000 + i),
                "indep-hawkes",
            )
            .unwrap();
            let observed = WindowStat::cj(&stocks[0], &stocks[1], &grid).unwrap();
            let outcome = run_test(&observed, &band).unwrap();
            usize::from(outcome.reject[1])
        })
        .sum();
    let part_b = rejected as f64 >= 0.95 * pair_trials as f64;

    let pass = part_a && part_b;
    verdict(
        11,
        "test-self-consistency",
        pass,
        &format!(
            "MJ inside own 99% band {inside}/{trials}; CJ rejects factor pair {rejected}/{pair_trials}"
        ),
    );
    assert!(pass);
}
