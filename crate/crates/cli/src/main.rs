//! `cojump` drives the pipeline end-to-end: simulate ticks, clean them into
//! deseasonalized returns, detect jumps, calibrate Hawkes models, run MJ/CJ
//! band tests, decompose the cross-section into a systemic factor, and score
//! detector size/power against simulated ground truth.

mod manifest;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use cojump_core::config::PipelineConfig;
use cojump_core::series::{EventSeries, SessionSpec};
use cojump_core::{clean, detect, factor, hawkes, io, mctest, sim};
use manifest::RunManifest;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "cojump", version, about)]
struct Cli {
    /// TOML configuration file; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed for every stochastic stage.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker thread cap (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic data plus ground truth: tick-level market data
    /// (default) or a cross-sectional factor-model jump panel.
    Simulate {
        /// market | factor
        #[arg(long, default_value = "market")]
        mode: String,
        /// JSON with {factor, p, idio} Hawkes parameters for factor mode;
        /// a bundled 20-stock calibration is used when omitted.
        #[arg(long)]
        factor_spec: Option<PathBuf>,
    },
    /// Clean tick CSVs into deseasonalized MO1/MO2/MO3 return files.
    Clean {
        /// Directory of `<symbol>_ticks.csv` files.
        #[arg(long)]
        input: PathBuf,
    },
    /// Run the six-variant jump detection on return files.
    Detect {
        /// Directory of `<symbol>_returns.csv` files.
        #[arg(long)]
        input: PathBuf,
    },
    /// Fit a Hawkes model (one event file: univariate; several: K-variate).
    Fit {
        /// Event files (CSV with a `minute` column).
        #[arg(long, num_args = 1.., required = true)]
        events: Vec<PathBuf>,
    },
    /// Test observed MJ/CJ statistics against a null-model band.
    Test {
        #[arg(long)]
        events: PathBuf,
        /// Second event file (enables the CJ statistic).
        #[arg(long)]
        events_b: Option<PathBuf>,
        /// poisson | hawkes | indep-hawkes | poisson-factor
        #[arg(long, default_value = "poisson")]
        null: String,
        /// Force a Monte-Carlo band even where an analytic one exists.
        #[arg(long, default_value_t = false)]
        mc: bool,
    },
    /// Decompose a panel of jump files into factor + idiosyncratic parts.
    Factor {
        /// Directory of `<symbol>_jumps.csv` files.
        #[arg(long)]
        input: PathBuf,
    },
    /// Score detections against simulated ground truth.
    SizePower {
        /// Directory of `<symbol>_ticks.csv` files.
        #[arg(long)]
        ticks: PathBuf,
        /// Directory of matching `<symbol>_truth.csv` files.
        #[arg(long)]
        truth: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("setting worker count")?;
    }
    let config = match &cli.config {
        Some(path) => PipelineConfig::load(path).context("loading config")?,
        None => PipelineConfig::default(),
    };
    std::fs::create_dir_all(&cli.out)
        .with_context(|| format!("creating output dir {}", cli.out.display()))?;

    match &cli.command {
        Command::Simulate { mode, factor_spec } => match mode.as_str() {
            "market" => cmd_simulate(&cli, &config),
            "factor" => cmd_simulate_factor(&cli, &config, factor_spec.as_deref()),
            other => bail!("unknown simulate mode '{other}'"),
        },
        Command::Clean { input } => cmd_clean(&cli, &config, input),
        Command::Detect { input } => cmd_detect(&cli, &config, input),
        Command::Fit { events } => cmd_fit(&cli, &config, events),
        Command::Test { events, events_b, null, mc } => {
            cmd_test(&cli, &config, events, events_b.as_deref(), null, *mc)
        }
        Command::Factor { input } => cmd_factor(&cli, &config, input),
        Command::SizePower { ticks, truth } => cmd_size_power(&cli, &config, ticks, truth),
    }
}

/// Files in `dir` whose name ends with `suffix`, sorted, with the symbol
/// prefix extracted.
fn inputs_with_suffix(dir: &Path, suffix: &str) -> Result<Vec<(String, PathBuf)>> {
    let mut found = Vec::new();
    for entry in std::fs::read_dir(dir)
        .with_context(|| format!("reading input dir {}", dir.display()))?
    {
        let path = entry?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else { continue };
        if let Some(symbol) = name.strip_suffix(suffix) {
            found.push((symbol.to_string(), path.clone()));
        }
    }
    if found.is_empty() {
        bail!("no inputs: no '*{suffix}' files in {}", dir.display());
    }
    found.sort();
    Ok(found)
}

fn cmd_simulate(cli: &Cli, config: &PipelineConfig) -> Result<()> {
    let mut manifest = RunManifest::new("simulate", cli.seed, config);
    let sim_cfg = config.sim_config(cli.seed)?;
    let out = sim::simulate_market(&sim_cfg)?;
    let symbol = out.ticks.symbol.clone();

    let ticks_path = cli.out.join(format!("{symbol}_ticks.csv"));
    io::write_ticks_csv(&ticks_path, &out.ticks)?;
    manifest.record_output(&ticks_path);

    let truth_path = cli.out.join(format!("{symbol}_truth.csv"));
    io::write_truth_csv(&truth_path, &out.true_jumps)?;
    manifest.record_output(&truth_path);

    manifest.write(&cli.out)?;
    eprintln!(
        "simulated {} days: {} ticks, {} planted jumps",
        sim_cfg.days,
        out.ticks.len(),
        out.true_jumps.len()
    );
    Ok(())
}

#[derive(serde::Serialize, serde::Deserialize)]
struct FactorSpec {
    factor: hawkes::HawkesModel,
    p: Vec<f64>,
    idio: Vec<hawkes::HawkesModel>,
}

fn cmd_simulate_factor(cli: &Cli, config: &PipelineConfig, spec: Option<&Path>) -> Result<()> {
    let mut manifest = RunManifest::new("simulate-factor", cli.seed, config);
    let (factor_model, p, idio) = match spec {
        Some(path) => {
            manifest.record_input(path)?;
            let s: FactorSpec = io::read_json(path)?;
            (s.factor, s.p, s.idio)
        }
        None => factor::reference_calibration(),
    };
    let n = config.session().total_len() as u32;
    let (stocks, factor_truth) =
        factor::simulate_factor_model(&factor_model, &p, &idio, n, cli.seed)?;
    for stock in &stocks {
        let path = cli.out.join(format!("{}_jumps.csv", stock.symbol));
        let outcome = events_as_outcome(stock);
        io::write_jumps_csv(&path, &outcome)?;
        manifest.record_output(&path);
    }
    let truth_path = cli.out.join("factor_truth.csv");
    io::write_events_csv(&truth_path, &factor_truth)?;
    manifest.record_output(&truth_path);
    manifest.write(&cli.out)?;
    eprintln!(
        "simulated {} stocks over {n} minutes; {} factor events",
        stocks.len(),
        factor_truth.len()
    );
    Ok(())
}

/// Wrap a bare event series as a jump file where every variant fired.
fn events_as_outcome(events: &EventSeries) -> detect::DetectionOutcome {
    detect::DetectionOutcome {
        variants: Vec::new(),
        intersection: events.clone(),
        union_mask: events.times.iter().map(|&t| (t, 1, 63)).collect(),
    }
}

#[derive(serde::Serialize)]
struct CleanReportEntry {
    symbol: String,
    ticks_in: usize,
    outliers_removed: usize,
    auctions_found: usize,
    split_flags: Vec<usize>,
    status: String,
}

fn cmd_clean(cli: &Cli, config: &PipelineConfig, input: &Path) -> Result<()> {
    let mut manifest = RunManifest::new("clean", cli.seed, config);
    let clean_cfg = config.clean_config();
    let mut report = Vec::new();
    let mut aborted = 0usize;

    for (symbol, path) in inputs_with_suffix(input, "_ticks.csv")? {
        manifest.record_input(&path)?;
        let raw = io::read_ticks_csv(&path, &symbol)?;
        let ticks_in = raw.len();
        let session = infer_session(config, &raw)?;
        let (cleaned, removed) = clean::remove_outliers(&raw, &clean_cfg)?;
        let auctions = clean::detect_auctions(&cleaned, config.auction.threshold_min)?;

        let mut series = Vec::new();
        let mut split_flags = Vec::new();
        for method in cojump_core::series::MoMethod::ALL {
            let raw_returns = clean::build_returns(&cleaned, &session, method, &auctions)?;
            split_flags.extend(clean::check_splits(&raw_returns, config.split.bound));
            series.push(raw_returns);
        }
        split_flags.sort_unstable();
        split_flags.dedup();
        if !split_flags.is_empty() {
            eprintln!(
                "{symbol}: aborted, {} returns exceed the split bound (first index {})",
                split_flags.len(),
                split_flags[0]
            );
            report.push(CleanReportEntry {
                symbol,
                ticks_in,
                outliers_removed: removed.len(),
                auctions_found: auctions.len(),
                split_flags,
                status: "aborted-split".into(),
            });
            aborted += 1;
            continue;
        }

        let deseasonalized: Vec<_> = series
            .iter()
            .map(|s| clean::deseasonalize(s, &session))
            .collect::<cojump_core::Result<_>>()?;
        let returns_path = cli.out.join(format!("{symbol}_returns.csv"));
        io::write_returns_csv(
            &returns_path,
            [&deseasonalized[0], &deseasonalized[1], &deseasonalized[2]],
        )?;
        manifest.record_output(&returns_path);
        let auctions_path = cli.out.join(format!("{symbol}_auctions.csv"));
        io::write_auctions_csv(&auctions_path, &auctions)?;
        manifest.record_output(&auctions_path);
        eprintln!(
            "{symbol}: {} ticks, {} outliers removed, {} auctions",
            ticks_in,
            removed.len(),
            auctions.len()
        );
        report.push(CleanReportEntry {
            symbol,
            ticks_in,
            outliers_removed: removed.len(),
            auctions_found: auctions.len(),
            split_flags,
            status: "ok".into(),
        });
    }

    let report_path = cli.out.join("clean_report.json");
    io::write_json(&report_path, &report)?;
    manifest.record_output(&report_path);
    manifest.write(&cli.out)?;
    if aborted > 0 {
        bail!("{aborted} symbol(s) aborted by the split check");
    }
    Ok(())
}

/// Sessions are config-driven except for the day count, which follows the
/// data (ticks may cover more or fewer days than the configured sample).
fn infer_session(
    config: &PipelineConfig,
    ticks: &cojump_core::series::TickSeries,
) -> Result<SessionSpec> {
    let mut session = config.session();
    if let Some(last) = ticks.ticks.last() {
        let clock_s = (session.day_clock_minutes * 60) as f64;
        session.days = (last.time_s / clock_s).floor() as usize + 1;
    }
    session.validate()?;
    Ok(session)
}

#[derive(serde::Serialize)]
struct DetectReportEntry {
    symbol: String,
    variant_counts: Vec<(String, usize)>,
    intersection_count: usize,
}

fn cmd_detect(cli: &Cli, config: &PipelineConfig, input: &Path) -> Result<()> {
    let mut manifest = RunManifest::new("detect", cli.seed, config);
    let det_cfg = config.detection_config();
    let mut report = Vec::new();

    for (symbol, path) in inputs_with_suffix(input, "_returns.csv")? {
        manifest.record_input(&path)?;
        let mut session = config.session();
        session.days = count_return_rows(&path)? / session.minutes_per_day;
        let [mo1, mo2, mo3] = io::read_returns_csv(&path, &symbol, session)?;
        let outcome = detect::run_six_variants(&mo1, &mo2, &mo3, &det_cfg)?;
        let jumps_path = cli.out.join(format!("{symbol}_jumps.csv"));
        io::write_jumps_csv(&jumps_path, &outcome)?;
        manifest.record_output(&jumps_path);
        let counts: Vec<(String, usize)> = outcome
            .variants
            .iter()
            .map(|(id, e)| (id.label(), e.len()))
            .collect();
        eprintln!(
            "{symbol}: intersection {} jumps (variants {})",
            outcome.intersection.len(),
            counts.iter().map(|(l, c)| format!("{l}={c}")).collect::<Vec<_>>().join(" ")
        );
        report.push(DetectReportEntry {
            symbol,
            variant_counts: counts,
            intersection_count: outcome.intersection.len(),
        });
    }

    let report_path = cli.out.join("detect_report.json");
    io::write_json(&report_path, &report)?;
    manifest.record_output(&report_path);
    manifest.write(&cli.out)?;
    Ok(())
}

/// Read an event list from either a bare `minute` CSV or a
/// `minute,direction,method_mask` jump file (keeping the six-method
/// intersection).
fn read_any_events(path: &Path, symbol: &str, n: u32) -> Result<EventSeries> {
    use std::io::BufRead;
    let file = std::fs::File::open(path)?;
    let mut header = String::new();
    std::io::BufReader::new(file).read_line(&mut header)?;
    let series = if header.trim() == "minute,direction,method_mask" {
        io::read_jumps_csv(path, symbol, n, 63)?
    } else {
        io::read_events_csv(path, symbol, n)?
    };
    Ok(series)
}

fn count_return_rows(path: &Path) -> Result<usize> {
    use std::io::BufRead;
    let file = std::fs::File::open(path)?;
    Ok(std::io::BufReader::new(file)
        .lines()
        .skip(1)
        .filter(|l| l.as_ref().map(|s| !s.trim().is_empty()).unwrap_or(false))
        .count())
}

fn cmd_fit(cli: &Cli, config: &PipelineConfig, events: &[PathBuf]) -> Result<()> {
    let mut manifest = RunManifest::new("fit", cli.seed, config);
    let n = config.session().total_len() as u32;
    let mut streams = Vec::new();
    for path in events {
        manifest.record_input(path)?;
        let symbol = path.file_stem().and_then(|s| s.to_str()).unwrap_or("events");
        let series = read_any_events(path, symbol, n)?;
        streams.push(series.times_f64());
    }
    let opts = config.fit_options(cli.seed);
    let report = if streams.len() == 1 {
        hawkes::fit_univariate(&streams[0], n as f64, &opts)?
    } else {
        hawkes::fit_multivariate(&streams, n as f64, &opts)?
    };
    print_fit_summary(&report);
    #[derive(serde::Serialize)]
    struct ModelFile<'a> {
        k: usize,
        #[serde(flatten)]
        report: &'a hawkes::FitReport,
    }
    let model_path = cli.out.join("model.json");
    io::write_json(&model_path, &ModelFile { k: report.model.dims(), report: &report })?;
    manifest.record_output(&model_path);
    manifest.write(&cli.out)?;
    if !report.converged {
        eprintln!("warning: optimizer did not meet the convergence tolerance; best point reported");
    }
    Ok(())
}

fn print_fit_summary(report: &hawkes::FitReport) {
    let k = report.model.dims();
    eprintln!("log-likelihood {:.4} ({} iterations)", report.loglik, report.iterations);
    for d in 0..k {
        let se = report.se_lambda.as_ref().map(|s| s[d]);
        let p = report.p_lambda.as_ref().map(|s| s[d]);
        eprintln!("  lambda[{d}] = {}", fmt_param(report.model.lambda[d], se, p));
        for m in 0..k {
            let se = report.se_alpha.as_ref().map(|s| s[d][m]);
            let p = report.p_alpha.as_ref().map(|s| s[d][m]);
            eprintln!("  alpha[{d}][{m}] = {}", fmt_param(report.model.alpha[d][m], se, p));
            let se = report.se_beta.as_ref().map(|s| s[d][m]);
            let p = report.p_beta.as_ref().map(|s| s[d][m]);
            eprintln!("  beta[{d}][{m}] = {}", fmt_param(report.model.beta[d][m], se, p));
        }
    }
}

fn fmt_param(value: f64, se: Option<f64>, p: Option<f64>) -> String {
    match (se, p) {
        (Some(se), Some(p)) => format!(
            "{value:.6e} +- {se:.2e} {}",
            hawkes::FitReport::significance_code(p)
        ),
        _ => format!("{value:.6e} (se unavailable)"),
    }
}

fn cmd_test(
    cli: &Cli,
    config: &PipelineConfig,
    events_path: &Path,
    events_b: Option<&Path>,
    null: &str,
    force_mc: bool,
) -> Result<()> {
    let mut manifest = RunManifest::new("test", cli.seed, config);
    let n = config.session().total_len() as u32;
    let grid = config.w_grid();
    let levels = config.mctest.levels;
    let n_mc = config.mctest.n_mc;
    let opts = config.fit_options(cli.seed);

    manifest.record_input(events_path)?;
    let a = read_any_events(events_path, "A", n)?;
    let b = match events_b {
        Some(p) => {
            manifest.record_input(p)?;
            Some(read_any_events(p, "B", n)?)
        }
        None => None,
    };

    let (observed, band) = match (null, &b) {
        ("poisson", None) => {
            let observed = mctest::WindowStat::mj(&a, &grid)?;
            let lambda = a.len() as f64 / n as f64;
            let band = if force_mc {
                mctest::mc_band(
                    |rng| Ok(vec![hawkes::simulate_uni(lambda, 0.0, 1.0, n as f64, rng)?]),
                    mctest::TestStat::Mj,
                    &grid,
                    n,
                    n_mc,
                    levels,
                    cli.seed,
                    "poisson",
                )?
            } else {
                mctest::poisson_mj_band(lambda, &grid, n, levels)?
            };
            (observed, band)
        }
        ("poisson", Some(b)) => {
            let observed = mctest::WindowStat::cj(&a, b, &grid)?;
            let la = a.len() as f64 / n as f64;
            let lb = b.len() as f64 / n as f64;
            (observed, mctest::poisson_cj_band(la, lb, &grid, n, levels)?)
        }
        ("hawkes", None) => {
            let observed = mctest::WindowStat::mj(&a, &grid)?;
            let fit = hawkes::fit_univariate(&a.times_f64(), n as f64, &opts)?;
            let m = stationary_null(&fit.model);
            let band = mctest::mc_band(
                move |rng| {
                    Ok(vec![hawkes::simulate_uni(
                        m.lambda[0],
                        m.alpha[0][0],
                        m.beta[0][0],
                        n as f64,
                        rng,
                    )?])
                },
                mctest::TestStat::Mj,
                &grid,
                n,
                n_mc,
                levels,
                cli.seed,
                "hawkes",
            )?;
            (observed, band)
        }
        ("indep-hawkes", Some(b)) => {
            let observed = mctest::WindowStat::cj(&a, b, &grid)?;
            let fa = stationary_null(&hawkes::fit_univariate(&a.times_f64(), n as f64, &opts)?.model);
            let fb = stationary_null(&hawkes::fit_univariate(&b.times_f64(), n as f64, &opts)?.model);
            let band = mctest::mc_band(
                move |rng| {
                    let sa = hawkes::simulate_uni(
                        fa.lambda[0],
                        fa.alpha[0][0],
                        fa.beta[0][0],
                        n as f64,
                        rng,
                    )?;
                    let sb = hawkes::simulate_uni(
                        fb.lambda[0],
                        fb.alpha[0][0],
                        fb.beta[0][0],
                        n as f64,
                        rng,
                    )?;
                    Ok(vec![sa, sb])
                },
                mctest::TestStat::Cj,
                &grid,
                n,
                n_mc,
                levels,
                cli.seed,
                "indep-hawkes",
            )?;
            (observed, band)
        }
        ("poisson-factor", Some(b)) => {
            let observed = mctest::WindowStat::cj(&a, b, &grid)?;
            let n12 = a.times.iter().filter(|t| b.times.binary_search(t).is_ok()).count();
            let pf = factor::fit_poisson_factor2(
                a.len() as u64,
                b.len() as u64,
                n12 as u64,
                n as f64,
            )?;
            let band = mctest::mc_band(
                move |rng| {
                    let (sa, sb) = pf.simulate(n as f64, rng);
                    Ok(vec![sa, sb])
                },
                mctest::TestStat::Cj,
                &grid,
                n,
                n_mc,
                levels,
                cli.seed,
                "poisson-factor",
            )?;
            (observed, band)
        }
        ("hawkes" | "poisson-factor" | "indep-hawkes", _) => {
            bail!("null '{null}' needs {} event files", if null == "hawkes" { 1 } else { 2 })
        }
        _ => bail!("unknown null model '{null}'"),
    };

    let outcome = mctest::run_test(&observed, &band)?;
    let band_path = cli.out.join("band.csv");
    io::write_band_csv(&band_path, &observed, &band)?;
    manifest.record_output(&band_path);
    let verdict_path = cli.out.join("verdict.json");
    io::write_json(&verdict_path, &outcome)?;
    manifest.record_output(&verdict_path);
    manifest.write(&cli.out)?;
    for (i, level) in outcome.levels.iter().enumerate() {
        if outcome.reject[i] {
            eprintln!(
                "reject at {:.0}%: offending w = {:?}",
                level * 100.0,
                outcome.offending_w[i]
            );
        } else {
            eprintln!("cannot reject at {:.0}%", level * 100.0);
        }
    }
    Ok(())
}

/// Monte-Carlo null bands need a stationary simulator; warn when the
/// unconstrained fit had to be projected.
fn stationary_null(model: &hawkes::HawkesModel) -> hawkes::HawkesModel {
    let capped = model.capped_at_branching(0.99);
    if &capped != model {
        eprintln!(
            "warning: fitted null model is non-stationary (branching {:.3}); excitation rescaled for simulation",
            model.branching_spectral_radius()
        );
    }
    capped
}

fn cmd_factor(cli: &Cli, config: &PipelineConfig, input: &Path) -> Result<()> {
    let mut manifest = RunManifest::new("factor", cli.seed, config);
    let n = config.session().total_len() as u32;
    let mut series = Vec::new();
    for (symbol, path) in inputs_with_suffix(input, "_jumps.csv")? {
        manifest.record_input(&path)?;
        series.push(io::read_jumps_csv(&path, &symbol, n, 63)?);
    }

    let tally = factor::cojump_tally(&series, n);
    let tally_path = cli.out.join("cojump_tally.csv");
    io::write_tally_csv(&tally_path, &tally)?;
    manifest.record_output(&tally_path);
    let directions = factor::direction_consistency(&series, n);
    if directions.cojump_minutes > 0 {
        eprintln!(
            "direction diagnostic: {} of {} cojump minutes mix directions",
            directions.mixed_direction_minutes, directions.cojump_minutes
        );
    }

    let extract_cfg = config.extract_config(cli.seed)?;
    let decomp = factor::extract_factor(&series, n, &extract_cfg)?;
    if decomp.factor_minutes.is_empty() {
        eprintln!("warning: no systemic component detected; all transmissions set to zero");
    }
    if decomp.hit_max_iters {
        eprintln!("warning: extraction stopped at max_iters = {}", extract_cfg.max_iters);
    }
    eprintln!(
        "factor: {} events in {} passes; idiosyncratic totals {:?}",
        decomp.factor_minutes.len(),
        decomp.iterations,
        decomp.idiosyncratic.iter().map(Vec::len).collect::<Vec<_>>()
    );
    #[derive(serde::Serialize)]
    struct StockEntry<'a> {
        symbol: &'a str,
        idio_events: &'a [u32],
        p: f64,
        model: Option<&'a hawkes::FitReport>,
    }
    #[derive(serde::Serialize)]
    struct DecompositionFile<'a> {
        factor_events: &'a [u32],
        factor_model: Option<&'a hawkes::FitReport>,
        stocks: Vec<StockEntry<'a>>,
        iterations: usize,
        hit_max_iters: bool,
    }
    let view = DecompositionFile {
        factor_events: &decomp.factor_minutes,
        factor_model: decomp.factor_fit.as_ref(),
        stocks: series
            .iter()
            .enumerate()
            .map(|(s, stock)| StockEntry {
                symbol: &stock.symbol,
                idio_events: &decomp.idiosyncratic[s],
                p: decomp.p[s],
                model: decomp.idio_fits[s].as_ref(),
            })
            .collect(),
        iterations: decomp.iterations,
        hit_max_iters: decomp.hit_max_iters,
    };
    let decomp_path = cli.out.join("decomposition.json");
    io::write_json(&decomp_path, &view)?;
    manifest.record_output(&decomp_path);
    manifest.write(&cli.out)?;
    Ok(())
}

fn cmd_size_power(
    cli: &Cli,
    config: &PipelineConfig,
    ticks_dir: &Path,
    truth_dir: &Path,
) -> Result<()> {
    let mut manifest = RunManifest::new("size-power", cli.seed, config);
    let clean_cfg = config.clean_config();
    let det_cfg = config.detection_config();

    for (symbol, tick_path) in inputs_with_suffix(ticks_dir, "_ticks.csv")? {
        let truth_path = truth_dir.join(format!("{symbol}_truth.csv"));
        if !truth_path.exists() {
            bail!("missing truth file {}", truth_path.display());
        }
        manifest.record_input(&tick_path)?;
        manifest.record_input(&truth_path)?;

        let raw = io::read_ticks_csv(&tick_path, &symbol)?;
        let session = infer_session(config, &raw)?;
        let (cleaned, _) = clean::remove_outliers(&raw, &clean_cfg)?;
        let auctions = clean::detect_auctions(&cleaned, config.auction.threshold_min)?;
        let mut des = Vec::new();
        for method in cojump_core::series::MoMethod::ALL {
            let r = clean::build_returns(&cleaned, &session, method, &auctions)?;
            des.push(clean::deseasonalize(&r, &session)?);
        }
        let outcome = detect::run_six_variants(&des[0], &des[1], &des[2], &det_cfg)?;

        let truth: Vec<u32> = {
            let mut t: Vec<u32> =
                io::read_truth_csv(&truth_path)?.into_iter().map(|(m, _)| m).collect();
            t.sort_unstable();
            t.dedup();
            t
        };
        let table = sim::size_power_table(
            &truth,
            &outcome.variants,
            session.total_len() as u32,
            config.sim.match_window,
        );
        let table_path = cli.out.join(format!("{symbol}_sizepower.csv"));
        write_size_power_csv(&table_path, &table)?;
        manifest.record_output(&table_path);
        for cell in &table {
            eprintln!(
                "{symbol} {}: size {:.4}% power {:.1}% (FP {}, RP {})",
                cell.label,
                cell.size * 100.0,
                cell.power * 100.0,
                cell.false_pos,
                cell.right_pos
            );
        }
    }
    manifest.write(&cli.out)?;
    Ok(())
}

fn write_size_power_csv(path: &Path, table: &[sim::SizePowerCell]) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "variant,size,power,false_positives,right_positives")?;
    for cell in table {
        writeln!(
            out,
            "{},{},{},{},{}",
            cell.label, cell.size, cell.power, cell.false_pos, cell.right_pos
        )?;
    }
    Ok(())
}
