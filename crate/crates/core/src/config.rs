//! Single TOML configuration file with one section per pipeline stage.
//! Every knob has the documented default, so an empty file (or no file) is a
//! valid configuration.

use crate::clean::CleanConfig;
use crate::detect::DetectionConfig;
use crate::error::{Error, Result};
use crate::factor::{BonferroniScope, ExtractConfig, ScanConfig};
use crate::hawkes::{FitOptions, LogLikConvention};
use crate::series::SessionSpec;
use crate::sim::{IntertradeSampler, JumpSizeDist, SimConfig};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub session: SessionSection,
    pub clean: CleanSection,
    pub auction: AuctionSection,
    pub split: SplitSection,
    pub detect: DetectSection,
    pub mctest: McTestSection,
    pub hawkes: HawkesSection,
    pub factor: FactorSection,
    pub sim: SimSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionSection {
    pub minutes_per_day: usize,
    pub days: usize,
    pub day_clock_minutes: usize,
    pub sampling_interval: usize,
}

impl Default for SessionSection {
    fn default() -> Self {
        Self { minutes_per_day: 505, days: 88, day_clock_minutes: 1440, sampling_interval: 1 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CleanSection {
    pub k: usize,
    pub delta: f64,
    pub c: f64,
    pub gamma: f64,
}

impl Default for CleanSection {
    fn default() -> Self {
        let d = CleanConfig::default();
        Self { k: d.k, delta: d.delta, c: d.c, gamma: d.gamma }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuctionSection {
    pub threshold_min: f64,
}

impl Default for AuctionSection {
    fn default() -> Self {
        Self { threshold_min: 10.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSection {
    pub bound: f64,
}

impl Default for SplitSection {
    fn default() -> Self {
        Self { bound: 0.2 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectSection {
    pub theta: f64,
    pub ewma_m: usize,
    pub warmup: usize,
}

impl Default for DetectSection {
    fn default() -> Self {
        let d = DetectionConfig::default();
        Self { theta: d.theta, ewma_m: d.ewma_m, warmup: d.warmup }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McTestSection {
    pub w_min: u32,
    pub w_max: u32,
    pub n_mc: usize,
    pub levels: [f64; 2],
}

impl Default for McTestSection {
    fn default() -> Self {
        Self { w_min: 1, w_max: 30, n_mc: 10_000, levels: [0.95, 0.99] }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HawkesSection {
    pub multistarts: usize,
    pub max_iter: usize,
    pub n_ann: usize,
    pub anneal_steps: usize,
    pub cooling: f64,
    /// Report log-likelihoods with the additive `t_n` constant.
    pub paper_constant: bool,
}

impl Default for HawkesSection {
    fn default() -> Self {
        let d = FitOptions::default();
        Self {
            multistarts: d.multistarts,
            max_iter: d.max_iter,
            n_ann: d.n_ann,
            anneal_steps: d.anneal_steps,
            cooling: d.cooling,
            paper_constant: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FactorSection {
    pub significance: f64,
    /// "sample-length" or "tested-minutes".
    pub bonferroni: String,
    pub max_iters: usize,
}

impl Default for FactorSection {
    fn default() -> Self {
        Self { significance: 0.01, bonferroni: "sample-length".into(), max_iters: 20 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    pub days: usize,
    pub jump_rate_per_day: f64,
    pub mult_lo: f64,
    pub mult_hi: f64,
    pub noise_std: f64,
    pub intertrade_mean_s: f64,
    /// Optional CSV of empirical intertrade gaps (seconds, one per line,
    /// header `gap_s`); overrides the exponential sampler.
    pub intertrade_file: Option<String>,
    pub flat_pattern: bool,
    pub initial_price: f64,
    pub match_window: u32,
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            days: 4_400,
            jump_rate_per_day: 3.0,
            mult_lo: 4.5,
            mult_hi: 8.0,
            noise_std: 1e-5 / 1440.0,
            intertrade_mean_s: 2.0,
            intertrade_file: None,
            flat_pattern: false,
            initial_price: 10.0,
            match_window: 0,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text)
            .map_err(|e| Error::InvalidParameter(format!("config {}: {e}", path.display())))
    }

    pub fn session(&self) -> SessionSpec {
        SessionSpec {
            minutes_per_day: self.session.minutes_per_day,
            days: self.session.days,
            sampling_interval: self.session.sampling_interval,
            day_clock_minutes: self.session.day_clock_minutes,
        }
    }

    pub fn clean_config(&self) -> CleanConfig {
        CleanConfig { k: self.clean.k, delta: self.clean.delta, c: self.clean.c, gamma: self.clean.gamma }
    }

    pub fn detection_config(&self) -> DetectionConfig {
        DetectionConfig { theta: self.detect.theta, ewma_m: self.detect.ewma_m, warmup: self.detect.warmup }
    }

    pub fn w_grid(&self) -> Vec<u32> {
        (self.mctest.w_min..=self.mctest.w_max).collect()
    }

    pub fn fit_options(&self, seed: u64) -> FitOptions {
        FitOptions {
            convention: if self.hawkes.paper_constant {
                LogLikConvention::PaperConstant
            } else {
                LogLikConvention::Standard
            },
            multistarts: self.hawkes.multistarts,
            max_iter: self.hawkes.max_iter,
            n_ann: self.hawkes.n_ann,
            anneal_steps: self.hawkes.anneal_steps,
            cooling: self.hawkes.cooling,
            seed,
            ..FitOptions::default()
        }
    }

    pub fn scan_config(&self) -> Result<ScanConfig> {
        let scope = match self.factor.bonferroni.as_str() {
            "sample-length" => BonferroniScope::SampleLength,
            "tested-minutes" => BonferroniScope::TestedMinutes,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "factor.bonferroni must be 'sample-length' or 'tested-minutes', got '{other}'"
                )))
            }
        };
        Ok(ScanConfig { dt: 1.0, significance: self.factor.significance, scope })
    }

    pub fn extract_config(&self, seed: u64) -> Result<ExtractConfig> {
        Ok(ExtractConfig {
            scan: self.scan_config()?,
            max_iters: self.factor.max_iters,
            fit: self.fit_options(seed),
        })
    }

    pub fn sim_config(&self, seed: u64) -> Result<SimConfig> {
        let intertrade = match &self.sim.intertrade_file {
            Some(path) if !path.is_empty() => {
                let text = std::fs::read_to_string(path)?;
                let mut gaps = Vec::new();
                for (i, line) in text.lines().enumerate() {
                    if i == 0 {
                        if line.trim() != "gap_s" {
                            return Err(Error::Csv {
                                line: 1,
                                msg: "expected header 'gap_s'".into(),
                            });
                        }
                        continue;
                    }
                    if line.trim().is_empty() {
                        continue;
                    }
                    gaps.push(line.trim().parse().map_err(|_| Error::Csv {
                        line: i + 1,
                        msg: "bad gap value".into(),
                    })?);
                }
                IntertradeSampler::Empirical { gaps_s: gaps }
            }
            _ => IntertradeSampler::Exponential { mean_s: self.sim.intertrade_mean_s },
        };
        Ok(SimConfig {
            days: self.sim.days,
            minutes_per_day: self.session.minutes_per_day,
            day_clock_minutes: self.session.day_clock_minutes,
            mu: 0.0,
            noise_std: self.sim.noise_std,
            jump_rate_per_day: self.sim.jump_rate_per_day,
            jump_size: JumpSizeDist::Uniform { lo: self.sim.mult_lo, hi: self.sim.mult_hi },
            gou: Default::default(),
            pattern: if self.sim.flat_pattern {
                Some(vec![1.0; self.session.minutes_per_day])
            } else {
                None
            },
            intertrade,
            initial_price: self.sim.initial_price,
            seed,
        })
    }
}
