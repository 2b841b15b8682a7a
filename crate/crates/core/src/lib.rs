//! Point-process laboratory for minute-sampled price series: tick cleaning,
//! jump detection with jump-robust EWMA volatility, Hawkes calibration,
//! multi-scale MJ/CJ tests with analytic and Monte-Carlo confidence bands,
//! systemic-cojump factor decomposition and a market simulator to validate
//! every stage.

pub mod clean;
pub mod config;
pub mod detect;
pub mod error;
pub mod factor;
pub mod hawkes;
pub mod io;
pub mod linalg;
pub mod mctest;
pub mod optim;
pub mod pbinom;
pub mod rng;
pub mod series;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
