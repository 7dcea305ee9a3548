//! Command-line harness for `synthreg-core`: configuration, CSV ingestion,
//! design matrices and the experiment scenarios.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod design;
pub mod error;
pub mod io;
mod scenarios;

use std::path::PathBuf;

pub use config::{ExperimentConfig, Scenario};
pub use error::{HarnessError, Result};
pub use scenarios::nonpivotal::{order_quantile, quantile_se};

/// Validates `cfg`, runs its scenario into `<output>.partial`, writes
/// `config.toml` and `summary.json`, and moves the directory to
/// `cfg.output`. On error the partial directory is removed.
pub fn run(cfg: &ExperimentConfig) -> Result<PathBuf> {
    cfg.validate()?;
    let staging = io::Staging::create(&cfg.output)?;
    let results = scenarios::execute(cfg, &staging).map_err(|e| e.context(format!("scenario {:?}", cfg.scenario)))?;
    std::fs::write(staging.path("config.toml"), cfg.to_toml_string()?)
        .map_err(|e| HarnessError::io(staging.path("config.toml"), e))?;
    let summary = serde_json::json!({
        "scenario": cfg.scenario,
        "seed": cfg.mc.seed,
        "results": results,
    });
    io::write_json(&staging.path("summary.json"), &summary)?;
    staging.commit()
}

/// [`run`] on a dedicated pool of `threads` worker threads.
pub fn run_with_threads(cfg: &ExperimentConfig, threads: usize) -> Result<PathBuf> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| HarnessError::Config(format!("cannot start {threads} threads: {e}")))?;
    pool.install(|| run(cfg))
}
