//! Experiment runner: configuration parsing, orchestration and the artifact
//! directory layout used by the `rwl` binary.

pub mod config;
pub mod experiments;
pub mod output;

use anyhow::{Context, Result};
use config::{ExperimentConfig, StudyKind};
use experiments::Check;
use output::OutputDir;
use std::path::Path;

#[derive(Debug)]
pub struct Outcome {
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass || !c.enforced)
    }
}

/// Runs `cfg`, writing into `out`. `config_text` is echoed verbatim as
/// `config.toml`.
///
/// Solver errors leave the MANIFEST marked INCOMPLETE and are returned;
/// failed invariant checks are reported in `checks.txt` and in the returned
/// [`Outcome`].
pub fn run_experiment(cfg: &ExperimentConfig, config_text: &str, overrides: &str, out: &Path) -> Result<Outcome> {
    let mut dir = OutputDir::create(out)?;
    dir.text("config.toml", config_text)?;
    if !overrides.is_empty() {
        dir.text("overrides.txt", overrides)?;
    }
    let result = match cfg.kind {
        StudyKind::Propagate => experiments::propagate(cfg, &mut dir),
        StudyKind::Decay => experiments::decay(cfg, &mut dir),
        StudyKind::Project => experiments::project(cfg, &mut dir),
        StudyKind::QgRun => experiments::qg_run(cfg, &mut dir),
        StudyKind::NsRun => experiments::ns_run(cfg, &mut dir),
        StudyKind::LimitStudy => experiments::limit_study(cfg, &mut dir),
    };
    let checks = match result {
        Ok(c) => c,
        Err(e) => {
            dir.finish(false).context("writing MANIFEST after failure")?;
            return Err(e.context(format!("{} failed", cfg.kind.name())));
        }
    };
    let report: String = checks.iter().map(|c| c.line() + "\n").collect();
    dir.text("checks.txt", &report)?;
    dir.finish(true)?;
    Ok(Outcome { checks })
}
