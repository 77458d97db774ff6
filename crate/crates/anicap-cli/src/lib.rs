//! Front end of the `anicap` binary: run configuration, the data
//! expression language and the task pipelines.

pub mod config;
pub mod expr;
pub mod run;

use std::path::{Path, PathBuf};

pub use config::{ConfigError, RunConfig, Task};
pub use run::{execute, report, RunError};

/// Command-line overrides applied on top of a loaded config.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub resolution: Option<String>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(o) = &self.out {
            cfg.out = Some(o.to_string_lossy().into_owned());
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(r) = &self.resolution {
            cfg.grid.resolution = Some(r.clone());
        }
    }
}

/// Result of one complete run: where the report went and the exit status.
#[derive(Debug)]
pub struct RunSummary {
    pub out_dir: Option<PathBuf>,
    pub status: i32,
    pub error: Option<(String, String)>,
}

/// Loads, runs and writes the report. `task = None` takes the task from
/// the config.
pub fn run_config_file(path: &Path, task: Option<Task>, ov: &Overrides) -> RunSummary {
    let mut cfg = match RunConfig::load(path) {
        Ok(c) => c,
        Err(e) => return RunSummary { out_dir: None, status: 2, error: Some(("ConfigError".into(), e.0)) },
    };
    ov.apply(&mut cfg);
    let task = match task.or(cfg.task) {
        Some(t) => t,
        None => {
            return RunSummary { out_dir: None, status: 2, error: Some(("ConfigError".into(), "no task given".into())) }
        }
    };
    cfg.task = Some(task);
    run_loaded(&cfg, task)
}

pub fn run_loaded(cfg: &RunConfig, task: Task) -> RunSummary {
    let outcome = execute(cfg, task);
    let doc = report(cfg, task, &outcome);
    let dir = cfg.out_dir();
    let files = outcome.as_ref().map(|o| o.files.as_slice()).unwrap_or(&[]);
    if let Err(e) = run::write_outputs(&dir, &doc, files) {
        return RunSummary { out_dir: None, status: 2, error: Some(("ConfigError".into(), format!("cannot write {}: {e}", dir.display()))) };
    }
    match outcome {
        Ok(o) => RunSummary { out_dir: Some(dir), status: o.status, error: None },
        Err(e) => RunSummary { out_dir: Some(dir), status: e.exit_code(), error: Some((e.class().into(), e.to_string())) },
    }
}
