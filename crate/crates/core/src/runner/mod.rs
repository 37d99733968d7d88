//! Experiment orchestration: config, dispatch, worker pool and reports.

mod config;
pub mod experiments;
mod report;

pub use config::{Format, ParamDefault, ParamKind, ParamSpec, ParamValue, Params, RunConfig, RUNNER_KEYS};
pub use experiments::{find, registry, Experiment, RunContext};
pub use report::{emit_report, parse_json_report, write_report, ExperimentReport, Record, Z_THRESHOLD};

use crate::error::{LabError, Result};
use std::time::Instant;

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn experiment_names() -> Vec<&'static str> {
    registry().iter().map(|e| e.name).collect()
}

pub fn run_experiment(config: &RunConfig) -> Result<ExperimentReport> {
    let exp = find(&config.experiment).ok_or_else(|| {
        LabError::Usage(format!(
            "unknown experiment {:?}; available: {}",
            config.experiment,
            experiment_names().join(", ")
        ))
    })?;
    let params = Params::validate(exp.schema, &config.params)?;
    let start = Instant::now();
    let mut ctx = RunContext::new(config.seed, config.phase_guard_bits);
    let records = match config.threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| LabError::Usage(format!("cannot start {k} worker threads: {e}")))?
            .install(|| exp.run(&params, &mut ctx))?,
        None => exp.run(&params, &mut ctx)?,
    };
    Ok(ExperimentReport {
        experiment: exp.name.to_string(),
        code_version: CODE_VERSION.to_string(),
        seed: config.seed,
        threads: config.threads,
        phase_guard_bits: config.phase_guard_bits,
        config: params.values().clone(),
        records,
        sampler: ctx.sampler,
        warnings: ctx.warnings,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Process exit code for a finished run.
pub fn exit_code(outcome: &Result<ExperimentReport>) -> i32 {
    match outcome {
        Ok(r) if r.all_pass() => 0,
        Ok(_) => 1,
        Err(e) => error_exit_code(e),
    }
}

pub fn error_exit_code(e: &LabError) -> i32 {
    match e {
        LabError::Usage(_) | LabError::Schema { .. } => 2,
        _ => 3,
    }
}
