//! Configuration, experiment modes, output writers and the theory-check suite.

mod checks;
mod config;
mod modes;
mod output;

pub use checks::{
    baseline_setup, coupled_contraction_excess, determinism_configs, mixing_setup, quadratic_gap_ratio, run_check,
    theory_check_suite, CheckRecord, Fault, SuiteOptions, CHECK_IDS, DEFAULT_SUITE_SEED,
    FD_CONFIGS, FD_TOLERANCE, GAP_RATIO_RANGE, HITTING_BALL_RADIUS,
};
pub use config::{Algorithm, ExperimentConfig, Mode, OutputSpec, PriorSpec, ProblemSpec, SamplerSpec};
pub use modes::{
    invert_runs, mixing_curve, rric_sweep, run_experiment, wdc_sweep, InvertRun, InvertSetup,
    MixingSetup, RunOutcome, RunStatus,
};
pub use output::{atomic_write, line_chart_svg, CsvTable, ResultRecord, Series};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "LANGEVIN_THREADS";

/// Sizes the global worker pool from [`THREADS_ENV`]; unset or `0` means
/// one thread per available core. Results do not depend on the count.
pub fn configure_threads() -> crate::Result<usize> {
    let requested = match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse::<usize>().map_err(|_| {
            crate::Error::Config(format!("{THREADS_ENV} must be a nonnegative integer, got {v:?}"))
        })?,
        Err(_) => 0,
    };
    let _ = rayon::ThreadPoolBuilder::new().num_threads(requested).build_global();
    Ok(rayon::current_num_threads())
}

/// Process exit code for a library error: 4 for I/O, 2 otherwise.
pub fn exit_code(err: &crate::Error) -> i32 {
    match err {
        crate::Error::Io(_) => 4,
        _ => 2,
    }
}
