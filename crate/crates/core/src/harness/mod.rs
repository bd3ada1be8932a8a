//! Experiment configuration, replication runner, regret accounting and
//! CSV output.

pub mod config;
pub mod output;
pub mod presets;
pub mod runner;

pub use config::{default_checkpoints, ConfigFile, ExperimentConfig, Scenario, DEFAULT_EPSILONS};
pub use output::{emit_csv, emit_metadata, format_significant, metadata_path, sweep_csv_path, write_csv, CSV_HEADER};
pub use presets::{comparison_policies, preset, Preset, PRESET_NAMES};
pub use runner::{
    regret_at_checkpoints, run_epsilon_sweep, run_experiment, run_replication, simulate, ExperimentResult, RegretTrace,
    RunOptions, LDP_UPPER_BOUND_TAG, LOWER_BOUND_TAG, THREADS_ENV,
};
