//! Simulation experiments: many trajectories of the evolution model,
//! blockmodeled at each checkpoint, with records persisted as CSV.

mod config;
mod run;
mod summary;

pub use config::{ExperimentConfig, ExplicitTheta, RfMode};
pub use run::{
    analyse_snapshot, experiment_thetas, run_experiment, run_trajectory, read_records,
    write_records, RunManifest, RunOutcome, SimulationRecord, TrajectoryFailure,
};
pub use summary::{summarize, CheckpointSummary, ThetaSummary};
