//! Deterministic multi-robot simulator.

pub mod batch;
pub mod config;
pub mod persist;
pub mod plot;
pub mod robot;
pub mod trial;

pub use batch::{run_batch, Arm, BatchReport};
pub use config::{PlannerKind, RobotConfig, ScenarioConfig, TargetConfig};
pub use persist::{replay, write_run, ReplayReport, RunManifest};
pub use trial::{run_trial, run_trial_with, MessageLogEntry, MetricsRow, TrialOptions, TrialOutput};
