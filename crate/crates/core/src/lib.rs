//! Decentralized multi-robot active search.
//!
//! Robots keep a sparse Bayesian belief over a flattened search grid
//! ([`belief`]), pick straight-line sensing actions by Thompson sampling
//! ([`guts`]) or by a greedy coverage rule ([`coverage`]), share poses, goals
//! and detections over an unreliable channel ([`comms`]), and fly quintic
//! trajectories between waypoints ([`trajectory`]). The [`sim`] module ties
//! these together into a deterministic, replayable simulator.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod action;
pub mod belief;
pub mod comms;
pub mod coverage;
pub mod error;
pub mod grid;
pub mod guts;
pub mod sim;
pub mod trajectory;

pub use action::{cells_in_zone, enumerate_candidates, supercover_trace, CandidateAction, CellClass, ZoneCells, ZonePolygon};
pub use belief::{
    em_posterior, gamma_update, sample_posterior, BeliefPosterior, CellStatistics, EmConfig, RecordKind, RobotId,
    SensingDataset, SensingRecord,
};
pub use comms::{deliver, fuse_message, ChannelConfig, FusionConfig, MessageKind, Payload, PeerMessage};
pub use coverage::{select_coverage_action, CoverageDecision, VisitedMask};
pub use error::{Error, Result};
pub use grid::{GridSpec, Point2};
pub use guts::{evaluate_loss, hypothetical_estimate, indicator, select_action, GutsConfig, LossBreakdown};
pub use trajectory::{check_limits, rescale_time, solve_quintic, AxisBoundary, LimitReport, TrajectorySegment};
pub use sim::{run_batch, run_trial, PlannerKind, ScenarioConfig};
