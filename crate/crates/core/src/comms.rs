//! Inter-robot channel model and fusion of peer messages into a robot's dataset.

use std::cmp::Ordering;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::belief::{RecordKind, RobotId, SensingDataset, SensingRecord};
use crate::error::{Error, Result};
use crate::grid::GridSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageKind {
    Pose,
    Goal,
    Track,
}

/// Message body. Cells are flattened grid indices chosen by the sender.
///
/// Variant order matters for untagged decoding: the richest shape is tried first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Payload {
    Track { cell: usize, y: f64, c: f64 },
    Goal { cells: Vec<usize> },
    Pose { cell: usize },
}

impl Payload {
    pub fn kind(&self) -> MessageKind {
        match self {
            Payload::Pose { .. } => MessageKind::Pose,
            Payload::Goal { .. } => MessageKind::Goal,
            Payload::Track { .. } => MessageKind::Track,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeerMessage {
    pub sender: RobotId,
    pub timestamp: f64,
    pub payload: Payload,
}

impl PeerMessage {
    pub fn new(sender: RobotId, timestamp: f64, payload: Payload) -> Result<Self> {
        if !(timestamp >= 0.0) {
            return Err(Error::InvalidParameter(format!("negative timestamp {timestamp}")));
        }
        match &payload {
            Payload::Goal { cells } if cells.is_empty() => {
                return Err(Error::InvalidParameter("goal message without cells".into()));
            }
            Payload::Track { c, .. } if !(*c > 0.0) => {
                return Err(Error::NonPositiveConfidence { index: 0, confidence: *c });
            }
            _ => {}
        }
        Ok(Self {
            sender,
            timestamp,
            payload,
        })
    }

    pub fn kind(&self) -> MessageKind {
        self.payload.kind()
    }

    /// Canonical delivery order: timestamp, then sender, then kind.
    pub fn delivery_order(&self, other: &Self) -> Ordering {
        self.timestamp
            .total_cmp(&other.timestamp)
            .then(self.sender.cmp(&other.sender))
            .then(self.kind().cmp(&other.kind()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FusionConfig {
    pub c_peer_pose: f64,
    pub c_goal: f64,
    pub y_empty: f64,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            c_peer_pose: 1.0,
            c_goal: 0.5,
            y_empty: 0.0,
        }
    }
}

/// Appends the rows implied by `msg` to `dataset`, in payload order. Nothing is
/// appended if any cell is outside the grid.
pub fn fuse_message(dataset: &mut SensingDataset, msg: &PeerMessage, grid: &GridSpec, cfg: &FusionConfig) -> Result<()> {
    let from = msg.sender;
    match &msg.payload {
        Payload::Pose { cell } => {
            grid.check_index(*cell)?;
            dataset.push(SensingRecord::new(*cell, cfg.y_empty, cfg.c_peer_pose, from, RecordKind::PeerPosition));
        }
        Payload::Goal { cells } => {
            for &cell in cells {
                grid.check_index(cell)?;
            }
            dataset.extend(
                cells
                    .iter()
                    .map(|&cell| SensingRecord::new(cell, cfg.y_empty, cfg.c_goal, from, RecordKind::PeerGoalCell)),
            );
        }
        Payload::Track { cell, y, c } => {
            grid.check_index(*cell)?;
            if !(*c > 0.0) {
                return Err(Error::NonPositiveConfidence { index: dataset.len(), confidence: *c });
            }
            dataset.push(SensingRecord::new(*cell, *y, *c, from, RecordKind::PeerDetection));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    pub enabled: bool,
    pub drop_probability: f64,
    pub latency: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            drop_probability: 0.0,
            latency: 0.0,
        }
    }
}

impl ChannelConfig {
    pub fn disabled() -> Self {
        Self {
            enabled: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.drop_probability) {
            return Err(Error::config("channel.drop_probability", "must lie in [0, 1]"));
        }
        if !(self.latency >= 0.0 && self.latency.is_finite()) {
            return Err(Error::config("channel.latency", "must be a non-negative number of seconds"));
        }
        Ok(())
    }
}

/// Decides whether an individual due message is lost.
pub trait DropPolicy {
    fn dropped(&mut self, msg: &PeerMessage, drop_probability: f64) -> Result<bool>;
}

/// Independent Bernoulli losses drawn from a seeded stream.
#[derive(Debug, Clone)]
pub struct RandomDrops<R> {
    rng: R,
}

impl<R: Rng> RandomDrops<R> {
    pub fn new(rng: R) -> Self {
        Self { rng }
    }
}

impl<R: Rng> DropPolicy for RandomDrops<R> {
    fn dropped(&mut self, _msg: &PeerMessage, drop_probability: f64) -> Result<bool> {
        Ok(self.rng.random::<f64>() < drop_probability)
    }
}

/// A due message with its delivery outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub message: PeerMessage,
    pub delivered: bool,
}

/// Removes every message that is due at `now` from `queue` and decides its
/// fate, in canonical delivery order. A disabled channel loses everything
/// queued without consulting the policy.
pub fn resolve_due<P: DropPolicy + ?Sized>(
    queue: &mut Vec<PeerMessage>,
    cfg: &ChannelConfig,
    now: f64,
    policy: &mut P,
) -> Result<Vec<Resolved>> {
    let mut due: Vec<PeerMessage>;
    if cfg.enabled {
        let (ready, waiting): (Vec<_>, Vec<_>) = queue.drain(..).partition(|m| m.timestamp + cfg.latency <= now);
        *queue = waiting;
        due = ready;
    } else {
        due = std::mem::take(queue);
    }
    due.sort_by(PeerMessage::delivery_order);
    due.into_iter()
        .map(|message| {
            let delivered = cfg.enabled && !policy.dropped(&message, cfg.drop_probability)?;
            Ok(Resolved { message, delivered })
        })
        .collect()
}

/// Messages delivered at `now`, sorted by `(timestamp, sender, kind)`.
pub fn deliver<P: DropPolicy + ?Sized>(
    queue: &mut Vec<PeerMessage>,
    cfg: &ChannelConfig,
    now: f64,
    policy: &mut P,
) -> Result<Vec<PeerMessage>> {
    Ok(resolve_due(queue, cfg, now, policy)?
        .into_iter()
        .filter(|r| r.delivered)
        .map(|r| r.message)
        .collect())
}
