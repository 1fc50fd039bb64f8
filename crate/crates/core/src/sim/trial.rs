//! Fixed-tick trial loop.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::belief::{RobotId, SensingDataset};
use crate::comms::{resolve_due, DropPolicy, MessageKind, Payload, PeerMessage, RandomDrops};
use crate::coverage::VisitedMask;
use crate::error::{Error, Result};
use crate::grid::Point2;

use super::config::ScenarioConfig;
use super::robot::{channel_rng, Robot, World};

/// One sample of the metrics table. `robot == None` is the team aggregate.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub time: f64,
    pub robot: Option<RobotId>,
    pub position: Option<Point2>,
    pub cells_visited: usize,
    pub pct_unknown: f64,
    pub views: Vec<u64>,
}

/// A message's fate at one receiver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MessageLogEntry {
    pub tick: u64,
    pub sender: RobotId,
    pub receiver: RobotId,
    pub kind: MessageKind,
    pub timestamp: f64,
    pub payload: Payload,
    pub delivered: bool,
}

/// Replays logged delivery outcomes in order.
#[derive(Debug, Clone, Default)]
pub struct ScriptedDrops {
    outcomes: VecDeque<bool>,
}

impl ScriptedDrops {
    pub fn new(delivered: impl IntoIterator<Item = bool>) -> Self {
        Self {
            outcomes: delivered.into_iter().collect(),
        }
    }

    pub fn remaining(&self) -> usize {
        self.outcomes.len()
    }
}

impl DropPolicy for ScriptedDrops {
    fn dropped(&mut self, msg: &PeerMessage, _drop_probability: f64) -> Result<bool> {
        match self.outcomes.pop_front() {
            Some(delivered) => Ok(!delivered),
            None => Err(Error::ReplayMismatch(format!(
                "log has no outcome for {:?} from robot {} at {}",
                msg.kind(),
                msg.sender,
                msg.timestamp
            ))),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub enum DropSource {
    /// Bernoulli losses from the per-receiver channel streams.
    #[default]
    Seeded,
    /// Per-receiver outcomes taken from a message log.
    Scripted(HashMap<RobotId, ScriptedDrops>),
}

impl DropSource {
    /// Scripted outcomes for every receiver in `log`.
    pub fn from_log(log: &[MessageLogEntry]) -> Self {
        let mut by_receiver: HashMap<RobotId, Vec<bool>> = HashMap::new();
        for e in log {
            by_receiver.entry(e.receiver).or_default().push(e.delivered);
        }
        DropSource::Scripted(by_receiver.into_iter().map(|(r, d)| (r, ScriptedDrops::new(d))).collect())
    }
}

#[derive(Debug, Clone, Default)]
pub struct TrialOptions {
    pub record_messages: bool,
    pub drops: DropSource,
}

#[derive(Debug, Clone)]
pub struct TrialOutput {
    pub seed: u64,
    pub metrics: Vec<MetricsRow>,
    pub messages: Vec<MessageLogEntry>,
    pub datasets: Vec<(RobotId, SensingDataset)>,
    /// Planning rounds per robot.
    pub plans: Vec<(RobotId, u64)>,
    /// Error that ended the trial early.
    pub aborted: Option<String>,
}

impl TrialOutput {
    pub fn team_rows(&self) -> impl Iterator<Item = &MetricsRow> {
        self.metrics.iter().filter(|r| r.robot.is_none())
    }

    pub fn robot_rows(&self, id: RobotId) -> impl Iterator<Item = &MetricsRow> {
        self.metrics.iter().filter(move |r| r.robot == Some(id))
    }

    /// Team coverage at the last sample no later than `time`.
    pub fn team_pct_at(&self, time: f64) -> Option<f64> {
        self.team_rows().take_while(|r| r.time <= time + 1e-9).last().map(|r| r.pct_unknown)
    }

    pub fn final_team_pct(&self) -> Option<f64> {
        self.team_rows().last().map(|r| r.pct_unknown)
    }

    /// Views per target summed over the team at the end of the trial.
    pub fn final_views(&self) -> Vec<u64> {
        self.team_rows().last().map(|r| r.views.clone()).unwrap_or_default()
    }
}

pub fn run_trial(cfg: &ScenarioConfig, seed: u64) -> Result<TrialOutput> {
    run_trial_with(cfg, seed, TrialOptions::default())
}

/// Runs one trial. Configuration errors are returned; errors raised while
/// simulating end the trial and are recorded in [`TrialOutput::aborted`].
pub fn run_trial_with(cfg: &ScenarioConfig, seed: u64, opts: TrialOptions) -> Result<TrialOutput> {
    cfg.validate()?;
    let world = World::new(cfg)?;
    let mut sorted = cfg.robots.clone();
    sorted.sort_by_key(|r| r.id);
    let mut robots: Vec<Robot> = sorted.iter().map(|r| Robot::new(r, &world, seed)).collect();
    let mut policies: Vec<Box<dyn DropPolicy>> = match opts.drops {
        DropSource::Seeded => robots
            .iter()
            .map(|r| Box::new(RandomDrops::new(channel_rng(seed, r.id))) as Box<dyn DropPolicy>)
            .collect(),
        DropSource::Scripted(mut scripts) => robots
            .iter()
            .map(|r| Box::new(scripts.remove(&r.id).unwrap_or_default()) as Box<dyn DropPolicy>)
            .collect(),
    };
    let mut team = VisitedMask::new(&world.cells, world.grid.cell_count());
    let searchable = world.cells.searchable_count() as f64;
    let ticks = cfg.tick_count();
    let stride = cfg.metrics_stride();
    let mut out = TrialOutput {
        seed,
        metrics: Vec::new(),
        messages: Vec::new(),
        datasets: Vec::new(),
        plans: Vec::new(),
        aborted: None,
    };

    let sample = |time: f64, robots: &[Robot], team: &VisitedMask, rows: &mut Vec<MetricsRow>| {
        let mut team_views = vec![0; world.targets.len()];
        for r in robots {
            for (t, v) in team_views.iter_mut().zip(&r.views) {
                *t += v;
            }
            rows.push(MetricsRow {
                time,
                robot: Some(r.id),
                position: Some(r.position),
                cells_visited: r.visited().count(),
                pct_unknown: 100.0 * r.visited().count() as f64 / searchable,
                views: r.views.clone(),
            });
        }
        rows.push(MetricsRow {
            time,
            robot: None,
            position: None,
            cells_visited: team.count(),
            pct_unknown: 100.0 * team.count() as f64 / searchable,
            views: team_views,
        });
    };

    let mut outgoing: Vec<(RobotId, Payload)> = Vec::new();
    let mut result: Result<()> = (|| {
        for r in robots.iter_mut() {
            for p in r.start(&world, &mut team)? {
                outgoing.push((r.id, p));
            }
        }
        Ok(())
    })();
    if result.is_ok() {
        broadcast(&mut robots, &mut outgoing, 0.0)?;
    }
    sample(0.0, &robots, &team, &mut out.metrics);

    let mut k = 0;
    while result.is_ok() && k < ticks {
        k += 1;
        let now = k as f64 * cfg.tick;
        result = (|| {
            for (r, policy) in robots.iter_mut().zip(policies.iter_mut()) {
                for res in resolve_due(&mut r.inbox, &cfg.channel, now, policy.as_mut())? {
                    if res.delivered {
                        r.fuse(&world, &res.message)?;
                    }
                    if opts.record_messages {
                        out.messages.push(MessageLogEntry {
                            tick: k,
                            sender: res.message.sender,
                            receiver: r.id,
                            kind: res.message.kind(),
                            timestamp: res.message.timestamp,
                            payload: res.message.payload,
                            delivered: res.delivered,
                        });
                    }
                }
            }
            for r in robots.iter_mut() {
                for p in r.step(&world, &mut team)? {
                    outgoing.push((r.id, p));
                }
            }
            broadcast(&mut robots, &mut outgoing, now)
        })();
        if result.is_err() || k % stride == 0 || k == ticks {
            sample(now, &robots, &team, &mut out.metrics);
        }
    }
    if let Err(e) = result {
        out.aborted = Some(format!("tick {k}: {e}"));
    }
    out.plans = robots.iter().map(|r| (r.id, r.plans)).collect();
    out.datasets = robots.into_iter().map(|r| (r.id, r.dataset)).collect();
    Ok(out)
}

/// Queues every outgoing payload at each other robot.
fn broadcast(robots: &mut [Robot], outgoing: &mut Vec<(RobotId, Payload)>, now: f64) -> Result<()> {
    for (sender, payload) in outgoing.drain(..) {
        let msg = PeerMessage::new(sender, now, payload)?;
        for r in robots.iter_mut().filter(|r| r.id != sender) {
            r.inbox.push(msg.clone());
        }
    }
    Ok(())
}

/// Renders the metrics table as CSV text.
pub fn metrics_csv(rows: &[MetricsRow], target_count: usize) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["time".to_string(), "robot".into(), "x".into(), "y".into(), "cells_visited".into(), "pct_unknown".into()];
    header.extend((0..target_count).map(|i| format!("views_t{i}")));
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            format!("{:.3}", r.time),
            r.robot.map_or_else(|| "team".to_string(), |id| id.to_string()),
            r.position.map_or_else(String::new, |p| format!("{:.3}", p.x)),
            r.position.map_or_else(String::new, |p| format!("{:.3}", p.y)),
            r.cells_visited.to_string(),
            format!("{:.4}", r.pct_unknown),
        ];
        rec.extend(r.views.iter().map(u64::to_string));
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Renders the message log as JSON lines.
pub fn messages_jsonl(entries: &[MessageLogEntry]) -> Result<String> {
    let mut s = String::new();
    for e in entries {
        s.push_str(&serde_json::to_string(e)?);
        s.push('\n');
    }
    Ok(s)
}

pub fn parse_messages_jsonl(text: &str) -> Result<Vec<MessageLogEntry>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| Ok(serde_json::from_str(l)?))
        .collect()
}
