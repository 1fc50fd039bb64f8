//! Scenario configuration, read from TOML.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::action::{cells_in_zone, ZoneCells, ZonePolygon};
use crate::belief::RobotId;
use crate::comms::{ChannelConfig, FusionConfig};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, Point2};
use crate::guts::GutsConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlannerKind {
    Guts,
    Coverage,
}

impl PlannerKind {
    pub fn name(self) -> &'static str {
        match self {
            PlannerKind::Guts => "guts",
            PlannerKind::Coverage => "coverage",
        }
    }
}

fn default_v_max() -> f64 {
    10.0
}

fn default_a_max() -> f64 {
    5.0
}

fn default_planner() -> PlannerKind {
    PlannerKind::Guts
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotConfig {
    pub id: RobotId,
    pub start: Point2,
    #[serde(default = "default_v_max")]
    pub v_max: f64,
    #[serde(default = "default_a_max")]
    pub a_max: f64,
    #[serde(default = "default_planner")]
    pub planner: PlannerKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    pub cell: usize,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatchConfig {
    /// Target confidences swept by the view-count study; empty disables it.
    pub confidence_sweep: Vec<f64>,
}

fn default_tick() -> f64 {
    0.1
}

fn default_replan_lead() -> f64 {
    0.5
}

fn default_trials() -> usize {
    1
}

fn default_metrics_every() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Simulated seconds per trial.
    pub duration: f64,
    #[serde(default = "default_tick")]
    pub tick: f64,
    /// Seconds before waypoint arrival at which the next action is chosen.
    #[serde(default = "default_replan_lead")]
    pub replan_lead: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_metrics_every")]
    pub metrics_every: f64,
    pub grid: GridSpec,
    /// Defaults to the full grid rectangle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zone: Option<ZonePolygon>,
    #[serde(default)]
    pub channel: ChannelConfig,
    #[serde(default)]
    pub planner: GutsConfig,
    #[serde(default)]
    pub fusion: FusionConfig,
    #[serde(default)]
    pub batch: BatchConfig,
    pub robots: Vec<RobotConfig>,
    #[serde(default)]
    pub targets: Vec<TargetConfig>,
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Canonical TOML text; re-parsing it yields an equal config.
    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario config serializes to TOML")
    }

    /// SHA-256 of the canonical TOML text, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml_string().as_bytes()))
    }

    pub fn zone(&self) -> ZonePolygon {
        self.zone.clone().unwrap_or_else(|| ZonePolygon::covering(&self.grid))
    }

    pub fn zone_cells(&self) -> Result<ZoneCells> {
        cells_in_zone(&self.grid, &self.zone())
    }

    pub fn tick_count(&self) -> u64 {
        (self.duration / self.tick).round() as u64
    }

    /// Ticks between metric samples.
    pub fn metrics_stride(&self) -> u64 {
        ((self.metrics_every / self.tick).round() as u64).max(1)
    }

    /// Copy with every robot using `planner`.
    pub fn with_planner(&self, planner: PlannerKind) -> Self {
        let mut cfg = self.clone();
        for r in &mut cfg.robots {
            r.planner = planner;
        }
        cfg
    }

    pub fn with_channel_enabled(&self, enabled: bool) -> Self {
        let mut cfg = self.clone();
        cfg.channel.enabled = enabled;
        cfg
    }

    /// Copy with every target's confidence replaced.
    pub fn with_target_confidence(&self, confidence: f64) -> Self {
        let mut cfg = self.clone();
        for t in &mut cfg.targets {
            t.confidence = confidence;
        }
        cfg
    }

    /// Copy keeping only the robot `id`.
    pub fn isolated(&self, id: RobotId) -> Self {
        let mut cfg = self.clone();
        cfg.robots.retain(|r| r.id == id);
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.duration) {
            return Err(Error::config("duration", "must be positive"));
        }
        if !positive(self.tick) {
            return Err(Error::config("tick", "must be positive"));
        }
        if !(self.replan_lead >= 0.0 && self.replan_lead.is_finite()) {
            return Err(Error::config("replan_lead", "must be non-negative"));
        }
        if self.trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        if !positive(self.metrics_every) {
            return Err(Error::config("metrics_every", "must be positive"));
        }
        if !(self.planner.lambda >= 0.0) {
            return Err(Error::config("planner.lambda", "must be non-negative"));
        }
        if !positive(self.planner.c_plan) {
            return Err(Error::config("planner.c_plan", "must be positive"));
        }
        if self.planner.em.max_iters == 0 {
            return Err(Error::config("planner.em.max_iters", "must be at least 1"));
        }
        if !(self.planner.em.tol >= 0.0) {
            return Err(Error::config("planner.em.tol", "must be non-negative"));
        }
        if 1.0 + 2.0 * self.planner.em.a_m == 0.0 {
            return Err(Error::config("planner.em.a_m", "1 + 2 a_m must be non-zero"));
        }
        if !positive(self.fusion.c_peer_pose) {
            return Err(Error::config("fusion.c_peer_pose", "must be positive"));
        }
        if !positive(self.fusion.c_goal) {
            return Err(Error::config("fusion.c_goal", "must be positive"));
        }
        self.channel.validate()?;
        let zone = self.zone();
        let cells = cells_in_zone(&self.grid, &zone)
            .map_err(|e| Error::config("zone", e.to_string()))?;
        if cells.center_in.is_empty() {
            return Err(Error::config("zone", "contains no cell centers"));
        }
        if self.robots.is_empty() {
            return Err(Error::config("robots", "at least one robot is required"));
        }
        let mut ids = HashSet::new();
        for (i, r) in self.robots.iter().enumerate() {
            if !ids.insert(r.id) {
                return Err(Error::config(format!("robots[{i}].id"), format!("duplicate id {}", r.id)));
            }
            if !zone.contains(r.start) || !self.grid.contains(r.start) {
                return Err(Error::config(format!("robots[{i}].start"), "must lie inside the zone"));
            }
            if !positive(r.v_max) {
                return Err(Error::config(format!("robots[{i}].v_max"), "must be positive"));
            }
            if !positive(r.a_max) {
                return Err(Error::config(format!("robots[{i}].a_max"), "must be positive"));
            }
        }
        let mut target_cells = HashSet::new();
        for (i, t) in self.targets.iter().enumerate() {
            if t.cell >= self.grid.cell_count() || !cells.in_zone(t.cell) {
                return Err(Error::config(format!("targets[{i}].cell"), "must be a cell inside the zone"));
            }
            if !(t.confidence > 0.0 && t.confidence <= 1.0) {
                return Err(Error::config(format!("targets[{i}].confidence"), "must lie in (0, 1]"));
            }
            if !target_cells.insert(t.cell) {
                return Err(Error::config(format!("targets[{i}].cell"), "duplicate target cell"));
            }
        }
        for (i, c) in self.batch.confidence_sweep.iter().enumerate() {
            if !(*c > 0.0 && *c <= 1.0) {
                return Err(Error::config(format!("batch.confidence_sweep[{i}]"), "must lie in (0, 1]"));
            }
        }
        Ok(())
    }
}
