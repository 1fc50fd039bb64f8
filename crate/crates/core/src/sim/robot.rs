//! Per-robot state: belief, motion along quintic legs, sensing and planning.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::action::{supercover_trace, CandidateAction, ZoneCells, ZonePolygon};
use crate::belief::{em_from_statistics, CellStatistics, RecordKind, RobotId, SensingDataset, SensingRecord};
use crate::comms::{fuse_message, FusionConfig, Payload, PeerMessage};
use crate::coverage::{select_coverage_action_in, CoverageDecision, VisitedMask};
use crate::error::Result;
use crate::grid::{GridSpec, Point2};
use crate::guts::{select_action_in, GutsConfig};
use crate::trajectory::{rescale_time, rest_to_rest_horizon, solve_quintic, wrap_angle, AxisBoundary, TrajectorySegment};

use super::config::{PlannerKind, RobotConfig, ScenarioConfig};

/// Observation recorded over a cell without a target.
pub const Y_EMPTY: f64 = 0.0;
/// Confidence of a non-detection.
pub const C_EMPTY: f64 = 1.0;

/// Scenario data shared by every robot in a trial.
#[derive(Debug, Clone)]
pub struct World {
    pub grid: GridSpec,
    pub zone: ZonePolygon,
    pub cells: ZoneCells,
    pub planner: GutsConfig,
    pub fusion: FusionConfig,
    pub tick: f64,
    pub replan_lead: f64,
    /// `(cell, confidence)` per target.
    pub targets: Vec<(usize, f64)>,
    target_at: Vec<Option<usize>>,
}

impl World {
    pub fn new(cfg: &ScenarioConfig) -> Result<Self> {
        let cells = cfg.zone_cells()?;
        let mut target_at = vec![None; cfg.grid.cell_count()];
        for (i, t) in cfg.targets.iter().enumerate() {
            target_at[t.cell] = Some(i);
        }
        Ok(Self {
            grid: cfg.grid.clone(),
            zone: cfg.zone(),
            cells,
            planner: cfg.planner,
            fusion: cfg.fusion,
            tick: cfg.tick,
            replan_lead: cfg.replan_lead,
            targets: cfg.targets.iter().map(|t| (t.cell, t.confidence)).collect(),
            target_at,
        })
    }

    /// Target index held by `cell`, if any.
    pub fn target_in(&self, cell: usize) -> Option<usize> {
        self.target_at.get(cell).copied().flatten()
    }

    /// Detector output over `cell`: `(y, c)`.
    pub fn observe(&self, cell: usize) -> (f64, f64) {
        match self.target_in(cell) {
            Some(i) => (1.0, self.targets[i].1),
            None => (Y_EMPTY, C_EMPTY),
        }
    }
}

/// Planner stream of robot `id` within a trial.
pub fn planner_rng(trial_seed: u64, id: RobotId) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
    rng.set_stream(2 * u64::from(id));
    rng
}

/// Channel-loss stream of messages received by robot `id`.
pub fn channel_rng(trial_seed: u64, id: RobotId) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
    rng.set_stream(2 * u64::from(id) + 1);
    rng
}

/// Straight move between two waypoints, timed per axis by a common horizon.
#[derive(Debug, Clone)]
pub struct Leg {
    pub action: CandidateAction,
    pub x: TrajectorySegment,
    pub y: TrajectorySegment,
    pub heading: TrajectorySegment,
    pub elapsed: f64,
    /// Decision taken in flight for the waypoint after this one.
    pub next: Option<CoverageDecision>,
}

impl Leg {
    pub fn plan(action: CandidateAction, heading: f64, v_max: f64, a_max: f64) -> Result<Self> {
        let (p, g) = (action.start, action.goal);
        let t0 = rest_to_rest_horizon(p.distance(g), v_max, a_max).max(f64::MIN_POSITIVE);
        let x = rescale_time(&AxisBoundary::rest_to_rest(p.x, g.x, t0), v_max, a_max)?;
        let y = rescale_time(&AxisBoundary::rest_to_rest(p.y, g.y, t0), v_max, a_max)?;
        let horizon = x.horizon.max(y.horizon);
        let d = g.sub(p);
        let turn = if d.x == 0.0 && d.y == 0.0 { 0.0 } else { wrap_angle(d.y.atan2(d.x) - heading) };
        Ok(Self {
            x: solve_quintic(&AxisBoundary::rest_to_rest(p.x, g.x, horizon))?,
            y: solve_quintic(&AxisBoundary::rest_to_rest(p.y, g.y, horizon))?,
            heading: solve_quintic(&AxisBoundary::rest_to_rest(heading, heading + turn, horizon))?,
            action,
            elapsed: 0.0,
            next: None,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.x.horizon
    }

    pub fn position_at(&self, t: f64) -> Point2 {
        Point2::new(self.x.state_at(t).position, self.y.state_at(t).position)
    }
}

#[derive(Debug, Clone)]
pub enum Motion {
    /// Hovering, plans on the next tick.
    Idle,
    Moving(Box<Leg>),
    /// Coverage finished; hovers for the rest of the trial.
    Done,
}

#[derive(Debug, Clone)]
pub struct Robot {
    pub id: RobotId,
    pub planner: PlannerKind,
    pub v_max: f64,
    pub a_max: f64,
    pub position: Point2,
    pub heading: f64,
    pub motion: Motion,
    pub dataset: SensingDataset,
    stats: CellStatistics,
    /// Cells this robot sensed itself.
    visited: VisitedMask,
    /// Cells with any record, own or fused.
    known: VisitedMask,
    /// Per-target views by this robot.
    pub views: Vec<u64>,
    pub plans: u64,
    pub inbox: Vec<PeerMessage>,
    rng: ChaCha8Rng,
    prev_trace: Vec<usize>,
    tick_trace: Vec<usize>,
}

impl Robot {
    pub fn new(cfg: &RobotConfig, world: &World, trial_seed: u64) -> Self {
        let m = world.grid.cell_count();
        Self {
            id: cfg.id,
            planner: cfg.planner,
            v_max: cfg.v_max,
            a_max: cfg.a_max,
            position: cfg.start,
            heading: 0.0,
            motion: Motion::Idle,
            dataset: SensingDataset::new(),
            stats: CellStatistics::zeros(m),
            visited: VisitedMask::new(&world.cells, m),
            known: VisitedMask::new(&world.cells, m),
            views: vec![0; world.targets.len()],
            plans: 0,
            inbox: Vec::new(),
            rng: planner_rng(trial_seed, cfg.id),
            prev_trace: Vec::new(),
            tick_trace: Vec::new(),
        }
    }

    pub fn visited(&self) -> &VisitedMask {
        &self.visited
    }

    pub fn statistics(&self) -> &CellStatistics {
        &self.stats
    }

    pub fn current_cell(&self, grid: &GridSpec) -> usize {
        grid.cell_of(self.position).expect("robot stays on the grid")
    }

    fn record(&mut self, r: SensingRecord) {
        self.stats.add(&r);
        self.known.mark(r.cell_index);
        self.dataset.push(r);
    }

    /// Senses `cell` and queues its broadcast: a track on a detection, else a pose.
    fn sense(&mut self, world: &World, cell: usize, out: &mut Vec<Payload>, team: &mut VisitedMask) {
        let (y, c) = world.observe(cell);
        self.visited.mark(cell);
        team.mark(cell);
        match world.target_in(cell) {
            Some(t) => {
                self.views[t] += 1;
                self.record(SensingRecord::new(cell, y, c, self.id, RecordKind::SelfDetection));
                out.push(Payload::Track { cell, y, c });
            }
            None => {
                self.record(SensingRecord::new(cell, y, c, self.id, RecordKind::SelfPosition));
                out.push(Payload::Pose { cell });
            }
        }
    }

    /// Senses cells swept from `from` to `to` that were not in view during the previous tick.
    fn sweep(&mut self, world: &World, from: Point2, to: Point2, out: &mut Vec<Payload>, team: &mut VisitedMask) -> Result<()> {
        for cell in supercover_trace(&world.grid, from, to)? {
            if self.tick_trace.contains(&cell) {
                continue;
            }
            self.tick_trace.push(cell);
            if !self.prev_trace.contains(&cell) {
                self.sense(world, cell, out, team);
            }
        }
        Ok(())
    }

    fn end_tick(&mut self) {
        self.prev_trace = std::mem::take(&mut self.tick_trace);
    }

    /// Initial observation of the start position.
    pub fn start(&mut self, world: &World, team: &mut VisitedMask) -> Result<Vec<Payload>> {
        let mut out = Vec::new();
        self.sweep(world, self.position, self.position, &mut out, team)?;
        self.end_tick();
        Ok(out)
    }

    /// Folds a delivered peer message into the belief.
    pub fn fuse(&mut self, world: &World, msg: &PeerMessage) -> Result<()> {
        let before = self.dataset.len();
        fuse_message(&mut self.dataset, msg, &world.grid, &world.fusion)?;
        for i in before..self.dataset.len() {
            let r = self.dataset.records()[i];
            self.stats.add(&r);
            self.known.mark(r.cell_index);
        }
        Ok(())
    }

    /// Chooses the next action from `from`. `in_flight` lists cells this
    /// robot is about to sweep.
    pub fn plan(&mut self, world: &World, from: Point2, in_flight: &[usize]) -> Result<CoverageDecision> {
        self.plans += 1;
        match self.planner {
            PlannerKind::Guts => {
                let posterior = em_from_statistics(&self.stats, &world.planner.em)?;
                let (action, _) = select_action_in(
                    &self.stats,
                    &world.grid,
                    &world.zone,
                    &world.cells,
                    from,
                    &posterior.responsibilities,
                    &mut self.rng,
                    &world.planner,
                )?;
                Ok(CoverageDecision::Action(action))
            }
            PlannerKind::Coverage => {
                let mut known = self.known.clone();
                for &m in in_flight {
                    known.mark(m);
                }
                select_coverage_action_in(&known, &world.grid, &world.zone, &world.cells, from)
            }
        }
    }

    /// Advances one tick: motion, sensing and in-flight replanning.
    /// Returns the payloads to broadcast.
    pub fn step(&mut self, world: &World, team: &mut VisitedMask) -> Result<Vec<Payload>> {
        let mut out = Vec::new();
        let mut dt = world.tick;
        loop {
            match std::mem::replace(&mut self.motion, Motion::Idle) {
                Motion::Done => {
                    self.motion = Motion::Done;
                    self.sweep(world, self.position, self.position, &mut out, team)?;
                    break;
                }
                Motion::Idle => {
                    let decision = self.plan(world, self.position, &[])?;
                    if !self.begin(world, decision, &mut out, team)? {
                        break;
                    }
                }
                Motion::Moving(mut leg) => {
                    let from = self.position;
                    let t = leg.elapsed + dt;
                    if t < leg.horizon() {
                        leg.elapsed = t;
                        self.position = world.grid.clamp(leg.position_at(t));
                        self.heading = wrap_angle(leg.heading.position(t));
                        self.sweep(world, from, self.position, &mut out, team)?;
                        if leg.next.is_none() && leg.horizon() - t <= world.replan_lead {
                            let waypoint = leg.action.goal;
                            let in_flight = leg.action.traversed_cells.clone();
                            let decision = self.plan(world, waypoint, &in_flight)?;
                            if let CoverageDecision::Action(a) = &decision {
                                out.push(Payload::Goal { cells: a.traversed_cells.clone() });
                            }
                            leg.next = Some(decision);
                        }
                        self.motion = Motion::Moving(leg);
                        break;
                    }
                    dt = t - leg.horizon();
                    self.position = leg.action.goal;
                    self.heading = wrap_angle(leg.heading.position(leg.horizon()));
                    self.sweep(world, from, self.position, &mut out, team)?;
                    let decision = match leg.next.take() {
                        Some(d) => d,
                        None => {
                            let d = self.plan(world, self.position, &[])?;
                            if let CoverageDecision::Action(a) = &d {
                                out.push(Payload::Goal { cells: a.traversed_cells.clone() });
                            }
                            d
                        }
                    };
                    if !self.start_leg(world, decision, &mut out, team)? {
                        break;
                    }
                }
            }
        }
        self.end_tick();
        Ok(out)
    }

    /// Starts a freshly planned decision from hover; broadcasts its goal.
    fn begin(&mut self, world: &World, decision: CoverageDecision, out: &mut Vec<Payload>, team: &mut VisitedMask) -> Result<bool> {
        if let CoverageDecision::Action(a) = &decision {
            out.push(Payload::Goal { cells: a.traversed_cells.clone() });
        }
        self.start_leg(world, decision, out, team)
    }

    /// Returns whether the robot keeps moving within the current tick.
    fn start_leg(&mut self, world: &World, decision: CoverageDecision, out: &mut Vec<Payload>, team: &mut VisitedMask) -> Result<bool> {
        match decision {
            CoverageDecision::Done => {
                self.motion = Motion::Done;
                Ok(false)
            }
            CoverageDecision::Action(a) if a.is_dwell() => {
                let cell = a.goal_cell;
                if !self.tick_trace.contains(&cell) {
                    self.tick_trace.push(cell);
                }
                self.sense(world, cell, out, team);
                self.motion = Motion::Idle;
                Ok(false)
            }
            CoverageDecision::Action(a) => {
                self.motion = Motion::Moving(Box::new(Leg::plan(a, self.heading, self.v_max, self.a_max)?));
                Ok(true)
            }
        }
    }
}
