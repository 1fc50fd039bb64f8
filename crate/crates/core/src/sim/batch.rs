//! Multi-trial experiments: planner × channel arms and the confidence sweep.

use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;

use super::config::{PlannerKind, ScenarioConfig};
use super::trial::{run_trial, TrialOutput};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Arm {
    pub planner: PlannerKind,
    pub channel_enabled: bool,
}

impl Arm {
    pub const ALL: [Arm; 4] = [
        Arm { planner: PlannerKind::Guts, channel_enabled: false },
        Arm { planner: PlannerKind::Coverage, channel_enabled: false },
        Arm { planner: PlannerKind::Guts, channel_enabled: true },
        Arm { planner: PlannerKind::Coverage, channel_enabled: true },
    ];

    pub fn apply(&self, cfg: &ScenarioConfig) -> ScenarioConfig {
        cfg.with_planner(self.planner).with_channel_enabled(self.channel_enabled)
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let channel = if self.channel_enabled { "comms" } else { "no-comms" };
        write!(f, "{}/{channel}", self.planner.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialSummary {
    pub arm: Arm,
    pub seed: u64,
    pub pct_at_half: f64,
    pub final_pct: f64,
    pub views: Vec<u64>,
    pub aborted: Option<String>,
    /// Team coverage samples `(time, pct)`.
    #[serde(skip)]
    pub coverage: Vec<(f64, f64)>,
}

impl TrialSummary {
    pub fn from_output(arm: Arm, cfg: &ScenarioConfig, out: &TrialOutput) -> Self {
        Self {
            arm,
            seed: out.seed,
            pct_at_half: out.team_pct_at(cfg.duration / 2.0).unwrap_or(0.0),
            final_pct: out.final_team_pct().unwrap_or(0.0),
            views: out.final_views(),
            aborted: out.aborted.clone(),
            coverage: out.team_rows().map(|r| (r.time, r.pct_unknown)).collect(),
        }
    }
}

/// Team coverage across trials at one sample time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageBin {
    pub arm: Arm,
    pub time: f64,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

/// Mean view counts for one swept confidence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViewRow {
    pub confidence: f64,
    pub trials: usize,
    /// Mean views per target.
    pub mean_views: Vec<f64>,
    pub mean_total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchReport {
    pub trials: Vec<TrialSummary>,
    pub coverage: Vec<CoverageBin>,
    pub views: Vec<ViewRow>,
}

/// Trial seeds `seed + k` for `k < trials`.
pub fn trial_seeds(cfg: &ScenarioConfig) -> Vec<u64> {
    (0..cfg.trials as u64).map(|k| cfg.seed.wrapping_add(k)).collect()
}

/// Runs every trial of one arm in parallel, returned in seed order.
pub fn run_arm(cfg: &ScenarioConfig, arm: Arm) -> Result<Vec<TrialSummary>> {
    let arm_cfg = arm.apply(cfg);
    trial_seeds(cfg)
        .into_par_iter()
        .map(|seed| Ok(TrialSummary::from_output(arm, &arm_cfg, &run_trial(&arm_cfg, seed)?)))
        .collect()
}

/// Per-time mean, min and max of team coverage for each arm.
pub fn aggregate_coverage(trials: &[TrialSummary]) -> Vec<CoverageBin> {
    let mut bins = Vec::new();
    for arm in Arm::ALL {
        let runs: Vec<&TrialSummary> = trials.iter().filter(|t| t.arm == arm).collect();
        let Some(first) = runs.first() else { continue };
        for (i, &(time, _)) in first.coverage.iter().enumerate() {
            let vals: Vec<f64> = runs.iter().filter_map(|t| t.coverage.get(i).map(|c| c.1)).collect();
            bins.push(CoverageBin {
                arm,
                time,
                mean: vals.iter().sum::<f64>() / vals.len() as f64,
                min: vals.iter().copied().fold(f64::INFINITY, f64::min),
                max: vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            });
        }
    }
    bins
}

/// Mean target views for each confidence, all targets set to that confidence.
pub fn confidence_sweep(cfg: &ScenarioConfig, confidences: &[f64]) -> Result<Vec<ViewRow>> {
    confidences
        .iter()
        .map(|&c| {
            let swept = cfg.with_target_confidence(c);
            let views: Vec<Vec<u64>> = trial_seeds(cfg)
                .into_par_iter()
                .map(|seed| Ok(run_trial(&swept, seed)?.final_views()))
                .collect::<Result<_>>()?;
            let n = views.len() as f64;
            let mean_views: Vec<f64> = (0..cfg.targets.len())
                .map(|t| views.iter().map(|v| v[t] as f64).sum::<f64>() / n)
                .collect();
            Ok(ViewRow {
                confidence: c,
                trials: views.len(),
                mean_total: mean_views.iter().sum(),
                mean_views,
            })
        })
        .collect()
}

/// Four-arm comparison plus the confidence sweep configured in `[batch]`.
pub fn run_batch(cfg: &ScenarioConfig) -> Result<BatchReport> {
    cfg.validate()?;
    let mut trials = Vec::new();
    for arm in Arm::ALL {
        trials.extend(run_arm(cfg, arm)?);
    }
    let coverage = aggregate_coverage(&trials);
    let views = confidence_sweep(cfg, &cfg.batch.confidence_sweep)?;
    Ok(BatchReport { trials, coverage, views })
}

/// Median of `values`; `NaN` when empty.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    match v.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => v[n / 2],
        n => 0.5 * (v[n / 2 - 1] + v[n / 2]),
    }
}

/// Writes `batch_trials.csv`, `batch_coverage.csv` and `batch_views.csv`.
pub fn write_batch(dir: &Path, report: &BatchReport) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("batch_trials.csv"))?;
    w.write_record(["arm", "seed", "pct_at_half", "final_pct", "views", "aborted"])?;
    for t in &report.trials {
        let views: Vec<String> = t.views.iter().map(u64::to_string).collect();
        w.write_record([
            t.arm.to_string(),
            t.seed.to_string(),
            format!("{:.4}", t.pct_at_half),
            format!("{:.4}", t.final_pct),
            views.join(";"),
            t.aborted.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_path(dir.join("batch_coverage.csv"))?;
    w.write_record(["arm", "time", "mean", "min", "max"])?;
    for b in &report.coverage {
        w.write_record([
            b.arm.to_string(),
            format!("{:.3}", b.time),
            format!("{:.4}", b.mean),
            format!("{:.4}", b.min),
            format!("{:.4}", b.max),
        ])?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_path(dir.join("batch_views.csv"))?;
    w.write_record(["confidence", "trials", "mean_views", "mean_total"])?;
    for v in &report.views {
        let per: Vec<String> = v.mean_views.iter().map(|x| format!("{x:.3}")).collect();
        w.write_record([v.confidence.to_string(), v.trials.to_string(), per.join(";"), format!("{:.3}", v.mean_total)])?;
    }
    w.flush()?;
    Ok(())
}
