//! Thompson-sampling action selection.
//!
//! A planning round draws a single sample `β̃` from the posterior and scores
//! every candidate action by how closely the estimate `β̂` it would produce
//! (past data plus the action's hypothetical rows observing `β̃`) matches the
//! sample:
//!
//! ```text
//! L = ‖β̃ − β̂‖₂ + λ · I(β̃, β̂)
//! ```
//!
//! `β̂` uses only the diagonal of the combined precision, so every cell is
//! updated independently: `β̂_k = (Σ c y + c_plan n_k β̃_k) / (Σ c + 1/γ_k + c_plan n_k)`.

use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::action::{enumerate_candidates_in, cells_in_zone, CandidateAction, ZoneCells, ZonePolygon};
use crate::belief::{e_step, sample_posterior, CellStatistics, EmConfig, SensingDataset};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, Point2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GutsConfig {
    pub lambda: f64,
    pub c_plan: f64,
    pub em: EmConfig,
}

impl Default for GutsConfig {
    fn default() -> Self {
        Self {
            lambda: 0.01,
            c_plan: 1.0,
            em: EmConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub l2_term: f64,
    pub indicator_term: u8,
    pub lambda: f64,
    pub total: f64,
    pub candidate_id: usize,
}

/// Estimate `β̂ = H_i y + H_n X_{i+1:n} β̃` produced by executing `candidate`.
pub fn hypothetical_estimate(
    past: &CellStatistics,
    candidate: &CandidateAction,
    beta_sample: &DVector<f64>,
    responsibilities: &DVector<f64>,
    c_plan: f64,
) -> Result<DVector<f64>> {
    let m = past.cell_count();
    if beta_sample.len() != m || responsibilities.len() != m {
        return Err(Error::InvalidParameter(format!(
            "sample of {} and responsibilities of {} for {m} cells",
            beta_sample.len(),
            responsibilities.len()
        )));
    }
    let mut planned = vec![0.0; m];
    for &k in &candidate.traversed_cells {
        if k >= m {
            return Err(Error::InvalidCell { index: k, cells: m });
        }
        planned[k] += c_plan;
    }
    let mut beta_hat = DVector::zeros(m);
    for k in 0..m {
        let diag = past.precision[k] + 1.0 / responsibilities[k] + planned[k];
        if !(diag != 0.0 && diag.is_finite()) {
            return Err(Error::NumericalFailure(format!("U[{k},{k}] = {diag}")));
        }
        beta_hat[k] = (past.weighted_obs[k] + planned[k] * beta_sample[k]) / diag;
    }
    Ok(beta_hat)
}

fn half_max_mask(v: &DVector<f64>) -> impl Iterator<Item = bool> + '_ {
    let half = v.max() / 2.0;
    v.iter().map(move |x| *x > half)
}

/// `0` when `β̂` and `β̃` select the same above-half-maximum cells, else `1`.
pub fn indicator(beta_sample: &DVector<f64>, beta_hat: &DVector<f64>) -> u8 {
    assert_eq!(beta_sample.len(), beta_hat.len(), "indicator operands differ in length");
    if beta_sample.is_empty() {
        return 0;
    }
    let same = half_max_mask(beta_hat).zip(half_max_mask(beta_sample)).all(|(a, b)| a == b);
    u8::from(!same)
}

pub fn evaluate_loss(beta_sample: &DVector<f64>, beta_hat: &DVector<f64>, lambda: f64, candidate_id: usize) -> LossBreakdown {
    let l2_term = (beta_sample - beta_hat).norm();
    let indicator_term = indicator(beta_sample, beta_hat);
    LossBreakdown {
        l2_term,
        indicator_term,
        lambda,
        total: l2_term + lambda * f64::from(indicator_term),
        candidate_id,
    }
}

/// Scores every candidate against a fixed sample `β̃`.
pub fn score_candidates(
    past: &CellStatistics,
    candidates: &[CandidateAction],
    beta_sample: &DVector<f64>,
    responsibilities: &DVector<f64>,
    cfg: &GutsConfig,
) -> Result<Vec<LossBreakdown>> {
    candidates
        .iter()
        .enumerate()
        .map(|(id, c)| {
            let beta_hat = hypothetical_estimate(past, c, beta_sample, responsibilities, cfg.c_plan)?;
            Ok(evaluate_loss(beta_sample, &beta_hat, cfg.lambda, id))
        })
        .collect()
}

/// Index of the minimum-loss candidate; equal minima are broken uniformly with `rng`.
pub fn argmin_with_ties<R: Rng + ?Sized>(losses: &[LossBreakdown], rng: &mut R) -> Option<usize> {
    let best = losses.iter().map(|l| l.total).min_by(f64::total_cmp)?;
    let tol = 1e-12 * (1.0 + best.abs());
    let ties: Vec<usize> = losses
        .iter()
        .enumerate()
        .filter(|(_, l)| l.total - best <= tol)
        .map(|(i, _)| i)
        .collect();
    Some(if ties.len() == 1 {
        ties[0]
    } else {
        ties[rng.random_range(0..ties.len())]
    })
}

/// Argmin over `candidates` for a given `β̃`.
pub fn select_with_sample<R: Rng + ?Sized>(
    past: &CellStatistics,
    mut candidates: Vec<CandidateAction>,
    beta_sample: &DVector<f64>,
    responsibilities: &DVector<f64>,
    cfg: &GutsConfig,
    rng: &mut R,
) -> Result<(CandidateAction, LossBreakdown)> {
    let losses = score_candidates(past, &candidates, beta_sample, responsibilities, cfg)?;
    let best = argmin_with_ties(&losses, rng).ok_or(Error::NoCandidates)?;
    Ok((candidates.swap_remove(best), losses[best]))
}

/// Full planning round with a precomputed zone classification.
#[allow(clippy::too_many_arguments)]
pub fn select_action_in<R: Rng + ?Sized>(
    past: &CellStatistics,
    grid: &GridSpec,
    zone: &ZonePolygon,
    cells: &ZoneCells,
    robot_position: Point2,
    responsibilities: &DVector<f64>,
    rng: &mut R,
    cfg: &GutsConfig,
) -> Result<(CandidateAction, LossBreakdown)> {
    if cells.center_in.is_empty() {
        return Err(Error::NoCandidates);
    }
    let posterior = e_step(past, responsibilities)?;
    let beta_sample = sample_posterior(&posterior, rng)?;
    let candidates = enumerate_candidates_in(grid, zone, cells, robot_position)?;
    select_with_sample(past, candidates, &beta_sample, responsibilities, cfg, rng)
}

/// Draw `β̃` from the posterior implied by `responsibilities` and return the
/// loss-minimizing candidate action.
#[allow(clippy::too_many_arguments)]
pub fn select_action<R: Rng + ?Sized>(
    dataset: &SensingDataset,
    grid: &GridSpec,
    zone: &ZonePolygon,
    robot_position: Point2,
    responsibilities: &DVector<f64>,
    rng: &mut R,
    cfg: &GutsConfig,
) -> Result<(CandidateAction, LossBreakdown)> {
    let past = CellStatistics::from_dataset(dataset, grid)?;
    let cells = cells_in_zone(grid, zone)?;
    select_action_in(&past, grid, zone, &cells, robot_position, responsibilities, rng, cfg)
}
