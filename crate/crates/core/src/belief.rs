//! Sparse Bayesian belief over the flattened grid.
//!
//! Every sensing row is one-hot, so `XᵀWX` is diagonal and the E-step reduces
//! to per-cell sufficient statistics: the summed observation precision
//! `Σ c_i` and the precision-weighted observation sum `Σ c_i y_i`. The
//! posterior is still exposed as a dense `M × M` covariance so callers can
//! treat it as a general Gaussian.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;

pub type RobotId = u32;

/// Jitter ladder tried (after a plain attempt) when factoring a covariance.
pub const JITTER_LADDER: [f64; 3] = [1e-12, 1e-10, 1e-8];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RecordKind {
    SelfPosition,
    SelfDetection,
    PeerPosition,
    PeerGoalCell,
    PeerDetection,
}

/// One one-hot sensing row with its observation and confidence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensingRecord {
    pub cell_index: usize,
    pub observation_y: f64,
    pub confidence_c: f64,
    pub source_robot: RobotId,
    pub kind: RecordKind,
}

impl SensingRecord {
    pub fn new(cell_index: usize, observation_y: f64, confidence_c: f64, source_robot: RobotId, kind: RecordKind) -> Self {
        Self {
            cell_index,
            observation_y,
            confidence_c,
            source_robot,
            kind,
        }
    }

    /// Observation variance `σ² = 1 / c`.
    pub fn variance(&self) -> f64 {
        1.0 / self.confidence_c
    }
}

/// Append-only, timestamp-ordered list of sensing records.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SensingDataset {
    records: Vec<SensingRecord>,
}

impl SensingDataset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, record: SensingRecord) {
        self.records.push(record);
    }

    pub fn extend<I: IntoIterator<Item = SensingRecord>>(&mut self, records: I) {
        self.records.extend(records);
    }

    pub fn records(&self) -> &[SensingRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Checks every record against the grid and the positivity of `c`.
    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        for (i, r) in self.records.iter().enumerate() {
            grid.check_index(r.cell_index)?;
            if !(r.confidence_c > 0.0) || !r.confidence_c.is_finite() {
                return Err(Error::NonPositiveConfidence {
                    index: i,
                    confidence: r.confidence_c,
                });
            }
            if !r.observation_y.is_finite() {
                return Err(Error::InvalidParameter(format!("record {i} has non-finite observation")));
            }
        }
        Ok(())
    }

    /// Stacked design matrix `X`, observations `y` and per-row confidences `c`.
    pub fn materialize(&self, grid: &GridSpec) -> Result<(DMatrix<f64>, DVector<f64>, DVector<f64>)> {
        self.validate(grid)?;
        let n = self.records.len();
        let mut x = DMatrix::zeros(n, grid.cell_count());
        let mut y = DVector::zeros(n);
        let mut c = DVector::zeros(n);
        for (i, r) in self.records.iter().enumerate() {
            x[(i, r.cell_index)] = 1.0;
            y[i] = r.observation_y;
            c[i] = r.confidence_c;
        }
        Ok((x, y, c))
    }
}

/// Per-cell sufficient statistics of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct CellStatistics {
    /// Diagonal of `XᵀWX`.
    pub precision: Vec<f64>,
    /// Entries of `XᵀWy`.
    pub weighted_obs: Vec<f64>,
}

impl CellStatistics {
    pub fn zeros(cells: usize) -> Self {
        Self {
            precision: vec![0.0; cells],
            weighted_obs: vec![0.0; cells],
        }
    }

    pub fn from_dataset(dataset: &SensingDataset, grid: &GridSpec) -> Result<Self> {
        dataset.validate(grid)?;
        let mut stats = Self::zeros(grid.cell_count());
        for r in dataset.records() {
            stats.add(r);
        }
        Ok(stats)
    }

    /// Folds one record in. The record's cell must be in range.
    pub fn add(&mut self, record: &SensingRecord) {
        self.precision[record.cell_index] += record.confidence_c;
        self.weighted_obs[record.cell_index] += record.confidence_c * record.observation_y;
    }

    pub fn cell_count(&self) -> usize {
        self.precision.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmConfig {
    pub max_iters: usize,
    pub tol: f64,
    pub a_m: f64,
    pub b_m: f64,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self {
            max_iters: 100,
            tol: 1e-6,
            a_m: 0.1,
            b_m: 1.0,
        }
    }
}

/// Gaussian posterior `N(μ, V)` together with the responsibilities `Γ` that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefPosterior {
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
    pub responsibilities: DVector<f64>,
}

impl BeliefPosterior {
    pub fn cell_count(&self) -> usize {
        self.mean.len()
    }

    /// Posterior variance of cell `m`.
    pub fn variance(&self, m: usize) -> f64 {
        self.covariance[(m, m)]
    }
}

/// E-step: `V = (Γ⁻¹ + XᵀWX)⁻¹`, `μ = V XᵀW y` for fixed responsibilities.
pub fn e_step(stats: &CellStatistics, responsibilities: &DVector<f64>) -> Result<BeliefPosterior> {
    let (var, mean) = diagonal_e_step(stats, responsibilities)?;
    Ok(BeliefPosterior {
        mean,
        covariance: DMatrix::from_diagonal(&var),
        responsibilities: responsibilities.clone(),
    })
}

/// Posterior variances and means; `V` is diagonal because every row is one-hot.
fn diagonal_e_step(stats: &CellStatistics, responsibilities: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
    let m = stats.cell_count();
    if responsibilities.len() != m {
        return Err(Error::InvalidParameter(format!(
            "{} responsibilities for {m} cells",
            responsibilities.len()
        )));
    }
    let mut var = DVector::zeros(m);
    let mut mean = DVector::zeros(m);
    for k in 0..m {
        let gamma = responsibilities[k];
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::NumericalFailure(format!("responsibility {k} is {gamma}")));
        }
        let precision = 1.0 / gamma + stats.precision[k];
        if !(precision > 0.0) || !precision.is_finite() {
            return Err(Error::NumericalFailure(format!("precision of cell {k} is {precision}")));
        }
        var[k] = 1.0 / precision;
        mean[k] = var[k] * stats.weighted_obs[k];
    }
    Ok((var, mean))
}

fn check_hyper(a_m: f64, b_m: f64) -> Result<f64> {
    let denom = 1.0 + 2.0 * a_m;
    if denom == 0.0 || !denom.is_finite() || !b_m.is_finite() {
        return Err(Error::InvalidParameter(format!("a_m = {a_m}, b_m = {b_m}")));
    }
    Ok(denom)
}

/// M-step: `γ_m = ([V]_mm + μ_m² + 2 b_m) / (1 + 2 a_m)`.
pub fn gamma_update(posterior: &BeliefPosterior, a_m: f64, b_m: f64) -> Result<DVector<f64>> {
    let denom = check_hyper(a_m, b_m)?;
    Ok(DVector::from_fn(posterior.cell_count(), |k, _| {
        (posterior.covariance[(k, k)] + posterior.mean[k] * posterior.mean[k] + 2.0 * b_m) / denom
    }))
}

/// Alternates E- and M-steps from `Γ = I`.
///
/// The returned posterior is the E-step evaluated at the returned
/// responsibilities, so `V = (Γ⁻¹ + XᵀWX)⁻¹` holds exactly for its own `Γ`.
/// Iteration stops once the M-step moves no responsibility by `tol` or more,
/// or after `max_iters` E-steps.
pub fn em_posterior(dataset: &SensingDataset, grid: &GridSpec, cfg: &EmConfig) -> Result<BeliefPosterior> {
    let stats = CellStatistics::from_dataset(dataset, grid)?;
    em_from_statistics(&stats, cfg)
}

pub fn em_from_statistics(stats: &CellStatistics, cfg: &EmConfig) -> Result<BeliefPosterior> {
    if cfg.max_iters == 0 {
        return Err(Error::InvalidParameter("em max_iters must be at least 1".into()));
    }
    let denom = check_hyper(cfg.a_m, cfg.b_m)?;
    let mut gamma = DVector::from_element(stats.cell_count(), 1.0);
    let (mut var, mut mean) = diagonal_e_step(stats, &gamma)?;
    for _ in 1..cfg.max_iters {
        let next = DVector::from_fn(gamma.len(), |k, _| (var[k] + mean[k] * mean[k] + 2.0 * cfg.b_m) / denom);
        let delta = (&next - &gamma).amax();
        gamma = next;
        (var, mean) = diagonal_e_step(stats, &gamma)?;
        if delta < cfg.tol {
            break;
        }
    }
    Ok(BeliefPosterior {
        mean,
        covariance: DMatrix::from_diagonal(&var),
        responsibilities: gamma,
    })
}

/// Lower Cholesky factor of `cov`, escalating diagonal jitter on failure.
/// Returns the factor and the jitter that was needed.
pub fn jittered_cholesky(cov: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    let n = cov.nrows();
    if cov.ncols() != n {
        return Err(Error::InvalidParameter("covariance must be square".into()));
    }
    let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || cov[(i, j)] == 0.0));
    for jitter in std::iter::once(0.0).chain(JITTER_LADDER) {
        if diagonal {
            let d: Vec<f64> = (0..n).map(|i| cov[(i, i)] + jitter).collect();
            if d.iter().all(|v| *v > 0.0 && v.is_finite()) {
                let sqrt = DVector::from_iterator(n, d.into_iter().map(f64::sqrt));
                return Ok((DMatrix::from_diagonal(&sqrt), jitter));
            }
        } else {
            let mut m = cov.clone();
            for i in 0..n {
                m[(i, i)] += jitter;
            }
            if let Some(ch) = Cholesky::new(m) {
                return Ok((ch.l(), jitter));
            }
        }
    }
    Err(Error::NumericalFailure(format!(
        "covariance not positive definite after jitter {:e}",
        JITTER_LADDER[JITTER_LADDER.len() - 1]
    )))
}

/// Thompson draw `β̃ = μ + L z`, `z ~ N(0, I)` taken from `rng` in index order.
pub fn sample_posterior<R: Rng + ?Sized>(posterior: &BeliefPosterior, rng: &mut R) -> Result<DVector<f64>> {
    let (l, _) = jittered_cholesky(&posterior.covariance)?;
    let n = posterior.cell_count();
    let z = DVector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
    Ok(&posterior.mean + l * z)
}
