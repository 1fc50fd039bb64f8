//! Deterministic greedy coverage baseline.

use crate::action::{cells_in_zone, enumerate_candidates_in, CandidateAction, ZoneCells, ZonePolygon};
use crate::error::Result;
use crate::grid::{GridSpec, Point2};

/// Cells already seen, restricted to cells sharing area with the zone.
#[derive(Debug, Clone, PartialEq)]
pub struct VisitedMask {
    visited: Vec<bool>,
    eligible: Vec<bool>,
    count: usize,
}

impl VisitedMask {
    pub fn new(cells: &ZoneCells, cell_count: usize) -> Self {
        Self {
            visited: vec![false; cell_count],
            eligible: (0..cell_count).map(|m| cells.in_zone(m)).collect(),
            count: 0,
        }
    }

    /// Marks `cell`; returns whether it was newly visited. Cells outside the
    /// zone are ignored.
    pub fn mark(&mut self, cell: usize) -> bool {
        if cell >= self.visited.len() || !self.eligible[cell] || self.visited[cell] {
            return false;
        }
        self.visited[cell] = true;
        self.count += 1;
        true
    }

    pub fn is_visited(&self, cell: usize) -> bool {
        self.visited.get(cell).copied().unwrap_or(false)
    }

    pub fn count(&self) -> usize {
        self.count
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CoverageDecision {
    Action(CandidateAction),
    Done,
}

/// Greedy choice: among unvisited goal cells, the action whose trace crosses
/// the most unvisited cells; ties go to the lowest goal index.
pub fn select_coverage_action(
    visited: &VisitedMask,
    grid: &GridSpec,
    zone: &ZonePolygon,
    robot_position: Point2,
) -> Result<CoverageDecision> {
    let cells = cells_in_zone(grid, zone)?;
    select_coverage_action_in(visited, grid, zone, &cells, robot_position)
}

pub fn select_coverage_action_in(
    visited: &VisitedMask,
    grid: &GridSpec,
    zone: &ZonePolygon,
    cells: &ZoneCells,
    robot_position: Point2,
) -> Result<CoverageDecision> {
    if cells.center_in.iter().all(|&m| visited.is_visited(m)) {
        return Ok(CoverageDecision::Done);
    }
    let candidates = enumerate_candidates_in(grid, zone, cells, robot_position)?;
    let best = candidates
        .into_iter()
        .filter(|c| !visited.is_visited(c.goal_cell))
        .map(|c| {
            let gain = c.traversed_cells.iter().filter(|&&m| !visited.is_visited(m)).count();
            (gain, c)
        })
        // candidates arrive in ascending goal order; keep the first maximum
        .fold(None::<(usize, CandidateAction)>, |acc, (gain, c)| match acc {
            Some((g, _)) if g >= gain => acc,
            _ => Some((gain, c)),
        });
    Ok(match best {
        Some((_, c)) => CoverageDecision::Action(c),
        None => CoverageDecision::Done,
    })
}
