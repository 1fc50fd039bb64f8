//! Greedy coverage from a corner until every cell center has been seen.

use std::error::Error;

use guts_search::action::cells_in_zone;
use guts_search::coverage::{select_coverage_action_in, CoverageDecision, VisitedMask};
use guts_search::{GridSpec, ZonePolygon};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let grid = GridSpec::unit(4, 3)?;
    let zone = ZonePolygon::covering(&grid);
    let cells = cells_in_zone(&grid, &zone)?;
    let mut visited = VisitedMask::new(&cells, grid.cell_count());
    let mut position = grid.cell_center(0);
    visited.mark(0);

    let mut legs = 0;
    while let CoverageDecision::Action(a) = select_coverage_action_in(&visited, &grid, &zone, &cells, position)? {
        let fresh = a.traversed_cells.iter().filter(|&&m| visited.mark(m)).count();
        legs += 1;
        println!("leg {legs}: to cell {:>2} via {:?} ({fresh} new)", a.goal_cell, a.traversed_cells);
        position = a.goal;
    }
    println!("done after {legs} legs, {} of {} cells seen", visited.count(), cells.searchable_count());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
