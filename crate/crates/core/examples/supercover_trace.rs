//! Cells swept by straight segments, and how a cut zone classifies cells.

use std::error::Error;

use guts_search::action::{cells_in_zone, supercover_trace, CellClass, ZonePolygon};
use guts_search::{GridSpec, Point2};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let grid = GridSpec::unit(4, 4)?;

    let diagonal = supercover_trace(&grid, Point2::new(0.5, 0.5), Point2::new(3.5, 3.5))?;
    println!("corner to corner: {diagonal:?}");
    let shallow = supercover_trace(&grid, Point2::new(0.5, 0.5), Point2::new(3.5, 1.5))?;
    println!("shallow slope:    {shallow:?}");

    // A triangle cutting the grid along its anti-diagonal.
    let zone = ZonePolygon::new(vec![Point2::new(0.0, 0.0), Point2::new(3.5, 0.0), Point2::new(0.0, 3.5)])?;
    let cells = cells_in_zone(&grid, &zone)?;
    for row in (0..4).rev() {
        let line: String = (0..4)
            .map(|col| match cells.class(grid.index(col, row)) {
                CellClass::CenterIn => '#',
                CellClass::Sliver => '+',
                CellClass::Outside => '.',
            })
            .collect();
        println!("{line}");
    }
    println!("{} centers inside, {} slivers", cells.center_in.len(), cells.sliver.len());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
