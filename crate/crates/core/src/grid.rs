//! Planar grid geometry shared by every module.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for closed-set geometric tests, in meters.
pub const GEOM_EPS: f64 = 1e-9;

/// A point in world coordinates (meters).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(self, other: Point2) -> Point2 {
        Point2::new(self.x - other.x, self.y - other.y)
    }

    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }
}

impl From<[f64; 2]> for Point2 {
    fn from(v: [f64; 2]) -> Self {
        Point2::new(v[0], v[1])
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

/// Uniform square grid. Cell `(col, row)` flattens to `row * width_cells + col`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid", into = "RawGrid")]
pub struct GridSpec {
    width_cells: usize,
    height_cells: usize,
    cell_size: f64,
    origin: Point2,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    width_cells: usize,
    height_cells: usize,
    cell_size: f64,
    #[serde(default = "origin_default")]
    origin: Point2,
}

fn origin_default() -> Point2 {
    Point2::new(0.0, 0.0)
}

impl TryFrom<RawGrid> for GridSpec {
    type Error = Error;

    fn try_from(raw: RawGrid) -> Result<Self> {
        GridSpec::new(raw.width_cells, raw.height_cells, raw.cell_size, raw.origin)
    }
}

impl From<GridSpec> for RawGrid {
    fn from(g: GridSpec) -> Self {
        RawGrid {
            width_cells: g.width_cells,
            height_cells: g.height_cells,
            cell_size: g.cell_size,
            origin: g.origin,
        }
    }
}

impl GridSpec {
    pub fn new(width_cells: usize, height_cells: usize, cell_size: f64, origin: Point2) -> Result<Self> {
        if width_cells == 0 {
            return Err(Error::config("grid.width_cells", "must be at least 1"));
        }
        if height_cells == 0 {
            return Err(Error::config("grid.height_cells", "must be at least 1"));
        }
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(Error::config("grid.cell_size", "must be positive and finite"));
        }
        if !(origin.x.is_finite() && origin.y.is_finite()) {
            return Err(Error::config("grid.origin", "must be finite"));
        }
        Ok(Self {
            width_cells,
            height_cells,
            cell_size,
            origin,
        })
    }

    /// Unit cells anchored at the world origin.
    pub fn unit(width_cells: usize, height_cells: usize) -> Result<Self> {
        Self::new(width_cells, height_cells, 1.0, Point2::new(0.0, 0.0))
    }

    pub fn width_cells(&self) -> usize {
        self.width_cells
    }

    pub fn height_cells(&self) -> usize {
        self.height_cells
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn origin(&self) -> Point2 {
        self.origin
    }

    /// Total number of cells, `M`.
    pub fn cell_count(&self) -> usize {
        self.width_cells * self.height_cells
    }

    pub fn index(&self, col: usize, row: usize) -> usize {
        debug_assert!(col < self.width_cells && row < self.height_cells);
        row * self.width_cells + col
    }

    pub fn col_row(&self, index: usize) -> (usize, usize) {
        (index % self.width_cells, index / self.width_cells)
    }

    pub fn check_index(&self, index: usize) -> Result<()> {
        if index < self.cell_count() {
            Ok(())
        } else {
            Err(Error::InvalidCell {
                index,
                cells: self.cell_count(),
            })
        }
    }

    pub fn max_corner(&self) -> Point2 {
        Point2::new(
            self.origin.x + self.width_cells as f64 * self.cell_size,
            self.origin.y + self.height_cells as f64 * self.cell_size,
        )
    }

    /// Closed containment test with [`GEOM_EPS`] slack.
    pub fn contains(&self, p: Point2) -> bool {
        let hi = self.max_corner();
        p.x >= self.origin.x - GEOM_EPS
            && p.y >= self.origin.y - GEOM_EPS
            && p.x <= hi.x + GEOM_EPS
            && p.y <= hi.y + GEOM_EPS
    }

    /// Cell holding `p`. Points on shared edges belong to the upper/right cell,
    /// except on the grid's outer upper/right edge.
    pub fn cell_of(&self, p: Point2) -> Option<usize> {
        if !self.contains(p) {
            return None;
        }
        let fx = ((p.x - self.origin.x) / self.cell_size).floor();
        let fy = ((p.y - self.origin.y) / self.cell_size).floor();
        let col = (fx.max(0.0) as usize).min(self.width_cells - 1);
        let row = (fy.max(0.0) as usize).min(self.height_cells - 1);
        Some(self.index(col, row))
    }

    pub fn cell_center(&self, index: usize) -> Point2 {
        let (col, row) = self.col_row(index);
        Point2::new(
            self.origin.x + (col as f64 + 0.5) * self.cell_size,
            self.origin.y + (row as f64 + 0.5) * self.cell_size,
        )
    }

    /// Lower-left and upper-right corners of a cell.
    pub fn cell_bounds(&self, index: usize) -> (Point2, Point2) {
        let (col, row) = self.col_row(index);
        let lo = Point2::new(
            self.origin.x + col as f64 * self.cell_size,
            self.origin.y + row as f64 * self.cell_size,
        );
        (lo, Point2::new(lo.x + self.cell_size, lo.y + self.cell_size))
    }

    /// Clamp a point onto the closed grid rectangle.
    pub fn clamp(&self, p: Point2) -> Point2 {
        let hi = self.max_corner();
        Point2::new(p.x.clamp(self.origin.x, hi.x), p.y.clamp(self.origin.y, hi.y))
    }
}
