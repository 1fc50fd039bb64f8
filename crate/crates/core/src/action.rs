//! Search zone geometry, supercover traversal and candidate enumeration.

use serde::{Deserialize, Serialize};

use crate::belief::{RecordKind, RobotId, SensingRecord};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, Point2, GEOM_EPS};

/// Convex, counter-clockwise search polygon in world meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawZone", into = "RawZone")]
pub struct ZonePolygon {
    vertices: Vec<Point2>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawZone {
    vertices: Vec<Point2>,
}

impl TryFrom<RawZone> for ZonePolygon {
    type Error = Error;

    fn try_from(raw: RawZone) -> Result<Self> {
        ZonePolygon::new(raw.vertices)
    }
}

impl From<ZonePolygon> for RawZone {
    fn from(z: ZonePolygon) -> Self {
        RawZone { vertices: z.vertices }
    }
}

impl ZonePolygon {
    pub fn new(vertices: Vec<Point2>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::DegenerateZone(format!("{n} vertices, need at least 3")));
        }
        if vertices.iter().any(|v| !(v.x.is_finite() && v.y.is_finite())) {
            return Err(Error::DegenerateZone("non-finite vertex".into()));
        }
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            let turn = b.sub(a).cross(c.sub(b));
            let scale = b.sub(a).dot(b.sub(a)).sqrt() * c.sub(b).dot(c.sub(b)).sqrt();
            if turn < -1e-12 * scale.max(1.0) {
                return Err(Error::DegenerateZone(format!(
                    "vertex {} breaks convexity or counter-clockwise order",
                    (i + 1) % n
                )));
            }
        }
        let zone = Self { vertices };
        if zone.area() <= 0.0 {
            return Err(Error::DegenerateZone("zero area".into()));
        }
        Ok(zone)
    }

    /// Axis-aligned rectangle `[lo, hi]`.
    pub fn rectangle(lo: Point2, hi: Point2) -> Result<Self> {
        Self::new(vec![lo, Point2::new(hi.x, lo.y), hi, Point2::new(lo.x, hi.y)])
    }

    /// The whole grid rectangle.
    pub fn covering(grid: &GridSpec) -> Self {
        Self::rectangle(grid.origin(), grid.max_corner()).expect("grid rectangle is a valid zone")
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn area(&self) -> f64 {
        0.5 * self.edges().map(|(a, b)| a.cross(b)).sum::<f64>()
    }

    /// Closed point-in-polygon test; boundary points are inside.
    pub fn contains(&self, p: Point2) -> bool {
        self.edges().all(|(a, b)| {
            let e = b.sub(a);
            e.cross(p.sub(a)) >= -GEOM_EPS * e.dot(e).sqrt()
        })
    }

    /// Whether the closed square `[lo, hi]` shares positive area with the polygon.
    fn overlaps_square(&self, lo: Point2, hi: Point2) -> bool {
        let corners = [lo, Point2::new(hi.x, lo.y), hi, Point2::new(lo.x, hi.y)];
        let mut axes: Vec<Point2> = vec![Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)];
        axes.extend(self.edges().map(|(a, b)| {
            let e = b.sub(a);
            let len = e.dot(e).sqrt();
            Point2::new(-e.y / len, e.x / len)
        }));
        axes.iter().all(|axis| {
            let (pmin, pmax) = project(&self.vertices, *axis);
            let (smin, smax) = project(&corners, *axis);
            pmax.min(smax) - pmin.max(smin) > GEOM_EPS
        })
    }

    /// Clip the segment `a → b` to the polygon (Cyrus–Beck).
    pub fn clip_segment(&self, a: Point2, b: Point2) -> Option<(Point2, Point2)> {
        let d = b.sub(a);
        let (mut t0, mut t1) = (0.0_f64, 1.0_f64);
        for (p, q) in self.edges() {
            let e = q.sub(p);
            let num = e.cross(a.sub(p));
            let den = e.cross(d);
            let slack = GEOM_EPS * e.dot(e).sqrt();
            if den.abs() < 1e-15 {
                if num < -slack {
                    return None;
                }
                continue;
            }
            let t = -(num + slack) / den;
            if den > 0.0 {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
            if t0 > t1 {
                return None;
            }
        }
        let at = |t: f64| Point2::new(a.x + t * d.x, a.y + t * d.y);
        Some((at(t0), at(t1)))
    }
}

fn project(points: &[Point2], axis: Point2) -> (f64, f64) {
    points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        let v = p.dot(axis);
        (lo.min(v), hi.max(v))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellClass {
    /// Center lies inside or on the polygon boundary.
    CenterIn,
    /// Positive-area overlap with the polygon, center outside.
    Sliver,
    Outside,
}

/// Classification of every grid cell against a zone.
#[derive(Debug, Clone, PartialEq)]
pub struct ZoneCells {
    pub center_in: Vec<usize>,
    pub sliver: Vec<usize>,
    classes: Vec<CellClass>,
}

impl ZoneCells {
    pub fn class(&self, cell: usize) -> CellClass {
        self.classes[cell]
    }

    /// Center-in or sliver.
    pub fn in_zone(&self, cell: usize) -> bool {
        self.classes[cell] != CellClass::Outside
    }

    /// Number of cells sharing area with the zone.
    pub fn searchable_count(&self) -> usize {
        self.center_in.len() + self.sliver.len()
    }
}

pub fn cells_in_zone(grid: &GridSpec, zone: &ZonePolygon) -> Result<ZoneCells> {
    let cell_area = grid.cell_size() * grid.cell_size();
    if zone.area() < cell_area {
        return Err(Error::DegenerateZone(format!(
            "zone area {:.3} is smaller than one cell ({cell_area:.3})",
            zone.area()
        )));
    }
    let mut center_in = Vec::new();
    let mut sliver = Vec::new();
    let classes = (0..grid.cell_count())
        .map(|m| {
            let (lo, hi) = grid.cell_bounds(m);
            if zone.contains(grid.cell_center(m)) {
                center_in.push(m);
                CellClass::CenterIn
            } else if zone.overlaps_square(lo, hi) {
                sliver.push(m);
                CellClass::Sliver
            } else {
                CellClass::Outside
            }
        })
        .collect();
    Ok(ZoneCells {
        center_in,
        sliver,
        classes,
    })
}

/// Parameter interval `[t0, t1] ⊂ [0, 1]` where `a + t(b − a)` meets the closed box.
fn clip_to_box(a: Point2, d: Point2, lo: Point2, hi: Point2) -> Option<(f64, f64)> {
    let (mut t0, mut t1) = (0.0_f64, 1.0_f64);
    for (p, q) in [(-d.x, a.x - lo.x), (d.x, hi.x - a.x), (-d.y, a.y - lo.y), (d.y, hi.y - a.y)] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
            continue;
        }
        let r = q / p;
        if p < 0.0 {
            t0 = t0.max(r);
        } else {
            t1 = t1.min(r);
        }
        if t0 > t1 {
            return None;
        }
    }
    Some((t0, t1))
}

/// Every cell whose closed square the segment `start → end` touches,
/// ordered along the segment.
///
/// Cells touched only at a shared corner are included. Within a tie on the
/// position along the segment, cells on the right of the direction of travel
/// come first, so reversing the segment reverses the list.
pub fn supercover_trace(grid: &GridSpec, start: Point2, end: Point2) -> Result<Vec<usize>> {
    for p in [start, end] {
        if !grid.contains(p) {
            return Err(Error::OutOfBounds { x: p.x, y: p.y });
        }
    }
    let cs = grid.cell_size();
    let o = grid.origin();
    let span = |a: f64, b: f64, origin: f64, n: usize| {
        let lo = ((a.min(b) - origin - GEOM_EPS) / cs).floor().max(0.0) as usize;
        let hi = ((a.max(b) - origin + GEOM_EPS) / cs).floor().max(0.0) as usize;
        (lo.min(n - 1), hi.min(n - 1))
    };
    let (c0, c1) = span(start.x, end.x, o.x, grid.width_cells());
    let (r0, r1) = span(start.y, end.y, o.y, grid.height_cells());
    let d = end.sub(start);

    let mut hits: Vec<(f64, f64, usize)> = Vec::new();
    for row in r0..=r1 {
        for col in c0..=c1 {
            let m = grid.index(col, row);
            let (lo, hi) = grid.cell_bounds(m);
            let lo = Point2::new(lo.x - GEOM_EPS, lo.y - GEOM_EPS);
            let hi = Point2::new(hi.x + GEOM_EPS, hi.y + GEOM_EPS);
            if let Some((t0, t1)) = clip_to_box(start, d, lo, hi) {
                let side = d.cross(grid.cell_center(m).sub(start));
                hits.push((0.5 * (t0 + t1), side, m));
            }
        }
    }
    hits.sort_by(|a, b| {
        if (a.0 - b.0).abs() > 1e-12 {
            a.0.total_cmp(&b.0)
        } else {
            a.1.total_cmp(&b.1).then(a.2.cmp(&b.2))
        }
    });
    Ok(hits.into_iter().map(|h| h.2).collect())
}

/// A straight-line sensing action toward a cell center.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateAction {
    pub start: Point2,
    pub goal: Point2,
    pub goal_cell: usize,
    pub traversed_cells: Vec<usize>,
}

impl CandidateAction {
    /// Hypothetical sensing rows `X_{i+1:n}` for this action.
    pub fn planned_rows(&self, c_plan: f64, robot: RobotId) -> Vec<SensingRecord> {
        self.traversed_cells
            .iter()
            .map(|&m| SensingRecord::new(m, 0.0, c_plan, robot, RecordKind::SelfPosition))
            .collect()
    }

    pub fn is_dwell(&self) -> bool {
        self.traversed_cells.len() == 1 && self.traversed_cells[0] == self.goal_cell
    }
}

/// One candidate per center-in-zone cell, including the robot's own cell.
pub fn enumerate_candidates(grid: &GridSpec, zone: &ZonePolygon, robot_position: Point2) -> Result<Vec<CandidateAction>> {
    let cells = cells_in_zone(grid, zone)?;
    enumerate_candidates_in(grid, zone, &cells, robot_position)
}

/// As [`enumerate_candidates`] with a precomputed zone classification.
pub fn enumerate_candidates_in(
    grid: &GridSpec,
    zone: &ZonePolygon,
    cells: &ZoneCells,
    robot_position: Point2,
) -> Result<Vec<CandidateAction>> {
    let own_cell = grid
        .cell_of(robot_position)
        .ok_or(Error::OutOfBounds {
            x: robot_position.x,
            y: robot_position.y,
        })?;
    cells
        .center_in
        .iter()
        .map(|&goal_cell| {
            let goal = grid.cell_center(goal_cell);
            let traversed_cells = if goal_cell == own_cell {
                vec![own_cell]
            } else {
                let (a, b) = zone.clip_segment(robot_position, goal).unwrap_or((robot_position, goal));
                supercover_trace(grid, a, b)?
            };
            Ok(CandidateAction {
                start: robot_position,
                goal,
                goal_cell,
                traversed_cells,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    #[test]
    fn rejects_non_convex_and_clockwise() {
        let clockwise = vec![p(0.0, 0.0), p(0.0, 1.0), p(1.0, 1.0), p(1.0, 0.0)];
        assert!(ZonePolygon::new(clockwise).is_err());
        let l_shape = vec![p(0.0, 0.0), p(2.0, 0.0), p(2.0, 1.0), p(1.0, 1.0), p(1.0, 2.0), p(0.0, 2.0)];
        assert!(ZonePolygon::new(l_shape).is_err());
        assert!(ZonePolygon::new(vec![p(0.0, 0.0), p(1.0, 0.0)]).is_err());
        assert!(ZonePolygon::new(vec![p(0.0, 0.0), p(1.0, 0.0), p(2.0, 0.0)]).is_err());
    }

    #[test]
    fn exact_cover_has_no_slivers() {
        let g = GridSpec::unit(2, 2).unwrap();
        let cells = cells_in_zone(&g, &ZonePolygon::covering(&g)).unwrap();
        assert_eq!(cells.center_in, vec![0, 1, 2, 3]);
        assert!(cells.sliver.is_empty());
    }

    #[test]
    fn tiny_zone_is_degenerate() {
        let g = GridSpec::unit(3, 3).unwrap();
        let z = ZonePolygon::new(vec![p(1.3, 1.3), p(1.7, 1.3), p(1.5, 1.7)]).unwrap();
        assert!(matches!(cells_in_zone(&g, &z), Err(Error::DegenerateZone(_))));
    }

    #[test]
    fn point_trace() {
        let g = GridSpec::unit(3, 3).unwrap();
        assert_eq!(supercover_trace(&g, p(1.5, 1.5), p(1.5, 1.5)).unwrap(), vec![g.index(1, 1)]);
    }

    #[test]
    fn horizontal_trace() {
        let g = GridSpec::unit(3, 1).unwrap();
        assert_eq!(supercover_trace(&g, p(0.5, 0.5), p(2.5, 0.5)).unwrap(), vec![0, 1, 2]);
        assert_eq!(supercover_trace(&g, p(2.5, 0.5), p(0.5, 0.5)).unwrap(), vec![2, 1, 0]);
    }

    #[test]
    fn diagonal_trace_includes_corner_cells() {
        let g = GridSpec::unit(2, 2).unwrap();
        let cells = supercover_trace(&g, p(0.0, 0.0), p(2.0, 2.0)).unwrap();
        assert_eq!(cells.len(), 4);
        assert_eq!(cells[0], 0);
        assert_eq!(cells[3], 3);
        assert!(cells.contains(&1) && cells.contains(&2));
    }

    #[test]
    fn out_of_bounds_trace() {
        let g = GridSpec::unit(2, 2).unwrap();
        assert!(matches!(
            supercover_trace(&g, p(0.5, 0.5), p(2.5, 0.5)),
            Err(Error::OutOfBounds { .. })
        ));
    }

    #[test]
    fn candidates_cover_every_center_cell() {
        let g = GridSpec::unit(2, 2).unwrap();
        let z = ZonePolygon::covering(&g);
        let cands = enumerate_candidates(&g, &z, g.cell_center(0)).unwrap();
        assert_eq!(cands.len(), 4);
        let own = cands.iter().find(|c| c.goal_cell == 0).unwrap();
        assert!(own.is_dwell());
        let adjacent = cands.iter().find(|c| c.goal_cell == 1).unwrap();
        assert_eq!(adjacent.traversed_cells, vec![0, 1]);
    }

    #[test]
    fn clip_keeps_interior_segment() {
        let z = ZonePolygon::rectangle(p(0.0, 0.0), p(4.0, 4.0)).unwrap();
        let (a, b) = z.clip_segment(p(1.0, 1.0), p(3.0, 2.0)).unwrap();
        assert!(a.distance(p(1.0, 1.0)) < 1e-9 && b.distance(p(3.0, 2.0)) < 1e-9);
        let (a, _) = z.clip_segment(p(-2.0, 1.0), p(2.0, 1.0)).unwrap();
        assert!(a.distance(p(0.0, 1.0)) < 1e-6);
        assert!(z.clip_segment(p(-2.0, -1.0), p(-1.0, -3.0)).is_none());
    }
}
