//! Independent oracles: dense linear algebra, geometric sampling, finite
//! differences and Monte Carlo.

use std::collections::BTreeSet;

use guts_search::action::{cells_in_zone, enumerate_candidates, supercover_trace, CandidateAction, CellClass, ZonePolygon};
use guts_search::belief::{
    em_from_statistics, em_posterior, e_step, sample_posterior, BeliefPosterior, CellStatistics, EmConfig, RecordKind, SensingDataset,
    SensingRecord,
};
use guts_search::comms::{deliver, fuse_message, ChannelConfig, FusionConfig, Payload, PeerMessage, RandomDrops};
use guts_search::guts::{hypothetical_estimate, score_candidates, select_action_in, select_with_sample, GutsConfig};
use guts_search::trajectory::{check_limits, solve_quintic, AxisBoundary};
use guts_search::{GridSpec, Point2};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rec(cell: usize, y: f64, c: f64) -> SensingRecord {
    SensingRecord::new(cell, y, c, 0, RecordKind::SelfPosition)
}

fn one_e_step() -> EmConfig {
    EmConfig { max_iters: 1, ..EmConfig::default() }
}

/// `V = (Γ⁻¹ + XᵀWX)⁻¹`, `μ = V XᵀWy` by explicit dense inversion.
fn dense_e_step(x: &DMatrix<f64>, y: &DVector<f64>, c: &DVector<f64>, gamma: &DVector<f64>) -> (DMatrix<f64>, DVector<f64>) {
    let w = DMatrix::from_diagonal(c);
    let prior = DMatrix::from_diagonal(&gamma.map(|g| 1.0 / g));
    let v = (prior + x.transpose() * &w * x).try_inverse().expect("precision is invertible");
    let mu = &v * x.transpose() * &w * y;
    (v, mu)
}

/// EM by dense solves with the same schedule as the library.
fn dense_em(x: &DMatrix<f64>, y: &DVector<f64>, c: &DVector<f64>, cfg: &EmConfig) -> (DMatrix<f64>, DVector<f64>, DVector<f64>) {
    let m = x.ncols();
    let mut gamma = DVector::from_element(m, 1.0);
    let (mut v, mut mu) = dense_e_step(x, y, c, &gamma);
    for _ in 1..cfg.max_iters {
        let next = DVector::from_fn(m, |k, _| (v[(k, k)] + mu[k] * mu[k] + 2.0 * cfg.b_m) / (1.0 + 2.0 * cfg.a_m));
        let delta = (&next - &gamma).amax();
        gamma = next;
        (v, mu) = dense_e_step(x, y, c, &gamma);
        if delta < cfg.tol {
            break;
        }
    }
    (v, mu, gamma)
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300).max(1.0)
}

fn random_dataset(rng: &mut ChaCha8Rng, m: usize, n: usize) -> SensingDataset {
    let mut d = SensingDataset::new();
    for _ in 0..n {
        let y = if rng.random::<f64>() < 0.3 { 1.0 } else { rng.random_range(-0.5..0.5) };
        d.push(rec(rng.random_range(0..m), y, rng.random_range(0.001..2.0)));
    }
    d
}

#[test]
fn em_matches_dense_solve_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..100 {
        let (w, h) = (rng.random_range(1..=5), rng.random_range(1..=4));
        let grid = GridSpec::unit(w, h).unwrap();
        let n = rng.random_range(0..=40);
        let data = random_dataset(&mut rng, grid.cell_count(), n);
        let (x, y, c) = data.materialize(&grid).unwrap();
        let cfg = EmConfig::default();
        let post = em_posterior(&data, &grid, &cfg).unwrap();
        let (v, mu, gamma) = dense_em(&x, &y, &c, &cfg);
        for i in 0..grid.cell_count() {
            assert!(rel_err(post.mean[i], mu[i]) < 1e-8, "mean {i}");
            assert!(rel_err(post.responsibilities[i], gamma[i]) < 1e-8, "gamma {i}");
            for j in 0..grid.cell_count() {
                assert!(rel_err(post.covariance[(i, j)], v[(i, j)]) < 1e-8, "cov {i},{j}");
            }
        }
    }
}

#[test]
fn single_e_step_examples_match_dense_oracle() {
    let grid = GridSpec::unit(2, 1).unwrap();
    let mut one = SensingDataset::new();
    one.push(rec(0, 1.0, 1.0));
    let mut two = one.clone();
    two.push(rec(0, 1.0, 1.0));
    for (data, v00, mu0) in [(&one, 0.5, 0.5), (&two, 1.0 / 3.0, 2.0 / 3.0)] {
        let post = em_posterior(data, &grid, &one_e_step()).unwrap();
        let (x, y, c) = data.materialize(&grid).unwrap();
        let (v, mu) = dense_e_step(&x, &y, &c, &DVector::from_element(2, 1.0));
        assert!((v[(0, 0)] - v00).abs() < 1e-15 && (mu[0] - mu0).abs() < 1e-15);
        assert!((post.covariance[(0, 0)] - v00).abs() < 1e-15);
        assert!((post.mean[0] - mu0).abs() < 1e-15);
        assert_eq!(post.covariance[(1, 1)], 1.0);
        assert_eq!(post.mean[1], 0.0);
    }
}

#[test]
fn weak_track_leaves_more_uncertainty_than_confident_one() {
    let grid = GridSpec::unit(3, 3).unwrap();
    let variance_after = |c: f64| {
        let mut d = SensingDataset::new();
        let msg = PeerMessage::new(1, 0.0, Payload::Track { cell: 5, y: 1.0, c }).unwrap();
        fuse_message(&mut d, &msg, &grid, &FusionConfig::default()).unwrap();
        let (x, y, cv) = d.materialize(&grid).unwrap();
        let (v, _, _) = dense_em(&x, &y, &cv, &EmConfig::default());
        let post = em_posterior(&d, &grid, &EmConfig::default()).unwrap();
        assert!(rel_err(post.covariance[(5, 5)], v[(5, 5)]) < 1e-8);
        post.covariance[(5, 5)]
    };
    assert!(variance_after(0.005) > variance_after(1.0));
}

#[test]
fn fused_goal_cells_are_less_uncertain_than_untouched_cells() {
    let grid = GridSpec::unit(3, 3).unwrap();
    let mut d = SensingDataset::new();
    let msg = PeerMessage::new(1, 0.0, Payload::Goal { cells: vec![0, 1, 2] }).unwrap();
    fuse_message(&mut d, &msg, &grid, &FusionConfig::default()).unwrap();
    let post = em_posterior(&d, &grid, &EmConfig::default()).unwrap();
    for covered in 0..3 {
        for untouched in 3..9 {
            assert!(post.variance(covered) < post.variance(untouched));
        }
    }
}

#[test]
fn standard_normal_sampling_statistics() {
    let post = BeliefPosterior {
        mean: DVector::zeros(4),
        covariance: DMatrix::identity(4, 4),
        responsibilities: DVector::from_element(4, 1.0),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let n = 100_000 / 4;
    let draws: Vec<DVector<f64>> = (0..n).map(|_| sample_posterior(&post, &mut rng).unwrap()).collect();
    for k in 0..4 {
        let mean = draws.iter().map(|d| d[k]).sum::<f64>() / n as f64;
        let var = draws.iter().map(|d| (d[k] - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var - 1.0).abs() < 0.05, "var {var}");
    }
}

#[test]
fn correlated_sampling_reproduces_covariance() {
    let cov = DMatrix::from_row_slice(3, 3, &[2.0, 0.6, -0.4, 0.6, 1.0, 0.2, -0.4, 0.2, 0.5]);
    let mean = DVector::from_column_slice(&[1.0, -2.0, 0.5]);
    let post = BeliefPosterior {
        mean: mean.clone(),
        covariance: cov.clone(),
        responsibilities: DVector::from_element(3, 1.0),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 60_000;
    let draws: Vec<DVector<f64>> = (0..n).map(|_| sample_posterior(&post, &mut rng).unwrap()).collect();
    let emp_mean = draws.iter().fold(DVector::zeros(3), |a, d| a + d) / n as f64;
    let mut emp_cov = DMatrix::zeros(3, 3);
    for d in &draws {
        let e = d - &emp_mean;
        emp_cov += &e * e.transpose();
    }
    emp_cov /= (n - 1) as f64;
    assert!((emp_mean - mean).amax() < 0.03);
    assert!((emp_cov - cov).amax() < 0.05);
}

/// Cells whose closed square, grown by `eps`, contains `p`.
fn cells_containing(grid: &GridSpec, p: Point2, eps: f64) -> Vec<usize> {
    (0..grid.cell_count())
        .filter(|&m| {
            let (lo, hi) = grid.cell_bounds(m);
            p.x >= lo.x - eps && p.x <= hi.x + eps && p.y >= lo.y - eps && p.y <= hi.y + eps
        })
        .collect()
}

fn sampled_trace(grid: &GridSpec, a: Point2, b: Point2, samples: usize) -> BTreeSet<usize> {
    (0..=samples)
        .flat_map(|i| {
            let t = i as f64 / samples as f64;
            cells_containing(grid, Point2::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)), 1e-9)
        })
        .collect()
}

/// Separating-axis test between a segment and a closed square grown by `eps`.
fn segment_touches_square(a: Point2, b: Point2, lo: Point2, hi: Point2, eps: f64) -> bool {
    if a.x.max(b.x) < lo.x - eps || a.x.min(b.x) > hi.x + eps || a.y.max(b.y) < lo.y - eps || a.y.min(b.y) > hi.y + eps {
        return false;
    }
    let d = b.sub(a);
    let len = (d.x * d.x + d.y * d.y).sqrt();
    if len == 0.0 {
        return true;
    }
    let side = |p: Point2| d.cross(p.sub(a)) / len;
    let corners = [lo, Point2::new(hi.x, lo.y), hi, Point2::new(lo.x, hi.y)].map(side);
    !(corners.iter().all(|&s| s > eps) || corners.iter().all(|&s| s < -eps))
}

#[test]
fn supercover_examples_match_sampling_oracle() {
    let grid = GridSpec::unit(3, 3).unwrap();
    let (a, b) = (Point2::new(0.5, 0.5), Point2::new(2.5, 0.5));
    let trace = supercover_trace(&grid, a, b).unwrap();
    assert_eq!(trace, vec![0, 1, 2]);
    assert_eq!(trace.iter().copied().collect::<BTreeSet<_>>(), sampled_trace(&grid, a, b, 10_000));

    let (a, b) = (Point2::new(0.0, 0.0), Point2::new(2.0, 2.0));
    let trace = supercover_trace(&grid, a, b).unwrap();
    let oracle = sampled_trace(&grid, a, b, 10_000);
    assert!(oracle.contains(&grid.index(0, 1)) && oracle.contains(&grid.index(1, 0)));
    assert_eq!(trace.iter().copied().collect::<BTreeSet<_>>(), oracle);
    assert_eq!(trace.first(), Some(&0));
    assert!(cells_containing(&grid, b, 1e-9).contains(trace.last().unwrap()));
}

#[test]
fn supercover_random_segments_match_geometric_oracles() {
    let grid = GridSpec::new(7, 5, 15.0, Point2::new(-20.0, 10.0)).unwrap();
    let hi = grid.max_corner();
    let lo = grid.origin();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..300 {
        let mut pt = || Point2::new(rng.random_range(lo.x..hi.x), rng.random_range(lo.y..hi.y));
        let (a, b) = (pt(), pt());
        let trace = supercover_trace(&grid, a, b).unwrap();
        let set: BTreeSet<usize> = trace.iter().copied().collect();
        assert_eq!(set.len(), trace.len(), "duplicate cells");
        for m in sampled_trace(&grid, a, b, 10_000) {
            assert!(set.contains(&m), "sampled cell {m} missing");
        }
        for m in 0..grid.cell_count() {
            let (clo, chi) = grid.cell_bounds(m);
            assert_eq!(set.contains(&m), segment_touches_square(a, b, clo, chi, 1e-9), "cell {m}");
        }
        assert!(cells_containing(&grid, a, 1e-9).contains(&trace[0]));
        assert!(cells_containing(&grid, b, 1e-9).contains(trace.last().unwrap()));
    }
}

fn point_in_convex(vertices: &[Point2], p: Point2) -> bool {
    (0..vertices.len()).all(|i| {
        let (a, b) = (vertices[i], vertices[(i + 1) % vertices.len()]);
        b.sub(a).cross(p.sub(a)) >= 0.0
    })
}

/// Area of `poly` clipped to an axis-aligned box.
fn clipped_area(poly: &[Point2], lo: Point2, hi: Point2) -> f64 {
    let mut pts: Vec<Point2> = poly.to_vec();
    let inside: [&dyn Fn(Point2) -> f64; 4] = [&|p| p.x - lo.x, &|p| hi.x - p.x, &|p| p.y - lo.y, &|p| hi.y - p.y];
    for f in inside {
        let mut next = Vec::new();
        for i in 0..pts.len() {
            let (a, b) = (pts[i], pts[(i + 1) % pts.len()]);
            let (fa, fb) = (f(a), f(b));
            if fa >= 0.0 {
                next.push(a);
            }
            if (fa >= 0.0) != (fb >= 0.0) {
                let t = fa / (fa - fb);
                next.push(Point2::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)));
            }
        }
        pts = next;
        if pts.is_empty() {
            return 0.0;
        }
    }
    (0..pts.len()).map(|i| pts[i].cross(pts[(i + 1) % pts.len()])).sum::<f64>().abs() / 2.0
}

/// Class from the center test and the exact overlap area.
fn sampled_class(grid: &GridSpec, zone: &ZonePolygon, m: usize) -> CellClass {
    if point_in_convex(zone.vertices(), grid.cell_center(m)) {
        return CellClass::CenterIn;
    }
    let (lo, hi) = grid.cell_bounds(m);
    if clipped_area(zone.vertices(), lo, hi) > 1e-12 {
        CellClass::Sliver
    } else {
        CellClass::Outside
    }
}

fn assert_zone_matches_oracle(grid: &GridSpec, zone: &ZonePolygon) -> (usize, usize, usize) {
    let cells = cells_in_zone(grid, zone).unwrap();
    let mut counts = (0, 0, 0);
    for m in 0..grid.cell_count() {
        let class = cells.class(m);
        assert_eq!(class, sampled_class(grid, zone, m), "cell {m}");
        match class {
            CellClass::CenterIn => counts.0 += 1,
            CellClass::Sliver => counts.1 += 1,
            CellClass::Outside => counts.2 += 1,
        }
    }
    counts
}

#[test]
fn shifted_square_zone_matches_sampling_oracle() {
    let grid = GridSpec::unit(4, 2).unwrap();
    let zone = ZonePolygon::rectangle(Point2::new(0.6, 0.0), Point2::new(2.6, 2.0)).unwrap();
    assert_eq!(assert_zone_matches_oracle(&grid, &zone), (4, 2, 2));
    let cells = cells_in_zone(&grid, &zone).unwrap();
    assert_eq!(cells.sliver, vec![0, 4]);
}

#[test]
fn small_triangle_zone_matches_sampling_oracle() {
    let grid = GridSpec::unit(3, 3).unwrap();
    let r = 0.9;
    let vertices: Vec<Point2> = (0..3)
        .map(|k| {
            let a = std::f64::consts::FRAC_PI_2 + k as f64 * 2.0 * std::f64::consts::PI / 3.0;
            Point2::new(1.5 + r * a.cos(), 1.5 + r * a.sin())
        })
        .collect();
    let zone = ZonePolygon::new(vertices).unwrap();
    let (center_in, sliver, _) = assert_zone_matches_oracle(&grid, &zone);
    assert_eq!(center_in, 1);
    assert!(sliver > 0);
    assert_eq!(cells_in_zone(&grid, &zone).unwrap().class(4), CellClass::CenterIn);
}

#[test]
fn random_convex_zones_match_sampling_oracle() {
    let grid = GridSpec::unit(6, 6).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut checked = 0;
    while checked < 20 {
        let (cx, cy) = (rng.random_range(1.5..4.5), rng.random_range(1.5..4.5));
        let mut angles: Vec<f64> = (0..rng.random_range(3..7)).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
        angles.sort_by(f64::total_cmp);
        let r = rng.random_range(1.0..2.5);
        let vertices: Vec<Point2> = angles.iter().map(|a| Point2::new(cx + r * a.cos(), cy + r * a.sin())).collect();
        let Ok(zone) = ZonePolygon::new(vertices) else { continue };
        if zone.area() < 1.0 {
            continue;
        }
        assert_zone_matches_oracle(&grid, &zone);
        checked += 1;
    }
}

#[test]
fn adjacent_candidate_shares_two_cells() {
    let grid = GridSpec::unit(3, 3).unwrap();
    let zone = ZonePolygon::covering(&grid);
    let start = grid.cell_center(4);
    for c in enumerate_candidates(&grid, &zone, start).unwrap() {
        let (col, row) = grid.col_row(c.goal_cell);
        if (col as i64 - 1).abs() + (row as i64 - 1).abs() == 1 {
            let oracle = sampled_trace(&grid, start, c.goal, 10_000);
            assert_eq!(c.traversed_cells.len(), 2);
            assert_eq!(c.traversed_cells.iter().copied().collect::<BTreeSet<_>>(), oracle);
        }
    }
}

/// `β̂` from the full matrices: past rows plus the candidate's planned rows
/// observing `β̃`, solved against the diagonal prior.
fn dense_hypothetical(
    grid: &GridSpec,
    past: &SensingDataset,
    candidate: &CandidateAction,
    beta: &DVector<f64>,
    gamma: &DVector<f64>,
    c_plan: f64,
) -> DVector<f64> {
    let m = grid.cell_count();
    let (x, y, c) = past.materialize(grid).unwrap();
    let xp = DMatrix::from_fn(candidate.traversed_cells.len(), m, |r, k| f64::from(u8::from(candidate.traversed_cells[r] == k)));
    let wp = DMatrix::from_diagonal_element(xp.nrows(), xp.nrows(), c_plan);
    let u = DMatrix::from_diagonal(&gamma.map(|g| 1.0 / g)) + x.transpose() * DMatrix::from_diagonal(&c) * &x + xp.transpose() * &wp * &xp;
    let rhs = x.transpose() * DMatrix::from_diagonal(&c) * y + xp.transpose() * &wp * &xp * beta;
    u.try_inverse().unwrap() * rhs
}

#[test]
fn hypothetical_estimate_matches_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let grid = GridSpec::unit(rng.random_range(2..5), rng.random_range(1..4)).unwrap();
        let m = grid.cell_count();
        let n = rng.random_range(0..15);
        let past = random_dataset(&mut rng, m, n);
        let stats = CellStatistics::from_dataset(&past, &grid).unwrap();
        let zone = ZonePolygon::covering(&grid);
        let pos = grid.cell_center(rng.random_range(0..m));
        let beta = DVector::from_fn(m, |_, _| rng.random_range(-2.0..2.0));
        let gamma = DVector::from_fn(m, |_, _| rng.random_range(0.2..5.0));
        for cand in enumerate_candidates(&grid, &zone, pos).unwrap() {
            let fast = hypothetical_estimate(&stats, &cand, &beta, &gamma, 1.0).unwrap();
            let dense = dense_hypothetical(&grid, &past, &cand, &beta, &gamma, 1.0);
            assert!((fast - dense).amax() < 1e-10);
        }
    }
}

#[test]
fn hand_evaluated_estimates_match_dense_oracle() {
    let grid = GridSpec::unit(2, 1).unwrap();
    let gamma = DVector::from_element(2, 1.0);
    let cover0 = CandidateAction {
        start: grid.cell_center(0),
        goal: grid.cell_center(0),
        goal_cell: 0,
        traversed_cells: vec![0],
    };
    let beta = DVector::from_column_slice(&[1.0, 0.0]);
    let dense = dense_hypothetical(&grid, &SensingDataset::new(), &cover0, &beta, &gamma, 1.0);
    assert_eq!(dense, DVector::from_column_slice(&[0.5, 0.0]));

    let mut past = SensingDataset::new();
    past.push(rec(0, 1.0, 1.0));
    let empty = CandidateAction { traversed_cells: vec![], ..cover0 };
    let dense = dense_hypothetical(&grid, &past, &empty, &beta, &gamma, 1.0);
    assert!((dense[0] - 0.5).abs() < 1e-15);
}

/// Exhaustive loss list, computed from dense estimates.
fn exhaustive_losses(
    grid: &GridSpec,
    past: &SensingDataset,
    candidates: &[CandidateAction],
    beta: &DVector<f64>,
    gamma: &DVector<f64>,
    lambda: f64,
) -> Vec<f64> {
    let mask = |v: &DVector<f64>| {
        let half = v.max() / 2.0;
        v.iter().map(|x| *x > half).collect::<Vec<_>>()
    };
    candidates
        .iter()
        .map(|c| {
            let hat = dense_hypothetical(grid, past, c, beta, gamma, 1.0);
            let l2 = (beta - &hat).norm();
            l2 + if mask(&hat) == mask(beta) { 0.0 } else { lambda }
        })
        .collect()
}

#[test]
fn selection_equals_exhaustive_argmin() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let cfg = GutsConfig::default();
    for _ in 0..40 {
        let grid = GridSpec::unit(rng.random_range(2..6), rng.random_range(2..6)).unwrap();
        let m = grid.cell_count();
        let n = rng.random_range(0..25);
        let past = random_dataset(&mut rng, m, n);
        let stats = CellStatistics::from_dataset(&past, &grid).unwrap();
        let zone = ZonePolygon::covering(&grid);
        let pos = grid.cell_center(rng.random_range(0..m));
        let gamma = DVector::from_fn(m, |_, _| rng.random_range(0.2..5.0));
        let beta = sample_posterior(&e_step(&stats, &gamma).unwrap(), &mut rng).unwrap();
        let candidates = enumerate_candidates(&grid, &zone, pos).unwrap();
        assert!(candidates.len() <= 50);
        let oracle = exhaustive_losses(&grid, &past, &candidates, &beta, &gamma, cfg.lambda);
        let best = oracle.iter().copied().fold(f64::INFINITY, f64::min);
        let (chosen, loss) = select_with_sample(&stats, candidates, &beta, &gamma, &cfg, &mut rng).unwrap();
        assert!((loss.total - best).abs() < 1e-9, "chosen goal {}", chosen.goal_cell);
    }
}

#[test]
fn confident_detection_draws_the_planner() {
    // 2x2 grid; cell 3 holds a confident detection and the sample peaks there.
    let grid = GridSpec::unit(2, 2).unwrap();
    let zone = ZonePolygon::covering(&grid);
    let mut past = SensingDataset::new();
    past.push(SensingRecord::new(3, 1.0, 1.0, 0, RecordKind::SelfDetection));
    let stats = CellStatistics::from_dataset(&past, &grid).unwrap();
    let gamma = DVector::from_element(4, 1.0);
    let beta = DVector::from_column_slice(&[0.0, 0.0, 0.0, 3.0]);
    let candidates = enumerate_candidates(&grid, &zone, grid.cell_center(0)).unwrap();
    assert_eq!(candidates.len(), 4);
    let oracle = exhaustive_losses(&grid, &past, &candidates, &beta, &gamma, 0.01);
    let losses = score_candidates(&stats, &candidates, &beta, &gamma, &GutsConfig::default()).unwrap();
    for (l, o) in losses.iter().zip(&oracle) {
        assert!((l.total - o).abs() < 1e-12);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (chosen, _) = select_with_sample(&stats, candidates, &beta, &gamma, &GutsConfig::default(), &mut rng).unwrap();
    assert!(chosen.traversed_cells.contains(&3));
}

#[test]
fn quintic_examples_match_closed_form() {
    let seg = solve_quintic(&AxisBoundary::rest_to_rest(0.0, 1.0, 1.0)).unwrap();
    for t in [0.0, 0.1, 0.25, 0.5, 0.8, 1.0_f64] {
        let normal_form = 6.0 * t.powi(5) - 15.0 * t.powi(4) + 10.0 * t.powi(3);
        assert!((seg.position(t) - normal_form).abs() < 1e-12);
    }
    assert!((seg.position(0.5) - 0.5).abs() < 1e-15);
    let peak = (0..=100_000).map(|i| seg.velocity(i as f64 / 100_000.0)).fold(0.0, f64::max);
    assert!((peak - 1.875).abs() < 1e-9);
    assert!(check_limits(&seg, 2.0, 100.0).feasible);
    assert!(!check_limits(&seg, 1.8, 100.0).feasible);
}

#[test]
fn terminal_velocity_matches_finite_difference() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let h = 1e-6;
    for _ in 0..200 {
        let b = AxisBoundary {
            p0: rng.random_range(-10.0..10.0),
            v0: rng.random_range(-3.0..3.0),
            a0: rng.random_range(-2.0..2.0),
            pf: rng.random_range(-10.0..10.0),
            vf: rng.random_range(-3.0..3.0),
            af: rng.random_range(-2.0..2.0),
            horizon: 2.0,
        };
        let seg = solve_quintic(&b).unwrap();
        let fd = (seg.position(2.0) - seg.position(2.0 - h)) / h;
        assert!((fd - b.vf).abs() < 1e-4 * (1.0 + b.vf.abs()), "{fd} vs {}", b.vf);
        let central = (seg.position(1.0 + h) - seg.position(1.0 - h)) / (2.0 * h);
        assert!((central - seg.velocity(1.0)).abs() < 1e-5 * (1.0 + seg.velocity(1.0).abs()));
    }
}

#[test]
fn limit_check_agrees_with_dense_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut disagreements = 0;
    for _ in 0..1000 {
        let b = AxisBoundary {
            p0: rng.random_range(-20.0..20.0),
            v0: rng.random_range(-5.0..5.0),
            a0: rng.random_range(-3.0..3.0),
            pf: rng.random_range(-20.0..20.0),
            vf: rng.random_range(-5.0..5.0),
            af: rng.random_range(-3.0..3.0),
            horizon: rng.random_range(0.5..20.0),
        };
        let seg = solve_quintic(&b).unwrap();
        let (v_max, a_max) = (10.0, 5.0);
        let n = 100_000;
        let (mut wv, mut wa) = (0.0_f64, 0.0_f64);
        for i in 0..=n {
            let t = seg.horizon * i as f64 / n as f64;
            wv = wv.max(seg.velocity(t).abs());
            wa = wa.max(seg.acceleration(t).abs());
        }
        let sampled = wv <= v_max && wa <= a_max;
        let report = check_limits(&seg, v_max, a_max);
        assert!(report.worst_v >= wv - 1e-9 && report.worst_a >= wa - 1e-9);
        if report.feasible != sampled {
            // Only peaks within sampling resolution of a limit may disagree.
            let near = (report.worst_v - v_max).abs() < 1e-6 * v_max || (report.worst_a - a_max).abs() < 1e-6 * a_max;
            assert!(near, "feasibility disagreement away from the limit");
            disagreements += 1;
        }
    }
    assert!(disagreements <= 1);
}

#[test]
fn drop_fraction_matches_probability() {
    let channel = ChannelConfig {
        enabled: true,
        drop_probability: 0.5,
        latency: 0.0,
    };
    let mut queue: Vec<PeerMessage> = (0..10_000)
        .map(|i| PeerMessage::new(i % 3, 0.0, Payload::Pose { cell: i as usize % 9 }).unwrap())
        .collect();
    let mut drops = RandomDrops::new(ChaCha8Rng::seed_from_u64(1234));
    let delivered = deliver(&mut queue, &channel, 0.0, &mut drops).unwrap();
    let fraction = delivered.len() as f64 / 10_000.0;
    assert!((fraction - 0.5).abs() < 0.02, "{fraction}");
}

#[test]
fn symmetric_zone_spreads_goals_over_undominated_cells() {
    let grid = GridSpec::unit(3, 3).unwrap();
    let zone = ZonePolygon::covering(&grid);
    let cells = cells_in_zone(&grid, &zone).unwrap();
    let stats = CellStatistics::zeros(9);
    let post = em_from_statistics(&stats, &EmConfig::default()).unwrap();
    let mut counts = [0u32; 9];
    for seed in 0..200 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let from = grid.cell_center(4);
        let (a, _) = select_action_in(&stats, &grid, &zone, &cells, from, &post.responsibilities, &mut rng, &GutsConfig::default()).unwrap();
        counts[a.goal_cell] += 1;
    }
    // Edge and dwell traces are strict subsets of a diagonal trace.
    let corners = [0, 2, 6, 8];
    assert!(corners.iter().all(|&m| counts[m] > 0), "{counts:?}");
    let expected = 200.0 / corners.len() as f64;
    let chi2: f64 = corners.iter().map(|&m| (f64::from(counts[m]) - expected).powi(2) / expected).sum();
    // 3 degrees of freedom, p = 0.001.
    assert!(chi2 < 16.266, "chi2 {chi2} for {counts:?}");
    assert_eq!(corners.iter().map(|&m| counts[m]).sum::<u32>(), 200);
}
