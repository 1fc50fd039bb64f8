//! Quintic segments: the unit rest-to-rest move, limit checks and time rescaling.

use std::error::Error;

use guts_search::trajectory::{check_limits, rescale_time, rest_to_rest_horizon, solve_quintic, AxisBoundary};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let unit = solve_quintic(&AxisBoundary::rest_to_rest(0.0, 1.0, 1.0))?;
    println!("unit move: alpha {} kappa {} eta {}", unit.alpha, unit.kappa, unit.eta);
    println!("peak speed {:.6}", unit.velocity(0.5));

    // 45 m in 2 s is far beyond 10 m/s and 5 m/s^2.
    let rushed = AxisBoundary::rest_to_rest(0.0, 45.0, 2.0);
    let report = check_limits(&solve_quintic(&rushed)?, 10.0, 5.0);
    println!("rushed: worst v {:.2} m/s, worst a {:.2} m/s^2, feasible {}", report.worst_v, report.worst_a, report.feasible);

    let fixed = rescale_time(&rushed, 10.0, 5.0)?;
    let report = check_limits(&fixed, 10.0, 5.0);
    println!(
        "rescaled to {:.3} s (closed form {:.3} s): worst v {:.2}, worst a {:.2}",
        fixed.horizon,
        rest_to_rest_horizon(45.0, 10.0, 5.0),
        report.worst_v,
        report.worst_a
    );

    // A segment that starts moving and ends decelerating.
    let moving = AxisBoundary {
        p0: 0.0,
        v0: 4.0,
        a0: 0.0,
        pf: 30.0,
        vf: 2.0,
        af: -1.0,
        horizon: 6.0,
    };
    let seg = solve_quintic(&moving)?;
    for t in [0.0, 1.5, 3.0, 4.5, 6.0] {
        let s = seg.eval(t)?;
        println!("t={t:.1}  p={:>7.3}  v={:>6.3}  a={:>6.3}  j={:>6.3}", s.position, s.velocity, s.acceleration, s.jerk);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
