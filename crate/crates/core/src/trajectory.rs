//! Closed-form single-axis quintic trajectories.
//!
//! A segment follows
//!
//! ```text
//! s(t) = α/120 t⁵ + κ/24 t⁴ + η/6 t³ + a₀/2 t² + v₀ t + p₀,   t ∈ [0, T]
//! ```
//!
//! where `(α, κ, η)` are chosen to meet the terminal position, velocity and
//! acceleration; this is the jerk-optimal motion between the two boundary states.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Samples used to bracket roots of derivative polynomials.
const ROOT_BRACKET_SAMPLES: usize = 1000;
/// Width at which root bisection stops, in seconds.
const ROOT_TOL: f64 = 1e-10;
/// Relative slack when comparing against kinematic limits.
const LIMIT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisBoundary {
    pub p0: f64,
    pub v0: f64,
    pub a0: f64,
    pub pf: f64,
    pub vf: f64,
    pub af: f64,
    pub horizon: f64,
}

impl AxisBoundary {
    /// Start and end at rest.
    pub fn rest_to_rest(p0: f64, pf: f64, horizon: f64) -> Self {
        Self {
            p0,
            v0: 0.0,
            a0: 0.0,
            pf,
            vf: 0.0,
            af: 0.0,
            horizon,
        }
    }

    pub fn with_horizon(self, horizon: f64) -> Self {
        Self { horizon, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySegment {
    pub alpha: f64,
    pub kappa: f64,
    pub eta: f64,
    pub a0: f64,
    pub v0: f64,
    pub p0: f64,
    pub horizon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisState {
    pub position: f64,
    pub velocity: f64,
    pub acceleration: f64,
    pub jerk: f64,
}

pub fn solve_quintic(b: &AxisBoundary) -> Result<TrajectorySegment> {
    let t = b.horizon;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::NonPositiveHorizon(t));
    }
    let dp = b.pf - b.p0 - b.v0 * t - 0.5 * b.a0 * t * t;
    let dv = b.vf - b.v0 - b.a0 * t;
    let da = b.af - b.a0;
    let t2 = t * t;
    let t3 = t2 * t;
    let t5 = t3 * t2;
    Ok(TrajectorySegment {
        alpha: (720.0 * dp - 360.0 * t * dv + 60.0 * t2 * da) / t5,
        kappa: (-360.0 * t * dp + 168.0 * t2 * dv - 24.0 * t3 * da) / t5,
        eta: (60.0 * t2 * dp - 24.0 * t3 * dv + 3.0 * t2 * t2 * da) / t5,
        a0: b.a0,
        v0: b.v0,
        p0: b.p0,
        horizon: t,
    })
}

impl TrajectorySegment {
    /// Analytic state at `t`; fails outside `[0, T]`.
    pub fn eval(&self, t: f64) -> Result<AxisState> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::OutOfHorizon { t, horizon: self.horizon });
        }
        Ok(self.state_at(t))
    }

    /// State at `t` clamped into `[0, T]`.
    pub fn state_at(&self, t: f64) -> AxisState {
        let t = t.clamp(0.0, self.horizon);
        AxisState {
            position: self.position(t),
            velocity: self.velocity(t),
            acceleration: self.acceleration(t),
            jerk: self.jerk(t),
        }
    }

    pub fn position(&self, t: f64) -> f64 {
        ((((self.alpha / 120.0 * t + self.kappa / 24.0) * t + self.eta / 6.0) * t + self.a0 / 2.0) * t + self.v0) * t
            + self.p0
    }

    pub fn velocity(&self, t: f64) -> f64 {
        (((self.alpha / 24.0 * t + self.kappa / 6.0) * t + self.eta / 2.0) * t + self.a0) * t + self.v0
    }

    pub fn acceleration(&self, t: f64) -> f64 {
        ((self.alpha / 6.0 * t + self.kappa / 2.0) * t + self.eta) * t + self.a0
    }

    pub fn jerk(&self, t: f64) -> f64 {
        (self.alpha / 2.0 * t + self.kappa) * t + self.eta
    }
}

/// Peak speed and acceleration over a segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitReport {
    pub feasible: bool,
    pub worst_v: f64,
    pub worst_a: f64,
}

/// Roots of `f` in `[0, horizon]`, bracketed by dense sampling and refined by bisection.
fn bracketed_roots(f: impl Fn(f64) -> f64, horizon: f64) -> Vec<f64> {
    let step = horizon / ROOT_BRACKET_SAMPLES as f64;
    let mut roots = Vec::new();
    let mut prev_t = 0.0;
    let mut prev = f(0.0);
    if prev == 0.0 {
        roots.push(0.0);
    }
    for i in 1..=ROOT_BRACKET_SAMPLES {
        let t = if i == ROOT_BRACKET_SAMPLES { horizon } else { i as f64 * step };
        let v = f(t);
        if v == 0.0 {
            roots.push(t);
        } else if prev != 0.0 && (prev < 0.0) != (v < 0.0) {
            let (mut lo, mut hi, mut flo) = (prev_t, t, prev);
            while hi - lo > ROOT_TOL {
                let mid = 0.5 * (lo + hi);
                let fm = f(mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if (fm < 0.0) == (flo < 0.0) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev_t = t;
        prev = v;
    }
    roots
}

fn peak_abs(value: impl Fn(f64) -> f64, derivative: impl Fn(f64) -> f64, horizon: f64) -> f64 {
    bracketed_roots(derivative, horizon)
        .into_iter()
        .chain([0.0, horizon])
        .map(|t| value(t).abs())
        .fold(0.0, f64::max)
}

/// Checks `|v| ≤ v_max` and `|a| ≤ a_max` over `[0, T]` using the critical
/// points of velocity (acceleration roots) and acceleration (jerk roots).
pub fn check_limits(seg: &TrajectorySegment, v_max: f64, a_max: f64) -> LimitReport {
    let worst_v = peak_abs(|t| seg.velocity(t), |t| seg.acceleration(t), seg.horizon);
    let worst_a = peak_abs(|t| seg.acceleration(t), |t| seg.jerk(t), seg.horizon);
    LimitReport {
        feasible: worst_v <= v_max * (1.0 + LIMIT_SLACK) && worst_a <= a_max * (1.0 + LIMIT_SLACK),
        worst_v,
        worst_a,
    }
}

/// Smallest horizon (to within 1 %) accepted by `feasible`, searching upward from `initial`.
///
/// Returns `initial` unchanged when it is already feasible.
pub fn min_feasible_horizon(initial: f64, mut feasible: impl FnMut(f64) -> Result<bool>) -> Result<f64> {
    if !(initial > 0.0 && initial.is_finite()) {
        return Err(Error::NonPositiveHorizon(initial));
    }
    if feasible(initial)? {
        return Ok(initial);
    }
    let mut lo = initial;
    let mut hi = 2.0 * initial;
    let mut doublings = 1;
    while !feasible(hi)? {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 60 {
            return Err(Error::Unreachable(format!("no feasible horizon up to {hi:e} s")));
        }
    }
    while hi - lo > 0.01 * lo {
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

pub fn check_boundary_limits(b: &AxisBoundary, v_max: f64, a_max: f64) -> Result<()> {
    if !(v_max > 0.0 && a_max > 0.0) {
        return Err(Error::InvalidParameter(format!("limits must be positive: v_max={v_max}, a_max={a_max}")));
    }
    let v_lim = v_max * (1.0 + LIMIT_SLACK);
    let a_lim = a_max * (1.0 + LIMIT_SLACK);
    if b.v0.abs() > v_lim || b.vf.abs() > v_lim {
        return Err(Error::Unreachable(format!("boundary speed exceeds {v_max} m/s")));
    }
    if b.a0.abs() > a_lim || b.af.abs() > a_lim {
        return Err(Error::Unreachable(format!("boundary acceleration exceeds {a_max} m/s²")));
    }
    Ok(())
}

/// Stretches `b.horizon` until the segment respects both limits.
pub fn rescale_time(b: &AxisBoundary, v_max: f64, a_max: f64) -> Result<TrajectorySegment> {
    check_boundary_limits(b, v_max, a_max)?;
    let horizon = min_feasible_horizon(b.horizon, |t| {
        Ok(check_limits(&solve_quintic(&b.with_horizon(t))?, v_max, a_max).feasible)
    })?;
    solve_quintic(&b.with_horizon(horizon))
}

/// Shortest rest-to-rest horizon for a move of `distance`: peak speed of the
/// normalized profile is `15/8 · d/T` and peak acceleration `10/√3 · d/T²`.
pub fn rest_to_rest_horizon(distance: f64, v_max: f64, a_max: f64) -> f64 {
    let d = distance.abs();
    (1.875 * d / v_max).max((10.0 / 3f64.sqrt() * d / a_max).sqrt())
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut w = theta.rem_euclid(TAU);
    if w > PI {
        w -= TAU;
    }
    w
}
