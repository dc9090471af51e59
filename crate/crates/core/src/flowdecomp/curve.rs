//! Fixed-step RK4 integral curves with level stopping.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec2;

use super::field::SmoothField;

/// Default cap on the number of RK4 steps per trace.
pub const MAX_STEPS: usize = 200_000;
/// Bisection tolerance for landing on a stopping level.
pub const LEVEL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stop {
    /// Stop when the x coordinate reaches the level (backward in time if the level lies to the left).
    XLevel(f64),
    /// Stop when the y coordinate reaches the level.
    YLevel(f64),
    /// Integrate for the given signed time.
    Time(f64),
}

#[inline]
pub fn rk4_step(z: &SmoothField, p: Vec2, h: f64) -> Vec2 {
    let k1 = z.eval(p);
    let k2 = z.eval(p + k1 * (0.5 * h));
    let k3 = z.eval(p + k2 * (0.5 * h));
    let k4 = z.eval(p + k3 * h);
    p + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// RK4 trajectory from `p` with step `h`, including both endpoints.
pub fn integrate_curve(z: &SmoothField, p: Vec2, stop: Stop, h: f64) -> Result<Vec<Vec2>> {
    integrate_curve_capped(z, p, stop, h, MAX_STEPS)
}

pub fn integrate_curve_capped(z: &SmoothField, p: Vec2, stop: Stop, h: f64, max_steps: usize) -> Result<Vec<Vec2>> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("step size {h}")));
    }
    let mut out = vec![p];
    match stop {
        Stop::Time(t) => {
            let n = (t.abs() / h).ceil() as usize;
            if n > max_steps {
                return Err(Error::StepCap(max_steps));
            }
            if n == 0 {
                return Ok(out);
            }
            let dt = t / n as f64;
            let mut q = p;
            for _ in 0..n {
                q = rk4_step(z, q, dt);
                out.push(q);
            }
            Ok(out)
        }
        Stop::XLevel(level) | Stop::YLevel(level) => {
            let axis = if matches!(stop, Stop::XLevel(_)) { 0 } else { 1 };
            let gap0 = level - p[axis];
            if gap0 == 0.0 {
                return Ok(out);
            }
            let v = z.eval(p)[axis];
            if v == 0.0 {
                return Err(Error::StepCap(0));
            }
            // move in the time direction that approaches the level
            let dt = if (gap0 > 0.0) == (v > 0.0) { h } else { -h };
            let side = gap0.signum();
            let mut q = p;
            for _ in 0..max_steps {
                let next = rk4_step(z, q, dt);
                if !next[axis].is_finite() {
                    return Err(Error::StepCap(max_steps));
                }
                if (level - next[axis]) * side <= 0.0 {
                    out.push(land(z, q, dt, axis, level));
                    return Ok(out);
                }
                q = next;
                out.push(q);
            }
            Err(Error::StepCap(max_steps))
        }
    }
}

/// Bisects the fraction of the final step so that the endpoint lies on the level.
fn land(z: &SmoothField, q: Vec2, dt: f64, axis: usize, level: f64) -> Vec2 {
    let side = (level - q[axis]).signum();
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut best = rk4_step(z, q, dt);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let r = rk4_step(z, q, mid * dt);
        if (level - r[axis]) * side > 0.0 {
            lo = mid;
        } else {
            hi = mid;
            best = r;
        }
        if (r[axis] - level).abs() <= LEVEL_TOL {
            best = r;
            break;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    best[axis] = level;
    best
}

/// Full crossing of the strip `[x0, x1] × R` through `p`, ordered by increasing x.
pub fn strip_crossing(z: &SmoothField, p: Vec2, x0: f64, x1: f64, h: f64) -> Result<Vec<Vec2>> {
    let mut back = integrate_curve(z, p, Stop::XLevel(x0), h)?;
    back.reverse();
    let fwd = integrate_curve(z, p, Stop::XLevel(x1), h)?;
    back.extend_from_slice(&fwd[1..]);
    Ok(back)
}

/// Distance from `q` to a polyline.
pub fn polyline_distance(poly: &[Vec2], q: Vec2) -> f64 {
    if poly.len() == 1 {
        return (q - poly[0]).norm();
    }
    poly.windows(2)
        .map(|w| {
            let d = w[1] - w[0];
            let l2 = d.norm_squared();
            let t = if l2 > 0.0 { ((q - w[0]).dot(&d) / l2).clamp(0.0, 1.0) } else { 0.0 };
            (q - (w[0] + d * t)).norm()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Intersection points of two polylines.
pub fn polyline_intersections(a: &[Vec2], b: &[Vec2]) -> Vec<Vec2> {
    let mut out = Vec::new();
    for s in a.windows(2) {
        let (lo_a, hi_a) = (s[0].inf(&s[1]), s[0].sup(&s[1]));
        for t in b.windows(2) {
            let (lo_b, hi_b) = (t[0].inf(&t[1]), t[0].sup(&t[1]));
            if hi_a[0] < lo_b[0] || hi_b[0] < lo_a[0] || hi_a[1] < lo_b[1] || hi_b[1] < lo_a[1] {
                continue;
            }
            let r = s[1] - s[0];
            let u = t[1] - t[0];
            let den = r[0] * u[1] - r[1] * u[0];
            if den == 0.0 {
                continue;
            }
            let w = t[0] - s[0];
            let alpha = (w[0] * u[1] - w[1] * u[0]) / den;
            let beta = (w[0] * r[1] - w[1] * r[0]) / den;
            if (0.0..1.0).contains(&alpha) && (0.0..1.0).contains(&beta) {
                out.push(s[0] + r * alpha);
            }
        }
    }
    out
}
