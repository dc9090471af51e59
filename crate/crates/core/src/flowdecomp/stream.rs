//! Stream functions `f` with `∇⊥f = (−∂_y f, ∂_x f) = Z`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{gauss_legendre_unit, Vec2};
use crate::planefield::{GridSpec, ScalarField};

use super::field::SmoothField;

/// Longest sub-interval of the composite Gauss rule.
const PIECE: f64 = 0.0125;

/// Cell-centre values with the gap between the two axis-aligned integration paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamFunction {
    pub field: ScalarField,
    pub residual: f64,
    pub oscillation: f64,
}

fn gauss(a: f64, b: f64, f: &dyn Fn(f64) -> f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let rule = gauss_legendre_unit(5);
    let n = ((b - a).abs() / PIECE).ceil().max(1.0) as usize;
    let h = (b - a) / n as f64;
    let mut s = 0.0;
    for k in 0..n {
        let x0 = a + h * k as f64;
        s += rule.iter().map(|&(t, w)| w * f(x0 + h * t)).sum::<f64>() * h;
    }
    s
}

/// `∫_0^{t_k} f` for increasing `t`.
fn cumulative(t: &[f64], f: &dyn Fn(f64) -> f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(t.len());
    let mut acc = gauss(0.0, t[0], f);
    out.push(acc);
    for w in t.windows(2) {
        acc += gauss(w[0], w[1], f);
        out.push(acc);
    }
    out
}

/// `f(p)` along the path `(0,0) → (p_x, 0) → p` of the form `Z^y dx − Z^x dy`.
pub fn stream_value(z: &SmoothField, p: Vec2) -> f64 {
    gauss(0.0, p[0], &|s| z.eval(Vec2::new(s, 0.0))[1]) - gauss(0.0, p[1], &|s| z.eval(Vec2::new(p[0], s))[0])
}

/// Stream function at cell centres by cumulative Gauss integration from the origin. Both the
/// x-then-y and the y-then-x paths are computed and their largest gap is the residual.
pub fn stream_function(z: &SmoothField, grid: &GridSpec) -> Result<StreamFunction> {
    let xs: Vec<f64> = (0..grid.nx).map(|i| grid.origin[0] + (i as f64 + 0.5) * grid.hx).collect();
    let ys: Vec<f64> = (0..grid.ny).map(|j| grid.origin[1] + (j as f64 + 0.5) * grid.hy).collect();
    let along_x0 = cumulative(&xs, &|s| z.eval(Vec2::new(s, 0.0))[1]);
    let along_y0 = cumulative(&ys, &|s| z.eval(Vec2::new(0.0, s))[0]);
    let mut f1 = vec![0.0; grid.nx * grid.ny];
    let mut f2 = vec![0.0; grid.nx * grid.ny];
    for (i, &x) in xs.iter().enumerate() {
        let col = cumulative(&ys, &|s| z.eval(Vec2::new(x, s))[0]);
        for j in 0..grid.ny {
            f1[j * grid.nx + i] = along_x0[i] - col[j];
        }
    }
    for (j, &y) in ys.iter().enumerate() {
        let row = cumulative(&xs, &|s| z.eval(Vec2::new(s, y))[1]);
        for i in 0..grid.nx {
            f2[j * grid.nx + i] = row[i] - along_y0[j];
        }
    }
    let residual = f1.iter().zip(&f2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let hi = f1.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = f1.iter().cloned().fold(f64::INFINITY, f64::min);
    let oscillation = hi - lo;
    let limit = (1e-6 * oscillation).max(1e-14);
    if !(residual <= limit) {
        return Err(Error::PathResidual { residual, limit });
    }
    Ok(StreamFunction { field: ScalarField { grid: *grid, values: f1 }, residual, oscillation })
}
