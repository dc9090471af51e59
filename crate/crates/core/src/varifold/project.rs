//! Projection of a varifold to the planar pair `(S, T)` on a staggered grid.
//!
//! Face values are the exact face fluxes of `B_h * S`, the field averaged over one `hx × hy`
//! cell-sized box. For a vertical face this weights the field by the box indicator in x and by
//! the linear hat between the two adjacent row centres in y; horizontal faces are symmetric. The
//! discrete divergence of a cell is then the integral of `div(B_h * S)` over that cell, so the
//! discrete total variation never exceeds the continuum one, and the kernels partition unity,
//! so totals are exact.

use crate::error::{Error, Result};
use crate::geom::{Vec2, Vec3};
use crate::integrand::Integrand;
use crate::planefield::{GridField, GridSpec};

use super::TriVarifold;

/// Per-unit-area contributions `(S, T)` of a plane with unit normal `nu`.
pub fn plane_vectors(f: &Integrand, nu: &Vec3) -> Result<(Vec2, Vec2)> {
    let g = f.grad(nu)?;
    let s = Vec2::new(nu[1] * g[1] + nu[2] * g[2], -nu[0] * g[1]);
    let t = Vec2::new(-nu[1] * g[0], nu[0] * g[0] + nu[2] * g[2]);
    Ok((s, t))
}

/// Sutherland–Hodgman clip of a convex polygon to `lo ≤ p[axis] ≤ hi`.
fn clip(poly: &[Vec2], axis: usize, lo: f64, hi: f64) -> Vec<Vec2> {
    fn half(poly: &[Vec2], axis: usize, bound: f64, below: bool) -> Vec<Vec2> {
        let keep = |v: f64| if below { v <= bound } else { v >= bound };
        let mut out = Vec::with_capacity(poly.len() + 2);
        for k in 0..poly.len() {
            let (a, b) = (poly[k], poly[(k + 1) % poly.len()]);
            let (ia, ib) = (keep(a[axis]), keep(b[axis]));
            if ia {
                out.push(a);
            }
            if ia != ib {
                let mut q = a + (b - a) * ((bound - a[axis]) / (b[axis] - a[axis]));
                q[axis] = bound;
                out.push(q);
            }
        }
        out
    }
    let p = half(poly, axis, lo, false);
    if p.len() < 3 {
        return Vec::new();
    }
    let p = half(&p, axis, hi, true);
    if p.len() < 3 {
        Vec::new()
    } else {
        p
    }
}

/// Area and centroid of a simple polygon.
fn area_centroid(poly: &[Vec2]) -> (f64, Vec2) {
    let (mut a, mut c) = (0.0, Vec2::zeros());
    for k in 0..poly.len() {
        let (p, q) = (poly[k], poly[(k + 1) % poly.len()]);
        let w = p[0] * q[1] - q[0] * p[1];
        a += w;
        c += (p + q) * w;
    }
    if a == 0.0 {
        return (0.0, poly[0]);
    }
    (0.5 * a.abs(), c / (3.0 * a))
}

/// Amounts `(S^x, S^y, T^x, T^y)` carried by a piece of the projection.
type Amounts = [f64; 4];

struct Depositor {
    grid: GridSpec,
    s: GridField,
    t: GridField,
}

impl Depositor {
    /// Adds `weight · amounts` to the face `face` (along `axis`) in row or column `row`.
    fn add(&mut self, axis: usize, face: i64, row: i64, a: &Amounts, weight: f64) {
        if weight == 0.0 {
            return;
        }
        let scale = weight / self.grid.cell_area();
        let (face, row) = (face as usize, row as usize);
        if axis == 0 {
            let k = self.s.xi(face, row);
            self.s.fx[k] += scale * a[0];
            self.t.fx[k] += scale * a[2];
        } else {
            let k = self.s.yi(row, face);
            self.s.fy[k] += scale * a[1];
            self.t.fy[k] += scale * a[3];
        }
    }

    /// Spreads `amounts` uniformly over the triangle `tri`.
    fn triangle(&mut self, tri: [Vec2; 3], amounts: &Amounts) {
        let g = self.grid;
        let total = area_centroid(&tri).0;
        let lo = tri[0].inf(&tri[1]).inf(&tri[2]);
        let hi = tri[0].sup(&tri[1]).sup(&tri[2]);
        let h = [g.hx, g.hy];
        for axis in 0..2 {
            let other = 1 - axis;
            let f0 = ((lo[axis] - g.origin[axis]) / h[axis] + 0.5).floor() as i64;
            let f1 = ((hi[axis] - g.origin[axis]) / h[axis] + 0.5).floor() as i64;
            let r0 = ((lo[other] - g.origin[other]) / h[other] - 0.5).floor() as i64;
            let r1 = ((hi[other] - g.origin[other]) / h[other] - 0.5).floor() as i64;
            for f in f0..=f1 {
                let c = g.origin[axis] + f as f64 * h[axis];
                let strip = clip(&tri, axis, c - 0.5 * h[axis], c + 0.5 * h[axis]);
                if strip.is_empty() {
                    continue;
                }
                for r in r0..=r1 {
                    // between the centres of rows r and r + 1
                    let y0 = g.origin[other] + (r as f64 + 0.5) * h[other];
                    let piece = clip(&strip, other, y0, y0 + h[other]);
                    if piece.is_empty() {
                        continue;
                    }
                    let (a, cen) = area_centroid(&piece);
                    let up = ((cen[other] - y0) / h[other]).clamp(0.0, 1.0);
                    let frac = a / total;
                    self.add(axis, f, r, amounts, frac * (1.0 - up));
                    self.add(axis, f, r + 1, amounts, frac * up);
                }
            }
        }
    }

    /// Point mass with the same kernel.
    fn point(&mut self, p: Vec2, amounts: &Amounts) {
        let g = self.grid;
        let h = [g.hx, g.hy];
        for axis in 0..2 {
            let other = 1 - axis;
            let f = ((p[axis] - g.origin[axis]) / h[axis] + 0.5).floor() as i64;
            let s = (p[other] - g.origin[other]) / h[other] - 0.5;
            let r = s.floor();
            self.add(axis, f, r as i64, amounts, 1.0 - (s - r));
            self.add(axis, f, r as i64 + 1, amounts, s - r);
        }
    }
}

/// Projects `V` to the xy-plane, producing the fields `S` and `T`.
///
/// Each triangle spreads `θ · area` times its plane vectors uniformly over its projection.
/// Triangles seen nearly edge-on are sampled at sub-centroids of a subdivision eight times
/// finer than the grid instead.
pub fn project_to_plane(v: &TriVarifold, f: &Integrand, grid: &GridSpec) -> Result<(GridField, GridField)> {
    let g = *grid;
    let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (k, t) in v.triangles.iter().enumerate() {
        if v.theta[k] > 0.0 {
            for &i in t {
                let q = Vec2::new(v.vertices[i][0], v.vertices[i][1]);
                lo = lo.inf(&q);
                hi = hi.sup(&q);
            }
        }
    }
    let (xmin, ymin) = (g.origin[0] + g.hx, g.origin[1] + g.hy);
    let (xmax, ymax) = (g.origin[0] + (g.nx - 1) as f64 * g.hx, g.origin[1] + (g.ny - 1) as f64 * g.hy);
    if lo[0] < xmin || lo[1] < ymin || hi[0] > xmax || hi[1] > ymax {
        return Err(Error::GridTooSmall(format!(
            "projected support [{}, {}]x[{}, {}] must stay one cell inside the grid",
            lo[0], hi[0], lo[1], hi[1]
        )));
    }
    let mut dep = Depositor { grid: g, s: GridField::zeros(g), t: GridField::zeros(g) };
    let hmin = g.hx.min(g.hy);
    for k in 0..v.triangles.len() {
        let th = v.theta[k];
        if th <= 0.0 {
            continue;
        }
        let nu = v.normal(k);
        let (sv, tv) = plane_vectors(f, &nu)?;
        let w = th * v.area(k);
        let amounts = [w * sv[0], w * sv[1], w * tv[0], w * tv[1]];
        let tri = v.corners(k).map(|p| Vec2::new(p[0], p[1]));
        if nu[2].abs() > 1e-9 {
            dep.triangle(tri, &amounts);
            continue;
        }
        let [p0, p1, p2] = tri;
        let diam = (p1 - p0).norm().max((p2 - p1).norm()).max((p0 - p2).norm());
        let m = ((8.0 * diam / hmin).ceil() as usize).max(1);
        let mf = m as f64;
        let sub = amounts.map(|a| a / (mf * mf));
        let (e1, e2) = (p1 - p0, p2 - p0);
        let at = |u: f64, v: f64| p0 + e1 * (u / mf) + e2 * (v / mf);
        for a in 0..m {
            for b in 0..(m - a) {
                let (af, bf) = (a as f64, b as f64);
                dep.point(at(af + 1.0 / 3.0, bf + 1.0 / 3.0), &sub);
                if a + b + 1 < m {
                    dep.point(at(af + 2.0 / 3.0, bf + 2.0 / 3.0), &sub);
                }
            }
        }
    }
    Ok((dep.s, dep.t))
}

/// Square grid with `n` cells per side covering the projected support plus a margin of
/// `margin` times its extent.
pub fn covering_grid(v: &TriVarifold, n: usize, margin: f64) -> Result<GridSpec> {
    let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in &v.vertices {
        let q = Vec2::new(p[0], p[1]);
        lo = lo.inf(&q);
        hi = hi.sup(&q);
    }
    let extent = (hi - lo).amax().max(1e-300);
    GridSpec::covering(lo, hi, n, margin * extent)
}
