//! Rasterization of weighted curves into tube fields.

use crate::error::{Error, Result};
use crate::geom::Vec2;

use super::{GridField, GridSpec};

/// One straight piece of the tube, cut at both ends by the joint bisectors.
struct Piece {
    a: Vec2,
    b: Vec2,
    dir: Vec2,
    /// `(p − a)·start_cut ≥ 0` keeps `p` past the start joint.
    start_cut: Vec2,
    /// `(p − b)·end_cut ≤ 0` keeps `p` before the end joint.
    end_cut: Vec2,
    lo: Vec2,
    hi: Vec2,
}

impl Piece {
    /// Fraction of the segment `[p, q]` inside the piece, by clipping against its four half-planes.
    fn covered(&self, p: Vec2, q: Vec2, half: f64) -> f64 {
        let e = q - p;
        let normal = Vec2::new(-self.dir[1], self.dir[0]);
        // each constraint reads n·x ≤ d
        let planes = [
            (-self.start_cut, -self.start_cut.dot(&self.a)),
            (self.end_cut, self.end_cut.dot(&self.b)),
            (normal, normal.dot(&self.a) + half),
            (-normal, -normal.dot(&self.a) + half),
        ];
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for (n, d) in planes {
            let f0 = n.dot(&p) - d;
            let de = n.dot(&e);
            if de == 0.0 {
                if f0 > 0.0 {
                    return 0.0;
                }
            } else if de > 0.0 {
                hi = hi.min(-f0 / de);
            } else {
                lo = lo.max(-f0 / de);
            }
        }
        (hi - lo).max(0.0)
    }
}

/// Splits the tube into mitered pieces. Joints are cut along the angle bisector, so the unit
/// tangent field keeps a continuous normal component across every cut and is divergence-free
/// away from the flat ends of an open curve.
fn pieces(pts: &[Vec2], closed: bool, half: f64, pad: f64) -> Result<Vec<Piece>> {
    let n = pts.len() - 1;
    let dirs: Vec<Vec2> = pts.windows(2).map(|w| (w[1] - w[0]).normalize()).collect();
    let joint = |u: Vec2, v: Vec2| -> Result<(Vec2, f64)> {
        let m = u + v;
        let c = 0.5 * m.norm();
        if c < 0.1 {
            return Err(Error::InvalidParameter("polyline turns back on itself".into()));
        }
        Ok((m, 1.0 / c))
    };
    let mut out = Vec::with_capacity(n);
    for s in 0..n {
        let dir = dirs[s];
        let (start_cut, f0) = if s > 0 || closed { joint(dirs[(s + n - 1) % n], dir)? } else { (dir, 1.0) };
        let (end_cut, f1) = if s + 1 < n || closed { joint(dir, dirs[(s + 1) % n])? } else { (dir, 1.0) };
        let r = half * f0.max(f1) + pad;
        let (a, b) = (pts[s], pts[s + 1]);
        out.push(Piece { a, b, dir, start_cut, end_cut, lo: a.inf(&b).add_scalar(-r), hi: a.sup(&b).add_scalar(r) });
    }
    Ok(out)
}

/// Tube field of width `eps` around a polyline, with density `weight` times the unit tangent.
///
/// Each face value is the weighted tangent component times the exactly clipped covered fraction
/// of the face, so face fluxes are the exact fluxes of the tube field and the discrete divergence
/// of a cell is the divergence measure of the cell. A polyline whose last point equals its first
/// is treated as closed. Joints are mitered and open ends are flat.
pub fn from_curve(polyline: &[Vec2], weight: f64, eps: f64, grid: &GridSpec) -> Result<GridField> {
    let hmax = grid.hx.max(grid.hy);
    if !(eps >= 2.0 * hmax) {
        return Err(Error::GridTooSmall(format!("tube width {eps} below twice the cell size {hmax}")));
    }
    let mut pts: Vec<Vec2> = Vec::with_capacity(polyline.len());
    for &p in polyline {
        if pts.last().is_none_or(|q: &Vec2| (p - q).norm() > 0.0) {
            pts.push(p);
        }
    }
    if pts.len() < 2 {
        return Err(Error::InvalidParameter("polyline needs two distinct points".into()));
    }
    let closed = pts.len() > 3 && (pts[0] - pts[pts.len() - 1]).norm() < 1e-12;
    if closed {
        let k = pts.len() - 1;
        pts[k] = pts[0];
    }
    let half = 0.5 * eps;
    let parts = pieces(&pts, closed, half, hmax)?;
    let lo = parts.iter().fold(Vec2::new(f64::INFINITY, f64::INFINITY), |m, p| m.inf(&p.lo));
    let hi = parts.iter().fold(Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY), |m, p| m.sup(&p.hi));
    let dom_lo = Vec2::new(grid.origin[0], grid.origin[1]);
    let dom_hi = dom_lo + Vec2::new(grid.nx as f64 * grid.hx, grid.ny as f64 * grid.hy);
    let inner_lo = lo.add_scalar(hmax);
    let inner_hi = hi.add_scalar(-hmax);
    if inner_lo[0] <= dom_lo[0] || inner_lo[1] <= dom_lo[1] || inner_hi[0] >= dom_hi[0] || inner_hi[1] >= dom_hi[1] {
        return Err(Error::GridTooSmall("tube reaches the grid boundary".into()));
    }
    let index_range = |lo: f64, hi: f64, origin: f64, h: f64, n: usize| -> (usize, usize) {
        let a = ((lo - origin) / h).floor().max(0.0) as usize;
        let b = (((hi - origin) / h).ceil().max(0.0) as usize).min(n);
        (a.min(n), b)
    };

    let mut out = GridField::zeros(*grid);
    let mut candidates: Vec<&Piece> = Vec::new();
    // vertical faces carry the x component, horizontal faces the y component
    for axis in 0..2 {
        let (ni, nj) = if axis == 0 { (grid.nx + 1, grid.ny) } else { (grid.nx, grid.ny + 1) };
        let (i0, i1) = index_range(lo[0], hi[0], grid.origin[0], grid.hx, ni - 1);
        let (j0, j1) = index_range(lo[1], hi[1], grid.origin[1], grid.hy, nj - 1);
        for j in j0..=j1 {
            for i in i0..=i1 {
                let (c, along, len) = if axis == 0 {
                    (grid.xface_center(i, j), Vec2::new(0.0, 1.0), grid.hy)
                } else {
                    (grid.yface_center(i, j), Vec2::new(1.0, 0.0), grid.hx)
                };
                candidates.clear();
                candidates.extend(parts.iter().filter(|p| c[0] >= p.lo[0] && c[0] <= p.hi[0] && c[1] >= p.lo[1] && c[1] <= p.hi[1]));
                if candidates.is_empty() {
                    continue;
                }
                let (p0, p1) = (c - along * (0.5 * len), c + along * (0.5 * len));
                let acc: f64 = candidates.iter().map(|p| p.dir[axis] * p.covered(p0, p1, half)).sum();
                if acc == 0.0 {
                    continue;
                }
                let v = weight * acc;
                if axis == 0 {
                    let k = out.xi(i, j);
                    out.fx[k] = v;
                } else {
                    let k = out.yi(i, j);
                    out.fy[k] = v;
                }
            }
        }
    }
    if out.boundary_max() != 0.0 {
        return Err(Error::GridTooSmall("tube reaches the grid boundary".into()));
    }
    Ok(out)
}

/// Two unit-weight tubes of width `eps` through the centre of `grid`: `S` along `(cos θ, sin θ)`,
/// `T` along `(−sin θ, cos θ)`, each of length half the smaller side.
pub fn crossing_tubes(grid: &GridSpec, eps: f64, angle: f64) -> Result<(GridField, GridField)> {
    let c = Vec2::new(grid.origin[0] + 0.5 * grid.nx as f64 * grid.hx, grid.origin[1] + 0.5 * grid.ny as f64 * grid.hy);
    let half = 0.25 * (grid.nx as f64 * grid.hx).min(grid.ny as f64 * grid.hy);
    let u = Vec2::new(angle.cos(), angle.sin()) * half;
    let v = Vec2::new(-u[1], u[0]);
    Ok((from_curve(&[c - u, c + u], 1.0, eps, grid)?, from_curve(&[c - v, c + v], 1.0, eps, grid)?))
}
