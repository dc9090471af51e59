//! Partitions by flow lines and vertical lines, and region-constant approximations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{gauss_legendre_unit, Vec2};
use crate::report::Report;

use super::curve::{integrate_curve, Stop};
use super::factor::FlowDecomposition;
use super::field::SmoothField;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Window {
    pub fn square(r: f64) -> Self {
        Window { x0: -r, x1: r, y0: -r, y1: r }
    }
}

/// Region between the flow lines through `(0, jτ)`, `(0, (j+1)τ)` and the lines `x = kτ`, `x = (k+1)τ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub j: i64,
    pub k: i64,
    /// Bottom flow-line piece, ordered by increasing x.
    pub bottom: Vec<Vec2>,
    /// Top flow-line piece, ordered by increasing x.
    pub top: Vec<Vec2>,
    pub area: f64,
}

impl Region {
    /// Left side `∂_L`, from bottom to top on `x = kτ`.
    pub fn left(&self) -> (Vec2, Vec2) {
        (self.bottom[0], self.top[0])
    }

    /// Right side `∂_R`, from bottom to top on `x = (k+1)τ`.
    pub fn right(&self) -> (Vec2, Vec2) {
        (*self.bottom.last().unwrap(), *self.top.last().unwrap())
    }

    /// Closed boundary polygon, counterclockwise.
    pub fn polygon(&self) -> Vec<Vec2> {
        let mut poly = self.bottom.clone();
        poly.extend(self.top.iter().rev());
        poly
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub tau: f64,
    pub j_range: (i64, i64),
    pub k_range: (i64, i64),
    /// Row-major in `k`: index `(j − j0)·nk + (k − k0)`.
    pub regions: Vec<Region>,
}

impl Partition {
    pub fn nk(&self) -> usize {
        (self.k_range.1 - self.k_range.0) as usize
    }

    pub fn region(&self, j: i64, k: i64) -> &Region {
        &self.regions[(j - self.j_range.0) as usize * self.nk() + (k - self.k_range.0) as usize]
    }

    pub fn bounding_box(&self) -> (Vec2, Vec2) {
        let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = -lo;
        for r in &self.regions {
            for p in r.bottom.iter().chain(&r.top) {
                lo = lo.inf(p);
                hi = hi.sup(p);
            }
        }
        (lo, hi)
    }
}

fn shoelace(poly: &[Vec2]) -> f64 {
    let n = poly.len();
    0.5 * (0..n).map(|i| {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        a[0] * b[1] - a[1] * b[0]
    })
    .sum::<f64>()
}

/// Pieces of the flow line through `(0, y)` between consecutive vertical lines `kτ`, `k0 ≤ k < k1`.
fn flow_line(z: &SmoothField, y: f64, tau: f64, k0: i64, k1: i64, h: f64) -> Result<Vec<Vec<Vec2>>> {
    let mut pieces: Vec<Option<Vec<Vec2>>> = vec![None; (k1 - k0) as usize];
    let start = Vec2::new(0.0, y);
    // forward from the axis
    let mut p = start;
    let mut k = 0i64;
    while k < k1 {
        let c = integrate_curve(z, p, Stop::XLevel((k + 1) as f64 * tau), h)?;
        if k >= k0 {
            pieces[(k - k0) as usize] = Some(c.clone());
        }
        p = *c.last().unwrap();
        k += 1;
    }
    // backward from the axis
    let mut p = start;
    let mut k = 0i64;
    while k > k0 {
        let mut c = integrate_curve(z, p, Stop::XLevel((k - 1) as f64 * tau), h)?;
        p = *c.last().unwrap();
        c.reverse();
        if k - 1 < k1 {
            pieces[(k - 1 - k0) as usize] = Some(c);
        }
        k -= 1;
    }
    Ok(pieces.into_iter().map(|c| c.expect("every piece is traced")).collect())
}

/// Regions cut by the flow lines through `(0, jτ)` and the lines `x = kτ` inside the window.
pub fn build_partition(z: &SmoothField, tau: f64, window: &Window, h: f64) -> Result<Partition> {
    if !(tau > 0.0 && h > 0.0) {
        return Err(Error::InvalidParameter(format!("tau {tau}, step {h}")));
    }
    let k0 = (window.x0 / tau).ceil() as i64;
    let k1 = (window.x1 / tau).floor() as i64;
    let j0 = (window.y0 / tau).ceil() as i64;
    let j1 = (window.y1 / tau).floor() as i64;
    if k1 <= k0 || j1 <= j0 {
        return Err(Error::InvalidParameter("window holds no region".into()));
    }
    let lines: Vec<Vec<Vec<Vec2>>> =
        (j0..=j1).map(|j| flow_line(z, j as f64 * tau, tau, k0, k1, h)).collect::<Result<_>>()?;
    for (a, (lo, hi)) in lines.iter().zip(lines.iter().skip(1)).enumerate() {
        for (kk, (pl, ph)) in lo.iter().zip(hi).enumerate() {
            for (q0, q1) in [(pl[0], ph[0]), (*pl.last().unwrap(), *ph.last().unwrap())] {
                if !(q1[1] > q0[1]) {
                    return Err(Error::FlowCrossing(format!(
                        "lines {} and {} at x = {}",
                        j0 + a as i64,
                        j0 + a as i64 + 1,
                        (k0 + kk as i64) as f64 * tau
                    )));
                }
            }
        }
    }
    let mut regions = Vec::with_capacity(((j1 - j0) * (k1 - k0)) as usize);
    for j in j0..j1 {
        for k in k0..k1 {
            let bottom = lines[(j - j0) as usize][(k - k0) as usize].clone();
            let top = lines[(j + 1 - j0) as usize][(k - k0) as usize].clone();
            let mut r = Region { j, k, bottom, top, area: 0.0 };
            r.area = shoelace(&r.polygon());
            regions.push(r);
        }
    }
    Ok(Partition { tau, j_range: (j0, j1), k_range: (k0, k1), regions })
}

/// `∫ V^x dy` over a vertical segment, composite 5-point Gauss.
pub fn vertical_flux(v: &dyn Fn(Vec2) -> Vec2, a: Vec2, b: Vec2) -> f64 {
    let rule = gauss_legendre_unit(5);
    let n = ((b[1] - a[1]).abs() / 0.125).ceil().max(1.0) as usize;
    let dy = (b[1] - a[1]) / n as f64;
    let mut s = 0.0;
    for i in 0..n {
        let y0 = a[1] + dy * i as f64;
        s += rule.iter().map(|&(t, w)| w * v(Vec2::new(a[0], y0 + dy * t))[0]).sum::<f64>() * dy;
    }
    s
}

/// Midpoint-lattice `∫ |div S|` over a box with about `per_unit` samples per unit length.
pub fn div_abs_integral(d: &FlowDecomposition, lo: Vec2, hi: Vec2, per_unit: usize) -> f64 {
    let nx = (((hi[0] - lo[0]) * per_unit as f64).ceil() as usize).max(1);
    let ny = (((hi[1] - lo[1]) * per_unit as f64).ceil() as usize).max(1);
    let (hx, hy) = ((hi[0] - lo[0]) / nx as f64, (hi[1] - lo[1]) / ny as f64);
    let mut s = 0.0;
    for b in 0..ny {
        for a in 0..nx {
            s += d.div_s(Vec2::new(lo[0] + (a as f64 + 0.5) * hx, lo[1] + (b as f64 + 0.5) * hy)).abs();
        }
    }
    s * hx * hy
}

/// Region-constant coefficients `α_R` with their `Z` fluxes and the jump-bound report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseApprox {
    pub alphas: Vec<f64>,
    pub z_flux: Vec<f64>,
    pub report: Report,
}

/// `α_R = flux(S, ∂_L R)/flux(Z, ∂_L R)`. The report compares the sum over horizontally adjacent
/// pairs of `|α_R′ − α_R|·flux(Z, ∂_L R′)` with `∫|div S|` over the partition's bounding box,
/// at slack 1.05.
pub fn piecewise_approx(d: &FlowDecomposition, part: &Partition, per_unit: usize) -> Result<PiecewiseApprox> {
    let z = |p: Vec2| d.z.eval(p);
    let s = |p: Vec2| d.s(p);
    let mut alphas = Vec::with_capacity(part.regions.len());
    let mut z_flux = Vec::with_capacity(part.regions.len());
    for r in &part.regions {
        let (a, b) = r.left();
        let fz = vertical_flux(&z, a, b);
        if !(fz > 0.0) {
            return Err(Error::NonPositiveFlux(fz));
        }
        let fs = vertical_flux(&s, a, b);
        alphas.push(fs / fz);
        z_flux.push(fz);
    }
    let nk = part.nk();
    let mut lhs = 0.0;
    let mut scale = 0.0;
    for (i, _) in part.regions.iter().enumerate() {
        scale += alphas[i].abs() * z_flux[i];
        if (i % nk) + 1 < nk {
            lhs += (alphas[i + 1] - alphas[i]).abs() * z_flux[i + 1];
        }
    }
    let (lo, hi) = part.bounding_box();
    let rhs = div_abs_integral(d, lo, hi, per_unit);
    let report = Report::new(lhs, rhs, 0.05, 1e-12 * scale.max(1.0))
        .with("tau", part.tau)
        .with("regions", part.regions.len() as f64);
    Ok(PiecewiseApprox { alphas, z_flux, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowdecomp::factor::{factorize, FactorizeOptions};
    use crate::flowdecomp::field::{transverse_flow_pair, PairParams};
    use crate::geom::Mat2;
    use rand::SeedableRng;

    #[test]
    fn constant_field_gives_squares() {
        let z = SmoothField::constant(Vec2::new(1.0, 0.0));
        let p = build_partition(&z, 0.25, &Window::square(1.0), 1.0 / 64.0).unwrap();
        assert_eq!(p.regions.len(), 64);
        for r in &p.regions {
            assert!((r.area - 0.0625).abs() < 1e-14);
        }
    }

    #[test]
    fn sheared_strips_keep_area_and_share_sides() {
        let z = SmoothField::constant(Vec2::new(1.0, 0.3));
        let tau = 0.2;
        let p = build_partition(&z, tau, &Window::square(1.0), tau / 16.0).unwrap();
        for r in &p.regions {
            assert!((r.area - tau * tau).abs() < 1e-8, "{}", r.area);
        }
        for j in p.j_range.0..p.j_range.1 {
            for k in p.k_range.0..p.k_range.1 - 1 {
                let (a, b) = p.region(j, k).right();
                let (c, e) = p.region(j, k + 1).left();
                assert!((a - c).norm() < 1e-9 && (b - e).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn crossing_lines_detected() {
        // non-Lipschitz field: lines reach y = 0 in finite time and overshoot numerically
        let z = SmoothField::new(|p: Vec2| Vec2::new(1.0, -4.0 * p[1].cbrt()), f64::INFINITY, Vec2::new(1.0, 0.0));
        let r = build_partition(&z, 0.5, &Window::square(2.0), 0.05);
        assert!(matches!(r, Err(Error::FlowCrossing(_))), "{r:?}");
    }

    #[test]
    fn divergence_free_coefficients_are_constant_along_bands() {
        let z = SmoothField::affine(Vec2::new(1.0, 0.0), Mat2::new(0.0, 0.0, 0.5, 0.0));
        let d = FlowDecomposition::from_parts(z.clone(), |_| 2.0, 1.0 / 64.0);
        let part = build_partition(&z, 0.25, &Window::square(0.75), 1.0 / 64.0).unwrap();
        let pa = piecewise_approx(&d, &part, 20).unwrap();
        assert!(pa.alphas.iter().all(|&a| (a - 2.0).abs() < 1e-12));
        assert!(pa.report.lhs < 1e-10);
    }

    #[test]
    fn single_divergence_bump() {
        // S = (1 + b) e_x with Z = e_x: div S = ∂_x b
        let bump = |p: Vec2| {
            let q = p.norm_squared() / 0.25;
            if q < 1.0 {
                0.8 * (1.0 - q).powi(4)
            } else {
                0.0
            }
        };
        let z = SmoothField::constant(Vec2::new(1.0, 0.0));
        let d = FlowDecomposition::from_parts(z.clone(), move |p| 1.0 + bump(p), 1.0 / 64.0);
        let mut prev = None;
        let mut rhs = 0.0;
        for &tau in &[0.25, 0.125, 0.0625] {
            let part = build_partition(&z, tau, &Window::square(0.75), tau / 16.0).unwrap();
            let pa = piecewise_approx(&d, &part, 200).unwrap();
            assert!(pa.report.pass, "{:?}", pa.report);
            assert!(pa.alphas.iter().all(|&a| a >= 0.0));
            if let Some(p) = prev {
                assert!(pa.report.lhs >= p - 1e-12);
            }
            prev = Some(pa.report.lhs);
            rhs = pa.report.rhs;
        }
        assert!(prev.unwrap() > 0.9 * rhs, "{prev:?} {rhs}");
    }

    #[test]
    fn factorized_lemma_holds() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        let st = transverse_flow_pair(&mut rng, &PairParams::admissible()).unwrap().s.to_smooth();
        let d = factorize(&st, &FactorizeOptions::default()).unwrap();
        let r = st.support_radius + 0.25;
        let part = build_partition(&d.trace, 0.125, &Window::square(r), 1.0 / 128.0).unwrap();
        let pa = piecewise_approx(&d, &part, 100).unwrap();
        assert!(pa.report.pass, "{:?}", pa.report);
    }
}
