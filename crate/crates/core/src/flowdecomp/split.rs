//! The split `α = α_f + α_d` on a strip and the localized inequalities built on it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::report::Report;

use super::factor::FlowDecomposition;
use super::field::swap;
use super::goodset::{good_x, GoodSetMask};
use super::partition::vertical_flux;

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// `α_f(p)`: minimum of `α` along the crossing of `[j, j+1] × R` through `p`; `α_d = α − α_f`.
#[derive(Debug, Clone, Copy)]
pub struct FMinSplit<'a> {
    pub decomp: &'a FlowDecomposition,
    pub j: i64,
}

pub fn f_min_split(decomp: &FlowDecomposition, j: i64) -> FMinSplit<'_> {
    FMinSplit { decomp, j }
}

impl FMinSplit<'_> {
    /// Minimum over the traced nodes, refined by golden-section search between the neighbours of
    /// the smallest node.
    pub fn alpha_f(&self, p: Vec2) -> Result<f64> {
        let d = self.decomp;
        let x0 = self.j as f64;
        let nodes = d.crossing(p, x0, x0 + 1.0)?;
        let vals: Vec<f64> = nodes.iter().map(|n| d.node_alpha(n)).collect();
        let (i, &v) = vals.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("crossing has nodes");
        let mut best = v;
        let lo = i.saturating_sub(1);
        let hi = (i + 1).min(nodes.len() - 1);
        if hi > lo && best > 0.0 {
            let base = nodes[lo];
            let f = |x: f64| d.advance(base, x).map(|m| d.node_alpha(&m));
            let (mut a, mut b) = (nodes[lo].p[0], nodes[hi].p[0]);
            let mut c = b - GOLDEN * (b - a);
            let mut e = a + GOLDEN * (b - a);
            let (mut fc, mut fe) = (f(c)?, f(e)?);
            for _ in 0..60 {
                if b - a < 1e-9 {
                    break;
                }
                if fc < fe {
                    b = e;
                    e = c;
                    fe = fc;
                    c = b - GOLDEN * (b - a);
                    fc = f(c)?;
                } else {
                    a = c;
                    c = e;
                    fc = fe;
                    e = a + GOLDEN * (b - a);
                    fe = f(e)?;
                }
            }
            best = best.min(fc).min(fe);
        }
        Ok(best.max(0.0))
    }

    pub fn alpha_d(&self, p: Vec2) -> Result<f64> {
        Ok((self.decomp.alpha(p) - self.alpha_f(p)?).max(0.0))
    }
}

/// Per-sample quantities on a midpoint lattice of `[j, j+1] × [−Y, Y]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripSamples {
    pub j: i64,
    pub nx: usize,
    pub ny: usize,
    pub y_extent: f64,
    pub cell_area: f64,
    pub points: Vec<Vec2>,
    /// Membership in `G_j^x` with the `h·Lip` margin (inner approximation).
    pub good: Vec<bool>,
    /// Cone test at the RK4 nodes without margin.
    pub good_raw: Vec<bool>,
    pub margin: f64,
    pub z: Vec<Vec2>,
    pub alpha: Vec<f64>,
    pub alpha_f: Vec<f64>,
    pub div_s: Vec<f64>,
}

pub fn sample_strip(d: &FlowDecomposition, j: i64, nx: usize, ny: usize, y_extent: Option<f64>) -> Result<StripSamples> {
    let y = y_extent.unwrap_or_else(|| d.alpha_y_extent());
    if !(y.is_finite() && y > 0.0 && nx > 0 && ny > 0) {
        return Err(Error::InvalidParameter(format!("strip lattice {nx}×{ny} over |y| ≤ {y}")));
    }
    let (hx, hy) = (1.0 / nx as f64, 2.0 * y / ny as f64);
    let mut points = Vec::with_capacity(nx * ny);
    for b in 0..ny {
        for a in 0..nx {
            points.push(Vec2::new(j as f64 + (a as f64 + 0.5) * hx, -y + (b as f64 + 0.5) * hy));
        }
    }
    let (good, good_raw, margin) = good_x(&d.trace, &points, j, d.step_size)?;
    let split = f_min_split(d, j);
    let mut out = StripSamples {
        j,
        nx,
        ny,
        y_extent: y,
        cell_area: hx * hy,
        z: Vec::with_capacity(points.len()),
        alpha: Vec::with_capacity(points.len()),
        alpha_f: Vec::with_capacity(points.len()),
        div_s: Vec::with_capacity(points.len()),
        points,
        good,
        good_raw,
        margin,
    };
    for i in 0..out.points.len() {
        let p = out.points[i];
        out.z.push(d.z.eval(p));
        out.alpha.push(d.alpha(p));
        out.alpha_f.push(split.alpha_f(p)?);
        out.div_s.push(d.div_s(p));
    }
    Ok(out)
}

impl StripSamples {
    /// Multiplies `α` (hence `α_f`, `α_d` and `div S`) by `λ ≥ 0`.
    pub fn scaled(&self, lambda: f64) -> StripSamples {
        let mut s = self.clone();
        s.alpha.iter_mut().for_each(|a| *a *= lambda);
        s.alpha_f.iter_mut().for_each(|a| *a *= lambda);
        s.div_s.iter_mut().for_each(|a| *a *= lambda);
        s
    }

    /// `Z^x − |Z^y|` at sample `i`.
    fn cone_excess(&self, i: usize) -> f64 {
        self.z[i][0] - self.z[i][1].abs()
    }
}

/// Marks a fine report with the verdict of a coarser lattice.
pub fn with_refinement(mut fine: Report, coarse: &Report) -> Report {
    fine.set("coarse_pass", coarse.pass as u8 as f64);
    fine.set("coarse_ratio", if coarse.rhs > 0.0 { coarse.lhs / coarse.rhs } else { 0.0 });
    fine.set("refinement_stable", (!coarse.pass || fine.pass) as u8 as f64);
    fine
}

/// Cartesian-lattice version of [`check_complement`]. Midpoint sampling of the good-set indicator
/// has an `O(h)` error on its boundary, which matters because the inequality is often near-sharp.
pub fn check_complement_lattice(s: &StripSamples) -> Report {
    let (mut lhs, mut lhs_margin, mut rhs, mut scale, mut good) = (0.0, 0.0, 0.0, 0.0, 0usize);
    for i in 0..s.points.len() {
        let v = s.alpha_f[i] * s.cone_excess(i);
        scale += s.alpha_f[i] * s.z[i].norm();
        if s.good_raw[i] {
            good += 1;
        } else {
            lhs += v.max(0.0);
        }
        if !s.good[i] {
            lhs_margin += v.max(0.0);
        }
        rhs += (-v).max(0.0);
    }
    let a = s.cell_area;
    Report::new(lhs * a, rhs * a, 0.1, 1e-12 * scale * a)
        .with("good_fraction", good as f64 / s.points.len() as f64)
        .with("margin_lhs", lhs_margin * a)
        .with("margin", s.margin)
}

/// Crossings of `[j, j+1] × R` entering at `(j, y₀)` for equispaced midpoints `y₀ ∈ [−Y, Y]`.
///
/// Since `div Z = 0`, the map `(y₀, x) ↦ γ_{y₀}(x)` has area density `Z^x(j, y₀)`, and along a
/// curve `(Z^x − |Z^y|) dτ = (1 − |y'|) dx`. A strip integral of `α_f (Z^x − |Z^y|)^±` is then
/// `Σ Δy₀ · α_f Z^x(j, y₀) · ∫ (1 − |y'|)^± dx`, evaluated on chords of the traced curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowBox {
    pub j: i64,
    pub y_extent: f64,
    pub dy0: f64,
    pub entries: Vec<f64>,
    /// `α_f Z^x` at the entry point.
    pub flux: Vec<f64>,
    /// `∫ (1 − |y'|)⁺ dx` over chords whose start node is outside `G_j^x`.
    pub bad_rise: Vec<f64>,
    /// `∫ (1 − |y'|)⁻ dx` over the whole crossing.
    pub fall: Vec<f64>,
    /// Length fraction of chords starting in `G_j^x`.
    pub good_fraction: f64,
}

/// Builds a [`FlowBox`] with `ny` curves traced at `x`-spacing `step`.
pub fn flow_box(d: &FlowDecomposition, j: i64, ny: usize, step: f64, y_extent: Option<f64>) -> Result<FlowBox> {
    let y = y_extent.unwrap_or_else(|| d.alpha_y_extent());
    if !(y.is_finite() && y > 0.0 && ny > 0 && step > 0.0 && step <= d.step_size) {
        return Err(Error::InvalidParameter(format!("flow box of {ny} curves over |y| ≤ {y}, step {step}")));
    }
    let mut fine = d.clone();
    fine.step_size = step;
    let x0 = j as f64;
    let dy0 = 2.0 * y / ny as f64;
    let mut out = FlowBox { j, y_extent: y, dy0, entries: Vec::new(), flux: Vec::new(), bad_rise: Vec::new(), fall: Vec::new(), good_fraction: 0.0 };
    let (mut good_len, mut total_len) = (0.0, 0.0);
    for b in 0..ny {
        let y0 = -y + (b as f64 + 0.5) * dy0;
        let nodes = fine.crossing(Vec2::new(x0, y0), x0, x0 + 1.0)?;
        let af = nodes.iter().map(|n| fine.node_alpha(n)).fold(f64::INFINITY, f64::min).max(0.0);
        let pts: Vec<Vec2> = nodes.iter().map(|n| n.p).collect();
        let good = cone_good_nodes(&pts);
        let (mut rise, mut fall) = (0.0, 0.0);
        for (i, w) in pts.windows(2).enumerate() {
            let dx = w[1][0] - w[0][0];
            let v = dx - (w[1][1] - w[0][1]).abs();
            total_len += dx;
            if good[i] {
                good_len += dx;
            } else {
                rise += v.max(0.0);
            }
            fall += (-v).max(0.0);
        }
        out.entries.push(y0);
        out.flux.push(af * d.z.eval(Vec2::new(x0, y0))[0]);
        out.bad_rise.push(rise);
        out.fall.push(fall);
    }
    out.good_fraction = if total_len > 0.0 { good_len / total_len } else { 1.0 };
    Ok(out)
}

/// Node `s` is good if every later node `t` has `|y_t − y_s| < x_t − x_s`.
fn cone_good_nodes(pts: &[Vec2]) -> Vec<bool> {
    let mut good = vec![true; pts.len()];
    let (mut max_d, mut min_s) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in (0..pts.len()).rev() {
        let (d, s) = (pts[i][1] - pts[i][0], pts[i][1] + pts[i][0]);
        good[i] = max_d < d && min_s > s;
        max_d = max_d.max(d);
        min_s = min_s.min(s);
    }
    good
}

impl FlowBox {
    /// Multiplies `α_f` by `λ ≥ 0`.
    pub fn scaled(&self, lambda: f64) -> FlowBox {
        let mut b = self.clone();
        b.flux.iter_mut().for_each(|f| *f *= lambda);
        b
    }

    fn integral(&self, per_curve: &[f64]) -> f64 {
        self.flux.iter().zip(per_curve).map(|(f, v)| f * v).sum::<f64>() * self.dy0
    }
}

/// `∫_{U∖G} (S_f^x − |S_f^y|)⁺ ≤ ∫_U (S_f^x − |S_f^y|)⁻` with `S_f = α_f Z`, slack 1.1, evaluated
/// in flow-box coordinates.
pub fn check_complement(b: &FlowBox) -> Report {
    let scale = b.flux.iter().sum::<f64>() * b.dy0;
    Report::new(b.integral(&b.bad_rise), b.integral(&b.fall), 0.1, 1e-12 * scale)
        .with("good_fraction", b.good_fraction)
        .with("curves", b.entries.len() as f64)
}

/// `∫_U (S_d^x − |S_d^y|)⁺ ≤ Λ ∫_U |div S| + (Λ − 2)⁻¹ ∫_U (S_d^x − |S_d^y|)⁻`, slack 1.1.
pub fn check_complement_bis(s: &StripSamples, lambda: f64) -> Result<Report> {
    if !(lambda > 2.0) {
        return Err(Error::InvalidParameter(format!("Λ = {lambda} must exceed 2")));
    }
    let (mut pos, mut neg, mut div, mut scale) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..s.points.len() {
        let ad = (s.alpha[i] - s.alpha_f[i]).max(0.0);
        let v = ad * s.cone_excess(i);
        pos += v.max(0.0);
        neg += (-v).max(0.0);
        div += s.div_s[i].abs();
        scale += s.alpha[i] * s.z[i].norm();
    }
    let a = s.cell_area;
    let div_term = lambda * div * a;
    let negative_term = neg * a / (lambda - 2.0);
    Ok(Report::new(pos * a, div_term + negative_term, 0.1, 1e-12 * scale * a)
        .with("lambda", lambda)
        .with("div_term", div_term)
        .with("negative_term", negative_term))
}

/// `∫_{U_j^x} (S^x + |div S|)` by midpoint quadrature on the strip samples.
pub fn strip_mass(s: &StripSamples) -> f64 {
    (0..s.points.len()).map(|i| s.alpha[i] * s.z[i][0] + s.div_s[i].abs()).sum::<f64>() * s.cell_area
}

/// `∫_G det(S_f, T_f)` against `∫_{U_j^x}(S^x + |div S|)·∫_{U_k^y}(T^y + |div T|)` at slack 1.1.
///
/// `dt` is the decomposition of T in swapped coordinates, so its strips `[k, k+1] × R` are the
/// horizontal strips of T. The report also carries the boundary-line form
/// `(∫_{x=j} S^x)(∫_{y=k} T^y)` as `sharp_rhs` and `sharp_pass`.
pub fn check_g_est(ds: &FlowDecomposition, dt: &FlowDecomposition, mask: &GoodSetMask, per_unit: usize) -> Result<Report> {
    let fs = f_min_split(ds, mask.j);
    let ft = f_min_split(dt, mask.k);
    let mut lhs = 0.0;
    let mut scale = 0.0;
    for p in mask.good_points() {
        let sf = ds.z.eval(p) * fs.alpha_f(p)?;
        let q = swap(p);
        let tf = swap(dt.z.eval(q) * ft.alpha_f(q)?);
        lhs += sf[0] * tf[1] - sf[1] * tf[0];
        scale += sf.norm() * tf.norm();
    }
    let area = mask.cell_area();
    lhs *= area;
    let strip = |d: &FlowDecomposition, j: i64| -> Result<f64> {
        let y = d.alpha_y_extent();
        let ny = ((2.0 * y * per_unit as f64).ceil() as usize).max(1);
        let s = sample_strip_mass(d, j, per_unit, ny, y)?;
        Ok(s)
    };
    let rhs = strip(ds, mask.j)? * strip(dt, mask.k)?;
    let line = |d: &FlowDecomposition, j: i64| {
        let y = d.alpha_y_extent();
        vertical_flux(&|p| d.s(p), Vec2::new(j as f64, -y), Vec2::new(j as f64, y))
    };
    let sharp = line(ds, mask.j) * line(dt, mask.k);
    let abs_tol = 1e-12 * scale * area;
    let sharp_pass = lhs <= sharp * 1.1 + abs_tol;
    Ok(Report::new(lhs, rhs, 0.1, abs_tol)
        .with("sharp_rhs", sharp)
        .with("sharp_pass", sharp_pass as u8 as f64)
        .with("good_count", mask.count() as f64))
}

/// `∫(S^x + |div S|)` over `[j, j+1] × [−y, y]` without tracing curves.
fn sample_strip_mass(d: &FlowDecomposition, j: i64, nx: usize, ny: usize, y: f64) -> Result<f64> {
    if !y.is_finite() {
        return Err(Error::InvalidParameter("strip integral needs a finite extent of α".into()));
    }
    let (hx, hy) = (1.0 / nx as f64, 2.0 * y / ny as f64);
    let mut s = 0.0;
    for b in 0..ny {
        for a in 0..nx {
            let p = Vec2::new(j as f64 + (a as f64 + 0.5) * hx, -y + (b as f64 + 0.5) * hy);
            s += d.s(p)[0] + d.div_s(p).abs();
        }
    }
    Ok(s * hx * hy)
}

/// One-dimensional lemma for the piecewise-linear interpolant of samples `ξ_0..ξ_n` on `[0, L]`:
/// with `E = {s : ξ(t) > ξ(s) for all t > s}`, `∫_{[0,L]∖E} ξ̇⁺ ≤ ∫ ξ̇⁻`, slack 1.05.
///
/// On an increasing piece from `a` to `b`, `E` is where `ξ` stays below the minimum `m` of all
/// later nodes, so the piece contributes `b − clamp(m, a, b)` to the left side.
pub fn elementary_lemma(xi: &[f64], length: f64) -> Result<Report> {
    if xi.len() < 2 || !(length > 0.0) {
        return Err(Error::InvalidParameter("need two samples and a positive length".into()));
    }
    let n = xi.len();
    let mut later_min = vec![f64::INFINITY; n];
    for i in (0..n - 1).rev() {
        later_min[i] = later_min[i + 1].min(xi[i + 1]);
    }
    let (mut lhs, mut rhs) = (0.0, 0.0);
    for i in 0..n - 1 {
        let (a, b) = (xi[i], xi[i + 1]);
        if b > a {
            // later nodes from i+1 on, including b itself
            let m = later_min[i];
            lhs += b - m.clamp(a, b);
        } else {
            rhs += a - b;
        }
    }
    let scale: f64 = xi.iter().map(|v| v.abs()).fold(0.0, f64::max);
    Ok(Report::new(lhs, rhs, 0.05, 1e-12 * scale).with("length", length))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowdecomp::field::SmoothField;
    use crate::flowdecomp::goodset::good_set;
    use rand::{Rng, SeedableRng};

    fn ex() -> SmoothField {
        SmoothField::constant(Vec2::new(1.0, 0.0))
    }

    #[test]
    fn constant_alpha_has_no_d_part() {
        let d = FlowDecomposition::from_parts(ex(), |_| 0.7, 1.0 / 64.0);
        let s = f_min_split(&d, 0);
        for &p in &[Vec2::new(0.2, 0.0), Vec2::new(0.9, -3.0)] {
            assert!((s.alpha_f(p).unwrap() - 0.7).abs() < 1e-15);
            assert!(s.alpha_d(p).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn dip_sets_the_minimum() {
        // α = 1 − 0.7·exp(−(x − 0.37)²/0.01): dips to 0.3 at x = 0.37 on every horizontal line
        let d = FlowDecomposition::from_parts(ex(), |p: Vec2| 1.0 - 0.7 * (-(p[0] - 0.37).powi(2) / 0.01).exp(), 1.0 / 64.0);
        let s = f_min_split(&d, 0);
        for &x in &[0.0, 0.1, 0.5, 0.99] {
            let p = Vec2::new(x, 0.2);
            let af = s.alpha_f(p).unwrap();
            assert!((af - 0.3).abs() < 1e-9, "{af}");
            assert!(af <= d.alpha(p) + 1e-15);
        }
    }

    #[test]
    fn rejects_small_lambda() {
        let d = FlowDecomposition::from_parts(ex(), |p: Vec2| (-p[1] * p[1]).exp(), 1.0 / 64.0).with_alpha_extent(3.0);
        let s = sample_strip(&d, 0, 4, 8, None).unwrap();
        assert!(check_complement_bis(&s, 2.0).is_err());
        let r = check_complement_bis(&s, 3.0).unwrap();
        assert!(r.pass);
        assert_eq!(r.lhs, 0.0);
    }

    #[test]
    fn horizontal_flow_has_empty_complement() {
        let d = FlowDecomposition::from_parts(ex(), |p: Vec2| (-p[1] * p[1]).exp(), 1.0 / 64.0).with_alpha_extent(3.0);
        let s = sample_strip(&d, 0, 8, 16, None).unwrap();
        assert!(s.good.iter().all(|&g| g));
        let r = check_complement_lattice(&s);
        assert_eq!(r.lhs, 0.0);
        assert!(r.pass);
        let b = flow_box(&d, 0, 16, 1.0 / 256.0, None).unwrap();
        assert_eq!(b.good_fraction, 1.0);
        let r = check_complement(&b);
        assert_eq!(r.lhs, 0.0);
        assert!(r.pass && r.rhs == 0.0);
    }

    #[test]
    fn axis_tubes_reach_equality() {
        let psi = |s: f64| {
            let q = (s - 0.5) * (s - 0.5) / 0.04;
            if q < 1.0 {
                (1.0 - q).powi(4)
            } else {
                0.0
            }
        };
        let ds = FlowDecomposition::from_parts(ex(), move |p: Vec2| psi(p[1]), 1.0 / 64.0).with_alpha_extent(1.0);
        let dt = FlowDecomposition::from_parts(ex(), move |p: Vec2| psi(p[1]), 1.0 / 64.0).with_alpha_extent(1.0);
        let z = ex();
        let w = SmoothField::constant(Vec2::new(0.0, 1.0));
        let mask = good_set(&z, &w, 0, 0, 64, 1.0 / 64.0).unwrap();
        let r = check_g_est(&ds, &dt, &mask, 64).unwrap();
        assert!(r.pass);
        assert!((r.lhs / r.rhs - 1.0).abs() < 0.1, "{r:?}");
        assert!((r.lhs / r.detail["sharp_rhs"] - 1.0).abs() < 0.1);
        let empty = GoodSetMask { mask: vec![false; mask.mask.len()], ..mask };
        assert_eq!(check_g_est(&ds, &dt, &empty, 16).unwrap().lhs, 0.0);
    }

    #[test]
    fn steep_s_curves_satisfy_complement() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            // Z = (1, g(x)) is divergence-free and its curves reach slope ±A with A > 1
            let a = rng.gen_range(1.2..3.0);
            let m = rng.gen_range(1.0..3.0);
            let ph = rng.gen_range(0.0..std::f64::consts::TAU);
            let z = SmoothField::new(move |p: Vec2| Vec2::new(1.0, a * (std::f64::consts::TAU * m * p[0] + ph).sin()), f64::INFINITY, Vec2::new(1.0, 0.0));
            let d = FlowDecomposition::from_parts(z, |p: Vec2| (-p[1] * p[1]).exp() * (1.0 + 0.5 * (3.0 * p[0] + p[1]).sin()), 1.0 / 64.0)
                .with_alpha_extent(2.0);
            let b = flow_box(&d, 0, 40, 1.0 / 256.0, None).unwrap();
            let r = check_complement(&b);
            assert!(r.lhs > 0.0 && r.rhs > 0.0 && r.pass, "{r:?}");
            let k = check_complement(&b.scaled(2.5));
            assert!((k.lhs - 2.5 * r.lhs).abs() <= 1e-12 * k.lhs && (k.rhs - 2.5 * r.rhs).abs() <= 1e-12 * k.rhs);
            assert_eq!(k.pass, r.pass);
        }
    }

    #[test]
    fn lambda_moves_the_two_terms_apart() {
        let z = SmoothField::new(|p: Vec2| Vec2::new(1.0, 1.5 * (5.0 * p[0]).sin()), f64::INFINITY, Vec2::new(1.0, 0.0));
        let d = FlowDecomposition::from_parts(z, |p: Vec2| (-p[1] * p[1]).exp() * (1.2 + (4.0 * p[0]).cos()), 1.0 / 64.0).with_alpha_extent(2.5);
        let s = sample_strip(&d, 0, 12, 60, None).unwrap();
        let rs: Vec<Report> = [3.0, 4.0, 6.0].iter().map(|&l| check_complement_bis(&s, l).unwrap()).collect();
        for w in rs.windows(2) {
            assert!(w[1].detail["div_term"] > w[0].detail["div_term"]);
            assert!(w[1].detail["negative_term"] < w[0].detail["negative_term"]);
        }
        assert!(rs.iter().all(|r| r.pass && r.lhs > 0.0));
    }

    #[test]
    fn lemma_on_sampled_paths() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for _ in 0..50 {
            let n = rng.gen_range(2..400);
            let mut v = 0.0;
            let xi: Vec<f64> = (0..n)
                .map(|i| {
                    v += rng.gen_range(-1.0..1.0);
                    v + (i as f64 * 0.05).sin()
                })
                .collect();
            let r = elementary_lemma(&xi, 1.0).unwrap();
            assert!(r.pass && r.lhs <= r.rhs + 1e-12, "{r:?}");
        }
        // increasing path: E is everything
        let r = elementary_lemma(&[0.0, 1.0, 2.0, 3.0], 1.0).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
        // rise then fall below the start: the whole rise lies outside E
        let r = elementary_lemma(&[0.0, 2.0, -1.0], 1.0).unwrap();
        assert_eq!((r.lhs, r.rhs), (2.0, 3.0));
    }
}
