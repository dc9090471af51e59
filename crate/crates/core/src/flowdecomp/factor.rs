//! Factorization `S̃ = α̃ Z` with `div Z = 0`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec2;

use super::curve::{integrate_curve, Stop};
use super::field::{ScalarFn, SmoothField};
use super::stream::StreamFunction;

/// RK4 substeps per trace step when carrying `log α̃` along a curve.
const NODE_SUBSTEPS: usize = 4;

/// Smooth even cutoff: 1 for `|s| ≤ inner`, 0 for `|s| ≥ outer`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    pub inner: f64,
    pub outer: f64,
}

fn psi(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

fn dpsi(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        psi(t) / (t * t)
    }
}

impl Cutoff {
    pub fn new(inner: f64, outer: f64) -> Result<Self> {
        if !(inner >= 0.0 && outer > inner && outer.is_finite()) {
            return Err(Error::InvalidParameter(format!("cutoff [{inner}, {outer}]")));
        }
        Ok(Cutoff { inner, outer })
    }

    fn t(&self, s: f64) -> f64 {
        (self.outer - s.abs()) / (self.outer - self.inner)
    }

    pub fn value(&self, s: f64) -> f64 {
        let t = self.t(s);
        if t >= 1.0 {
            1.0
        } else if t <= 0.0 {
            0.0
        } else {
            psi(t) / (psi(t) + psi(1.0 - t))
        }
    }

    pub fn derivative(&self, s: f64) -> f64 {
        let t = self.t(s);
        if t >= 1.0 || t <= 0.0 {
            return 0.0;
        }
        let (a, b) = (psi(t), psi(1.0 - t));
        let dt = (dpsi(t) * b + a * dpsi(1.0 - t)) / ((a + b) * (a + b));
        -dt * s.signum() / (self.outer - self.inner)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorizeOptions {
    /// RK4 step for curve traces (in x for factorized fields, in time otherwise).
    pub step_size: f64,
    /// Fixed number of RK4 steps from a point back to the vertical axis.
    pub axis_steps: usize,
    /// Width of the cutoff band beyond the support radius.
    pub cutoff_width: f64,
}

impl Default for FactorizeOptions {
    fn default() -> Self {
        FactorizeOptions { step_size: 1.0 / 64.0, axis_steps: 512, cutoff_width: 0.5 }
    }
}

/// `log α̃` by x-parametrized RK4 from the point back to the axis, with a fixed step count so that
/// the result is a smooth function of the point.
struct AlphaTilde {
    stilde: SmoothField,
    radius: f64,
    steps: usize,
}

impl AlphaTilde {
    /// Right-hand side in x of `(y, log α̃)`.
    fn rhs(&self, x: f64, y: f64) -> (f64, f64) {
        let (v, m) = self.stilde.eval_jac(Vec2::new(x, y));
        (v[1] / v[0], m.trace() / v[0])
    }

    /// Advances `(y, ℓ)` from `x0` to `x1` in `n` RK4 steps.
    fn advance(&self, x0: f64, x1: f64, y: f64, l: f64, n: usize) -> (f64, f64) {
        let dx = (x1 - x0) / n as f64;
        let (mut y, mut l) = (y, l);
        for s in 0..n {
            let x = x0 + dx * s as f64;
            let (a1, b1) = self.rhs(x, y);
            let (a2, b2) = self.rhs(x + 0.5 * dx, y + 0.5 * dx * a1);
            let (a3, b3) = self.rhs(x + 0.5 * dx, y + 0.5 * dx * a2);
            let (a4, b4) = self.rhs(x + dx, y + dx * a3);
            y += dx / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
            l += dx / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
        }
        (y, l)
    }

    fn log(&self, p: Vec2) -> f64 {
        let r = self.radius;
        if p[1].abs() >= r {
            return 0.0;
        }
        let x0 = p[0].clamp(-r, r);
        if x0 == 0.0 {
            return 0.0;
        }
        let (_, l) = self.advance(x0, 0.0, p[1], 0.0, self.steps);
        -l
    }
}

/// A point on a traced curve together with `log α̃` there (zero for non-factorized inputs).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub p: Vec2,
    pub log_alpha_tilde: f64,
}

#[derive(Clone)]
enum Kind {
    Factored { at: Arc<AlphaTilde>, cutoff: Cutoff },
    Parts { alpha: ScalarFn, extent: f64 },
}

/// `S = α Z` with `div Z = 0`; `trace` has the same integral curves as `Z`.
#[derive(Clone)]
pub struct FlowDecomposition {
    pub z: SmoothField,
    pub trace: SmoothField,
    pub step_size: f64,
    pub stream: Option<StreamFunction>,
    kind: Kind,
}

impl std::fmt::Debug for FlowDecomposition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self.kind {
            Kind::Factored { .. } => "factored",
            Kind::Parts { .. } => "parts",
        };
        f.debug_struct("FlowDecomposition").field("kind", &kind).field("step_size", &self.step_size).finish()
    }
}

/// Sampled checks of the decomposition invariants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorCheck {
    pub max_rel_div_z: f64,
    pub max_rel_reconstruction: f64,
    pub min_alpha: f64,
}

/// Builds `α̃` with `α̃ = 1` on the vertical axis and `d/dt(α̃∘γ) = α̃ div S̃` along integral
/// curves, then `Z = S̃/α̃`. The returned `S = φ(y) S̃` with a cutoff `φ` that equals 1 on the
/// support, so `α = φ(y) α̃`. Outside the support `S̃` is horizontal and `S` stays divergence-free.
pub fn factorize(stilde: &SmoothField, opts: &FactorizeOptions) -> Result<FlowDecomposition> {
    let far = stilde.far_value;
    let r = stilde.support_radius;
    if !(far[0] > 0.0 && far[1] == 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter("factorize needs S̃ = ε e_x outside a finite support radius".into()));
    }
    if !(opts.step_size > 0.0 && opts.axis_steps > 0 && opts.cutoff_width > 0.0) {
        return Err(Error::InvalidParameter(format!("{opts:?}")));
    }
    let probe = SmoothField::lattice(r, 41);
    if let Some(p) = probe.iter().find(|&&p| !(stilde.eval(p)[0] > 0.0)) {
        return Err(Error::InvalidParameter(format!("S̃^x is not positive at ({}, {})", p[0], p[1])));
    }
    let at = Arc::new(AlphaTilde { stilde: stilde.clone(), radius: r, steps: opts.axis_steps });
    for &p in &probe {
        let l = at.log(p);
        if !l.is_finite() {
            return Err(Error::Factorization { x: p[0], y: p[1], reason: "α̃ is not positive".into() });
        }
        if l.abs() > 50.0 {
            return Err(Error::Factorization { x: p[0], y: p[1], reason: format!("|log α̃| = {l}") });
        }
    }
    let (s, a) = (stilde.clone(), at.clone());
    let z = SmoothField::new(move |p| s.eval(p) * (-a.log(p)).exp(), r, far);
    Ok(FlowDecomposition {
        z,
        trace: stilde.clone(),
        step_size: opts.step_size,
        stream: None,
        kind: Kind::Factored { at, cutoff: Cutoff::new(r, r + opts.cutoff_width)? },
    })
}

impl FlowDecomposition {
    /// A decomposition from a given divergence-free `Z` and coefficient `α`.
    pub fn from_parts(z: SmoothField, alpha: impl Fn(Vec2) -> f64 + Send + Sync + 'static, step_size: f64) -> Self {
        FlowDecomposition { trace: z.clone(), z, step_size, stream: None, kind: Kind::Parts { alpha: Arc::new(alpha), extent: f64::INFINITY } }
    }

    /// Declares that `α` vanishes for `|y|` beyond `extent`.
    pub fn with_alpha_extent(mut self, extent: f64) -> Self {
        if let Kind::Parts { extent: e, .. } = &mut self.kind {
            *e = extent;
        }
        self
    }

    pub fn is_factored(&self) -> bool {
        matches!(self.kind, Kind::Factored { .. })
    }

    /// `log α̃`; zero for decompositions built from parts.
    pub fn log_alpha_tilde(&self, p: Vec2) -> f64 {
        match &self.kind {
            Kind::Factored { at, .. } => at.log(p),
            Kind::Parts { .. } => 0.0,
        }
    }

    pub fn alpha(&self, p: Vec2) -> f64 {
        match &self.kind {
            Kind::Factored { at, cutoff } => {
                let c = cutoff.value(p[1]);
                if c == 0.0 {
                    0.0
                } else {
                    c * at.log(p).exp()
                }
            }
            Kind::Parts { alpha, .. } => alpha(p),
        }
    }

    fn node_alpha_with(&self, n: &Node) -> f64 {
        match &self.kind {
            Kind::Factored { cutoff, .. } => cutoff.value(n.p[1]) * n.log_alpha_tilde.exp(),
            Kind::Parts { alpha, .. } => alpha(n.p),
        }
    }

    /// `α` at a traced node.
    pub fn node_alpha(&self, n: &Node) -> f64 {
        self.node_alpha_with(n)
    }

    /// The field `S = α Z`.
    pub fn s(&self, p: Vec2) -> Vec2 {
        match &self.kind {
            Kind::Factored { at, cutoff } => at.stilde.eval(p) * cutoff.value(p[1]),
            Kind::Parts { alpha, .. } => self.z.eval(p) * alpha(p),
        }
    }

    pub fn div_s(&self, p: Vec2) -> f64 {
        match &self.kind {
            Kind::Factored { at, cutoff } => {
                let (v, m) = at.stilde.eval_jac(p);
                cutoff.value(p[1]) * m.trace() + cutoff.derivative(p[1]) * v[1]
            }
            Kind::Parts { .. } => {
                let h = super::field::FD_STEP * p.amax().max(1.0);
                let ex = Vec2::new(h, 0.0);
                let ey = Vec2::new(0.0, h);
                ((self.s(p + ex) - self.s(p - ex))[0] + (self.s(p + ey) - self.s(p - ey))[1]) / (2.0 * h)
            }
        }
    }

    /// Radius outside of which `div S` vanishes (infinite if unknown).
    pub fn div_support_radius(&self) -> f64 {
        match &self.kind {
            Kind::Factored { at, .. } => at.radius,
            Kind::Parts { .. } => f64::INFINITY,
        }
    }

    /// Extent in y beyond which `α` vanishes (infinite if unknown).
    pub fn alpha_y_extent(&self) -> f64 {
        match &self.kind {
            Kind::Factored { cutoff, .. } => cutoff.outer,
            Kind::Parts { extent, .. } => *extent,
        }
    }

    pub fn node(&self, p: Vec2) -> Node {
        Node { p, log_alpha_tilde: self.log_alpha_tilde(p) }
    }

    /// Moves a node along its curve to the vertical line at `x`.
    pub fn advance(&self, n: Node, x: f64) -> Result<Node> {
        match &self.kind {
            Kind::Factored { at, .. } => {
                let k = ((x - n.p[0]).abs() * NODE_SUBSTEPS as f64 / self.step_size).ceil().max(1.0) as usize;
                let (y, l) = at.advance(n.p[0], x, n.p[1], n.log_alpha_tilde, k);
                Ok(Node { p: Vec2::new(x, y), log_alpha_tilde: l })
            }
            Kind::Parts { .. } => {
                let c = integrate_curve(&self.trace, n.p, Stop::XLevel(x), self.step_size)?;
                Ok(Node { p: *c.last().unwrap(), log_alpha_tilde: 0.0 })
            }
        }
    }

    /// Nodes of the full crossing of `[x0, x1] × R` through `p`, ordered by increasing x.
    pub fn crossing(&self, p: Vec2, x0: f64, x1: f64) -> Result<Vec<Node>> {
        match &self.kind {
            Kind::Factored { .. } => {
                let start = self.node(p);
                let mut back = vec![start];
                let mut cur = start;
                while cur.p[0] > x0 {
                    let x = (cur.p[0] - self.step_size).max(x0);
                    cur = self.advance(cur, x)?;
                    back.push(cur);
                }
                back.reverse();
                let mut cur = start;
                while cur.p[0] < x1 {
                    let x = (cur.p[0] + self.step_size).min(x1);
                    cur = self.advance(cur, x)?;
                    back.push(cur);
                }
                Ok(back)
            }
            Kind::Parts { .. } => Ok(super::curve::strip_crossing(&self.trace, p, x0, x1, self.step_size)?
                .into_iter()
                .map(|q| Node { p: q, log_alpha_tilde: 0.0 })
                .collect()),
        }
    }

    /// Caches the stream function on a grid.
    pub fn with_stream(mut self, grid: &crate::planefield::GridSpec) -> Result<Self> {
        self.stream = Some(super::stream::stream_function(&self.z, grid)?);
        Ok(self)
    }

    /// Sampled divergence of `Z` relative to `|Z|`, and `α Z` against `S`.
    pub fn check(&self, samples: &[Vec2]) -> FactorCheck {
        let mut out = FactorCheck { max_rel_div_z: 0.0, max_rel_reconstruction: 0.0, min_alpha: f64::INFINITY };
        for &p in samples {
            let zv = self.z.eval(p);
            let zn = zv.norm();
            if zn > 0.0 {
                out.max_rel_div_z = out.max_rel_div_z.max(self.z.fd_jacobian(p).trace().abs() / zn);
            }
            let a = self.alpha(p);
            let s = self.s(p);
            let sn = s.norm();
            if sn > 0.0 {
                out.max_rel_reconstruction = out.max_rel_reconstruction.max((zv * a - s).norm() / sn);
            }
            out.min_alpha = out.min_alpha.min(a);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowdecomp::field::{transverse_flow_pair, PairParams};
    use crate::geom::Mat2;
    use rand::SeedableRng;

    fn sample_pair(seed: u64) -> SmoothField {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        transverse_flow_pair(&mut rng, &PairParams::admissible()).unwrap().s.to_smooth()
    }

    #[test]
    fn cutoff_is_smooth_step() {
        let c = Cutoff::new(1.0, 1.5).unwrap();
        assert_eq!(c.value(0.3), 1.0);
        assert_eq!(c.value(-1.6), 0.0);
        assert!((c.value(1.25) - 0.5).abs() < 1e-14);
        for &s in &[1.1, -1.2, 1.37, -1.49] {
            let fd = (c.value(s + 1e-6) - c.value(s - 1e-6)) / 2e-6;
            assert!((fd - c.derivative(s)).abs() < 1e-6);
        }
    }

    #[test]
    fn divergence_free_input_gives_unit_coefficient() {
        // a rotated constant field inside the disk, matched to ε e_x outside by a stream function
        let f = |p: Vec2| {
            // ∇⊥ of −0.5y + 0.2 b: (0.5 − 0.2 ∂_y b, 0.2 ∂_x b)
            let db = p * (-8.0 * (1.0 - p.norm_squared()).max(0.0).powi(3));
            Vec2::new(0.5 - 0.2 * db[1], 0.2 * db[0])
        };
        let s = SmoothField::new(f, 1.0, Vec2::new(0.5, 0.0));
        let d = factorize(&s, &FactorizeOptions::default()).unwrap();
        for p in SmoothField::lattice(1.2, 9) {
            assert!(d.log_alpha_tilde(p).abs() < 1e-6, "{p:?}");
        }
    }

    #[test]
    fn coefficient_matches_line_integral_of_divergence() {
        let st = sample_pair(11);
        let d = factorize(&st, &FactorizeOptions::default()).unwrap();
        // independent route: time-parametrized RK4 on (x, y, ∫ div S̃ dt) back to the axis
        let rhs = |q: [f64; 3]| {
            let p = Vec2::new(q[0], q[1]);
            let v = st.eval(p);
            [v[0], v[1], st.divergence(p)]
        };
        let dt = -1e-3;
        for &p in &[Vec2::new(0.4, 0.1), Vec2::new(-0.5, -0.2), Vec2::new(0.9, 0.3)] {
            let dt = if p[0] > 0.0 { dt } else { -dt };
            let mut q = [p[0], p[1], 0.0];
            loop {
                let k1 = rhs(q);
                let k2 = rhs(std::array::from_fn(|i| q[i] + 0.5 * dt * k1[i]));
                let k3 = rhs(std::array::from_fn(|i| q[i] + 0.5 * dt * k2[i]));
                let k4 = rhs(std::array::from_fn(|i| q[i] + dt * k3[i]));
                let next: [f64; 3] = std::array::from_fn(|i| q[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
                if next[0] * q[0] <= 0.0 {
                    let f = q[0] / (q[0] - next[0]);
                    q[2] += f * (next[2] - q[2]);
                    break;
                }
                q = next;
            }
            let oracle = -q[2];
            assert!((d.log_alpha_tilde(p) - oracle).abs() < 1e-5, "{p:?}: {} vs {oracle}", d.log_alpha_tilde(p));
        }
    }

    #[test]
    fn z_is_divergence_free() {
        let d = factorize(&sample_pair(12), &FactorizeOptions::default()).unwrap();
        let samples = SmoothField::lattice(1.1, 24);
        let c = d.check(&samples);
        assert!(c.max_rel_div_z < 1e-5, "{c:?}");
        assert!(c.max_rel_reconstruction < 1e-12);
        assert!(c.min_alpha >= 0.0);
    }

    #[test]
    fn cutoff_band_is_divergence_free() {
        let d = factorize(&sample_pair(13), &FactorizeOptions::default()).unwrap();
        let r = d.div_support_radius();
        for x in [-2.0, 0.0, 1.7] {
            for y in [r + 0.1, r + 0.25, -(r + 0.4)] {
                assert!(d.div_s(Vec2::new(x, y)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let s = SmoothField::affine(Vec2::new(1.0, 0.0), Mat2::zeros());
        assert!(matches!(factorize(&s, &FactorizeOptions::default()), Err(Error::InvalidParameter(_))));
        // horizontal field: α̃ is the ratio of S̃^x to its value on the axis, here about e^57
        let big = SmoothField::new(
            |p: Vec2| {
                let q = (p - Vec2::new(0.5, 0.0)).norm_squared() / 0.16;
                Vec2::new(1e-25 + (1.0 - q).max(0.0).powi(4), 0.0)
            },
            1.0,
            Vec2::new(1e-25, 0.0),
        );
        let r = factorize(&big, &FactorizeOptions::default());
        assert!(matches!(r, Err(Error::Factorization { .. })), "{r:?}");
    }

    #[test]
    fn crossing_nodes_follow_the_curve() {
        let st = sample_pair(14);
        let d = factorize(&st, &FactorizeOptions::default()).unwrap();
        let p = Vec2::new(0.2, 0.05);
        let nodes = d.crossing(p, 0.0, 1.0).unwrap();
        assert_eq!(nodes.first().unwrap().p[0], 0.0);
        assert_eq!(nodes.last().unwrap().p[0], 1.0);
        let gap = nodes.iter().map(|n| (n.log_alpha_tilde - d.log_alpha_tilde(n.p)).abs()).fold(0.0, f64::max);
        assert!(gap < 1e-6, "{gap}");
        let c = integrate_curve(&st, p, Stop::XLevel(1.0), 1e-3).unwrap();
        assert!((c.last().unwrap() - nodes.last().unwrap().p).norm() < 1e-6);
    }
}
