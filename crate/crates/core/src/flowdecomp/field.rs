//! Smooth planar vector fields and the bump-sum generators.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Mat2, Vec2};

pub type VecFn = Arc<dyn Fn(Vec2) -> Vec2 + Send + Sync>;
pub type MatFn = Arc<dyn Fn(Vec2) -> Mat2 + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(Vec2) -> f64 + Send + Sync>;
pub type BothFn = Arc<dyn Fn(Vec2) -> (Vec2, Mat2) + Send + Sync>;

/// Central-difference step used when no closed-form jacobian is given.
pub const FD_STEP: f64 = 1e-5;

#[inline]
pub fn swap(p: Vec2) -> Vec2 {
    Vec2::new(p[1], p[0])
}

/// A smooth field with an optional closed-form jacobian `J[(i, j)] = ∂_j V^i`.
///
/// Outside the disk of radius `support_radius` the field equals `far_value`.
#[derive(Clone)]
pub struct SmoothField {
    value: VecFn,
    jacobian: Option<MatFn>,
    both: Option<BothFn>,
    pub support_radius: f64,
    pub far_value: Vec2,
}

impl std::fmt::Debug for SmoothField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SmoothField")
            .field("support_radius", &self.support_radius)
            .field("far_value", &self.far_value)
            .field("closed_form_jacobian", &self.jacobian.is_some())
            .finish()
    }
}

impl SmoothField {
    pub fn new(value: impl Fn(Vec2) -> Vec2 + Send + Sync + 'static, support_radius: f64, far_value: Vec2) -> Self {
        SmoothField { value: Arc::new(value), jacobian: None, both: None, support_radius, far_value }
    }

    pub fn with_jacobian(mut self, jacobian: impl Fn(Vec2) -> Mat2 + Send + Sync + 'static) -> Self {
        self.jacobian = Some(Arc::new(jacobian));
        self.both = None;
        self
    }

    /// Value and closed-form jacobian from a single evaluation.
    pub fn from_both(both: impl Fn(Vec2) -> (Vec2, Mat2) + Send + Sync + 'static, support_radius: f64, far_value: Vec2) -> Self {
        let both: BothFn = Arc::new(both);
        let (v, j) = (both.clone(), both.clone());
        SmoothField {
            value: Arc::new(move |p| v(p).0),
            jacobian: Some(Arc::new(move |p| j(p).1)),
            both: Some(both),
            support_radius,
            far_value,
        }
    }

    pub fn eval_jac(&self, p: Vec2) -> (Vec2, Mat2) {
        match &self.both {
            Some(b) => b(p),
            None => (self.eval(p), self.jacobian(p)),
        }
    }

    pub fn constant(v: Vec2) -> Self {
        SmoothField::new(move |_| v, 0.0, v).with_jacobian(|_| Mat2::zeros())
    }

    /// `V(p) = v + M p`; not constant at infinity, so the support radius is infinite.
    pub fn affine(v: Vec2, m: Mat2) -> Self {
        SmoothField::new(move |p| v + m * p, f64::INFINITY, v).with_jacobian(move |_| m)
    }

    #[inline]
    pub fn eval(&self, p: Vec2) -> Vec2 {
        (self.value)(p)
    }

    pub fn has_closed_form_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    pub fn jacobian(&self, p: Vec2) -> Mat2 {
        match &self.jacobian {
            Some(j) => j(p),
            None => self.fd_jacobian(p),
        }
    }

    pub fn fd_jacobian(&self, p: Vec2) -> Mat2 {
        let h = FD_STEP * p.amax().max(1.0);
        let mut m = Mat2::zeros();
        for c in 0..2 {
            let e = if c == 0 { Vec2::new(h, 0.0) } else { Vec2::new(0.0, h) };
            let d = (self.eval(p + e) - self.eval(p - e)) / (2.0 * h);
            m[(0, c)] = d[0];
            m[(1, c)] = d[1];
        }
        m
    }

    pub fn divergence(&self, p: Vec2) -> f64 {
        self.jacobian(p).trace()
    }

    /// Largest entrywise gap between the jacobian in use and central differences.
    pub fn jacobian_gap(&self, samples: &[Vec2]) -> f64 {
        samples.iter().map(|&p| (self.jacobian(p) - self.fd_jacobian(p)).amax()).fold(0.0, f64::max)
    }

    /// Largest spectral norm of the jacobian over the samples.
    pub fn lipschitz(&self, samples: &[Vec2]) -> f64 {
        samples.iter().map(|&p| self.jacobian(p).norm()).fold(0.0, f64::max)
    }

    /// The same field in swapped coordinates `(x, y) ↦ (y, x)`.
    pub fn swapped(&self) -> SmoothField {
        let flip = |m: Mat2| Mat2::new(m[(1, 1)], m[(1, 0)], m[(0, 1)], m[(0, 0)]);
        if self.jacobian.is_some() {
            let f = self.clone();
            return SmoothField::from_both(
                move |p| {
                    let (v, m) = f.eval_jac(swap(p));
                    (swap(v), flip(m))
                },
                self.support_radius,
                swap(self.far_value),
            );
        }
        let v = self.value.clone();
        SmoothField::new(move |p| swap(v(swap(p))), self.support_radius, swap(self.far_value))
    }

    /// Sample lattice `n × n` over the square `[-r, r]²`.
    pub fn lattice(r: f64, n: usize) -> Vec<Vec2> {
        let mut out = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                out.push(Vec2::new(-r + 2.0 * r * (a as f64 + 0.5) / n as f64, -r + 2.0 * r * (b as f64 + 0.5) / n as f64));
            }
        }
        out
    }
}

/// `a · (1 − |p − c|²/r²)⁴` times the unit vector at angle `θ + w · sin(k · (p − c))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: [f64; 2],
    pub radius: f64,
    pub amplitude: f64,
    pub angle: f64,
    pub wobble: f64,
    pub wave: [f64; 2],
}

impl Bump {
    fn parts(&self, p: Vec2) -> Option<(f64, Vec2, f64, Vec2)> {
        let d = p - Vec2::new(self.center[0], self.center[1]);
        let q = d.norm_squared() / (self.radius * self.radius);
        if q >= 1.0 {
            return None;
        }
        let b = self.amplitude * (1.0 - q).powi(4);
        let db = d * (-8.0 * self.amplitude * (1.0 - q).powi(3) / (self.radius * self.radius));
        let k = Vec2::new(self.wave[0], self.wave[1]);
        let phase = k.dot(&d);
        let phi = self.angle + self.wobble * phase.sin();
        let dphi = k * (self.wobble * phase.cos());
        Some((b, db, phi, dphi))
    }

    pub fn eval(&self, p: Vec2) -> Vec2 {
        match self.parts(p) {
            Some((b, _, phi, _)) => Vec2::new(phi.cos(), phi.sin()) * b,
            None => Vec2::zeros(),
        }
    }

    pub fn jacobian(&self, p: Vec2) -> Mat2 {
        match self.parts(p) {
            Some((b, db, phi, dphi)) => {
                let u = Vec2::new(phi.cos(), phi.sin());
                let du = Vec2::new(-phi.sin(), phi.cos());
                u * db.transpose() + du * dphi.transpose() * b
            }
            None => Mat2::zeros(),
        }
    }

    pub fn eval_jac(&self, p: Vec2) -> (Vec2, Mat2) {
        match self.parts(p) {
            Some((b, db, phi, dphi)) => {
                let (sn, cs) = phi.sin_cos();
                let u = Vec2::new(cs, sn);
                let du = Vec2::new(-sn, cs);
                (u * b, u * db.transpose() + du * dphi.transpose() * b)
            }
            None => (Vec2::zeros(), Mat2::zeros()),
        }
    }

    /// Range of angles the bump can point in.
    pub fn angle_range(&self) -> (f64, f64) {
        (self.angle - self.wobble.abs(), self.angle + self.wobble.abs())
    }
}

/// A constant background plus compactly supported bumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BumpField {
    pub background: [f64; 2],
    pub bumps: Vec<Bump>,
}

impl BumpField {
    pub fn eval(&self, p: Vec2) -> Vec2 {
        self.bumps.iter().fold(Vec2::new(self.background[0], self.background[1]), |acc, b| acc + b.eval(p))
    }

    pub fn jacobian(&self, p: Vec2) -> Mat2 {
        self.bumps.iter().fold(Mat2::zeros(), |acc, b| acc + b.jacobian(p))
    }

    pub fn eval_jac(&self, p: Vec2) -> (Vec2, Mat2) {
        self.bumps.iter().fold((Vec2::new(self.background[0], self.background[1]), Mat2::zeros()), |(v, m), b| {
            let (bv, bm) = b.eval_jac(p);
            (v + bv, m + bm)
        })
    }

    /// Radius of the smallest origin-centred disk containing every bump.
    pub fn support_radius(&self) -> f64 {
        self.bumps.iter().map(|b| Vec2::new(b.center[0], b.center[1]).norm() + b.radius).fold(0.0, f64::max)
    }

    pub fn without_background(&self) -> BumpField {
        BumpField { background: [0.0, 0.0], bumps: self.bumps.clone() }
    }

    pub fn to_smooth(&self) -> SmoothField {
        let a = self.clone();
        SmoothField::from_both(move |p| a.eval_jac(p), self.support_radius(), Vec2::new(self.background[0], self.background[1]))
    }
}

/// Direction ranges of the generated bumps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Cones {
    /// S in the first quadrant and T in the second, or S in the fourth and T in the first (chosen
    /// per seed), with angles kept `margin` away from the axes. Then `S^x, T^y ≥ 0` and
    /// `det(S, T) = S^x T^y − S^y T^x` is a sum of nonnegative products, which survives any
    /// componentwise averaging, in particular face sampling on a staggered grid.
    Quadrant { margin: f64 },
    /// Angles within `half_angle` of `e_x` for S and of `e_y` for T.
    Symmetric { half_angle: f64 },
}

/// Parameters of the seeded transverse-flow generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairParams {
    pub bumps: usize,
    /// Bump centres lie in the disk of this radius.
    pub center_radius: f64,
    pub radius: (f64, f64),
    pub amplitude: (f64, f64),
    pub cones: Cones,
    /// Background `ε` added along `e_x` (S) and `e_y` (T).
    pub eps: f64,
}

impl PairParams {
    pub fn admissible() -> Self {
        PairParams { bumps: 4, center_radius: 0.5, radius: (0.25, 0.45), amplitude: (0.5, 1.5), cones: Cones::Quadrant { margin: 0.1 }, eps: 0.5 }
    }

    /// Wide symmetric cones: `S^x, T^y > 0` still hold but `det(S, T)` changes sign.
    pub fn sign_violating() -> Self {
        PairParams { cones: Cones::Symmetric { half_angle: FRAC_PI_2 - 0.15 }, ..Self::admissible() }
    }

    pub fn validate(&self) -> Result<()> {
        let cones = match self.cones {
            Cones::Quadrant { margin } => (0.0..FRAC_PI_2 / 2.0).contains(&margin),
            Cones::Symmetric { half_angle } => half_angle > 0.0 && half_angle < FRAC_PI_2,
        };
        let ok = self.bumps > 0
            && cones
            && self.center_radius >= 0.0
            && 0.0 < self.radius.0
            && self.radius.0 <= self.radius.1
            && 0.0 < self.amplitude.0
            && self.amplitude.0 <= self.amplitude.1
            && self.eps > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("transverse-flow parameters {self:?}")))
        }
    }
}

/// Bump sums for S (around `e_x`) and T (around `e_y`) with their backgrounds `ε e_x`, `ε e_y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransverseFlowPair {
    pub s: BumpField,
    pub t: BumpField,
    pub eps: f64,
}

fn random_bumps<R: Rng + ?Sized>(rng: &mut R, p: &PairParams, lo: f64, hi: f64) -> Vec<Bump> {
    (0..p.bumps)
        .map(|_| {
            let rho = p.center_radius * rng.gen::<f64>().sqrt();
            let az = rng.gen_range(0.0..std::f64::consts::TAU);
            let spread = rng.gen_range(0.0..0.5 * (hi - lo));
            let angle = rng.gen_range(lo + spread..=hi - spread);
            let kdir = rng.gen_range(0.0..std::f64::consts::TAU);
            let kmag = rng.gen_range(2.0..6.0);
            Bump {
                center: [rho * az.cos(), rho * az.sin()],
                radius: rng.gen_range(p.radius.0..=p.radius.1),
                amplitude: rng.gen_range(p.amplitude.0..=p.amplitude.1),
                angle,
                wobble: spread,
                wave: [kmag * kdir.cos(), kmag * kdir.sin()],
            }
        })
        .collect()
}

/// Angle ranges `(S, T)` for one seed.
fn angle_ranges<R: Rng + ?Sized>(rng: &mut R, cones: &Cones) -> ((f64, f64), (f64, f64)) {
    match *cones {
        Cones::Quadrant { margin } => {
            if rng.gen::<bool>() {
                ((margin, FRAC_PI_2 - margin), (FRAC_PI_2 + margin, PI - margin))
            } else {
                ((-FRAC_PI_2 + margin, -margin), (margin, FRAC_PI_2 - margin))
            }
        }
        Cones::Symmetric { half_angle } => ((-half_angle, half_angle), (FRAC_PI_2 - half_angle, FRAC_PI_2 + half_angle)),
    }
}

pub fn transverse_flow_pair<R: Rng + ?Sized>(rng: &mut R, params: &PairParams) -> Result<TransverseFlowPair> {
    params.validate()?;
    let (rs, rt) = angle_ranges(rng, &params.cones);
    let s = BumpField { background: [params.eps, 0.0], bumps: random_bumps(rng, params, rs.0, rs.1) };
    let t = BumpField { background: [0.0, params.eps], bumps: random_bumps(rng, params, rt.0, rt.1) };
    Ok(TransverseFlowPair { s, t, eps: params.eps })
}
