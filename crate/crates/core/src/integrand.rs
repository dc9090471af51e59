//! Anisotropic codimension-one integrands on R³ and pointwise quantities derived from them.
//!
//! An [`Integrand`] is the 1-homogeneous, even extension of a positive function on the unit
//! sphere of normals. Every variant supplies its value and its gradient in closed form.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{fibonacci_sphere, mat_from_rows, mat_to_rows, random_unit, Mat3, Vec3};
use crate::report::Report;

const DEFAULT_SEED: u64 = 0x5eed_1e77;

/// `γ̂` fixture: the equatorial supremum `(√2 − 1)/2` gives `γ = 2 + 2√2`.
pub const GAMMA_FIXTURE: f64 = 4.828_427_124_746_19;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Integrand {
    Area,
    Lp {
        p: f64,
    },
    Pushforward {
        base: Box<Integrand>,
        #[serde(rename = "L")]
        l: [[f64; 3]; 3],
    },
    Perturbed {
        base: Box<Integrand>,
        eps: f64,
    },
}

impl Integrand {
    pub fn area() -> Self {
        Integrand::Area
    }

    pub fn lp(p: f64) -> Result<Self> {
        let f = Integrand::Lp { p };
        f.validate()?;
        Ok(f)
    }

    /// `(1 + eps) * base`.
    pub fn perturbed(base: Integrand, eps: f64) -> Result<Self> {
        let f = Integrand::Perturbed { base: Box::new(base), eps };
        f.validate()?;
        Ok(f)
    }

    /// `L_*F(ν) = F(Lᵀν)`.
    pub fn pushforward(base: Integrand, l: &Mat3) -> Result<Self> {
        let f = Integrand::Pushforward { base: Box::new(base), l: mat_to_rows(l) };
        f.validate()?;
        Ok(f)
    }

    /// Checks parameters recursively; deserialized values should pass through here.
    pub fn validate(&self) -> Result<()> {
        match self {
            Integrand::Area => Ok(()),
            Integrand::Lp { p } => {
                if p.is_finite() && *p >= 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!("lp exponent p = {p} must be >= 1")))
                }
            }
            Integrand::Perturbed { base, eps } => {
                if !(eps.is_finite() && 1.0 + eps > 0.0) {
                    return Err(Error::InvalidParameter(format!("perturbation eps = {eps}")));
                }
                base.validate()
            }
            Integrand::Pushforward { base, l } => {
                let m = mat_from_rows(l);
                let det = m.determinant();
                let scale = m.norm().powi(3).max(f64::MIN_POSITIVE);
                if !det.is_finite() || det.abs() <= 1e-12 * scale {
                    return Err(Error::SingularMatrix(det));
                }
                base.validate()
            }
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: Integrand = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        f.validate()?;
        Ok(f)
    }

    pub fn label(&self) -> String {
        match self {
            Integrand::Area => "area".into(),
            Integrand::Lp { p } => format!("l{p}"),
            Integrand::Pushforward { base, .. } => format!("push({})", base.label()),
            Integrand::Perturbed { base, eps } => format!("(1+{eps})*{}", base.label()),
        }
    }

    pub fn eval(&self, v: &Vec3) -> f64 {
        match self {
            Integrand::Area => v.norm(),
            Integrand::Lp { p } => lp_norm(v, *p),
            Integrand::Pushforward { base, l } => base.eval(&(mat_from_rows(l).transpose() * v)),
            Integrand::Perturbed { base, eps } => (1.0 + eps) * base.eval(v),
        }
    }

    pub fn grad(&self, v: &Vec3) -> Result<Vec3> {
        if v.iter().all(|x| *x == 0.0) {
            return Err(Error::ZeroVector);
        }
        Ok(self.grad_nonzero(v))
    }

    fn grad_nonzero(&self, v: &Vec3) -> Vec3 {
        match self {
            Integrand::Area => v / v.norm(),
            Integrand::Lp { p } => {
                let f = lp_norm(v, *p);
                v.map(|x| {
                    if x == 0.0 {
                        0.0
                    } else {
                        x.signum() * (x.abs() / f).powf(p - 1.0)
                    }
                })
            }
            Integrand::Pushforward { base, l } => {
                let m = mat_from_rows(l);
                m * base.grad_nonzero(&(m.transpose() * v))
            }
            Integrand::Perturbed { base, eps } => base.grad_nonzero(v) * (1.0 + eps),
        }
    }

    /// Smallest and largest sampled values on the unit sphere.
    pub fn sphere_bounds(&self, n_samples: usize) -> (f64, f64) {
        fibonacci_sphere(n_samples.max(12))
            .iter()
            .map(|v| self.eval(v))
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), x| (lo.min(x), hi.max(x)))
    }
}

fn lp_norm(v: &Vec3, p: f64) -> f64 {
    let m = v.amax();
    if m == 0.0 {
        return 0.0;
    }
    let s: f64 = v.iter().map(|x| (x.abs() / m).powf(p)).sum();
    m * s.powf(1.0 / p)
}

pub fn eval(f: &Integrand, v: &Vec3) -> f64 {
    f.eval(v)
}

pub fn grad(f: &Integrand, v: &Vec3) -> Result<Vec3> {
    f.grad(v)
}

/// `B_F(ν) = F(ν) I − ν ⊗ ∇F(ν)` for a unit normal ν.
pub fn b_matrix(f: &Integrand, nu: &Vec3) -> Result<Mat3> {
    let n = nu.norm();
    if (n - 1.0).abs() > 1e-12 {
        return Err(Error::NotUnit(n));
    }
    Ok(b_matrix_unchecked(f, nu))
}

pub(crate) fn b_matrix_unchecked(f: &Integrand, nu: &Vec3) -> Mat3 {
    let g = f.grad_nonzero(nu);
    Mat3::identity() * f.eval(nu) - nu * g.transpose()
}

pub fn pushforward(f: &Integrand, l: &Mat3) -> Result<Integrand> {
    Integrand::pushforward(f.clone(), l)
}

/// Sampled C¹ distance from the area integrand: max of |F(ν) − 1| + |∇F(ν) − ν| on a
/// Fibonacci sphere.
pub fn c1_distance_to_area(f: &Integrand, n_samples: usize) -> Result<f64> {
    if n_samples < 100 {
        return Err(Error::InvalidParameter(format!("n_samples = {n_samples} < 100")));
    }
    Ok(fibonacci_sphere(n_samples)
        .iter()
        .map(|nu| (f.eval(nu) - 1.0).abs() + (f.grad_nonzero(nu) - nu).norm())
        .fold(0.0, f64::max))
}

/// Default sample count for [`c1_distance_to_area`].
pub const C1_DEFAULT_SAMPLES: usize = 4096;

/// Whether `f` is within `threshold` of the area integrand in the sampled C¹ distance.
pub fn close_to_area(f: &Integrand, threshold: f64) -> Result<bool> {
    Ok(c1_distance_to_area(f, C1_DEFAULT_SAMPLES)? <= threshold)
}

/// Strict midpoint convexity off lines through the origin.
///
/// `lhs` is the worst normalized midpoint gap `(F((u+v)/2) − (F(u)+F(v))/2) / (F(u)+F(v))`
/// and `rhs = −δ` with `δ = 1e-9`, so pass means `F((u+v)/2) < (F(u)+F(v))/2 − δ(F(u)+F(v))`
/// on every sampled non-parallel pair.
pub fn check_convexity_ac(f: &Integrand, n_samples: usize) -> Report {
    check_convexity_ac_seeded(f, n_samples, DEFAULT_SEED)
}

pub fn check_convexity_ac_seeded(f: &Integrand, n_samples: usize, seed: u64) -> Report {
    const DELTA: f64 = 1e-9;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs: Vec<(Vec3, Vec3)> = Vec::with_capacity(n_samples + 6);
    // coordinate probes catch flat faces aligned with the axes
    for i in 0..3 {
        for j in (i + 1)..3 {
            pairs.push((Vec3::ith(i, 1.0), Vec3::ith(j, 1.0)));
        }
    }
    use rand::Rng;
    while pairs.len() < n_samples + 3 {
        let u = random_unit(&mut rng) * rng.gen_range(0.5..2.0);
        let v = random_unit(&mut rng) * rng.gen_range(0.5..2.0);
        pairs.push((u, v));
    }
    let mut worst = f64::NEG_INFINITY;
    let mut violations = 0usize;
    let mut used = 0usize;
    for (u, v) in pairs {
        if u.cross(&v).norm() < 1e-3 * u.norm() * v.norm() {
            continue;
        }
        used += 1;
        let s = f.eval(&u) + f.eval(&v);
        let gap = (f.eval(&((u + v) * 0.5)) - 0.5 * s) / s;
        if gap >= -DELTA {
            violations += 1;
        }
        worst = worst.max(gap);
    }
    Report::new(worst, -DELTA, 0.0, 0.0)
        .with("delta_rel", DELTA)
        .with("pairs", used as f64)
        .with("violations", violations as f64)
}

/// Value of the rotational monotonicity expression
/// `(ν^i ν̃^j − ν^j ν̃^i)(∂_iF(ν)∂_jF(ν̃) − ∂_jF(ν)∂_iF(ν̃))`.
pub fn rot_mono(f: &Integrand, nu: &Vec3, nt: &Vec3, i: usize, j: usize) -> f64 {
    let g = f.grad_nonzero(nu);
    let gt = f.grad_nonzero(nt);
    (nu[i] * nt[j] - nu[j] * nt[i]) * (g[i] * gt[j] - g[j] * gt[i])
}

/// The symmetrized pair integrand whose double integral is `det Λ`, together with its two
/// lower bounds: `(sym, half_bound, product_bound)` with
/// `half_bound = ½[F(ν)ν̃^z∂_zF(ν̃) + F(ν̃)ν^z∂_zF(ν)]` and
/// `product_bound = ν^z∂_zF(ν)·ν̃^z∂_zF(ν̃)`.
pub fn symmetrized_terms(f: &Integrand, nu: &Vec3, nt: &Vec3) -> (f64, f64, f64) {
    let g = f.grad_nonzero(nu);
    let gt = f.grad_nonzero(nt);
    let (fv, ft) = (f.eval(nu), f.eval(nt));
    let half = 0.5 * (fv * nt[2] * gt[2] + ft * nu[2] * g[2]);
    let cross = 0.5
        * (nu[1] * g[1] * nt[0] * gt[0] + nt[1] * gt[1] * nu[0] * g[0]
            - nu[0] * g[1] * nt[1] * gt[0]
            - nt[0] * gt[1] * nu[1] * g[0]);
    (half + cross, half, nu[2] * g[2] * nt[2] * gt[2])
}

/// Rotational monotonicity for all index pairs plus the symmetrized determinant bound.
///
/// `lhs = −(smallest margin)`, `rhs = 1e-10`; pass iff every margin is `≥ −1e-10` and `F` is
/// even in each coordinate on the sampled points.
pub fn check_tris_condition(f: &Integrand, n_samples: usize) -> Report {
    check_tris_condition_seeded(f, n_samples, DEFAULT_SEED)
}

pub fn check_tris_condition_seeded(f: &Integrand, n_samples: usize, seed: u64) -> Report {
    const FLOOR: f64 = 1e-10;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut even = true;
    let (mut min_rot, mut min_sym, mut min_half) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    for _ in 0..n_samples {
        let nu = random_unit(&mut rng);
        let nt = random_unit(&mut rng);
        let base = f.eval(&nu);
        for s in 1..8u32 {
            let flipped = Vec3::new(
                if s & 1 != 0 { -nu[0] } else { nu[0] },
                if s & 2 != 0 { -nu[1] } else { nu[1] },
                if s & 4 != 0 { -nu[2] } else { nu[2] },
            );
            if (f.eval(&flipped) - base).abs() > 1e-10 * base {
                even = false;
            }
        }
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            min_rot = min_rot.min(rot_mono(f, &nu, &nt, i, j));
        }
        let (sym, half, prod) = symmetrized_terms(f, &nu, &nt);
        min_sym = min_sym.min(sym - prod);
        min_half = min_half.min(half - prod);
    }
    let worst = min_rot.min(min_sym).min(min_half);
    let r = Report::new(-worst, FLOOR, 0.0, 0.0)
        .with("min_rot_mono", min_rot)
        .with("min_sym_minus_product", min_sym)
        .with("min_half_minus_product", min_half)
        .with("coordinate_even", if even { 1.0 } else { 0.0 })
        .with("pairs", n_samples as f64);
    if even {
        r
    } else {
        r.fail_with("not_coordinate_even")
    }
}

/// `(minPos, negSum)` for the two quadratic forms `b² + c² − ab` and `a² + c² − ab`.
pub fn scalar_lemma(a: f64, b: f64, c: f64) -> (f64, f64) {
    let q1 = b * b + c * c - a * b;
    let q2 = a * a + c * c - a * b;
    (q1.max(0.0).min(q2.max(0.0)), (-q1).max(0.0) + (-q2).max(0.0))
}

fn sphere_grid(n_grid: usize) -> impl Iterator<Item = Vec3> {
    let n = n_grid;
    (0..n).flat_map(move |i| {
        let theta = std::f64::consts::PI * (i as f64 + 0.5) / n as f64;
        (0..n).map(move |k| {
            let phi = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            Vec3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos())
        })
    })
}

fn neg_ratio(v: &Vec3) -> Option<f64> {
    let ab = v[0] * v[0] + v[1] * v[1];
    if ab <= 1e-300 {
        return None;
    }
    Some(scalar_lemma(v[0], v[1], v[2]).1 / ab)
}

/// `γ̂ = 1 / sup negSum/(a²+b²)` over an `n_grid × n_grid` latitude-longitude grid.
pub fn gamma_estimate(n_grid: usize) -> Result<f64> {
    if n_grid < 200 {
        return Err(Error::InvalidParameter(format!("n_grid = {n_grid} < 200")));
    }
    let sup = sphere_grid(n_grid).filter_map(|v| neg_ratio(&v)).fold(0.0, f64::max);
    Ok(1.0 / sup)
}

/// Supremum of `negSum/(a²+b²)` on the equator `c = 0` (sampled with `n_grid²` angles) and on
/// the band `|c| ≤ 1/2` of the sphere grid.
pub fn gamma_slice_sups(n_grid: usize) -> (f64, f64) {
    let m = n_grid * n_grid;
    let slice = (0..m)
        .filter_map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
            neg_ratio(&Vec3::new(t.cos(), t.sin(), 0.0))
        })
        .fold(0.0, f64::max);
    let band = sphere_grid(n_grid)
        .filter(|v| v[2].abs() <= 0.5)
        .filter_map(|v| neg_ratio(&v))
        .fold(0.0, f64::max);
    (slice, band)
}
