//! Discrete 2-varifolds in R³ as multiplicity-weighted triangle soups.
//!
//! The anisotropic first variation of a polyhedral varifold is a measure on its edges: on a
//! flat triangle `B_F(ν)ν = 0`, so `⟨B_F(ν), dX⟩` only involves tangential derivatives and the
//! divergence theorem in the plane of the triangle moves it to the boundary with the in-plane
//! outward conormal `η`. Each edge collects `Σ θ_T B_F(ν_T) η_{T,e}` per unit length.

pub mod mesh;
pub mod poly;
pub mod project;

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geom::{gauss_legendre_unit, Mat3, Vec3};
use crate::integrand::{b_matrix_unchecked, Integrand};
use crate::normalize::{compute_normalization, Normalization};
use crate::planefield::GridField;
use crate::report::Report;

pub use poly::{PolyField, Term};
pub use project::project_to_plane;

/// Triangle soup with per-triangle multiplicity.
///
/// Multiplicities are nonnegative; zero-multiplicity triangles carry no mass, no first
/// variation and no support area.
#[derive(Debug, Clone, PartialEq)]
pub struct TriVarifold {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
    pub theta: Vec<f64>,
    /// Explicit `H²({θ > 0})` for inputs whose triangles overlap.
    pub support_area_override: Option<f64>,
}

/// First variation as a list of segments with vector densities per unit length.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMeasure {
    pub segments: Vec<(Vec3, Vec3)>,
    pub density: Vec<Vec3>,
}

impl EdgeMeasure {
    pub fn total_variation(&self) -> f64 {
        self.segments.iter().zip(&self.density).map(|((a, b), d)| (b - a).norm() * d.norm()).sum()
    }

    /// `Σ length · density`, the pairing with constant unit fields.
    pub fn total(&self) -> Vec3 {
        self.segments.iter().zip(&self.density).map(|((a, b), d)| d * (b - a).norm()).sum()
    }

    /// `Σ_e ∫_e ⟨X, density⟩` with 3-point Gauss-Legendre on each segment (exact for cubic X).
    pub fn pair(&self, x: &PolyField) -> f64 {
        let rule = gauss_legendre_unit(3);
        self.segments
            .iter()
            .zip(&self.density)
            .map(|((a, b), d)| {
                let len = (b - a).norm();
                rule.iter().map(|&(t, w)| w * x.eval(&(a + (b - a) * t)).dot(d)).sum::<f64>() * len
            })
            .sum()
    }
}

impl TriVarifold {
    /// Validated construction: indices in range, finite nonnegative multiplicities, positive
    /// mass, and every triangle area above `1e-14` of the squared bounding-box diagonal.
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>, theta: Vec<f64>) -> Result<Self> {
        let v = Self::new_unvalidated(vertices, triangles, theta);
        v.validate()?;
        Ok(v)
    }

    /// Construction without geometric checks; operations still reject degenerate triangles.
    pub fn new_unvalidated(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>, theta: Vec<f64>) -> Self {
        TriVarifold { vertices, triangles, theta, support_area_override: None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.triangles.is_empty() {
            return Err(Error::InvalidMesh("no triangles".into()));
        }
        if self.theta.len() != self.triangles.len() {
            return Err(Error::InvalidMesh(format!(
                "{} multiplicities for {} triangles",
                self.theta.len(),
                self.triangles.len()
            )));
        }
        for (k, t) in self.triangles.iter().enumerate() {
            if t.iter().any(|&i| i >= self.vertices.len()) {
                return Err(Error::InvalidMesh(format!("triangle {k} has an out-of-range vertex")));
            }
        }
        if let Some(k) = self.theta.iter().position(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::InvalidMesh(format!("triangle {k} has multiplicity {}", self.theta[k])));
        }
        self.check_triangles()?;
        if self.mass() <= 0.0 {
            return Err(Error::InvalidMesh("zero mass".into()));
        }
        Ok(())
    }

    fn area_floor(&self) -> f64 {
        let (mut lo, mut hi) = (Vec3::repeat(f64::INFINITY), Vec3::repeat(f64::NEG_INFINITY));
        for p in &self.vertices {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        1e-14 * (hi - lo).norm_squared()
    }

    fn check_triangles(&self) -> Result<()> {
        let floor = self.area_floor();
        for k in 0..self.triangles.len() {
            let a = self.area_vector(k).norm() * 0.5;
            if !(a > floor) {
                return Err(Error::DegenerateTriangle { index: k, area: a });
            }
        }
        Ok(())
    }

    pub fn with_multiplicity(mut self, theta: Vec<f64>) -> Result<Self> {
        self.theta = theta;
        self.validate()?;
        Ok(self)
    }

    pub fn with_support_area_override(mut self, area: f64) -> Self {
        self.support_area_override = Some(area);
        self
    }

    pub fn corners(&self, k: usize) -> [Vec3; 3] {
        let t = self.triangles[k];
        [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]]
    }

    /// `(b − a) × (c − a)`: twice the area times the unit normal.
    pub fn area_vector(&self, k: usize) -> Vec3 {
        let [a, b, c] = self.corners(k);
        (b - a).cross(&(c - a))
    }

    pub fn area(&self, k: usize) -> f64 {
        0.5 * self.area_vector(k).norm()
    }

    pub fn normal(&self, k: usize) -> Vec3 {
        self.area_vector(k).normalize()
    }

    pub fn mass(&self) -> f64 {
        (0..self.triangles.len()).map(|k| self.theta[k] * self.area(k)).sum()
    }

    pub fn energy(&self, f: &Integrand) -> f64 {
        (0..self.triangles.len())
            .filter(|&k| self.theta[k] > 0.0)
            .map(|k| self.theta[k] * self.area(k) * f.eval(&self.normal(k)))
            .sum()
    }

    pub fn support_area(&self) -> f64 {
        if let Some(a) = self.support_area_override {
            return a;
        }
        (0..self.triangles.len()).filter(|&k| self.theta[k] > 0.0).map(|k| self.area(k)).sum()
    }

    /// Smallest positive multiplicity.
    pub fn theta_min(&self) -> f64 {
        self.theta.iter().copied().filter(|t| *t > 0.0).fold(f64::INFINITY, f64::min)
    }

    pub fn euler_characteristic(&self) -> i64 {
        let mut edges = std::collections::HashSet::new();
        for t in &self.triangles {
            for e in 0..3 {
                let (a, b) = (t[e], t[(e + 1) % 3]);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        self.vertices.len() as i64 - edges.len() as i64 + self.triangles.len() as i64
    }

    /// Exact edge first variation `δ^F V`.
    pub fn first_variation(&self, f: &Integrand) -> Result<EdgeMeasure> {
        let floor = self.area_floor();
        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut segments = Vec::new();
        let mut density: Vec<Vec3> = Vec::new();
        for (k, tri) in self.triangles.iter().enumerate() {
            let av = self.area_vector(k);
            if !(0.5 * av.norm() > floor) {
                return Err(Error::DegenerateTriangle { index: k, area: 0.5 * av.norm() });
            }
            if self.theta[k] == 0.0 {
                continue;
            }
            let nu = av.normalize();
            let b = b_matrix_unchecked(f, &nu) * self.theta[k];
            for e in 0..3 {
                let (i, j, o) = (tri[e], tri[(e + 1) % 3], tri[(e + 2) % 3]);
                let (p, q, r) = (self.vertices[i], self.vertices[j], self.vertices[o]);
                let mut eta = (q - p).cross(&nu).normalize();
                if eta.dot(&(r - p)) > 0.0 {
                    eta = -eta;
                }
                let key = (i.min(j), i.max(j));
                let slot = *index.entry(key).or_insert_with(|| {
                    segments.push((self.vertices[key.0], self.vertices[key.1]));
                    density.push(Vec3::zeros());
                    segments.len() - 1
                });
                density[slot] += b * eta;
            }
        }
        Ok(EdgeMeasure { segments, density })
    }

    /// Maps vertices by `L`, keeping multiplicities.
    pub fn transform(&self, l: &Mat3) -> Result<TriVarifold> {
        let det = l.determinant();
        if !det.is_finite() || det.abs() <= 1e-12 * l.norm().powi(3) {
            return Err(Error::SingularMatrix(det));
        }
        Ok(TriVarifold {
            vertices: self.vertices.iter().map(|p| l * p).collect(),
            triangles: self.triangles.clone(),
            theta: self.theta.clone(),
            // an override describes overlaps of the original geometry and is not carried over
            support_area_override: None,
        })
    }

    pub fn dilate(&self, lambda: f64) -> Result<TriVarifold> {
        self.transform(&(Mat3::identity() * lambda))
    }

    /// `Σ θ a (ν_c)²` for each coordinate `c`.
    pub fn normal_moments(&self) -> Vec3 {
        (0..self.triangles.len())
            .map(|k| {
                let nu = self.normal(k);
                nu.component_mul(&nu) * self.theta[k] * self.area(k)
            })
            .sum()
    }
}

/// Free-function forms of the varifold operations.
pub fn mass(v: &TriVarifold) -> f64 {
    v.mass()
}

pub fn energy(v: &TriVarifold, f: &Integrand) -> f64 {
    v.energy(f)
}

pub fn first_variation(v: &TriVarifold, f: &Integrand) -> Result<EdgeMeasure> {
    v.first_variation(f)
}

pub fn support_area(v: &TriVarifold) -> f64 {
    v.support_area()
}

pub fn transform(v: &TriVarifold, l: &Mat3) -> Result<TriVarifold> {
    v.transform(l)
}

/// The integrand `F'` with `energy(transform(V, L), F') = energy(V, F)`:
/// `F'(ν) = F(Lᵀν) / |det L|`.
pub fn consistent_integrand(f: &Integrand, l: &Mat3) -> Result<Integrand> {
    let det = l.determinant();
    let pushed = Integrand::pushforward(f.clone(), l)?;
    if (det.abs() - 1.0).abs() < 1e-15 {
        return Ok(pushed);
    }
    Integrand::perturbed(pushed, 1.0 / det.abs() - 1.0)
}

/// Degree-4 symmetric rule on the reference triangle (barycentric points, weights summing to 1).
const TRI_RULE: [([f64; 3], f64); 6] = [
    ([0.445_948_490_915_965, 0.445_948_490_915_965, 0.108_103_018_168_070], 0.223_381_589_678_011),
    ([0.445_948_490_915_965, 0.108_103_018_168_070, 0.445_948_490_915_965], 0.223_381_589_678_011),
    ([0.108_103_018_168_070, 0.445_948_490_915_965, 0.445_948_490_915_965], 0.223_381_589_678_011),
    ([0.091_576_213_509_771, 0.091_576_213_509_771, 0.816_847_572_980_459], 0.109_951_743_655_322),
    ([0.091_576_213_509_771, 0.816_847_572_980_459, 0.091_576_213_509_771], 0.109_951_743_655_322),
    ([0.816_847_572_980_459, 0.091_576_213_509_771, 0.091_576_213_509_771], 0.109_951_743_655_322),
];

fn frob(a: &Mat3, b: &Mat3) -> f64 {
    a.component_mul(b).sum()
}

/// `∫⟨B_F(ν), dX⟩ dV` by per-triangle quadrature of the quadratic integrand `⟨B, dX⟩`.
pub fn first_variation_pairing(v: &TriVarifold, f: &Integrand, x: &PolyField) -> Result<f64> {
    Ok(pairing_with_scale(v, f, x)?.0)
}

/// Quadrature pairing together with `Σ θ a |⟨B, dX⟩|`, a scale for relative comparisons.
pub fn pairing_with_scale(v: &TriVarifold, f: &Integrand, x: &PolyField) -> Result<(f64, f64)> {
    if x.degree() > 3 {
        return Err(Error::UnsupportedDegree(x.degree()));
    }
    let floor = v.area_floor();
    let (mut total, mut scale) = (0.0, 0.0);
    for k in 0..v.triangles.len() {
        let a = v.area(k);
        if !(a > floor) {
            return Err(Error::DegenerateTriangle { index: k, area: a });
        }
        if v.theta[k] == 0.0 {
            continue;
        }
        let b = b_matrix_unchecked(f, &v.normal(k));
        let [p0, p1, p2] = v.corners(k);
        let mut s = 0.0;
        let mut s_abs = 0.0;
        for (bc, w) in TRI_RULE {
            let p = p0 * bc[0] + p1 * bc[1] + p2 * bc[2];
            let val = frob(&b, &x.jacobian(&p));
            s += w * val;
            s_abs += w * val.abs();
        }
        total += v.theta[k] * a * s;
        scale += v.theta[k] * a * s_abs;
    }
    Ok((total, scale))
}

/// Coordinate permutation `perm` with new coordinate `i` = old coordinate `perm[i]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Permutation {
    pub perm: [usize; 3],
    /// `Σ θ a (ν^z)² / mass` after permuting.
    pub ratio: f64,
}

impl Permutation {
    pub fn matrix(&self) -> Mat3 {
        Mat3::from_fn(|i, j| if self.perm[i] == j { 1.0 } else { 0.0 })
    }
}

/// Moves the coordinate with the largest normal second moment to `z`.
pub fn choose_permutation(v: &TriVarifold) -> Permutation {
    let m = v.normal_moments();
    let c = m.imax();
    let perm = match c {
        0 => [2, 1, 0],
        1 => [0, 2, 1],
        _ => [0, 1, 2],
    };
    Permutation { perm, ratio: m[c] / v.mass() }
}

/// Result of the normalize → transform → permute pipeline.
#[derive(Debug, Clone)]
pub struct MsPipeline {
    pub normalization: Normalization,
    pub permutation: Permutation,
    pub varifold: TriVarifold,
    pub integrand: Integrand,
}

/// Normalizes `F`, maps `V` by the determinant-one `L`, then permutes coordinates.
pub fn ms_pipeline(v: &TriVarifold, f: &Integrand) -> Result<MsPipeline> {
    let normalization = compute_normalization(f, 10_000, 1e-13)?;
    let g = normalization.unit_det_integrand(f)?;
    let v1 = v.transform(&normalization.l)?;
    let permutation = choose_permutation(&v1);
    let p = permutation.matrix();
    let v2 = v1.transform(&p)?;
    let g2 = Integrand::pushforward(g, &p)?;
    // scale an override by the change of the raw support area (exact for uniform overlaps)
    let v2 = match v.support_area_override {
        Some(a) => {
            let raw = TriVarifold { support_area_override: None, ..v.clone() }.support_area();
            let factor = v2.support_area() / raw;
            TriVarifold { support_area_override: Some(a * factor), ..v2 }
        }
        None => v2,
    };
    Ok(MsPipeline { normalization, permutation, varifold: v2, integrand: g2 })
}

/// Empirical constants `Ĉ = mass / (H²({θ>0})^{1/2} · |δ^F V|)` and
/// `Ĉ' = mass · θ₀ / |δ^F V|²` after the normalization pipeline.
///
/// The report compares `lhs = mass` with `rhs = H²({θ>0})^{1/2} · |δ^F V|` (constant one).
pub fn ms_ratio(v: &TriVarifold, f: &Integrand) -> Result<Report> {
    let pipe = ms_pipeline(v, f)?;
    let w = &pipe.varifold;
    let tv = w.first_variation(&pipe.integrand)?.total_variation();
    if !(tv > 0.0) {
        return Err(Error::InvalidParameter("first variation vanishes".into()));
    }
    let mass = w.mass();
    let area = w.support_area();
    let c_hat = mass / (area.sqrt() * tv);
    let c_density = mass * w.theta_min() / (tv * tv);
    Ok(Report::new(mass, area.sqrt() * tv, 0.0, 0.0)
        .with("c_hat", c_hat)
        .with("c_hat_density", c_density)
        .with("mass", mass)
        .with("support_area", area)
        .with("first_variation_tv", tv)
        .with("energy", w.energy(&pipe.integrand))
        .with("moment_ratio", pipe.permutation.ratio)
        .with("geo_margin", pipe.normalization.geo_margin)
        .with("normalization_iterations", pipe.normalization.iterations as f64))
}

/// Planar stage of the pipeline: projects the normalized varifold to `(S, T)` on an `n × n`
/// covering grid and compares `|div S|` with `|δ^F V|`.
///
/// `pass` iff `divTV(S) ≤ (1 + tol) |δ^F V|`; the detail carries the sign-free constant
/// `kak_c_hat` with `χ ≡ 1` next to `ms_c_hat`.
pub fn planar_report(v: &TriVarifold, f: &Integrand, n: usize, tol: f64) -> Result<Report> {
    let pipe = ms_pipeline(v, f)?;
    let (s, t) = planar_fields(&pipe, n)?;
    planar_report_with(&pipe, &s, &t, tol)
}

/// `(S, T)` of the pipeline's varifold on an `n × n` covering grid.
pub fn planar_fields(pipe: &MsPipeline, n: usize) -> Result<(GridField, GridField)> {
    let grid = project::covering_grid(&pipe.varifold, n, 0.1)?;
    project::project_to_plane(&pipe.varifold, &pipe.integrand, &grid)
}

/// [`planar_report`] for fields already projected from `pipe`.
pub fn planar_report_with(pipe: &MsPipeline, s: &GridField, t: &GridField, tol: f64) -> Result<Report> {
    use crate::planefield::{kak_bis_terms, ScalarField};
    let w = &pipe.varifold;
    let tv = w.first_variation(&pipe.integrand)?.total_variation();
    let grid = s.grid;
    let n = grid.nx;
    let (ds, dt) = (s.div_tv()?, t.div_tv()?);
    let chi = ScalarField::from_fn(grid, |_| 1.0);
    let k = kak_bis_terms(s, t, &chi)?;
    let mass = w.mass();
    Ok(Report::new(ds, tv, tol, 0.0)
        .with("div_tv_s", ds)
        .with("div_tv_t", dt)
        .with("first_variation_tv", tv)
        .with("kak_c_hat", k.c_hat())
        .with("ms_c_hat", mass / (w.support_area().sqrt() * tv))
        .with("grid", n as f64))
}
