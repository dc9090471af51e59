//! Volume-maximizing linear normalization of an integrand.
//!
//! With `K = {F ≤ 1}` and `Q = [−1, 1]³`, we look for `T` with `T(K) ⊆ Q` of maximal
//! determinant. The constraint on row `r_i` of `T` is `F*(r_i) ≤ 1`, so with the other two rows
//! fixed the best row is the dual-ball maximizer against `r_j × r_k`, namely `∇F(r_j × r_k)`.
//!
//! Convention: the normalized integrand is `G(ν) = F(T⁻¹ν)`, i.e. `L_*F` with `L = T⁻ᵀ`, whose
//! sublevel set `{G ≤ 1} = T(K)` sits in `Q` and touches all six faces. The stored `L` is this
//! map rescaled to determinant one.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{fibonacci_sphere, mat_to_rows, random_unit, Mat3, Vec3};
use crate::integrand::Integrand;
use crate::report::Report;

const RESTART_SEED: u64 = 0xc0_0d1a;
const MAX_RESTARTS: usize = 8;
pub const GEO_SAMPLES: usize = 4096;

/// `u* = ∇F(v)`, the maximizer of `⟨u, v⟩` over the dual ball `{F* ≤ 1}`.
pub fn dual_argmax(f: &Integrand, v: &Vec3) -> Result<Vec3> {
    f.grad(v)
}

#[derive(Debug, Clone)]
pub struct Normalization {
    /// `T⁻ᵀ` rescaled to determinant one.
    pub l: Mat3,
    /// The volume-maximizing map with `T(K) ⊆ Q`.
    pub t: Mat3,
    pub rows: [Vec3; 3],
    /// `det T` at the fixed point.
    pub achieved_det: f64,
    pub geo_margin: f64,
    pub iterations: usize,
    pub restarts: usize,
    /// `det T` after every row update once the iterate is feasible.
    pub det_history: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormalizationJson {
    #[serde(rename = "L")]
    pub l: [[f64; 3]; 3],
    #[serde(rename = "geoMargin")]
    pub geo_margin: f64,
    pub iterations: usize,
}

impl Normalization {
    /// `G = F ∘ T⁻¹`, whose unit ball touches every face of the cube.
    pub fn normalized_integrand(&self, f: &Integrand) -> Result<Integrand> {
        let inv = self.t.try_inverse().ok_or(Error::SingularMatrix(self.achieved_det))?;
        Integrand::pushforward(f.clone(), &inv.transpose())
    }

    /// `L_*F` with the determinant-one `L`; a positive multiple of [`Self::normalized_integrand`].
    pub fn unit_det_integrand(&self, f: &Integrand) -> Result<Integrand> {
        Integrand::pushforward(f.clone(), &self.l)
    }

    pub fn to_json(&self) -> NormalizationJson {
        NormalizationJson {
            l: mat_to_rows(&self.l),
            geo_margin: self.geo_margin,
            iterations: self.iterations,
        }
    }

    /// Whether det T never decreased (up to rounding) along the recorded history.
    pub fn det_monotone(&self) -> bool {
        self.det_history.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-13))
    }
}

fn rows_matrix(rows: &[Vec3; 3]) -> Mat3 {
    Mat3::from_rows(&[rows[0].transpose(), rows[1].transpose(), rows[2].transpose()])
}

fn perturbed_orthonormal(rng: &mut ChaCha8Rng) -> [Vec3; 3] {
    let a = random_unit(rng);
    let b0 = random_unit(rng);
    let b = (b0 - a * a.dot(&b0)).normalize();
    [a, b, a.cross(&b)]
}

/// Cyclic coordinate ascent `r_i ← ∇F(r_j × r_k)` from `T₀ = I`.
pub fn compute_normalization(f: &Integrand, max_iter: usize, tol: f64) -> Result<Normalization> {
    if max_iter < 10 {
        return Err(Error::InvalidParameter(format!("max_iter = {max_iter} < 10")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(RESTART_SEED);
    let mut rows = [Vec3::x(), Vec3::y(), Vec3::z()];
    let mut restarts = 0;
    let mut history = Vec::new();
    let mut updates_since_seed = 0usize;
    let mut prev_sweep_det = f64::NAN;
    for iter in 1..=max_iter {
        let mut restarted = false;
        for i in 0..3 {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            let w = rows[j].cross(&rows[k]);
            if w.norm() < 1e-8 * rows[j].norm() * rows[k].norm() {
                restarts += 1;
                if restarts > MAX_RESTARTS {
                    return Err(Error::NotConverged {
                        iterations: iter,
                        det: rows_matrix(&rows).determinant(),
                        rows: mat_to_rows(&rows_matrix(&rows)),
                    });
                }
                rows = perturbed_orthonormal(&mut rng);
                updates_since_seed = 0;
                history.clear();
                restarted = true;
                break;
            }
            rows[i] = dual_argmax(f, &w)?;
            updates_since_seed += 1;
            // every row lies on the dual sphere after one full sweep, so the iterate is feasible
            if updates_since_seed >= 3 {
                history.push(rows_matrix(&rows).determinant());
            }
        }
        if restarted {
            prev_sweep_det = f64::NAN;
            continue;
        }
        let det = rows_matrix(&rows).determinant();
        if prev_sweep_det.is_finite() && det - prev_sweep_det <= tol * prev_sweep_det.abs() {
            return finish(f, rows, iter, restarts, history);
        }
        if updates_since_seed >= 3 {
            prev_sweep_det = det;
        }
    }
    let t = rows_matrix(&rows);
    Err(Error::NotConverged { iterations: max_iter, det: t.determinant(), rows: mat_to_rows(&t) })
}

fn finish(
    f: &Integrand,
    rows: [Vec3; 3],
    iterations: usize,
    restarts: usize,
    det_history: Vec<f64>,
) -> Result<Normalization> {
    let t = rows_matrix(&rows);
    let det = t.determinant();
    let inv = t.try_inverse().ok_or(Error::SingularMatrix(det))?;
    for i in 0..3 {
        let v = f.eval(&inv.column(i).into_owned());
        if v > 1.0 + 1e-8 {
            return Err(Error::NotConverged { iterations, det, rows: mat_to_rows(&t) });
        }
    }
    let lt = inv.transpose();
    let l = lt / lt.determinant().cbrt();
    let g = Integrand::pushforward(f.clone(), &lt)?;
    let geo_margin = geo_margin(&g, GEO_SAMPLES);
    Ok(Normalization { l, t, rows, achieved_det: det, geo_margin, iterations, restarts, det_history })
}

fn geo_samples(n: usize) -> Vec<Vec3> {
    let mut pts = fibonacci_sphere(n);
    for i in 0..3 {
        pts.push(Vec3::ith(i, 1.0));
        pts.push(Vec3::ith(i, -1.0));
    }
    pts
}

fn geo_margin(g: &Integrand, n: usize) -> f64 {
    let mut worst = f64::INFINITY;
    for nu in geo_samples(n) {
        let d = match g.grad(&nu) {
            Ok(d) => d,
            Err(_) => continue,
        };
        let a = d.dot(&(nu - Vec3::x() * nu[0]));
        let b = d.dot(&(nu - Vec3::y() * nu[1]));
        worst = worst.min(a).min(b);
    }
    worst
}

/// `min_ν min(⟨∇G(ν), ν − ν¹e₁⟩, ⟨∇G(ν), ν − ν²e₂⟩)` over a sphere sample including the axes.
///
/// `lhs = −min`, `rhs = 1e-8`, so pass iff the minimum is `≥ −1e-8`.
pub fn check_geo_condition(g: &Integrand, n_samples: usize) -> Report {
    let m = geo_margin(g, n_samples);
    Report::new(-m, 1e-8, 0.0, 0.0).with("min_geo", m).with("samples", n_samples as f64)
}

/// Elementary shear `I + s e_a e_bᵀ` with `a ≠ b` and `|s| ∈ [0.4, 1.5]`, drawn from `seed`.
pub fn seeded_shear(seed: u64) -> Mat3 {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = rng.gen_range(0..3);
    let b = (a + rng.gen_range(1..3)) % 3;
    let s = rng.gen_range(0.4..1.5) * if rng.gen::<bool>() { 1.0 } else { -1.0 };
    let mut m = Mat3::identity();
    m[(a, b)] = s;
    m
}
