use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Mat3, Vec3};

/// Exponent triples of all monomials of total degree ≤ 3, in a fixed order.
pub fn monomials() -> Vec<[u32; 3]> {
    let mut out = Vec::with_capacity(20);
    for d in 0..=3u32 {
        for i in (0..=d).rev() {
            for j in (0..=(d - i)).rev() {
                out.push([i, j, d - i - j]);
            }
        }
    }
    out
}

/// A single term `coeff · x^e₀ y^e₁ z^e₂` in component `component` of a vector field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub component: usize,
    pub exps: [u32; 3],
    pub coeff: f64,
}

/// Polynomial vector field on R³ of total degree at most 3.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyField {
    terms: Vec<Term>,
}

fn powi(x: f64, e: u32) -> f64 {
    x.powi(e as i32)
}

impl PolyField {
    pub fn new(terms: Vec<Term>) -> Result<Self> {
        for t in &terms {
            let deg = t.exps.iter().sum::<u32>() as usize;
            if deg > 3 {
                return Err(Error::UnsupportedDegree(deg));
            }
            if t.component > 2 {
                return Err(Error::InvalidParameter(format!("component {}", t.component)));
            }
        }
        Ok(PolyField { terms })
    }

    pub fn constant(v: Vec3) -> Self {
        PolyField {
            terms: (0..3).map(|c| Term { component: c, exps: [0, 0, 0], coeff: v[c] }).collect(),
        }
    }

    /// The position field `p ∂_p`.
    pub fn dilation() -> Self {
        let mut terms = Vec::new();
        for c in 0..3 {
            let mut e = [0, 0, 0];
            e[c] = 1;
            terms.push(Term { component: c, exps: e, coeff: 1.0 });
        }
        PolyField { terms }
    }

    /// Dense random cubic field with coefficients in `[−1, 1]`.
    pub fn random_cubic<R: rand::Rng + ?Sized>(rng: &mut R) -> Self {
        let mut terms = Vec::new();
        for c in 0..3 {
            for e in monomials() {
                terms.push(Term { component: c, exps: e, coeff: rng.gen_range(-1.0..1.0) });
            }
        }
        PolyField { terms }
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|t| t.exps.iter().sum::<u32>() as usize).max().unwrap_or(0)
    }

    pub fn eval(&self, p: &Vec3) -> Vec3 {
        let mut out = Vec3::zeros();
        for t in &self.terms {
            out[t.component] += t.coeff * powi(p[0], t.exps[0]) * powi(p[1], t.exps[1]) * powi(p[2], t.exps[2]);
        }
        out
    }

    /// `J[(i, j)] = ∂_j X^i`.
    pub fn jacobian(&self, p: &Vec3) -> Mat3 {
        let mut out = Mat3::zeros();
        for t in &self.terms {
            for j in 0..3 {
                let e = t.exps[j];
                if e == 0 {
                    continue;
                }
                let mut v = t.coeff * e as f64;
                for k in 0..3 {
                    let ek = if k == j { e - 1 } else { t.exps[k] };
                    v *= powi(p[k], ek);
                }
                out[(t.component, j)] += v;
            }
        }
        out
    }
}
