//! Corpus definitions and the continuum oracle shared by the integration tests.

#![allow(dead_code)]

use varilab::flowdecomp::{raster_pair, seeded_pair, BumpField, PairParams, TransverseFlowPair};
use std::sync::OnceLock;

use varilab::planefield::{det_field, GridField, ScalarField};
use varilab::Vec2;

pub const CORPUS_SEEDS: u64 = 100;
pub const CORPUS_GRID: usize = 128;
pub const CORPUS_HALF_WIDTH: f64 = 1.2;
pub const CHI_RADIUS: f64 = 1.1;

/// Largest continuum `Ĉ` over the corpus, from `continuum_kak_bis` on a 600² lattice.
pub const ORACLE_MAX_C_HAT: f64 = 0.015754796613703322;
pub const ORACLE_ARGMAX: u64 = 132;
pub const ORACLE_LATTICE: usize = 600;

pub fn chi(p: Vec2) -> f64 {
    (1.0 - p.norm_squared() / (CHI_RADIUS * CHI_RADIUS)).max(0.0)
}

/// Seeds of the first `CORPUS_SEEDS` sign-violating pairs whose rasterized determinant is
/// negative somewhere.
pub fn violating_seeds() -> &'static [u64] {
    static SEEDS: OnceLock<Vec<u64>> = OnceLock::new();
    SEEDS.get_or_init(|| {
        (0..)
            .filter(|&seed| {
                let (s, t, _) = corpus_fields(&seeded_pair(seed, &PairParams::sign_violating()).unwrap(), CORPUS_GRID);
                det_field(&s, &t).unwrap().values.iter().any(|&d| d < 0.0)
            })
            .take(CORPUS_SEEDS as usize)
            .collect()
    })
}

/// The admissible pairs followed by the sign-violating ones.
pub fn corpus_pair(index: u64) -> TransverseFlowPair {
    if index < CORPUS_SEEDS {
        seeded_pair(index, &PairParams::admissible()).unwrap()
    } else {
        seeded_pair(violating_seeds()[(index - CORPUS_SEEDS) as usize], &PairParams::sign_violating()).unwrap()
    }
}

pub fn corpus_fields(pair: &TransverseFlowPair, n: usize) -> (GridField, GridField, ScalarField) {
    let (s, t) = raster_pair(pair, n, CORPUS_HALF_WIDTH).unwrap();
    let c = ScalarField::from_fn(s.grid, chi);
    (s, t, c)
}

/// `(lhs, a, b, n)` of the sign-free inequality by midpoint quadrature of the smooth fields on an
/// `m × m` lattice of `[−L, L]²`, with divergences by central differences.
pub fn continuum_kak_bis(pair: &TransverseFlowPair, m: usize) -> (f64, f64, f64, f64) {
    let (s, t) = (pair.s.without_background(), pair.t.without_background());
    let h = 2.0 * CORPUS_HALF_WIDTH / m as f64;
    let div = |f: &BumpField, p: Vec2| {
        let d = 1e-5;
        (f.eval(p + Vec2::new(d, 0.0))[0] - f.eval(p - Vec2::new(d, 0.0))[0] + f.eval(p + Vec2::new(0.0, d))[1] - f.eval(p - Vec2::new(0.0, d))[1]) / (2.0 * d)
    };
    let (mut lhs, mut chi2, mut ms, mut mt, mut ds, mut dt, mut neg) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for b in 0..m {
        for a in 0..m {
            let p = Vec2::new(-CORPUS_HALF_WIDTH + (a as f64 + 0.5) * h, -CORPUS_HALF_WIDTH + (b as f64 + 0.5) * h);
            let (sv, tv) = (s.eval(p), t.eval(p));
            let sp = sv[0] - sv[1].abs();
            let tp = tv[1] - tv[0].abs();
            let c = chi(p);
            lhs += c * sp.max(0.0).min(tp.max(0.0));
            chi2 += c * c;
            ms += sv.norm();
            mt += tv.norm();
            ds += div(&s, p).abs();
            dt += div(&t, p).abs();
            neg += (-sp).max(0.0) + (-tp).max(0.0);
        }
    }
    let area = h * h;
    let a = (chi2 * area).sqrt() * ((ms + ds) * area).sqrt() * ((mt + dt) * area).sqrt();
    (lhs * area, a, (ds + dt) * area, neg * area)
}

pub fn c_hat(lhs: f64, a: f64, b: f64, n: f64) -> f64 {
    if lhs <= n {
        0.0
    } else {
        (lhs - n) / (a + b)
    }
}
