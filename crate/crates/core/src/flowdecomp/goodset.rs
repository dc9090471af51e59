//! Good sets: samples whose forward curves stay in the translated cones until leaving the strip.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geom::Vec2;

use super::curve::{integrate_curve, polyline_distance, polyline_intersections, strip_crossing, Stop};
use super::field::{swap, SmoothField};

/// Cone test along the forward curve of `p` up to `x = x_end`. Returns `(with margin, without)`.
///
/// The margin test `|Δy| < (1 − m)·Δx` makes the sampled set an inner approximation.
pub fn cone_good(z: &SmoothField, p: Vec2, x_end: f64, h: f64, margin: f64) -> Result<(bool, bool)> {
    let c = integrate_curve(z, p, Stop::XLevel(x_end), h)?;
    let (mut good, mut raw) = (true, true);
    for q in &c[1..] {
        let dx = q[0] - p[0];
        let dy = (q[1] - p[1]).abs();
        if !(dy < dx) {
            raw = false;
        }
        if !(dy < (1.0 - margin) * dx) {
            good = false;
        }
        if !raw {
            break;
        }
    }
    Ok((good, raw))
}

/// Cell-midpoint lattice `n × n` of the unit square `[j, j+1] × [k, k+1]`.
pub fn square_lattice(j: i64, k: i64, n: usize) -> Vec<Vec2> {
    let mut out = Vec::with_capacity(n * n);
    for b in 0..n {
        for a in 0..n {
            out.push(Vec2::new(j as f64 + (a as f64 + 0.5) / n as f64, k as f64 + (b as f64 + 0.5) / n as f64));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoodSetMask {
    pub j: i64,
    pub k: i64,
    pub n: usize,
    pub samples: Vec<Vec2>,
    pub good_x: Vec<bool>,
    pub good_y: Vec<bool>,
    pub mask: Vec<bool>,
    /// Margins `h·Lip` used for the two fields.
    pub margin_x: f64,
    pub margin_y: f64,
    /// Samples dropped only because of the margin.
    pub margin_binding: usize,
}

impl GoodSetMask {
    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn cell_area(&self) -> f64 {
        1.0 / (self.n * self.n) as f64
    }

    pub fn good_points(&self) -> impl Iterator<Item = Vec2> + '_ {
        self.samples.iter().zip(&self.mask).filter(|(_, &m)| m).map(|(&p, _)| p)
    }

    /// Every sample lies in the closed unit square of the strips.
    pub fn inside_strips(&self) -> bool {
        let (j, k) = (self.j as f64, self.k as f64);
        self.samples.iter().all(|p| p[0] >= j && p[0] <= j + 1.0 && p[1] >= k && p[1] <= k + 1.0)
    }
}

/// `h·Lip` over the square with the given samples.
fn margin(z: &SmoothField, samples: &[Vec2], h: f64) -> f64 {
    h * z.lipschitz(samples)
}

/// `G_jk = G_j^x ∩ G_k^y` on an `n × n` lattice: curves of `z` traced to `x = j+1` stay in
/// `p + C^x`, curves of `w` traced to `y = k+1` stay in `p + C^y`.
pub fn good_set(z: &SmoothField, w: &SmoothField, j: i64, k: i64, n: usize, h: f64) -> Result<GoodSetMask> {
    let samples = square_lattice(j, k, n);
    let ws = w.swapped();
    let swapped: Vec<Vec2> = samples.iter().map(|&p| swap(p)).collect();
    let margin_x = margin(z, &samples, h);
    let margin_y = margin(&ws, &swapped, h);
    let mut good_x = Vec::with_capacity(samples.len());
    let mut good_y = Vec::with_capacity(samples.len());
    let mut mask = Vec::with_capacity(samples.len());
    let mut margin_binding = 0;
    for &p in &samples {
        let (gx, rx) = cone_good(z, p, (j + 1) as f64, h, margin_x)?;
        let (gy, ry) = cone_good(&ws, swap(p), (k + 1) as f64, h, margin_y)?;
        if rx && ry && !(gx && gy) {
            margin_binding += 1;
        }
        good_x.push(gx);
        good_y.push(gy);
        mask.push(gx && gy);
    }
    Ok(GoodSetMask { j, k, n, samples, good_x, good_y, mask, margin_x, margin_y, margin_binding })
}

/// `G_j^x` on arbitrary samples of the strip, as `(with margin, without, margin)`.
pub fn good_x(z: &SmoothField, samples: &[Vec2], j: i64, h: f64) -> Result<(Vec<bool>, Vec<bool>, f64)> {
    let m = margin(z, samples, h);
    let (mut good, mut raw) = (Vec::with_capacity(samples.len()), Vec::with_capacity(samples.len()));
    for &p in samples {
        let (g, r) = cone_good(z, p, (j + 1) as f64, h, m)?;
        good.push(g);
        raw.push(r);
    }
    Ok((good, raw, m))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyPropertyReport {
    pub good_samples: usize,
    /// Pairs of distinct good samples lying on a common `Z`-curve and a common `W`-curve.
    pub shared_pairs: usize,
    /// Second intersections of the two curves through a good sample.
    pub intersections: usize,
    /// Second intersections that are themselves good.
    pub good_intersections: usize,
}

impl KeyPropertyReport {
    pub fn holds(&self) -> bool {
        self.shared_pairs == 0 && self.good_intersections == 0
    }
}

/// Searches for violations of the uniqueness property of good sets: two distinct good points on
/// the same `Z`- and `W`-curve. Both a pairwise membership search over good samples (tube radius
/// `tol`) and a test of every further intersection of the two curves through a good sample are run.
pub fn key_property(z: &SmoothField, w: &SmoothField, mask: &GoodSetMask, h: f64, tol: f64) -> Result<KeyPropertyReport> {
    let ws = w.swapped();
    let (j, k) = (mask.j as f64, mask.k as f64);
    let good: Vec<Vec2> = mask.good_points().collect();
    let mut zc = Vec::with_capacity(good.len());
    let mut wc = Vec::with_capacity(good.len());
    for &p in &good {
        zc.push(strip_crossing(z, p, j, j + 1.0, h)?);
        let c: Vec<Vec2> = strip_crossing(&ws, swap(p), k, k + 1.0, h)?.into_iter().map(swap).collect();
        wc.push(c);
    }
    let mut out = KeyPropertyReport { good_samples: good.len(), shared_pairs: 0, intersections: 0, good_intersections: 0 };
    for a in 0..good.len() {
        for &q in &good[a + 1..] {
            if polyline_distance(&zc[a], q) < tol && polyline_distance(&wc[a], q) < tol {
                out.shared_pairs += 1;
            }
        }
        for q in polyline_intersections(&zc[a], &wc[a]) {
            if (q - good[a]).norm() < 1e-6 || q[0] <= j || q[0] >= j + 1.0 || q[1] <= k || q[1] >= k + 1.0 {
                continue;
            }
            out.intersections += 1;
            let (gx, _) = cone_good(z, q, j + 1.0, h, mask.margin_x)?;
            let (gy, _) = cone_good(&ws, swap(q), k + 1.0, h, mask.margin_y)?;
            if gx && gy {
                out.good_intersections += 1;
            }
        }
    }
    Ok(out)
}
