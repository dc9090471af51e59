//! Seeded transverse-flow cases, their rasterization, and the per-case proof-machinery suite.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::planefield::{GridField, GridSpec};
use crate::report::Report;

use super::curve::{integrate_curve, Stop};
use super::factor::{factorize, FactorizeOptions, FlowDecomposition};
use super::field::{swap, transverse_flow_pair, BumpField, PairParams, SmoothField, TransverseFlowPair};
use super::goodset::{good_set, key_property, KeyPropertyReport};
use super::partition::{build_partition, piecewise_approx, Window};
use super::split::{check_complement, check_complement_bis, check_g_est, f_min_split, flow_box, sample_strip, with_refinement};
use super::stream::{stream_function, stream_value};

/// Samples the compact bump part of a field at face midpoints.
pub fn rasterize(f: &BumpField, grid: &GridSpec) -> Result<GridField> {
    let bumps = f.without_background();
    let out = GridField::from_fn(*grid, |p| bumps.eval(p));
    let r = bumps.support_radius();
    let lo = Vec2::new(grid.origin[0], grid.origin[1]);
    let hi = lo + Vec2::new(grid.nx as f64 * grid.hx, grid.ny as f64 * grid.hy);
    if -r <= lo[0] || -r <= lo[1] || r >= hi[0] || r >= hi[1] {
        return Err(Error::GridTooSmall(format!("support radius {r} leaves the grid")));
    }
    Ok(out)
}

/// Rasterized `(S, T)` of a seeded pair on `[−L, L]²` with `n × n` cells.
pub fn raster_pair(pair: &TransverseFlowPair, n: usize, half_width: f64) -> Result<(GridField, GridField)> {
    let g = GridSpec::square(n, -half_width, half_width)?;
    Ok((rasterize(&pair.s, &g)?, rasterize(&pair.t, &g)?))
}

pub fn seeded_pair(seed: u64, params: &PairParams) -> Result<TransverseFlowPair> {
    transverse_flow_pair(&mut ChaCha8Rng::seed_from_u64(seed), params)
}

/// A seeded pair with both factorizations. `t` lives in swapped coordinates, so its strips
/// `[k, k+1] × R` are the horizontal strips of T.
#[derive(Debug, Clone)]
pub struct FlowCase {
    pub seed: u64,
    pub pair: TransverseFlowPair,
    pub s: FlowDecomposition,
    pub t: FlowDecomposition,
}

pub fn flow_case(seed: u64, params: &PairParams, opts: &FactorizeOptions) -> Result<FlowCase> {
    let pair = seeded_pair(seed, params)?;
    let s = factorize(&pair.s.to_smooth(), opts)?;
    let t = factorize(&pair.t.to_smooth().swapped(), opts)?;
    Ok(FlowCase { seed, pair, s, t })
}

impl FlowCase {
    /// `W` in the original coordinates.
    pub fn w(&self) -> SmoothField {
        self.t.z.swapped()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteOptions {
    pub taus: Vec<f64>,
    pub div_samples: usize,
    pub stream_cells: usize,
    pub good_n: usize,
    pub strip_per_unit: usize,
    /// Curves per unit of entry height and chord length for the complement check.
    pub box_per_unit: usize,
    pub box_step: f64,
    pub lambda: f64,
    pub g_est_per_unit: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            taus: vec![0.5, 0.25, 0.125],
            div_samples: 20,
            stream_cells: 12,
            good_n: 16,
            strip_per_unit: 12,
            box_per_unit: 96,
            box_step: 1.0 / 512.0,
            lambda: 3.0,
            g_est_per_unit: 48,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub seed: u64,
    pub max_rel_div_z: f64,
    pub max_rel_reconstruction: f64,
    pub min_alpha: f64,
    /// Stream function path gap over its oscillation.
    pub stream_residual: f64,
    /// Oscillation of `f` along a traced curve over the oscillation of `f`.
    pub stream_level: f64,
    /// Step-4 jump bound at each τ.
    pub lemma: Vec<Report>,
    pub lemma_converging: bool,
    pub key: Vec<KeyPropertyReport>,
    /// Largest spread of `α_f` between points of one crossing.
    pub alpha_f_spread: f64,
    pub complement: Vec<Report>,
    pub complement_bis: Vec<Report>,
    pub g_est: Vec<Report>,
}

impl SuiteResult {
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.max_rel_div_z < 1e-5) {
            out.push(format!("div Z {:e}", self.max_rel_div_z));
        }
        if !(self.max_rel_reconstruction < 1e-5) || self.min_alpha < 0.0 {
            out.push("α Z reconstruction".into());
        }
        if !(self.stream_residual <= 1e-6 && self.stream_level < 1e-6) {
            out.push(format!("stream function {:e} {:e}", self.stream_residual, self.stream_level));
        }
        if !self.lemma.iter().all(|r| r.pass) || !self.lemma_converging {
            out.push("jump bound".into());
        }
        if !self.key.iter().all(|k| k.holds()) {
            out.push("key property".into());
        }
        if !(self.alpha_f_spread < 1e-6) {
            out.push(format!("α_f spread {:e}", self.alpha_f_spread));
        }
        for (name, rs) in [("complement", &self.complement), ("complement-bis", &self.complement_bis), ("g-est", &self.g_est)] {
            if !rs.iter().all(|r| r.pass) {
                out.push(name.into());
            }
        }
        out
    }
}

/// Runs every flow-decomposition check of one case on the strips `{−1, 0}` that cover the bumps.
pub fn run_suite(case: &FlowCase, o: &SuiteOptions) -> Result<SuiteResult> {
    let (ds, dt) = (&case.s, &case.t);
    let r = ds.div_support_radius().max(dt.div_support_radius());
    if r > 1.0 {
        return Err(Error::InvalidParameter(format!("support radius {r} exceeds the two unit strips")));
    }
    let strips = [-1i64, 0];

    let mut samples = SmoothField::lattice(r, o.div_samples);
    samples.extend(SmoothField::lattice(r + 0.3, o.div_samples / 2));
    let (cs, ct) = (ds.check(&samples), dt.check(&samples));

    let g = GridSpec::square(o.stream_cells, -r - 0.1, r + 0.1)?;
    let sf = stream_function(&ds.z, &g)?;
    let curve = integrate_curve(&ds.trace, Vec2::new(-r, 0.1 * r), Stop::XLevel(r), ds.step_size)?;
    let vals: Vec<f64> = curve.iter().step_by((curve.len() / 6).max(1)).map(|&p| stream_value(&ds.z, p)).collect();
    let level = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - vals.iter().cloned().fold(f64::INFINITY, f64::min);

    let mut lemma = Vec::new();
    for &tau in &o.taus {
        let part = build_partition(&ds.trace, tau, &Window::square(r + 0.25), tau / 16.0)?;
        lemma.push(piecewise_approx(ds, &part, 100)?.report);
    }
    let lhs: Vec<f64> = lemma.iter().map(|r| r.lhs).collect();
    // halving τ refines the partition, so the jump sum can only grow; bounded and nondecreasing
    let floor = 1e-6 * lemma.last().map_or(0.0, |r| r.rhs);
    let lemma_converging = lhs.windows(2).all(|w| w[1] >= w[0] - floor);

    let mut key = Vec::new();
    let mut g_est = Vec::new();
    for &j in &strips {
        for &k in &strips {
            let mask = good_set(&ds.trace, &dt.trace.swapped(), j, k, o.good_n, ds.step_size)?;
            key.push(key_property(&ds.trace, &dt.trace.swapped(), &mask, ds.step_size, 1e-6)?);
            g_est.push(check_g_est(ds, dt, &mask, o.g_est_per_unit)?);
        }
    }

    let mut alpha_f_spread: f64 = 0.0;
    for (d, j) in [(ds, 0i64), (dt, -1)] {
        let split = f_min_split(d, j);
        for y in [-0.5, -0.1, 0.3] {
            let nodes = d.crossing(Vec2::new(j as f64 + 0.5, y), j as f64, j as f64 + 1.0)?;
            let vals: Vec<f64> = [0, nodes.len() / 3, nodes.len() - 1].iter().map(|&i| split.alpha_f(nodes[i].p)).collect::<Result<_>>()?;
            let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            alpha_f_spread = alpha_f_spread.max(hi - lo);
        }
    }

    let mut complement = Vec::new();
    let mut complement_bis = Vec::new();
    for d in [ds, dt] {
        let y = d.alpha_y_extent();
        let ny = |per: usize| ((2.0 * y * per as f64).ceil() as usize).max(2);
        for &j in &strips {
            let fine = sample_strip(d, j, o.strip_per_unit, ny(o.strip_per_unit), None)?;
            let coarse = sample_strip(d, j, o.strip_per_unit / 2, ny(o.strip_per_unit / 2), None)?;
            let nb = ny(o.box_per_unit);
            let fine_box = flow_box(d, j, nb, o.box_step, None)?;
            let coarse_box = flow_box(d, j, nb / 2, 2.0 * o.box_step, None)?;
            complement.push(with_refinement(check_complement(&fine_box), &check_complement(&coarse_box)));
            complement_bis.push(with_refinement(check_complement_bis(&fine, o.lambda)?, &check_complement_bis(&coarse, o.lambda)?));
        }
    }

    Ok(SuiteResult {
        seed: case.seed,
        max_rel_div_z: cs.max_rel_div_z.max(ct.max_rel_div_z),
        max_rel_reconstruction: cs.max_rel_reconstruction.max(ct.max_rel_reconstruction),
        min_alpha: cs.min_alpha.min(ct.min_alpha),
        stream_residual: sf.residual / sf.oscillation,
        stream_level: level / sf.oscillation,
        lemma,
        lemma_converging,
        key,
        alpha_f_spread,
        complement,
        complement_bis,
        g_est,
    })
}

/// `T` at `p` in the original coordinates from its swapped decomposition.
pub fn t_field(case: &FlowCase, p: Vec2) -> Vec2 {
    swap(case.t.s(swap(p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planefield::check_det_simple;

    #[test]
    fn rasterized_pairs_are_admissible() {
        for seed in 0..5 {
            let pair = seeded_pair(seed, &PairParams::admissible()).unwrap();
            let (s, t) = raster_pair(&pair, 64, 1.2).unwrap();
            let r = check_det_simple(&s, &t).unwrap();
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn small_grid_rejected() {
        let pair = seeded_pair(1, &PairParams::admissible()).unwrap();
        assert!(matches!(raster_pair(&pair, 32, 0.5), Err(Error::GridTooSmall(_))));
    }

    #[test]
    fn one_case_suite() {
        let case = flow_case(3, &PairParams::admissible(), &FactorizeOptions::default()).unwrap();
        let r = run_suite(&case, &SuiteOptions::default()).unwrap();
        assert!(r.failures().is_empty(), "{:?}\n{r:#?}", r.failures());
        let tv = t_field(&case, Vec2::new(0.1, 0.2));
        assert!(tv[1] > 0.0);
    }
}
