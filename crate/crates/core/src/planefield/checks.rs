//! Checkers for the planar determinant and Kakeya-type inequalities.

use crate::error::{Error, Result};
use crate::report::Report;

use super::{det_field, pos_neg_parts, Axis, GridField, ScalarField};

/// Relative slack of the determinant-type checkers.
pub const SLACK: f64 = 0.05;

fn abs_scale(s: &GridField, t: &GridField) -> f64 {
    s.cells().iter().zip(t.cells()).map(|(a, b)| a.norm() * b.norm()).sum::<f64>() * s.grid.cell_area()
}

fn cell_index(s: &GridField, k: usize) -> (usize, usize) {
    (k % s.grid.nx, k / s.grid.nx)
}

/// Checks `S^x ≥ 0`, `T^y ≥ 0` and optionally `det(S, T) ≥ 0` cellwise, reporting the worst cell.
fn admissible(s: &GridField, t: &GridField, with_det: bool) -> Result<()> {
    if s.grid != t.grid {
        return Err(Error::GridMismatch);
    }
    let (sc, tc) = (s.cells(), t.cells());
    let scale_s = sc.iter().map(|v| v.amax()).fold(1.0, f64::max);
    let scale_t = tc.iter().map(|v| v.amax()).fold(1.0, f64::max);
    let worst = |vals: &mut dyn Iterator<Item = (usize, f64)>| {
        vals.fold((0usize, f64::INFINITY), |acc, (k, v)| if v < acc.1 { (k, v) } else { acc })
    };
    let (k, v) = worst(&mut sc.iter().enumerate().map(|(k, c)| (k, c[0])));
    if v < -1e-12 * scale_s {
        let (i, j) = cell_index(s, k);
        return Err(Error::Inadmissible { constraint: "S^x >= 0".into(), i, j, value: v });
    }
    let (k, v) = worst(&mut tc.iter().enumerate().map(|(k, c)| (k, c[1])));
    if v < -1e-12 * scale_t {
        let (i, j) = cell_index(s, k);
        return Err(Error::Inadmissible { constraint: "T^y >= 0".into(), i, j, value: v });
    }
    if with_det {
        let (k, v) = worst(&mut sc.iter().zip(&tc).enumerate().map(|(k, (a, b))| {
            let d = a[0] * b[1] - a[1] * b[0];
            (k, d + 1e-12 * a.norm() * b.norm())
        }));
        if v < 0.0 {
            let (i, j) = cell_index(s, k);
            return Err(Error::Inadmissible { constraint: "det(S,T) >= 0".into(), i, j, value: v });
        }
    }
    Ok(())
}

fn check_chi(s: &GridField, chi: &ScalarField) -> Result<()> {
    if chi.grid != s.grid {
        return Err(Error::GridMismatch);
    }
    if let Some(v) = chi.values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::InvalidParameter(format!("cutoff value {v} outside [0, 1]")));
    }
    Ok(())
}

/// Runs `check` on the 2×2-coarsened fields and records whether the verdict is refinement stable.
fn with_refinement(
    mut r: Report,
    s: &GridField,
    t: &GridField,
    chi: Option<&ScalarField>,
    check: impl Fn(&GridField, &GridField, Option<&ScalarField>) -> Result<Report>,
) -> Report {
    let coarse = match (s.coarsen(), t.coarsen()) {
        (Some(cs), Some(ct)) => {
            let cchi = chi.map(coarsen_scalar);
            check(&cs, &ct, cchi.as_ref()).ok()
        }
        _ => None,
    };
    match coarse {
        Some(c) => {
            r.set("coarse_pass", c.pass as u8 as f64);
            r.set("coarse_ratio", c.lhs / c.rhs);
            r.set("refinement_stable", (!c.pass || r.pass) as u8 as f64);
        }
        None => r.set("refinement_stable", f64::NAN),
    }
    r
}

/// Block average of a scalar density over 2×2 cells.
pub fn coarsen_scalar(f: &ScalarField) -> ScalarField {
    let c = f.grid.coarsened().expect("coarsenable grid");
    let mut values = Vec::with_capacity(c.n_cells());
    for jc in 0..c.ny {
        for ic in 0..c.nx {
            let (i, j) = (2 * ic, 2 * jc);
            values.push(0.25 * (f.at(i, j) + f.at(i + 1, j) + f.at(i, j + 1) + f.at(i + 1, j + 1)));
        }
    }
    ScalarField { grid: c, values }
}

fn det_simple_once(s: &GridField, t: &GridField) -> Result<Report> {
    admissible(s, t, true)?;
    let lhs = det_field(s, t)?.integral();
    let (ds, dt) = (s.div_tv()?, t.div_tv()?);
    let rhs = 0.25 * ds * dt;
    Ok(Report::new(lhs, rhs, SLACK, 1e-10 * abs_scale(s, t)).with("div_tv_s", ds).with("div_tv_t", dt))
}

/// `∫ det(S, T) ≤ ¼ ∫|div S| ∫|div T|` for admissible pairs.
pub fn check_det_simple(s: &GridField, t: &GridField) -> Result<Report> {
    let r = det_simple_once(s, t)?;
    Ok(with_refinement(r, s, t, None, |a, b, _| det_simple_once(a, b)))
}

fn kak_tris_once(s: &GridField, t: &GridField, chi: &ScalarField) -> Result<Report> {
    admissible(s, t, true)?;
    check_chi(s, chi)?;
    let det = det_field(s, t)?;
    let area = s.grid.cell_area();
    let lhs = chi.values.iter().zip(&det.values).map(|(c, d)| c * d.max(0.0).sqrt()).sum::<f64>() * area;
    let chi_l2 = chi.l2_norm();
    let (ds, dt) = (s.div_tv()?, t.div_tv()?);
    let rhs = 0.5 * chi_l2 * ds.sqrt() * dt.sqrt();
    let floor = 1e-10
        * chi.values.iter().zip(s.cells().iter().zip(t.cells())).map(|(c, (a, b))| c * (a.norm() * b.norm()).sqrt()).sum::<f64>()
        * area;
    Ok(Report::new(lhs, rhs, SLACK, floor).with("chi_l2", chi_l2).with("div_tv_s", ds).with("div_tv_t", dt))
}

/// `∫ χ √det⁺(S, T) ≤ ½ ‖χ‖₂ (∫|div S|)^½ (∫|div T|)^½` for admissible pairs.
pub fn check_kak_tris(s: &GridField, t: &GridField, chi: &ScalarField) -> Result<Report> {
    let r = kak_tris_once(s, t, chi)?;
    Ok(with_refinement(r, s, t, Some(chi), |a, b, c| kak_tris_once(a, b, c.expect("cutoff"))))
}

/// The ingredients of the affine inequality `lhs ≤ C·(a + b) + n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KakBisTerms {
    /// `∫ χ min{S^P, T^P}`.
    pub lhs: f64,
    /// `‖χ‖₂ [∫|S| + |div S|]^½ [∫|T| + |div T|]^½`.
    pub a: f64,
    /// `∫|div S| + ∫|div T|`.
    pub b: f64,
    /// `∫ S^N + T^N`.
    pub n: f64,
}

impl KakBisTerms {
    /// Smallest `C ≥ 0` for which the affine inequality holds.
    pub fn c_hat(&self) -> f64 {
        let excess = self.lhs - self.n;
        if excess <= 0.0 {
            0.0
        } else if self.a + self.b > 0.0 {
            excess / (self.a + self.b)
        } else {
            f64::INFINITY
        }
    }

    pub fn holds_with(&self, c: f64) -> bool {
        self.lhs <= c * (self.a + self.b) + self.n
    }
}

pub fn kak_bis_terms(s: &GridField, t: &GridField, chi: &ScalarField) -> Result<KakBisTerms> {
    admissible(s, t, false)?;
    check_chi(s, chi)?;
    let (sp, sn) = pos_neg_parts(s, Axis::X);
    let (tp, tn) = pos_neg_parts(t, Axis::Y);
    let m = super::min_measure(&sp, &tp)?;
    let area = s.grid.cell_area();
    let lhs = chi.values.iter().zip(&m.values).map(|(c, v)| c * v).sum::<f64>() * area;
    let (ds, dt) = (s.div_tv()?, t.div_tv()?);
    let a = chi.l2_norm() * (s.mass() + ds).sqrt() * (t.mass() + dt).sqrt();
    Ok(KakBisTerms { lhs, a, b: ds + dt, n: sn.integral() + tn.integral() })
}

/// Empirical constant of the sign-free inequality; passes iff it does not exceed `c_cap`.
pub fn check_kak_bis(s: &GridField, t: &GridField, chi: &ScalarField, c_cap: f64) -> Result<Report> {
    let k = kak_bis_terms(s, t, chi)?;
    Ok(Report::new(k.c_hat(), c_cap, 0.0, 0.0)
        .with("c_hat", k.c_hat())
        .with("min_integral", k.lhs)
        .with("product_term", k.a)
        .with("div_term", k.b)
        .with("negative_parts", k.n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec2;
    use crate::planefield::{from_curve, GridSpec};

    fn tubes(n: usize, eps: f64) -> (GridField, GridField) {
        let g = GridSpec::square(n, 0.0, 1.0).unwrap();
        let s = from_curve(&[Vec2::new(0.25, 0.5), Vec2::new(0.75, 0.5)], 1.0, eps, &g).unwrap();
        let t = from_curve(&[Vec2::new(0.5, 0.25), Vec2::new(0.5, 0.75)], 1.0, eps, &g).unwrap();
        (s, t)
    }

    fn ones(g: GridSpec) -> ScalarField {
        ScalarField { grid: g, values: vec![1.0; g.n_cells()] }
    }

    #[test]
    fn self_pair_passes() {
        let (s, _) = tubes(64, 0.1);
        let r = check_det_simple(&s, &s).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!(r.pass);
    }

    #[test]
    fn crossing_tubes_near_equality() {
        let (s, t) = tubes(128, 0.1);
        let r = check_det_simple(&s, &t).unwrap();
        let ratio = r.lhs / r.rhs;
        assert!((0.97..=1.0 + 1e-12).contains(&ratio), "ratio {ratio}");
        assert_eq!(r.get("refinement_stable"), Some(1.0));
    }

    #[test]
    fn negative_component_named() {
        let (s, t) = tubes(64, 0.1);
        let err = check_det_simple(&s.scale(-1.0), &t).unwrap_err();
        match err {
            Error::Inadmissible { constraint, .. } => assert_eq!(constraint, "S^x >= 0"),
            e => panic!("{e:?}"),
        }
        assert!(matches!(check_det_simple(&t, &s), Err(Error::Inadmissible { .. })));
    }

    #[test]
    fn kak_tris_zero_cutoff_and_box() {
        let (s, t) = tubes(64, 0.1);
        let g = s.grid;
        let z = ScalarField::zeros(g);
        assert_eq!(check_kak_tris(&s, &t, &z).unwrap().lhs, 0.0);
        assert!(check_kak_tris(&s, &t, &ones(g)).unwrap().pass);
        let bad = ScalarField { grid: g, values: vec![2.0; g.n_cells()] };
        assert!(check_kak_tris(&s, &t, &bad).is_err());
    }

    #[test]
    fn kak_tris_overlap_indicator_near_equality() {
        // tube edges on cell faces so the indicator is exact
        let eps = 0.1;
        let (s, t) = tubes(160, eps);
        let chi = ScalarField::from_fn(s.grid, |p| ((p[0] - 0.5).abs() < eps / 2.0 && (p[1] - 0.5).abs() < eps / 2.0) as u8 as f64);
        let r = check_kak_tris(&s, &t, &chi).unwrap();
        assert!((r.lhs / r.rhs - 1.0).abs() < 0.05, "{r:?}");
    }

    #[test]
    fn kak_bis_zero_positive_part() {
        let (_, t) = tubes(64, 0.1);
        // T points along y, so its x-cone positive part vanishes when used as S
        let g = t.grid;
        let k = kak_bis_terms(&t, &t, &ones(g)).unwrap();
        assert_eq!(k.lhs, 0.0);
        assert_eq!(k.c_hat(), 0.0);
    }

    #[test]
    fn kak_bis_matches_bisection() {
        let (s, t) = tubes(64, 0.1);
        let k = kak_bis_terms(&s, &t, &ones(s.grid)).unwrap();
        let (mut lo, mut hi) = (0.0, 1.0);
        while !k.holds_with(hi) {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if k.holds_with(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        assert!((hi - k.c_hat()).abs() <= 1e-12 * hi.max(1e-300));
    }
}
