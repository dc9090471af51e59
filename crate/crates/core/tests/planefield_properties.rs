use proptest::prelude::*;
use varilab::planefield::{check_det_simple, det_integral, min_measure, pos_neg_parts, Axis, GridField, GridSpec, ScalarField};

/// Random compactly supported field: interior faces random, boundary faces zero.
fn field(n: usize) -> impl Strategy<Value = GridField> {
    let g = GridSpec::new(n, n + 2, 0.1, 0.07, [-0.3, 0.2]).unwrap();
    let nfx = (g.nx + 1) * g.ny;
    let nfy = g.nx * (g.ny + 1);
    (proptest::collection::vec(-3.0..3.0f64, nfx), proptest::collection::vec(-3.0..3.0f64, nfy)).prop_map(move |(mut fx, mut fy)| {
        for j in 0..g.ny {
            fx[j * (g.nx + 1)] = 0.0;
            fx[j * (g.nx + 1) + g.nx] = 0.0;
        }
        for i in 0..g.nx {
            fy[i] = 0.0;
            fy[g.ny * g.nx + i] = 0.0;
        }
        GridField { grid: g, fx, fy }
    })
}

fn scalar(n: usize) -> impl Strategy<Value = ScalarField> {
    let g = GridSpec::new(n, n + 2, 0.1, 0.07, [-0.3, 0.2]).unwrap();
    proptest::collection::vec(0.0..4.0f64, g.n_cells()).prop_map(move |values| ScalarField { grid: g, values })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn divergence_theorem_is_exact(s in field(9)) {
        let d = s.divergence().unwrap();
        let mass = s.fx.iter().chain(&s.fy).map(|v| v.abs()).sum::<f64>() * s.grid.hx.max(s.grid.hy);
        prop_assert!(d.integral().abs() <= 1e-12 * mass.max(1.0));
    }

    #[test]
    fn det_integral_is_antisymmetric(s in field(7), t in field(7)) {
        prop_assert_eq!(det_integral(&s, &t).unwrap(), -det_integral(&t, &s).unwrap());
        prop_assert_eq!(det_integral(&s, &s).unwrap(), 0.0);
    }

    #[test]
    fn pos_neg_parts_reconstruct(s in field(8)) {
        for axis in [Axis::X, Axis::Y] {
            let (p, n) = pos_neg_parts(&s, axis);
            for (k, c) in s.cells().iter().enumerate() {
                let d = match axis { Axis::X => c[0] - c[1].abs(), Axis::Y => c[1] - c[0].abs() };
                prop_assert_eq!(p.values[k] - n.values[k], d);
                prop_assert!(p.values[k] >= 0.0 && n.values[k] >= 0.0 && p.values[k] * n.values[k] == 0.0);
            }
        }
    }

    #[test]
    fn min_measure_lattice_laws(mu in scalar(6), nu in scalar(6)) {
        let m = min_measure(&mu, &nu).unwrap();
        prop_assert_eq!(&min_measure(&mu, &mu).unwrap(), &mu);
        prop_assert_eq!(&min_measure(&nu, &mu).unwrap(), &m);
        for k in 0..m.values.len() {
            prop_assert!(m.values[k] <= mu.values[k] && m.values[k] <= nu.values[k]);
        }
    }

    #[test]
    fn det_check_is_scale_invariant(s in field(8), t in field(8), a in 0.1..10.0f64, b in 0.1..10.0f64) {
        let r = check_det_simple(&s, &t);
        let q = check_det_simple(&s.scale(a), &t.scale(b));
        match (r, q) {
            (Ok(r), Ok(q)) => {
                prop_assert_eq!(r.pass, q.pass);
                prop_assert!((q.lhs - a * b * r.lhs).abs() <= 1e-12 * (a * b * r.lhs.abs()).max(1e-300));
            }
            (Err(_), Err(_)) => {}
            (r, q) => prop_assert!(false, "{r:?} vs {q:?}"),
        }
    }
}
