use proptest::prelude::*;
use varilab::normalize::{check_geo_condition, compute_normalization};
use varilab::{Integrand, Mat3, Vec3};

fn shear() -> impl Strategy<Value = Mat3> {
    (0..3usize, 1..3usize, -1.5..1.5f64).prop_map(|(a, d, s)| {
        let mut m = Mat3::identity();
        m[(a, (a + d) % 3)] = s;
        m
    })
}

fn base() -> impl Strategy<Value = Integrand> {
    prop_oneof![Just(Integrand::area()), (1.5..6.0f64).prop_map(|p| Integrand::lp(p).unwrap())]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ascent_is_monotone_and_touches_every_face(b in base(), l in shear()) {
        let f = Integrand::pushforward(b, &l).unwrap();
        let n = compute_normalization(&f, 10_000, 1e-14).unwrap();
        prop_assert!(n.det_monotone());
        prop_assert!((n.l.determinant() - 1.0).abs() < 1e-10);
        let g = n.normalized_integrand(&f).unwrap();
        for i in 0..3 {
            for s in [1.0, -1.0] {
                let v = g.eval(&Vec3::ith(i, s));
                prop_assert!((1.0 - 1e-6..=1.0 + 1e-8).contains(&v), "G(±e_{}) = {}", i, v);
            }
        }
        prop_assert!(check_geo_condition(&g, 2048).pass);
    }

    #[test]
    fn geo_margin_invariant_under_axis_rotation(p in 1.5..6.0f64, angle in -3.0..3.0f64, axis in 0..3usize) {
        let f = Integrand::lp(p).unwrap();
        let rot = nalgebra::Rotation3::new(Vec3::ith(axis, angle)).into_inner();
        let a = compute_normalization(&f, 10_000, 1e-14).unwrap();
        let b = compute_normalization(&Integrand::pushforward(f, &rot).unwrap(), 10_000, 1e-14).unwrap();
        prop_assert!((a.geo_margin - b.geo_margin).abs() < 1e-8, "{} vs {}", a.geo_margin, b.geo_margin);
    }
}
