use proptest::prelude::*;
use rand::SeedableRng;
use varilab::varifold::{consistent_integrand, mesh, ms_ratio, pairing_with_scale, PolyField, TriVarifold};
use varilab::{Integrand, Mat3, Vec3};

fn integrand() -> impl Strategy<Value = Integrand> {
    prop_oneof![
        Just(Integrand::area()),
        (1.25..8.0f64).prop_map(|p| Integrand::lp(p).unwrap()),
        (0.0..0.3f64).prop_map(|e| Integrand::perturbed(Integrand::lp(3.0).unwrap(), e).unwrap()),
    ]
}

/// Jittered icosphere or torus with random multiplicities.
fn varifold() -> impl Strategy<Value = TriVarifold> {
    (any::<bool>(), any::<u64>()).prop_map(|(sphere, seed)| {
        use rand::Rng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let m = if sphere { mesh::icosphere(1) } else { mesh::torus(2.0, 0.7, 8, 6).unwrap() };
        let vertices = m.vertices.iter().map(|v| v + Vec3::new(rng.gen_range(-0.05..0.05), rng.gen_range(-0.05..0.05), rng.gen_range(-0.05..0.05))).collect();
        let theta = (0..m.triangles.len()).map(|_| rng.gen_range(0.5..2.0)).collect();
        TriVarifold::new(vertices, m.triangles, theta).unwrap()
    })
}

fn invertible() -> impl Strategy<Value = Mat3> {
    proptest::collection::vec(-0.5..0.5f64, 9).prop_map(|e| Mat3::identity() * 1.2 + Mat3::from_row_slice(&e))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn edge_measure_matches_quadrature(v in varifold(), f in integrand(), seed in any::<u64>()) {
        let em = v.first_variation(&f).unwrap();
        let x = PolyField::random_cubic(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let (q, scale) = pairing_with_scale(&v, &f, &x).unwrap();
        prop_assert!((q - em.pair(&x)).abs() <= 1e-9 * scale.max(q.abs()), "{} vs {}", q, em.pair(&x));
    }

    #[test]
    fn constant_fields_pair_to_zero(v in varifold(), f in integrand()) {
        let em = v.first_variation(&f).unwrap();
        prop_assert!(em.total().norm() <= 1e-10 * em.total_variation().max(1.0));
    }

    #[test]
    fn transform_preserves_energy(v in varifold(), f in integrand(), l in invertible()) {
        prop_assume!(l.determinant().abs() > 0.2);
        let g = consistent_integrand(&f, &l).unwrap();
        let e0 = v.energy(&f);
        let e1 = v.transform(&l).unwrap().energy(&g);
        prop_assert!((e0 - e1).abs() <= 1e-12 * e0, "{} vs {}", e0, e1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn ms_ratio_is_dilation_invariant(v in varifold(), f in integrand(), log_lambda in -3.0..3.0f64) {
        let lambda = 10f64.powf(log_lambda);
        let a = ms_ratio(&v, &f).unwrap().get("c_hat").unwrap();
        let b = ms_ratio(&v.dilate(lambda).unwrap(), &f).unwrap().get("c_hat").unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * a, "{} vs {}", a, b);
    }
}
