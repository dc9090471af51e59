mod common;

use common::*;

#[test]
fn fixture_matches_oracle_at_argmax() {
    let (l, a, b, n) = continuum_kak_bis(&corpus_pair(ORACLE_ARGMAX), ORACLE_LATTICE);
    let c = c_hat(l, a, b, n);
    assert!((c - ORACLE_MAX_C_HAT).abs() <= 1e-9 * ORACLE_MAX_C_HAT, "{c} vs {ORACLE_MAX_C_HAT}");
}

/// Recomputes the fixture over the whole corpus (about 20 s in release).
#[test]
#[ignore]
fn regenerate_fixture() {
    let mut best = (0.0, 0);
    for i in 0..2 * CORPUS_SEEDS {
        let (l, a, b, n) = continuum_kak_bis(&corpus_pair(i), ORACLE_LATTICE);
        let c = c_hat(l, a, b, n);
        if c > best.0 {
            best = (c, i);
        }
    }
    println!("ORACLE_MAX_C_HAT = {:?}, ORACLE_ARGMAX = {}", best.0, best.1);
    assert_eq!(best.1, ORACLE_ARGMAX);
    assert!((best.0 - ORACLE_MAX_C_HAT).abs() <= 1e-9 * ORACLE_MAX_C_HAT);
}
