use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use varilab::flowdecomp::{factorize, raster_pair, seeded_pair, FactorizeOptions, PairParams};
use varilab::integrand::gamma_estimate;
use varilab::normalize::{compute_normalization, seeded_shear};
use varilab::planefield::{check_det_simple, crossing_tubes, kak_bis_terms, GridSpec, ScalarField};
use varilab::varifold::{mesh, ms_pipeline, ms_ratio, planar_fields};
use varilab::Integrand;

fn varifold(c: &mut Criterion) {
    let sphere = mesh::icosphere(4);
    let f = Integrand::lp(3.0).unwrap();
    c.bench_function("first_variation icosphere(4)", |b| b.iter(|| black_box(&sphere).first_variation(&f).unwrap()));
    c.bench_function("ms_ratio icosphere(4)", |b| b.iter(|| ms_ratio(black_box(&sphere), &f).unwrap()));
    let pipe = ms_pipeline(&sphere, &f).unwrap();
    c.bench_function("project_to_plane 256", |b| b.iter(|| planar_fields(black_box(&pipe), 256).unwrap()));
}

fn planefield(c: &mut Criterion) {
    let (s, t) = crossing_tubes(&GridSpec::square(512, 0.0, 1.0).unwrap(), 0.02, 0.0).unwrap();
    c.bench_function("check_det_simple tubes 512", |b| b.iter(|| check_det_simple(black_box(&s), &t).unwrap()));
    let (s, t) = raster_pair(&seeded_pair(0, &PairParams::sign_violating()).unwrap(), 128, 1.2).unwrap();
    let chi = ScalarField::from_fn(s.grid, |p| (1.0 - p.norm_squared()).max(0.0));
    c.bench_function("kak_bis_terms 128", |b| b.iter(|| kak_bis_terms(black_box(&s), &t, &chi).unwrap()));
}

fn integrand(c: &mut Criterion) {
    c.bench_function("gamma_estimate 400", |b| b.iter(|| gamma_estimate(black_box(400)).unwrap()));
    let f = Integrand::pushforward(Integrand::area(), &seeded_shear(1)).unwrap();
    c.bench_function("compute_normalization sheared", |b| b.iter(|| compute_normalization(black_box(&f), 10_000, 1e-14).unwrap()));
}

fn flowdecomp(c: &mut Criterion) {
    let pair = seeded_pair(0, &PairParams::admissible()).unwrap();
    let z = pair.s.to_smooth();
    let opts = FactorizeOptions::default();
    let mut g = c.benchmark_group("flowdecomp");
    g.sample_size(10);
    g.bench_function("factorize", |b| b.iter(|| factorize(black_box(&z), &opts).unwrap()));
    g.finish();
}

criterion_group!(benches, varifold, planefield, integrand, flowdecomp);
criterion_main!(benches);
