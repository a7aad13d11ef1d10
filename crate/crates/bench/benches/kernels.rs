use criterion::{black_box, criterion_group, criterion_main, Criterion};
use cylhom::complex::{differential_matrix, homology, random_consistent_dataset, verify_d_squared};
use cylhom::evaluation::{pole_preimages, EvMapSpec, PoleChoice};
use cylhom::gluing::{make_cutoffs, solve_neck, NeckField, NeckParams};
use cylhom::orientation::{comparison_sign, random_comparison_instance};
use cylhom::spectral::{numeric_spectrum, OperatorKind};

fn spectral(c: &mut Criterion) {
    c.bench_function("numeric_spectrum grid 1024", |b| {
        b.iter(|| numeric_spectrum(black_box(OperatorKind::NegHyperbolic(0.3)), 1024, 8).unwrap())
    });
}

fn chain(c: &mut Criterion) {
    let complex = differential_matrix(&random_consistent_dataset(7, 6, 6), None);
    c.bench_function("verify_d_squared", |b| b.iter(|| verify_d_squared(black_box(&complex))));
    c.bench_function("homology", |b| b.iter(|| homology(black_box(&complex)).unwrap()));
}

fn neck(c: &mut Criterion) {
    let neck = make_cutoffs(&NeckParams::default()).unwrap();
    let table = neck.params.table().unwrap();
    let eta_p = NeckField::holomorphic_end(&neck, &table, &[(1, 1.0), (3, 0.5)], 120.0).unwrap();
    let eta_m = NeckField::holomorphic_end(&neck, &table, &[(-1, 1.0), (-2, -0.6)], 0.0).unwrap();
    c.bench_function("solve_neck s_grid 8192", |b| b.iter(|| solve_neck(&eta_p, &eta_m, &neck, 2).unwrap()));
}

fn evaluation(c: &mut Criterion) {
    let spec = EvMapSpec::parse(cylhom::bundled::EV3).unwrap();
    c.bench_function("pole_preimages torus", |b| {
        b.iter(|| pole_preimages(black_box(&spec), PoleChoice::FirstCoordinate).unwrap())
    });
}

fn signs(c: &mut Criterion) {
    let (model, bases) = random_comparison_instance(11, 5);
    let u = model.preimage_basis();
    c.bench_function("comparison_sign dim 5", |b| b.iter(|| comparison_sign(&model, black_box(&bases), Some(&u)).unwrap()));
}

criterion_group!(benches, spectral, chain, neck, evaluation, signs);
criterion_main!(benches);
