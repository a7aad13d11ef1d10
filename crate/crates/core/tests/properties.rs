use cylhom::complex::{
    differential_matrix, direct_limit, homology, random_consistent_dataset, verify_d_squared, GradedMap,
    GradedRationalComplex,
};
use cylhom::evaluation::{
    flow_normalize, path_intersections, pole_preimages, s0_eval, EndExpansion, EvMapSpec, PoleChoice, ScanCount,
};
use cylhom::gluing::{make_cutoffs, obstruction_pairing, sigma, solve_neck, NeckField, NeckParams};
use cylhom::index::{
    automatic_transversality, classify_orbit, cover_index, fredholm_index, orbit_table, CurveTopology, OrbitType,
    Parity, ReebOrbit,
};
use cylhom::orientation::{
    comparison_sign, ds0_sign, glued_sign, random_comparison_instance, radial_reorder_sign, wedge_sign, ComparisonBases,
    Direction, Pole,
};
use cylhom::rational::{q, qr, QMat, Q};
use cylhom::spectral::{closed_form_spectrum, winding_number, OperatorKind};
use proptest::prelude::*;
use std::collections::BTreeMap;

fn kind_strategy() -> impl Strategy<Value = OperatorKind> {
    (0usize..3, 0.01f64..0.9).prop_map(|(k, e)| match k {
        0 => OperatorKind::Elliptic(e),
        1 => OperatorKind::PosHyperbolic(e),
        _ => OperatorKind::NegHyperbolic(e),
    })
}

// ---- spectral ----

proptest! {
    #[test]
    fn eigenvalue_signs_follow_indices(kind in kind_strategy()) {
        let t = closed_form_spectrum(kind, 8).unwrap();
        for e in &t.entries {
            prop_assert_eq!(e.eigenvalue.signum() as i64, e.index.signum());
        }
        prop_assert!(t.ordering_violations().is_empty());
        if !matches!(kind, OperatorKind::Elliptic(_)) {
            for i in 1..=8 {
                prop_assert_eq!(t.eigenvalue(-i).unwrap(), -t.eigenvalue(i).unwrap());
            }
        }
    }

    #[test]
    fn pos_hyperbolic_winding_profile(eps in 0.01f64..0.9) {
        let t = closed_form_spectrum(OperatorKind::PosHyperbolic(eps), 9).unwrap();
        let wind = |i: i64| winding_number(&t.entry(i).unwrap().eigenfunction.samples(512).unwrap()).unwrap();
        prop_assert_eq!(wind(1), 0);
        prop_assert_eq!(wind(-1), 0);
        for n in 1..=4i64 {
            for sign in [1i64, -1] {
                prop_assert_eq!(wind(sign * 2 * n), sign * n);
                prop_assert_eq!(wind(sign * (2 * n + 1)), sign * n);
            }
        }
    }
}

// ---- index ----

fn orbit(id: &str, mult: u32, ty: OrbitType, cz_simple: i64) -> ReebOrbit {
    ReebOrbit { id: id.into(), simple_id: id.into(), multiplicity: mult, simple_type: ty, action: q(1), cz_simple }
}

fn typed_cz() -> impl Strategy<Value = (OrbitType, i64)> {
    (any::<bool>(), -6i64..=6).prop_map(|(pos, n)| {
        if pos {
            (OrbitType::PosHyperbolic, 2 * n)
        } else {
            (OrbitType::NegHyperbolic, 2 * n + 1)
        }
    })
}

proptest! {
    #[test]
    fn cover_index_is_linear_in_branching(a in -1000i64..1000, k in 1u32..50, b1 in 0u32..500, b2 in 0u32..500) {
        prop_assert_eq!(cover_index(a, k, b1 + b2), cover_index(a, k, b1) + b2 as i64);
    }

    #[test]
    fn unbranched_cylinder_cover_scales_index(k in 1u32..10, p in typed_cz(), m in typed_cz(), c1 in -3i64..=3) {
        let simple = orbit_table([orbit("p", 1, p.0, p.1), orbit("m", 1, m.0, m.1)]);
        let covered = orbit_table([orbit("p", k, p.0, p.1), orbit("m", k, m.0, m.1)]);
        let base = fredholm_index(&CurveTopology { c1, ..CurveTopology::cylinder("p", "m") }, &simple).unwrap();
        let cover = fredholm_index(&CurveTopology { c1: k as i64 * c1, ..CurveTopology::cylinder("p", "m") }, &covered).unwrap();
        prop_assert_eq!(cover, k as i64 * base);
    }

    #[test]
    fn parity_matches_cz(o in typed_cz(), mult in 1u32..8) {
        let orb = orbit("x", mult, o.0, o.1);
        let class = classify_orbit(&orb).unwrap();
        prop_assert_eq!(class.parity == Parity::Even, orb.cz() % 2 == 0);
    }

    #[test]
    fn index_one_cylinders_with_odd_ends_are_transverse(p in typed_cz(), m in typed_cz()) {
        let gamma0 = [p.1, m.1].iter().filter(|c| *c % 2 == 0).count() as u32;
        if gamma0 == 0 {
            prop_assert!(automatic_transversality(1, 0, gamma0));
        }
        prop_assert!(automatic_transversality(2, 0, gamma0));
    }
}

// ---- complex ----

fn random_complex(seed: u64) -> GradedRationalComplex {
    differential_matrix(&random_consistent_dataset(seed, 4, 3), None)
}

fn naive_d_squared_zero(c: &GradedRationalComplex) -> bool {
    c.gradings().iter().all(|&g| c.block(g - 1).mul(&c.block(g)).is_zero())
}

fn permuted(c: &GradedRationalComplex, g: i64, perm: &[usize]) -> GradedRationalComplex {
    let mut gens = c.generators.clone();
    let old = c.gens(g).to_vec();
    gens.insert(g, perm.iter().map(|&i| old[i].clone()).collect());
    let mut diff = c.differential.clone();
    let col = c.block(g);
    diff.insert(g, QMat::from_cols(col.rows(), &perm.iter().map(|&i| col.col(i)).collect::<Vec<_>>()));
    let up = c.block(g + 1);
    let rows: Vec<Vec<Q>> = perm.iter().map(|&i| (0..up.cols()).map(|j| up[(i, j)].clone()).collect()).collect();
    diff.insert(g + 1, if rows.is_empty() { QMat::zeros(0, up.cols()) } else { QMat::from_rows(rows) });
    GradedRationalComplex::new(gens, diff).unwrap()
}

fn unit_lower(n: usize, entries: &[i64]) -> QMat {
    let mut m = QMat::identity(n);
    let mut it = entries.iter().cycle();
    for i in 0..n {
        for j in 0..i {
            m[(i, j)] = q(*it.next().unwrap());
        }
    }
    m
}

fn changed_basis(c: &GradedRationalComplex, entries: &[i64]) -> GradedRationalComplex {
    let p: BTreeMap<i64, QMat> = c.gradings().into_iter().map(|g| (g, unit_lower(c.dim(g), entries))).collect();
    let get = |g: i64| p.get(&g).cloned().unwrap_or_else(|| QMat::identity(0));
    let diff = c
        .gradings()
        .into_iter()
        .map(|g| (g, get(g - 1).mul(&c.block(g)).mul(&get(g).inverse().unwrap())))
        .collect();
    GradedRationalComplex::new(c.generators.clone(), diff).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_datasets_square_to_zero(seed in any::<u64>()) {
        let c = random_complex(seed);
        prop_assert!(verify_d_squared(&c).is_ok());
        prop_assert!(naive_d_squared_zero(&c));
    }

    #[test]
    fn homology_ignores_generator_order(seed in any::<u64>(), g in 0i64..=4, rot in 0usize..3) {
        let c = random_complex(seed);
        let n = c.dim(g);
        let perm: Vec<usize> = (0..n).map(|i| (i + rot) % n.max(1)).rev().collect();
        let p = permuted(&c, g, &perm);
        prop_assert!(verify_d_squared(&p).is_ok());
        prop_assert_eq!(homology(&p).unwrap(), homology(&c).unwrap());
    }

    #[test]
    fn homology_ignores_graded_basis_change(seed in any::<u64>(), entries in prop::collection::vec(-3i64..=3, 1..6)) {
        let c = random_complex(seed);
        let b = changed_basis(&c, &entries);
        prop_assert!(verify_d_squared(&b).is_ok());
        prop_assert_eq!(homology(&b).unwrap(), homology(&c).unwrap());
    }

    #[test]
    fn identity_limit_is_stage_homology(seed in any::<u64>()) {
        let c = random_complex(seed);
        let id = GradedMap::identity(&c);
        let dl = direct_limit(&[c.clone(), c.clone(), c.clone()], &[id.clone(), id], 3).unwrap();
        let h = homology(&c).unwrap();
        prop_assert!(dl.stable());
        for (g, v) in dl.dims() {
            prop_assert_eq!(v, h.get(&g).copied().unwrap_or(0));
        }
    }

    #[test]
    fn negated_column_keeps_d_squared_iff_parts_cancel(seed in any::<u64>(), g in 1i64..=4, pick in 0usize..3) {
        let c = random_complex(seed);
        prop_assume!(c.dim(g) > 0);
        let j = pick % c.dim(g);
        let mut block = c.block(g);
        let mut without = block.clone();
        for i in 0..block.rows() {
            block[(i, j)] = -block[(i, j)].clone();
            without[(i, j)] = q(0);
        }
        let mut diff = c.differential.clone();
        diff.insert(g, block.clone());
        let flipped = GradedRationalComplex::new(c.generators.clone(), diff).unwrap();
        prop_assert_eq!(flipped.block(g).col(j), c.block(g).col(j).iter().map(|x| -x.clone()).collect::<Vec<_>>());
        let parts_cancel = without.mul(&c.block(g + 1)).is_zero();
        prop_assert_eq!(verify_d_squared(&flipped).is_ok(), parts_cancel);
    }
}

// ---- evaluation ----

fn k2_spec(n: u32, perturb: &[(u32, f64)]) -> EvMapSpec {
    let mut text = format!("k 2\ndomain circle\norientation 1\nlambda 0.5 6.3\nterm c=1 f=c n={n} a=1\nterm c=2 f=s n={n} a=1\n");
    for (i, &(m, a)) in perturb.iter().enumerate() {
        let (comp, f) = [(1, "s"), (2, "c"), (1, "c"), (2, "s")][i % 4];
        text.push_str(&format!("term c={comp} f={f} n={m} a={a}\n"));
    }
    EvMapSpec::parse(&text).unwrap()
}

fn perturbation() -> impl Strategy<Value = Vec<(u32, f64)>> {
    prop::collection::vec((0u32..4, -0.12f64..0.12), 0..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn flow_normalize_is_flow_invariant(
        c in prop::collection::vec(-2.0f64..2.0, 3),
        s0 in -2.0f64..2.0,
    ) {
        prop_assume!(c.iter().any(|x| x.abs() > 0.1));
        let lambda = vec![0.4, 1.1, 2.5];
        let e = EndExpansion::new(lambda.clone(), c.clone()).unwrap();
        let moved: Vec<f64> = c.iter().zip(&lambda).map(|(x, l)| x * (l * s0).exp()).collect();
        let a = flow_normalize(&e, 1.0).unwrap();
        let b = flow_normalize(&EndExpansion::new(lambda, moved).unwrap(), 1.0).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-9, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn s0_vanishes_exactly_on_the_pole_axis(
        c in prop::collection::vec(0.1f64..2.0, 3),
        zero in prop::collection::vec(any::<bool>(), 3),
        t in 0.5f64..10.0,
    ) {
        let c: Vec<f64> = c.iter().zip(&zero).map(|(x, z)| if *z { 0.0 } else { *x }).collect();
        let e = EndExpansion::new(vec![0.4, 1.1, 2.5], c.clone()).unwrap();
        let v = s0_eval(t, &e).unwrap();
        prop_assert_eq!(v.iter().all(|x| *x == 0.0), c[..2].iter().all(|x| *x == 0.0));
    }

    #[test]
    fn signed_pole_counts_survive_reparametrization(n in 1u32..4, p in perturbation(), d in 0.0f64..std::f64::consts::TAU) {
        let spec = k2_spec(n, &p);
        let (Ok(a), Ok(b)) = (
            pole_preimages(&spec, PoleChoice::LastCoordinate),
            pole_preimages(&spec.shifted(d, 0.0), PoleChoice::LastCoordinate),
        ) else {
            return Err(TestCaseError::reject("degenerate root"));
        };
        let (a, b) = (ScanCount::of(&a), ScanCount::of(&b));
        prop_assert_eq!((a.north_signed, a.south_signed), (b.north_signed, b.south_signed));
        let r = ScanCount::of(&pole_preimages(&spec.reflected(), PoleChoice::LastCoordinate).unwrap());
        prop_assert_eq!((r.north_signed, r.south_signed), (a.north_signed, a.south_signed));
    }

    #[test]
    fn crossings_match_pole_counts(n in 1u32..4, p in perturbation()) {
        let spec = k2_spec(n, &p);
        let (Ok(pre), Ok(paths)) = (pole_preimages(&spec, PoleChoice::LastCoordinate), path_intersections(&spec)) else {
            return Err(TestCaseError::reject("degenerate root"));
        };
        let counts = ScanCount::of(&pre);
        let crossings: i64 = paths.iter().map(|c| c.crossing()).sum();
        prop_assert!(paths.iter().all(|c| c.consistent()));
        prop_assert_eq!(crossings, counts.north_signed);
        prop_assert_eq!(crossings - paths.iter().map(|c| c.south_sum).sum::<i64>(), counts.north_signed - counts.south_signed);
    }
}

// ---- gluing ----

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn pairing_is_translation_covariant(
        t in 45.0f64..120.0,
        s0 in -3.0f64..3.0,
        c in prop::collection::vec(0.2f64..1.5, 3),
    ) {
        let neck = make_cutoffs(&NeckParams { t, s_grid: 2048, ..NeckParams::default() }).unwrap();
        let table = neck.params.table().unwrap();
        let coeffs: Vec<(i64, f64)> = c.iter().enumerate().map(|(i, &x)| (i as i64 + 1, x)).collect();
        let eta = NeckField::holomorphic_end(&neck, &table, &coeffs, 2.0 * t).unwrap();
        let moved = eta.translated(s0);
        for i in 1..=3i64 {
            let a = obstruction_pairing(&sigma(i), &eta, &neck).unwrap();
            let b = obstruction_pairing(&sigma(i), &moved, &neck).unwrap();
            let lam = table.eigenvalue(i).unwrap();
            prop_assert!((b.ln_abs() - a.ln_abs() + lam * s0).abs() < 1e-9);
            prop_assert_eq!(a.value().signum(), b.value().signum());
        }
    }

    #[test]
    fn negative_side_has_no_positive_modes_past_the_ramp(
        t in 45.0f64..90.0,
        c in prop::collection::vec(-1.0f64..1.0, 3),
        d in prop::collection::vec(-1.0f64..1.0, 3),
        k in 1usize..=3,
    ) {
        let neck = make_cutoffs(&NeckParams { t, s_grid: 2048, ..NeckParams::default() }).unwrap();
        let table = neck.params.table().unwrap();
        let cp: Vec<(i64, f64)> = c.iter().enumerate().map(|(i, &x)| (i as i64 + 1, x)).collect();
        let dm: Vec<(i64, f64)> = d.iter().enumerate().map(|(i, &x)| (-(i as i64) - 1, x)).collect();
        let eta_p = NeckField::holomorphic_end(&neck, &table, &cp, 2.0 * t).unwrap();
        let eta_m = NeckField::holomorphic_end(&neck, &table, &dm, 0.0).unwrap();
        let sol = solve_neck(&eta_p, &eta_m, &neck, k).unwrap();
        let total = eta_m.add(&sol.psi_minus).unwrap();
        let cut = neck.params.t0 + neck.params.hr();
        for (&i, m) in total.modes.iter().filter(|(&i, _)| i > 0) {
            // log magnitudes, so that large eigenvalues do not overflow
            let logs: Vec<(f64, f64)> = m
                .b
                .iter()
                .zip(&total.s)
                .filter(|(b, _)| **b != 0.0)
                .map(|(b, s)| (*s, b.abs().ln() + m.lambda * s))
                .collect();
            let Some(peak) = logs.iter().map(|x| x.1).reduce(f64::max) else { continue };
            for (s, l) in logs {
                if s >= cut {
                    prop_assert!(l - peak < (1e-10f64).ln(), "mode {i} at s = {s}");
                }
            }
        }
    }
}

// ---- orientation ----

fn scale(v: &mut [Q], by: &Q) {
    for x in v {
        *x = x.clone() * by;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn comparison_sign_ignores_positive_rescaling(seed in any::<u64>(), which in 0usize..3, pick in 0usize..5, num in 1i64..20, den in 1i64..20) {
        let (model, bases) = random_comparison_instance(seed, 5);
        let u = model.preimage_basis();
        let before = comparison_sign(&model, &bases, Some(&u)).unwrap();
        let mut b: ComparisonBases = bases.clone();
        let wedge = [&mut b.ker, &mut b.f, &mut b.coker].into_iter().nth(which).unwrap();
        prop_assume!(!wedge.is_empty());
        let n = wedge.len();
        scale(&mut wedge[pick % n], &qr(num, den));
        prop_assert_eq!(comparison_sign(&model, &b, Some(&u)).unwrap(), before);
    }

    #[test]
    fn comparison_sign_flips_under_adjacent_swap_in_ker_or_coker(seed in any::<u64>(), which in 0usize..3, pick in 0usize..5) {
        let (model, bases) = random_comparison_instance(seed, 5);
        let u = model.preimage_basis();
        let before = comparison_sign(&model, &bases, Some(&u)).unwrap();
        let mut b = bases.clone();
        let wedge = [&mut b.ker, &mut b.f, &mut b.coker].into_iter().nth(which).unwrap();
        prop_assume!(wedge.len() >= 2);
        let i = pick % (wedge.len() - 1);
        wedge.swap(i, i + 1);
        // F enters both determinants, so reordering it changes nothing
        let expected = if which == 1 { before } else { -before };
        prop_assert_eq!(comparison_sign(&model, &b, Some(&u)).unwrap(), expected);
    }

    #[test]
    fn ds0_sign_is_opposite_at_the_poles(k in 2usize..=4, entries in prop::collection::vec(-4i64..=4, 9), t in 0.5f64..8.0) {
        let n = k - 1;
        let rows: Vec<Vec<Q>> = (0..n).map(|i| (0..n).map(|j| q(entries[i * 3 + j])).collect()).collect();
        let j = QMat::from_rows(rows);
        prop_assume!(j.rank() == n);
        let lambda: Vec<f64> = (0..k).map(|i| 0.5 + i as f64).collect();
        let north = ds0_sign(k, Pole::North, &j, &lambda, t).unwrap();
        prop_assert_eq!(north, -ds0_sign(k, Pole::South, &j, &lambda, t).unwrap());
    }

    #[test]
    fn arc_pairing_gives_opposite_products(s1 in prop::sample::select(vec![-1i8, 1]), s2 in prop::sample::select(vec![-1i8, 1])) {
        // the far end glues away from the arc, the near end toward it
        let far = glued_sign(s1, s2, Direction::AwayFrom).unwrap();
        let near = glued_sign(s1, s2, Direction::Toward).unwrap();
        prop_assert_eq!(far, -near);
        prop_assert_eq!(far, -(s1 * s2));
    }
}

#[test]
fn radial_reorder_is_a_cycle_sign() {
    for k in 1..=6usize {
        // moving the radial vector from the front past k-1 factors
        let perm: Vec<usize> = (1..k).chain(std::iter::once(0)).collect();
        assert_eq!(wedge_sign(&perm).unwrap(), radial_reorder_sign(k));
        assert_eq!(radial_reorder_sign(k), if k % 2 == 1 { 1 } else { -1 });
    }
}
