mod common;

use common::*;
use num_complex::Complex64 as C64;
use rpcheck::algebra::Algebra;
use rpcheck::doubles::{
    build_classical_double, build_clifford_double, build_gauge_double, build_grassmann_double,
    build_parafermion_double, build_spin_double, BondLattice, FiniteGroupTable, ReflectionLattice,
};
use rpcheck::algebra::SiteAlgebra;
use rpcheck::linalg::CMatrix;

fn degree_zero_random(alg: &Algebra, seed: u64, k: usize) -> rpcheck::algebra::Element {
    let mut r = rng(seed);
    let zero: Vec<usize> = (0..alg.dim()).filter(|&m| alg.monomial_degree(m) == 0).collect();
    let picks: Vec<usize> = (0..k).map(|i| zero[(i * 7919 + seed as usize) % zero.len()]).collect();
    random_on(alg, &mut r, &picks)
}

#[test]
fn parafermion_products_match_clock_shift_matrices() {
    let lat = ReflectionLattice::chain(2, false);
    let d = build_parafermion_double(3, &lat, None).unwrap();
    let alg = &d.algebra;
    let gens = parafermion_generators(3, 4);
    let mut r = rng(1);
    for _ in 0..20 {
        let a = random_element(alg, &mut r, 6);
        let b = random_element(alg, &mut r, 6);
        let ab = alg.multiply(&a, &b).unwrap();
        let lhs = generator_image(alg, &gens, &ab);
        let rhs = generator_image(alg, &gens, &a) * generator_image(alg, &gens, &b);
        assert!(max_diff(&lhs, &rhs) < 1e-12);
    }
}

#[test]
fn clifford_products_match_jordan_wigner_matrices() {
    let lat = ReflectionLattice::chain(2, false);
    let d = build_clifford_double(&lat, 1, None, None).unwrap();
    let alg = &d.algebra;
    let gens = parafermion_generators(2, 4);
    let mut r = rng(2);
    for _ in 0..20 {
        let a = random_element(alg, &mut r, 5);
        let b = random_element(alg, &mut r, 5);
        let ab = alg.multiply(&a, &b).unwrap();
        let lhs = generator_image(alg, &gens, &ab);
        let rhs = generator_image(alg, &gens, &a) * generator_image(alg, &gens, &b);
        assert!(max_diff(&lhs, &rhs) < 1e-12);
    }
    // c₁ c₁ = 1
    let c1 = alg.local(0, 1);
    assert!(alg.multiply(&c1, &c1).unwrap().max_abs_diff(&alg.unit()).unwrap() < 1e-15);
}

#[test]
fn regular_representation_is_a_homomorphism() {
    let lat = ReflectionLattice::chain(1, false);
    let d = build_parafermion_double(3, &lat, None).unwrap();
    let alg = &d.algebra;
    let mut r = rng(3);
    let a = random_element(alg, &mut r, 5);
    let b = random_element(alg, &mut r, 5);
    let la = alg.regular_representation(&a).unwrap();
    let lb = alg.regular_representation(&b).unwrap();
    let lab = alg.regular_representation(&alg.multiply(&a, &b).unwrap()).unwrap();
    assert!(max_diff(&lab, &(la * lb)) < 1e-12);
    let id = alg.regular_representation(&alg.unit()).unwrap();
    assert!(max_diff(&id, &CMatrix::identity(alg.dim(), alg.dim())) < 1e-15);
}

#[test]
fn single_majorana_regular_representation_swaps_basis() {
    let lat = ReflectionLattice::chain(1, false);
    let d = build_clifford_double(&lat, 1, None, None).unwrap();
    let alg = &d.algebra;
    // Slot 1 is the positive Majorana; restricted to {1, c₊} it acts as the swap.
    let l = alg.regular_representation(&alg.local(1, 1)).unwrap();
    assert!((l[(1, 0)] - 1.0).norm() < 1e-15);
    assert!((l[(0, 1)] - 1.0).norm() < 1e-15);
    assert!(l[(0, 0)].norm() < 1e-15);
}

#[test]
fn spin_half_zz_exponential_matches_closed_form() {
    let lat = ReflectionLattice::chain(1, false);
    let d = build_spin_double(&lat, 2, &CMatrix::identity(2, 2)).unwrap();
    let alg = &d.algebra;
    // Z¹ is local index 1 in the clock-shift basis.
    let zz = alg.encode(&[1, 1]);
    let h = alg.monomial(zz);
    let e = alg.exp_neg(&h, 1.0).unwrap();
    assert!((e.coeff(0) - 1f64.cosh()).norm() < 1e-12);
    assert!((e.coeff(zz) + 1f64.sinh()).norm() < 1e-12);
    for (m, c) in e.terms() {
        if m != 0 && m != zz {
            assert!(c.norm() < 1e-14);
        }
    }
}

#[test]
fn exp_neg_matches_dense_exponential_for_spins_and_parafermions() {
    let lat = ReflectionLattice::chain(1, false);
    let d = build_spin_double(&lat, 3, &CMatrix::identity(3, 3)).unwrap();
    let alg = &d.algebra;
    let h = degree_zero_random(alg, 4, 12);
    let e = alg.exp_neg(&h, 0.7).unwrap();
    let want = (spin_image(alg, &h) * C64::new(-0.7, 0.0)).exp();
    assert!(max_diff(&spin_image(alg, &e), &want) < 1e-10);

    let lat = ReflectionLattice::chain(2, false);
    let d = build_parafermion_double(3, &lat, None).unwrap();
    let alg = &d.algebra;
    let gens = parafermion_generators(3, 4);
    let h = degree_zero_random(alg, 5, 10);
    let e = alg.exp_neg(&h, 0.4).unwrap();
    let want = (generator_image(alg, &gens, &h) * C64::new(-0.4, 0.0)).exp();
    assert!(max_diff(&generator_image(alg, &gens, &e), &want) < 1e-10);
}

#[test]
fn exp_neg_nilpotent_route_matches_regular_representation() {
    let lat = ReflectionLattice::chain(1, false);
    let d = build_grassmann_double(&lat, 2, None, None).unwrap();
    let alg = &d.algebra;
    let h = degree_zero_random(alg, 6, 8);
    let e = alg.exp_neg(&h, 1.3).unwrap();
    let l = alg.regular_representation(&h).unwrap() * C64::new(-1.3, 0.0);
    let col: Vec<C64> = l.exp().column(0).iter().copied().collect();
    let want = alg.from_dense(&col);
    assert!(e.max_abs_diff(&want).unwrap() < 1e-12);
}

#[test]
fn exp_neg_diagonal_route_is_pointwise() {
    let lat = ReflectionLattice::chain(1, true);
    let d = build_classical_double(&lat, SiteAlgebra::cyclic(3).unwrap()).unwrap();
    let alg = &d.algebra;
    let h = degree_zero_random(alg, 7, 9);
    let e = alg.exp_neg(&h, 0.9).unwrap();
    let want = (spin_image(alg, &h) * C64::new(-0.9, 0.0)).exp();
    assert!(max_diff(&spin_image(alg, &e), &want) < 1e-10);

    let g = FiniteGroupTable::cyclic(2).unwrap();
    let d = build_gauge_double(&g, &BondLattice::rectangle(1, 1).unwrap()).unwrap();
    let alg = &d.algebra;
    let h = degree_zero_random(alg, 8, 6);
    let e = alg.exp_neg(&h, 1.1).unwrap();
    let want = (spin_image(alg, &h) * C64::new(-1.1, 0.0)).exp();
    assert!(max_diff(&spin_image(alg, &e), &want) < 1e-10);
}

#[test]
fn exp_neg_scalar_and_zero() {
    let lat = ReflectionLattice::chain(1, false);
    let d = build_clifford_double(&lat, 1, None, None).unwrap();
    let alg = &d.algebra;
    let e = alg.exp_neg(&alg.zero(), 2.0).unwrap();
    assert_eq!(e, alg.unit());
    let e = alg.exp_neg(&alg.scalar(C64::new(0.5, 0.0)), 2.0).unwrap();
    assert!((e.coeff(0) - (-1f64).exp()).norm() < 1e-15);
    assert!(alg.exp_neg(&alg.local(0, 1), 1.0).is_err());
}

#[test]
fn reflection_is_antilinear_and_multiplicative() {
    let lat = ReflectionLattice::chain(2, false);
    let doubles = vec![
        build_parafermion_double(3, &lat, None).unwrap(),
        build_clifford_double(&lat, 1, None, None).unwrap(),
        build_grassmann_double(&lat, 1, None, None).unwrap(),
        build_spin_double(&ReflectionLattice::chain(1, false), 2, &CMatrix::identity(2, 2)).unwrap(),
    ];
    let mut r = rng(9);
    for d in &doubles {
        let alg = &d.algebra;
        for _ in 0..10 {
            let a = random_element(alg, &mut r, 4);
            let b = random_element(alg, &mut r, 4);
            let alpha = random_c(&mut r);
            let lin = alg.reflect(&a.scaled(alpha).plus(&b).unwrap()).unwrap();
            let want = alg.reflect(&a).unwrap().scaled(alpha.conj()).plus(&alg.reflect(&b).unwrap()).unwrap();
            assert!(lin.max_abs_diff(&want).unwrap() < 1e-12);
            let prod = alg.reflect(&alg.multiply(&a, &b).unwrap()).unwrap();
            let want = alg
                .multiply(&alg.reflect(&a).unwrap(), &alg.reflect(&b).unwrap())
                .unwrap();
            assert!(prod.max_abs_diff(&want).unwrap() < 1e-12, "{}", alg.family());
        }
    }
}

#[test]
fn twisted_product_phases() {
    let lat = ReflectionLattice::chain(1, false);
    let d = build_clifford_double(&lat, 1, None, None).unwrap();
    let alg = &d.algebra;
    let a = alg.local(1, 1);
    let ta = alg.reflect(&a).unwrap();
    let lhs = alg.twisted_product(&ta, &a).unwrap();
    let rhs = alg.multiply(&ta, &a).unwrap().scaled(C64::new(0.0, 1.0));
    assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-15);

    let d = build_parafermion_double(3, &lat, None).unwrap();
    let alg = &d.algebra;
    let c = alg.local(1, 1);
    let tc = alg.reflect(&c).unwrap();
    // Θ(c_λ) = c_{ϑλ}^{-1} = c_{ϑλ}^2
    assert_eq!(tc, alg.local(0, 2));
    let lhs = alg.twisted_product(&tc, &c).unwrap();
    let rhs = alg.multiply(&tc, &c).unwrap().scaled(alg.zeta());
    assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-15);
}

#[test]
fn sharp_examples() {
    let lat = ReflectionLattice::chain(2, false);
    let d = build_clifford_double(&lat, 1, None, None).unwrap();
    let alg = &d.algebra;
    let c1 = alg.local(2, 1);
    let c2 = alg.local(3, 1);
    let c12 = alg.multiply(&c1, &c2).unwrap();
    let s = alg.sharp(&c12).unwrap();
    assert!(s.max_abs_diff(&c12.neg()).unwrap() < 1e-15);
    assert!(alg.sharp(&alg.local(0, 1)).is_err());

    let d = build_grassmann_double(&ReflectionLattice::chain(1, false), 2, None, None).unwrap();
    let alg = &d.algebra;
    let vol = alg.monomial(alg.plus_volume_index());
    assert_eq!(alg.sharp(&alg.unit()).unwrap(), vol);

    let d = build_parafermion_double(3, &lat, None).unwrap();
    let alg = &d.algebra;
    assert_eq!(alg.sharp(&alg.local(3, 1)).unwrap(), alg.local(3, 2));
}
