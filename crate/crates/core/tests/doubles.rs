mod common;

use common::*;
use num_complex::Complex64 as C64;
use rpcheck::algebra::SiteAlgebra;
use rpcheck::couplings::{build_adapted_basis, dual_pair};
use rpcheck::doubles::{
    build_classical_double, build_clifford_double, build_gauge_double, build_grassmann_double,
    build_parafermion_double, build_spin_double, verify_qdouble, BondLattice, Double, FiniteGroupTable,
    ReflectionLattice,
};
use rpcheck::functionals::{
    check_factorizing, check_reflection_invariant, check_strictly_positive, neutrality_defect, plus_functional,
    Functional,
};
use rpcheck::linalg::CMatrix;

fn families() -> Vec<Double> {
    let chain = ReflectionLattice::chain(2, false);
    vec![
        build_spin_double(&ReflectionLattice::chain(1, false), 2, &CMatrix::identity(2, 2)).unwrap(),
        build_grassmann_double(&chain, 1, None, None).unwrap(),
        build_clifford_double(&chain, 1, None, None).unwrap(),
        build_parafermion_double(3, &chain, None).unwrap(),
        build_gauge_double(&FiniteGroupTable::cyclic(2).unwrap(), &BondLattice::rectangle(1, 1).unwrap()).unwrap(),
        build_classical_double(&ReflectionLattice::chain(1, false), SiteAlgebra::cyclic(3).unwrap()).unwrap(),
    ]
}

#[test]
fn every_family_passes_the_structural_checks() {
    for d in families() {
        let report = verify_qdouble(&d.algebra);
        assert!(report.passed(), "{report:?}");
    }
}

#[test]
fn backgrounds_are_neutral_invariant_factorizing_and_strictly_positive() {
    for d in families() {
        let alg = &d.algebra;
        assert!(neutrality_defect(&d.background, alg).unwrap() < 1e-14, "{}", alg.family());
        let inv = check_reflection_invariant(&d.background, alg).unwrap();
        assert!(inv.invariant, "{} {inv:?}", alg.family());
        let fr = check_factorizing(&d.background, alg).unwrap();
        assert!(fr.factorizing, "{} {}", alg.family(), fr.max_deviation);
        let tp = plus_functional(alg, &fr.tau_plus).unwrap();
        let sp = check_strictly_positive(alg, &tp).unwrap();
        assert!(sp.strictly_positive, "{}", alg.family());
    }
}

#[test]
fn monomial_gram_is_identity_for_fermionic_families() {
    let chain = ReflectionLattice::chain(2, false);
    for d in [
        build_grassmann_double(&chain, 1, None, None).unwrap(),
        build_clifford_double(&chain, 1, None, None).unwrap(),
        build_parafermion_double(3, &chain, None).unwrap(),
    ] {
        let alg = &d.algebra;
        let fr = check_factorizing(&d.background, alg).unwrap();
        let tp = plus_functional(alg, &fr.tau_plus).unwrap();
        let sp = check_strictly_positive(alg, &tp).unwrap();
        assert!(sp.identity_deviation < 1e-12, "{}", alg.family());
        let basis = build_adapted_basis(&d).unwrap();
        assert!(!basis.orthonormalized);
    }
}

#[test]
fn berezin_integral_normalization_and_invariant_volume() {
    let d = build_grassmann_double(&ReflectionLattice::chain(1, false), 2, None, None).unwrap();
    let alg = &d.algebra;
    let plus_vol = alg.monomial(alg.plus_volume_index());
    let minus_vol = alg.reflect(&plus_vol).unwrap();
    let mu = alg.multiply(&minus_vol, &plus_vol).unwrap();
    assert!((d.background.evaluate(alg, &mu).unwrap() - 1.0).norm() < 1e-15);
    assert!(alg.reflect(&mu).unwrap().max_abs_diff(&mu).unwrap() < 1e-15);
    for m in 0..alg.dim() - 1 {
        assert_eq!(d.background.monomial_value(alg, m), C64::new(0.0, 0.0));
    }
}

#[test]
fn grassmann_on_plane_uses_doubled_site() {
    let d = build_grassmann_double(&ReflectionLattice::chain(1, true), 2, None, None).unwrap();
    // Plus side: site 0 (two modes) and site 1 (two modes), mirrored on the minus side.
    assert_eq!(d.algebra.slots().len(), 8);
    assert!(verify_qdouble(&d.algebra).passed());
    assert!(check_factorizing(&d.background, &d.algebra).unwrap().factorizing);
}

#[test]
fn spin_trace_values() {
    let d = build_spin_double(&ReflectionLattice::chain(1, false), 2, &CMatrix::identity(2, 2)).unwrap();
    let alg = &d.algebra;
    assert_eq!(d.background.evaluate(alg, &alg.unit()).unwrap(), C64::new(1.0, 0.0));
    for m in 1..alg.dim() {
        assert!(d.background.monomial_value(alg, m).norm() < 1e-15);
    }
}

#[test]
fn duality_of_dual_pairs() {
    let chain = ReflectionLattice::chain(2, false);
    for d in [
        build_clifford_double(&chain, 1, None, None).unwrap(),
        build_parafermion_double(3, &chain, None).unwrap(),
        build_grassmann_double(&chain, 1, None, None).unwrap(),
    ] {
        let alg = &d.algebra;
        let basis = build_adapted_basis(&d).unwrap();
        let n = basis.len();
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| basis.degrees[i] == basis.degrees[j])
            .collect();
        let elems: Vec<_> = pairs.iter().map(|&(i, j)| dual_pair(alg, &basis, i, j)).collect();
        for (a, (_, bh)) in elems.iter().enumerate() {
            for (b, (bb, _)) in elems.iter().enumerate() {
                let v = d.background.pair(alg, bh, bb).unwrap();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((v - want).norm() < 1e-12, "{} {:?} {:?} {v}", alg.family(), pairs[a], pairs[b]);
            }
        }
    }
}

#[test]
fn non_invariant_functional_is_detected() {
    let d = build_parafermion_double(3, &ReflectionLattice::chain(1, false), None).unwrap();
    let alg = &d.algebra;
    let mut values = vec![C64::new(0.0, 0.0); alg.dim()];
    values[0] = C64::new(1.0, 0.0);
    values[alg.encode(&[0, 1])] = C64::new(0.3, 0.0);
    let f = Functional::covector(alg, values).unwrap();
    let inv = check_reflection_invariant(&f, alg).unwrap();
    assert!(!inv.invariant);
    assert!(inv.max_deviation > 0.1);
}

#[test]
fn mirrored_double_conjugates_zeta() {
    let d = build_parafermion_double(3, &ReflectionLattice::chain(1, false), None).unwrap();
    let m = d.mirrored();
    assert!((m.algebra.zeta() - d.algebra.zeta().conj()).norm() < 1e-15);
    assert!(verify_qdouble(&m.algebra).passed());
}

#[test]
fn random_elements_respect_twisted_product_identities() {
    let chain = ReflectionLattice::chain(2, false);
    let mut r = rng(11);
    for d in [
        build_clifford_double(&chain, 1, None, None).unwrap(),
        build_parafermion_double(3, &chain, None).unwrap(),
        build_grassmann_double(&chain, 1, None, None).unwrap(),
    ] {
        let alg = &d.algebra;
        let p = alg.p();
        let plus = alg.plus_monomials();
        let of_degree = |k: usize| -> Vec<usize> {
            plus.iter().copied().filter(|&m| alg.monomial_degree(m) == k).collect()
        };
        for k in 0..p {
            for l in 0..p {
                let a1 = random_on(alg, &mut r, &of_degree(k));
                let b1 = random_on(alg, &mut r, &of_degree(k));
                let a2 = random_on(alg, &mut r, &of_degree(l));
                let b2 = random_on(alg, &mut r, &of_degree(l));
                // Θ(Θ(A)∘B) = Θ(B)∘A
                let lhs = alg.reflect(&alg.theta_twisted(&a1, &b1).unwrap()).unwrap();
                let rhs = alg.theta_twisted(&b1, &a1).unwrap();
                assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-12);
                // (Θ(A₁)∘B₁)(Θ(A₂)∘B₂) = Θ(A₁A₂)∘(B₁B₂)
                let lhs = alg
                    .multiply(&alg.theta_twisted(&a1, &b1).unwrap(), &alg.theta_twisted(&a2, &b2).unwrap())
                    .unwrap();
                let rhs = alg
                    .theta_twisted(&alg.multiply(&a1, &a2).unwrap(), &alg.multiply(&b1, &b2).unwrap())
                    .unwrap();
                assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-12, "{} {k} {l}", alg.family());
            }
        }
    }
}
