mod common;

use common::*;
use num_complex::Complex64 as C64;
use rand::Rng;
use rpcheck::algebra::SiteAlgebra;
use rpcheck::couplings::{build_adapted_basis, extract_couplings};
use rpcheck::doubles::{build_classical_double, build_clifford_double, BondLattice, FiniteGroupTable, ReflectionLattice};
use rpcheck::linalg::CMatrix;
use rpcheck::models::*;
use rpcheck::rp::{verify_rp, Status};
use rpcheck::Error;

const BETAS: [f64; 4] = [0.0, 0.25, 1.0, 4.0];
const TOL: f64 = 1e-9;

fn index_of(labels: &[String], label: &str) -> usize {
    labels.iter().position(|l| l == label).unwrap_or_else(|| panic!("no label {label} in {labels:?}"))
}

#[test]
fn heisenberg_reflection_flips_spins() {
    let m = heisenberg_model(1, 2, -1.0, 1.0).unwrap();
    let alg = &m.double.algebra;
    let spins = spin_matrices(2);
    for l in 0..2 {
        let site = &alg.slots()[l].site;
        let mirror = alg.slots()[l].mirror;
        for s in &spins {
            let e = alg.local_combination(l, &site.expand_matrix(s).unwrap());
            let want = alg.local_combination(mirror, &site.expand_matrix(s).unwrap()).neg();
            assert!(alg.reflect(&e).unwrap().max_abs_diff(&want).unwrap() < 1e-12);
        }
    }
}

#[test]
fn heisenberg_couplings_match_closed_form() {
    for two_s in [1usize, 2] {
        let (j, v) = (-0.7, 1.5);
        let m = heisenberg_model(2, two_s, j, v).unwrap();
        let basis = build_adapted_basis(&m.double).unwrap();
        let cm = extract_couplings(&m.double, &basis, &m.hamiltonian).unwrap();
        let s = two_s as f64 / 2.0;
        let kappa = 2.0 * s * (s + 1.0) / 3.0;
        let pos = [0.5f64, 1.5];
        for (a, x) in pos.iter().enumerate() {
            for (b, y) in pos.iter().enumerate() {
                for comp in ["Sx", "Sy", "Sz"] {
                    for comp2 in ["Sx", "Sy", "Sz"] {
                        let i = index_of(&basis.labels, &format!("{comp}[{x}]"));
                        let k = index_of(&basis.labels, &format!("{comp2}[{y}]"));
                        let want = if comp == comp2 { -kappa * j * (x + y).powf(-v) } else { 0.0 };
                        assert!(
                            (cm.matrix[(i, k)] - want).norm() < 1e-12,
                            "{a}{b} {comp}{comp2}: {} vs {want}",
                            cm.matrix[(i, k)]
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn heisenberg_antiferromagnet_is_rp_and_ferromagnet_is_not() {
    let m = heisenberg_model(1, 1, -1.0, 1.0).unwrap();
    let basis = build_adapted_basis(&m.double).unwrap();
    let v = verify_rp(&m.double, &basis, &m.hamiltonian, &BETAS, TOL).unwrap();
    assert_eq!(v.status, Status::Rp);
    assert_eq!(v.coupling_psd, Some(true));

    let m = heisenberg_model(1, 1, 1.0, 1.0).unwrap();
    let basis = build_adapted_basis(&m.double).unwrap();
    let v = verify_rp(&m.double, &basis, &m.hamiltonian, &BETAS, TOL).unwrap();
    assert_eq!(v.status, Status::NotRp);
    assert!(v.witness.unwrap().value < -TOL);
}

#[test]
fn heisenberg_guards() {
    assert!(matches!(heisenberg_model(4, 1, -1.0, 1.0), Err(Error::Resource(_))));
    assert!(matches!(heisenberg_model(1, 5, -1.0, 1.0), Err(Error::InvalidParameter { .. })));
    assert!(matches!(heisenberg_model(1, 1, -1.0, -1.0), Err(Error::InvalidParameter { .. })));
}

#[test]
fn ising_pair_single_entry() {
    let lat = ReflectionLattice::chain(1, false);
    for (sign, j) in [(1i8, 0.8), (1, -0.8), (-1, 0.8)] {
        let m = long_range_pair_model(&lat, &[vec![1.0, -1.0]], &[sign], |_, _, _, _| j, &[]).unwrap();
        let basis = build_adapted_basis(&m.double).unwrap();
        let cm = extract_couplings(&m.double, &basis, &m.hamiltonian).unwrap();
        let j0 = cm.j0();
        // Ordered pairs count the cross bond twice.
        let want = 2.0 * f64::from(sign) * j;
        assert!((j0[(0, 0)] - want).norm() < 1e-12, "{} vs {want}", j0[(0, 0)]);
        let v = verify_rp(&m.double, &basis, &m.hamiltonian, &BETAS, TOL).unwrap();
        assert_eq!(v.status == Status::Rp, want >= 0.0);
    }
}

#[test]
fn power_kernel_is_reflection_positive() {
    let lat = ReflectionLattice::chain(2, false);
    let x: Vec<f64> = (0..4).map(|i| i as f64 - 1.5).collect();
    let m = long_range_pair_model(
        &lat,
        &[vec![1.0, -1.0]],
        &[1],
        |l, lp, _, _| 0.5 * (x[l] - x[lp]).abs().powf(-1.0),
        &[],
    )
    .unwrap();
    let basis = build_adapted_basis(&m.double).unwrap();
    let v = verify_rp(&m.double, &basis, &m.hamiltonian, &BETAS, TOL).unwrap();
    assert_eq!(v.status, Status::Rp);
    assert_eq!(v.agreement, Some(true));
}

#[test]
fn zero_couplings_are_trivially_rp() {
    let lat = ReflectionLattice::chain(1, false);
    let m = long_range_pair_model(&lat, &[vec![1.0, -1.0]], &[1], |_, _, _, _| 0.0, &[]).unwrap();
    assert!(m.hamiltonian.is_zero());
    let basis = build_adapted_basis(&m.double).unwrap();
    let v = verify_rp(&m.double, &basis, &m.hamiltonian, &BETAS, TOL).unwrap();
    assert_eq!(v.status, Status::Rp);
}

#[test]
fn pair_model_validation() {
    let lat = ReflectionLattice::chain(1, false);
    let bad = long_range_pair_model(&lat, &[vec![1.0, 0.0]], &[1], |_, _, _, _| 1.0, &[]);
    assert!(matches!(bad, Err(Error::InvalidField(_))));
    let centred = ReflectionLattice::chain(1, true);
    let bad = long_range_pair_model(&centred, &[vec![1.0, -1.0]], &[-1], |_, _, _, _| 1.0, &[]);
    assert!(matches!(bad, Err(Error::InvalidParameter { .. })));
}

#[test]
fn function_element_matches_point_values() {
    let lat = ReflectionLattice::chain(1, true);
    let d = build_classical_double(&lat, SiteAlgebra::cyclic(3).unwrap()).unwrap();
    let alg = &d.algebra;
    let mut r = rng(21);
    let table: Vec<C64> = (0..27).map(|_| random_c(&mut r)).collect();
    let e = function_element(alg, &[2, 0, 1], |x| table[x[0] * 9 + x[1] * 3 + x[2]]).unwrap();
    let img = spin_image(alg, &e);
    for w0 in 0..3 {
        for w1 in 0..3 {
            for w2 in 0..3 {
                let idx = w0 * 9 + w1 * 3 + w2;
                assert!((img[(idx, idx)] - table[w2 * 9 + w0 * 3 + w1]).norm() < 1e-12);
            }
        }
    }
}

fn ising_table(j: f64) -> Vec<Vec<C64>> {
    vec![vec![c(j, 0.0), c(-j, 0.0)], vec![c(-j, 0.0), c(j, 0.0)]]
}

#[test]
fn nearest_neighbour_chain_through_plane_is_rp_with_exact_split() {
    let lat = ReflectionLattice::chain(1, true);
    for j in [1.0, -1.0] {
        let bonds = [
            Bond { a: 1, b: 2, table: ising_table(j) },
            Bond { a: 1, b: 0, table: ising_table(j) },
        ];
        let pot = vec![vec![c(0.3, 0.0), c(-0.3, 0.0)], vec![c(0.1, 0.0), c(0.2, 0.0)], vec![c(0.3, 0.0), c(-0.3, 0.0)]];
        let nn = nearest_neighbor_classical(&lat, SiteAlgebra::cyclic(2).unwrap(), &bonds, &pot).unwrap();
        let alg = &nn.model.double.algebra;
        let hp = nn.plus.unwrap();
        let total = alg.reflect(&hp).unwrap().plus(&hp).unwrap();
        assert!(total.max_abs_diff(&nn.model.hamiltonian).unwrap() < 1e-14);
        let basis = build_adapted_basis(&nn.model.double).unwrap();
        let v = verify_rp(&nn.model.double, &basis, &nn.model.hamiltonian, &[0.1, 1.0, 10.0], TOL).unwrap();
        assert_eq!(v.status, Status::Rp, "{v:?}");
        assert_eq!(basis.len(), 4);
    }
}

#[test]
fn nearest_neighbour_across_gap_needs_ferromagnetic_bond() {
    let lat = ReflectionLattice::chain(1, false);
    for (j, rp) in [(0.5, true), (-0.5, false)] {
        let nn = nearest_neighbor_classical(
            &lat,
            SiteAlgebra::cyclic(2).unwrap(),
            &[Bond { a: 0, b: 1, table: ising_table(j) }],
            &[],
        )
        .unwrap();
        assert!(nn.plus.is_none());
        let basis = build_adapted_basis(&nn.model.double).unwrap();
        let v = verify_rp(&nn.model.double, &basis, &nn.model.hamiltonian, &BETAS, TOL).unwrap();
        assert_eq!(v.status == Status::Rp, rp);
        if !rp {
            assert!(v.witness.is_some());
        }
    }
}

#[test]
fn non_invariant_nearest_neighbour_model_is_rejected() {
    let lat = ReflectionLattice::chain(1, true);
    let bonds = [Bond { a: 1, b: 2, table: ising_table(1.0) }];
    let err = nearest_neighbor_classical(&lat, SiteAlgebra::cyclic(2).unwrap(), &bonds, &[]);
    assert!(matches!(err, Err(Error::ConstraintViolation(_))));
    let far = [Bond { a: 0, b: 2, table: ising_table(1.0) }];
    let err = nearest_neighbor_classical(&lat, SiteAlgebra::cyclic(2).unwrap(), &far, &[]);
    assert!(matches!(err, Err(Error::InvalidParameter { .. })));
}

fn parafermion_couplings(diag: &[(usize, f64)], n: usize) -> CMatrix {
    let mut j = CMatrix::zeros(n, n);
    for &(i, v) in diag {
        j[(i, i)] = c(v, 0.0);
    }
    j
}

#[test]
fn parafermion_chain_identity_block_is_rp_and_indefinite_block_is_not() {
    let lat = ReflectionLattice::chain(2, false);
    let d = rpcheck::doubles::build_parafermion_double(3, &lat, None).unwrap();
    let basis = build_adapted_basis(&d).unwrap();
    let deg1 = basis.indices_of_degree(1);
    let diag: Vec<(usize, f64)> = deg1.iter().map(|&i| (i, 1.0)).collect();
    let m = parafermion_chain(3, 2, &parafermion_couplings(&diag, basis.len()), None).unwrap();
    let basis = build_adapted_basis(&m.double).unwrap();
    let v = verify_rp(&m.double, &basis, &m.hamiltonian, &BETAS, TOL).unwrap();
    assert_eq!(v.status, Status::Rp);
    let back = extract_couplings(&m.double, &basis, &m.hamiltonian).unwrap();
    assert!((back.matrix - parafermion_couplings(&diag, basis.len())).norm() < 1e-10);

    let m = parafermion_chain(3, 2, &parafermion_couplings(&[(deg1[0], 1.0), (deg1[1], -1.0)], basis.len()), None)
        .unwrap();
    let basis = build_adapted_basis(&m.double).unwrap();
    let v = verify_rp(&m.double, &basis, &m.hamiltonian, &BETAS, TOL).unwrap();
    assert_eq!(v.status, Status::NotRp);
    assert!(v.witness.is_some());
}

#[test]
fn coupling_input_validation() {
    let lat = ReflectionLattice::chain(1, false);
    let d = rpcheck::doubles::build_parafermion_double(3, &lat, None).unwrap();
    let basis = build_adapted_basis(&d).unwrap();
    let n = basis.len();
    let d1 = basis.indices_of_degree(1)[0];
    let d2 = basis.indices_of_degree(2)[0];
    let mut j = CMatrix::zeros(n, n);
    j[(d1, d2)] = c(1.0, 0.0);
    j[(d2, d1)] = c(1.0, 0.0);
    assert!(matches!(hamiltonian_from_couplings(&d, &basis, &j), Err(Error::Grading(_))));
    let mut j = CMatrix::zeros(n, n);
    j[(d1, d1)] = c(0.0, 1.0);
    assert!(matches!(hamiltonian_from_couplings(&d, &basis, &j), Err(Error::InvalidParameter { .. })));
}

#[test]
fn wilson_action_is_rp_for_all_couplings() {
    let g = FiniteGroupTable::cyclic(2).unwrap();
    let lat = BondLattice::rectangle(1, 2).unwrap();
    for g0 in [0.3, 1.0, 3.0] {
        let m = wilson_action(&g, &lat, "chi1", g0).unwrap();
        let basis = build_adapted_basis(&m.double).unwrap();
        let v = verify_rp(&m.double, &basis, &m.hamiltonian, &[1.0], TOL).unwrap();
        assert_eq!(v.status, Status::Rp, "g0 = {g0}");
        assert_eq!(v.coupling_psd, Some(true));
    }
}

#[test]
fn wilson_action_is_hermitian_and_matches_holonomy() {
    let g = FiniteGroupTable::cyclic(3).unwrap();
    let lat = BondLattice::rectangle(1, 2).unwrap();
    let m = wilson_action(&g, &lat, "chi1", 1.0).unwrap();
    let alg = &m.double.algebra;
    // Trivial configuration: one plaquette with χ(e) + χ(e) = 2, so H = −2/(2g₀²) = −1.
    let img = spin_image(alg, &m.hamiltonian);
    assert!((img[(0, 0)] + 1.0).norm() < 1e-12);
    let n = img.nrows();
    for k in 0..n {
        assert!(img[(k, k)].im.abs() < 1e-12);
    }
}

#[test]
fn wilson_input_validation() {
    let g = FiniteGroupTable::cyclic(2).unwrap();
    let lat = BondLattice::rectangle(1, 2).unwrap();
    assert!(matches!(wilson_action(&g, &lat, "nope", 1.0), Err(Error::InvalidParameter { .. })));
    assert!(matches!(wilson_action(&g, &lat, "chi1", 0.0), Err(Error::InvalidParameter { .. })));
    assert!(matches!(BondLattice::new(vec![vec![0.0, 0.0]], vec![]), Err(Error::InvalidLattice(_))));
}

#[test]
fn majorana_pair_sign_decides_rp() {
    let lat = ReflectionLattice::chain(1, false);
    for (w, rp) in [(0.7, true), (-0.7, false)] {
        let d = build_clifford_double(&lat, 1, None, None).unwrap();
        let term = FermionTerm { coeff: c(0.0, w), modes: vec!["-0.5".into(), "0.5".into()] };
        let m = fermion_hamiltonian(d, &[term]).unwrap();
        let basis = build_adapted_basis(&m.double).unwrap();
        let cm = extract_couplings(&m.double, &basis, &m.hamiltonian).unwrap();
        assert!((cm.j0()[(0, 0)] - w).norm() < 1e-12);
        let v = verify_rp(&m.double, &basis, &m.hamiltonian, &BETAS, TOL).unwrap();
        assert_eq!(v.status == Status::Rp, rp);
    }
}

#[test]
fn empty_fermion_table_gives_zero_hamiltonian() {
    let d = rpcheck::doubles::build_grassmann_double(&ReflectionLattice::chain(1, false), 2, None, None).unwrap();
    let m = fermion_hamiltonian(d, &[]).unwrap();
    assert!(m.hamiltonian.is_zero());
    let basis = build_adapted_basis(&m.double).unwrap();
    let v = verify_rp(&m.double, &basis, &m.hamiltonian, &BETAS, TOL).unwrap();
    assert_eq!(v.status, Status::Rp);
}

#[test]
fn fermion_coupling_table_round_trips() {
    let d = build_clifford_double(&ReflectionLattice::chain(2, false), 1, None, None).unwrap();
    let basis = build_adapted_basis(&d).unwrap();
    let n = basis.len();
    let mut r = rng(5);
    let mut j = CMatrix::zeros(n, n);
    for a in 0..n {
        for b in a..n {
            if basis.degrees[a] == basis.degrees[b] {
                let z = if a == b { c(r.gen_range(-1.0..1.0), 0.0) } else { random_c(&mut r) };
                j[(a, b)] = z;
                j[(b, a)] = z.conj();
            }
        }
    }
    let h = hamiltonian_from_couplings(&d, &basis, &j).unwrap();
    let back = extract_couplings(&d, &basis, &h).unwrap();
    assert!((back.matrix - j).norm() < 1e-10);
}
