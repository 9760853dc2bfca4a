use num_complex::Complex64 as C64;
use proptest::prelude::*;

use rpcheck::algebra::{Algebra, Element};
use rpcheck::couplings::{build_adapted_basis, extract_couplings};
use rpcheck::doubles::{build_clifford_double, build_parafermion_double, Double, ReflectionLattice};
use rpcheck::linalg::CMatrix;
use rpcheck::models::hamiltonian_from_couplings;

fn parafermion() -> Double {
    build_parafermion_double(3, &ReflectionLattice::chain(1, false), None).unwrap()
}

fn clifford() -> Double {
    build_clifford_double(&ReflectionLattice::chain(2, false), 1, None, None).unwrap()
}

fn coeffs(len: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len)
}

fn element(alg: &Algebra, c: &[(f64, f64)]) -> Element {
    alg.from_dense(&c.iter().map(|&(re, im)| C64::new(re, im)).collect::<Vec<_>>())
}

const TOL: f64 = 1e-12;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_is_associative(a in coeffs(9), b in coeffs(9), c in coeffs(9)) {
        let d = parafermion();
        let alg = &d.algebra;
        let (a, b, c) = (element(alg, &a), element(alg, &b), element(alg, &c));
        let left = alg.multiply(&alg.multiply(&a, &b).unwrap(), &c).unwrap();
        let right = alg.multiply(&a, &alg.multiply(&b, &c).unwrap()).unwrap();
        prop_assert!(left.max_abs_diff(&right).unwrap() < TOL);
    }

    #[test]
    fn reflection_is_an_antilinear_involutive_homomorphism(
        a in coeffs(16), b in coeffs(16), re in -2.0f64..2.0, im in -2.0f64..2.0
    ) {
        let d = clifford();
        let alg = &d.algebra;
        let (a, b) = (element(alg, &a), element(alg, &b));
        let z = C64::new(re, im);
        let twice = alg.reflect(&alg.reflect(&a).unwrap()).unwrap();
        prop_assert!(twice.max_abs_diff(&a).unwrap() < TOL);
        let prod = alg.reflect(&alg.multiply(&a, &b).unwrap()).unwrap();
        let split = alg.multiply(&alg.reflect(&a).unwrap(), &alg.reflect(&b).unwrap()).unwrap();
        prop_assert!(prod.max_abs_diff(&split).unwrap() < TOL);
        let scaled = alg.reflect(&a.scaled(z)).unwrap();
        let conj = alg.reflect(&a).unwrap().scaled(z.conj());
        prop_assert!(scaled.max_abs_diff(&conj).unwrap() < TOL);
    }

    #[test]
    fn couplings_round_trip_for_hermitian_input(entries in coeffs(64)) {
        let d = clifford();
        let basis = build_adapted_basis(&d).unwrap();
        let n = basis.len();
        let mut j = CMatrix::zeros(n, n);
        for i in 0..n {
            for k in 0..n {
                if basis.degrees[i] != basis.degrees[k] || k < i {
                    continue;
                }
                let (re, im) = entries[(i * n + k) % entries.len()];
                let z = if i == k { C64::new(re, 0.0) } else { C64::new(re, im) };
                j[(i, k)] = z;
                j[(k, i)] = z.conj();
            }
        }
        let h = hamiltonian_from_couplings(&d, &basis, &j).unwrap();
        let back = extract_couplings(&d, &basis, &h).unwrap();
        let err = (&back.matrix - &j).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-10, "error {err}");
    }
}
