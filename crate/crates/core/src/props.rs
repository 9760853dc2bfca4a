//! Randomized property battery over the standard desk-scale doubles.
//!
//! Every check is deterministic given the seed. The summary is plain data so the
//! CLI can emit it as JSON.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::{Algebra, Element, SiteAlgebra};
use crate::couplings::{build_adapted_basis, dual_pair, extract_couplings, AdaptedBasis};
use crate::doubles::{
    build_classical_double, build_clifford_double, build_gauge_double, build_grassmann_double,
    build_parafermion_double, build_spin_double, verify_qdouble, BondLattice, Double, FiniteGroupTable,
    ReflectionLattice,
};
use crate::error::Result;
use crate::linalg::{self, CMatrix};
use crate::models::hamiltonian_from_couplings;
use crate::rp::{self, Status};

/// Tolerance for algebraic identities.
pub const IDENTITY_TOL: f64 = 1e-12;
/// Tolerance for coupling round trips.
pub const ROUND_TRIP_TOL: f64 = 1e-10;
/// Relative tolerance for Gram eigenvalues.
pub const GRAM_TOL: f64 = 1e-9;
/// J⁰ eigenvalue below which a witness is required.
pub const INDEFINITE_MARGIN: f64 = 1e-6;

/// β values of the equivalence trials.
pub fn equivalence_betas() -> Vec<f64> {
    let mut b = vec![0.0];
    b.extend((-4..=2).map(|k| 2f64.powi(k)));
    b
}

/// One double per family at desk scale.
pub fn standard_doubles() -> Result<Vec<Double>> {
    let chain = ReflectionLattice::chain(2, false);
    Ok(vec![
        build_spin_double(&ReflectionLattice::chain(1, false), 2, &CMatrix::identity(2, 2))?,
        build_clifford_double(&chain, 1, None, None)?,
        build_grassmann_double(&chain, 1, None, None)?,
        build_parafermion_double(3, &chain, None)?,
        build_gauge_double(&FiniteGroupTable::cyclic(2)?, &BondLattice::rectangle(1, 2)?)?,
        build_classical_double(&ReflectionLattice::chain(1, false), SiteAlgebra::cyclic(3)?)?,
    ])
}

/// The 2+2 doubles on which duality is checked exhaustively.
pub fn duality_doubles() -> Result<Vec<Double>> {
    let chain = ReflectionLattice::chain(2, false);
    Ok(vec![
        build_clifford_double(&chain, 1, None, None)?,
        build_parafermion_double(3, &chain, None)?,
        build_grassmann_double(&chain, 1, None, None)?,
    ])
}

/// Shape of a random coupling matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingKind {
    /// Hermitian with independent uniform entries; J⁰ is generically indefinite.
    Hermitian,
    /// J⁰ positive semidefinite, unit row and column arbitrary.
    PsdJ0,
    /// The whole matrix positive semidefinite (−H in the closed cone).
    Cone,
}

fn random_c(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Random degree-compatible Hermitian coupling matrix over an adapted basis.
pub fn random_couplings(basis: &AdaptedBasis, rng: &mut ChaCha8Rng, kind: CouplingKind) -> CMatrix {
    let n = basis.len();
    let mut j = CMatrix::zeros(n, n);
    let p = basis.degrees.iter().max().map_or(1, |d| d + 1);
    for k in 0..p {
        let all = basis.indices_of_degree(k);
        let idx: Vec<usize> = match kind {
            CouplingKind::Cone => all.clone(),
            _ => all.iter().copied().filter(|&i| i != basis.unit).collect(),
        };
        let m = idx.len();
        if m == 0 {
            continue;
        }
        let block = match kind {
            CouplingKind::Hermitian => {
                let a = CMatrix::from_fn(m, m, |_, _| random_c(rng));
                (&a + a.adjoint()) * C64::new(0.5, 0.0)
            }
            CouplingKind::PsdJ0 | CouplingKind::Cone => {
                let r = rng.gen_range(1..=m);
                let a = CMatrix::from_fn(m, r, |_, _| random_c(rng));
                &a * a.adjoint() / C64::new(m as f64, 0.0)
            }
        };
        for (x, &i) in idx.iter().enumerate() {
            for (y, &l) in idx.iter().enumerate() {
                j[(i, l)] = block[(x, y)];
            }
        }
    }
    if kind != CouplingKind::Cone {
        let u = basis.unit;
        j[(u, u)] = C64::new(rng.gen_range(-1.0..1.0), 0.0);
        for i in basis.indices_of_degree(basis.degrees[u]) {
            if i != u {
                let z = random_c(rng);
                j[(u, i)] = z;
                j[(i, u)] = z.conj();
            }
        }
    }
    j
}

/// Random element supported on positive monomials of degree `k`.
fn random_plus(alg: &Algebra, rng: &mut ChaCha8Rng, k: usize, terms: usize) -> Result<Element> {
    let pool: Vec<usize> = alg
        .plus_monomials()
        .into_iter()
        .filter(|&m| alg.monomial_degree(m) == k)
        .collect();
    if pool.is_empty() {
        return Ok(alg.zero());
    }
    let picks: Vec<(usize, C64)> = (0..terms)
        .map(|_| (pool[rng.gen_range(0..pool.len())], random_c(rng)))
        .collect();
    alg.element(picks)
}

/// Outcome of one property over one double.
#[derive(Debug, Clone, Serialize)]
pub struct PropCheck {
    pub property: String,
    pub family: String,
    pub trials: usize,
    pub failures: usize,
    /// Largest deviation seen (property-specific; eigenvalue checks report the most negative value).
    pub max_deviation: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl PropCheck {
    fn new(property: &str, family: &str) -> Self {
        PropCheck {
            property: property.into(),
            family: family.into(),
            trials: 0,
            failures: 0,
            max_deviation: 0.0,
            passed: true,
            note: None,
        }
    }

    fn record(&mut self, ok: bool, deviation: f64) {
        self.trials += 1;
        if !ok {
            self.failures += 1;
            self.passed = false;
        }
        if deviation.is_nan() || deviation > self.max_deviation {
            self.max_deviation = deviation;
        }
    }

    fn fail(&mut self, note: String) {
        self.passed = false;
        self.failures += 1;
        self.note = Some(note);
    }
}

/// Θ² = Id, grading inversion and para-commutation.
pub fn structural(double: &Double) -> PropCheck {
    let mut c = PropCheck::new("structure", double.family.name());
    let r = verify_qdouble(&double.algebra);
    let dev = r.exchange_max_deviation.max(r.theta_max_deviation);
    c.record(r.passed(), dev);
    c
}

/// `Θ(Θ(A)∘B) = Θ(B)∘A` and `(Θ(A₁)∘B₁)(Θ(A₂)∘B₂) = Θ(A₁A₂)∘(B₁B₂)` on random homogeneous elements.
pub fn twisted_product_identities(double: &Double, rng: &mut ChaCha8Rng, trials: usize) -> Result<PropCheck> {
    let alg = &double.algebra;
    let mut c = PropCheck::new("twisted_product_identities", double.family.name());
    let p = alg.p();
    for _ in 0..trials {
        let k = rng.gen_range(0..p);
        let l = rng.gen_range(0..p);
        let a1 = random_plus(alg, rng, k, 3)?;
        let b1 = random_plus(alg, rng, k, 3)?;
        let a2 = random_plus(alg, rng, l, 3)?;
        let b2 = random_plus(alg, rng, l, 3)?;
        let lhs = alg.reflect(&alg.theta_twisted(&a1, &b1)?)?;
        let rhs = alg.theta_twisted(&b1, &a1)?;
        let d1 = lhs.max_abs_diff(&rhs)?;
        let lhs = alg.multiply(&alg.theta_twisted(&a1, &b1)?, &alg.theta_twisted(&a2, &b2)?)?;
        let rhs = alg.theta_twisted(&alg.multiply(&a1, &a2)?, &alg.multiply(&b1, &b2)?)?;
        let d2 = lhs.max_abs_diff(&rhs)?;
        let d = d1.max(d2);
        c.record(d <= IDENTITY_TOL, d);
    }
    Ok(c)
}

/// `τ(B̂_IJ B_I'J') = δ_II' δ_JJ'` over all degree-compatible index pairs.
pub fn duality(double: &Double) -> Result<PropCheck> {
    let alg = &double.algebra;
    let mut c = PropCheck::new("duality", double.family.name());
    let basis = build_adapted_basis(double)?;
    let n = basis.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| basis.degrees[i] == basis.degrees[j])
        .collect();
    let elems: Vec<(Element, Element)> = pairs.iter().map(|&(i, j)| dual_pair(alg, &basis, i, j)).collect();
    let rows = crate::par::map_range(elems.len(), |a| {
        elems
            .iter()
            .enumerate()
            .map(|(b, (bb, _))| {
                let v = double.background.pair(alg, &elems[a].1, bb)?;
                let want = if a == b { 1.0 } else { 0.0 };
                Ok((v - want).norm())
            })
            .collect::<Result<Vec<f64>>>()
    });
    for row in rows {
        for d in row? {
            c.record(d <= IDENTITY_TOL, d);
        }
    }
    Ok(c)
}

/// `extract ∘ reconstruct = id` on random Hermitian coupling matrices.
pub fn round_trip(double: &Double, basis: &AdaptedBasis, rng: &mut ChaCha8Rng, trials: usize) -> Result<PropCheck> {
    let mut c = PropCheck::new("round_trip", double.family.name());
    for _ in 0..trials {
        let j = random_couplings(basis, rng, CouplingKind::Hermitian);
        let h = hamiltonian_from_couplings(double, basis, &j)?;
        let back = extract_couplings(double, basis, &h)?;
        let d = (&back.matrix - &j).iter().map(|z| z.norm()).fold(0.0, f64::max);
        c.record(d <= ROUND_TRIP_TOL, d);
    }
    Ok(c)
}

/// Coupling criterion against the Gram test: PSD J⁰ gives PSD Gram blocks on every β,
/// and a clearly indefinite J⁰ yields a witness.
///
/// Trials alternate between PSD J⁰ and generic Hermitian J. The reported deviation
/// is the most negative relative Gram eigenvalue on PSD trials.
pub fn equivalence(double: &Double, basis: &AdaptedBasis, rng: &mut ChaCha8Rng, trials: usize) -> Result<PropCheck> {
    let mut c = PropCheck::new("equivalence", double.family.name());
    let betas = equivalence_betas();
    let (mut psd_trials, mut witness_trials) = (0, 0);
    for t in 0..trials {
        let kind = if t % 2 == 0 { CouplingKind::PsdJ0 } else { CouplingKind::Hermitian };
        let j = random_couplings(basis, rng, kind);
        let h = hamiltonian_from_couplings(double, basis, &j)?;
        let jm = extract_couplings(double, basis, &h)?;
        let spectrum = jm.j0_spectrum()?;
        let min = spectrum.first().copied().unwrap_or(0.0);
        let v = rp::verify_rp(double, basis, &h, &betas, GRAM_TOL)?;
        if min >= -GRAM_TOL * spectrum.iter().fold(1.0f64, |a, x| a.max(x.abs())) {
            psd_trials += 1;
            let worst = v
                .betas
                .iter()
                .flat_map(|b| b.blocks.iter().map(|k| k.min_eig / k.scale.max(f64::MIN_POSITIVE)))
                .fold(0.0f64, f64::min);
            c.record(v.rp && v.status == Status::Rp, -worst);
        } else if min < -INDEFINITE_MARGIN {
            witness_trials += 1;
            let ok = v.witness.as_ref().is_some_and(|w| w.value < -GRAM_TOL);
            c.record(ok, 0.0);
        }
    }
    c.note = Some(format!("{psd_trials} PSD trials, {witness_trials} witness trials"));
    Ok(c)
}

/// `G_{τ_H} − G_τ ⪰ 0` for random cone Hamiltonians.
pub fn dominance(double: &Double, basis: &AdaptedBasis, rng: &mut ChaCha8Rng, trials: usize) -> Result<PropCheck> {
    let mut c = PropCheck::new("dominance", double.family.name());
    for _ in 0..trials {
        let j = random_couplings(basis, rng, CouplingKind::Cone);
        let h = hamiltonian_from_couplings(double, basis, &j)?;
        let r = rp::dominance_check(double, basis, &h, GRAM_TOL)?;
        if !r.applicable {
            c.fail("random cone Hamiltonian was rejected by the cone test".into());
            continue;
        }
        c.record(r.dominated == Some(true), -r.min_eig.unwrap_or(0.0).min(0.0));
    }
    Ok(c)
}

/// Dimension sum rule `dim ℋ + dim 𝒩 = dim 𝔄₊` at β = 1 for a PSD-J⁰ Hamiltonian.
pub fn hilbert_sum_rule(double: &Double, basis: &AdaptedBasis, rng: &mut ChaCha8Rng) -> Result<PropCheck> {
    let mut c = PropCheck::new("hilbert_sum_rule", double.family.name());
    let j = random_couplings(basis, rng, CouplingKind::PsdJ0);
    let h = hamiltonian_from_couplings(double, basis, &j)?;
    let f = crate::functionals::boltzmann(&double.background, &double.algebra, &h, 1.0)?;
    let g = rp::gram_matrix(double, &f, basis)?;
    let space = rp::os_hilbert_space(&g, GRAM_TOL)?;
    let ok = space.total_dim + space.null_dim == space.plus_dim && space.plus_dim == basis.len();
    c.record(ok, (space.total_dim + space.null_dim) as f64 - basis.len() as f64);
    Ok(c)
}

#[derive(Debug, Clone, Serialize)]
pub struct PropsSummary {
    pub seed: u64,
    pub trials: usize,
    pub corrupt_phase: bool,
    pub checks: Vec<PropCheck>,
    pub passed: bool,
}

/// Runs the battery. With `corrupt_phase` the exchange constant of every graded
/// double is replaced by `−q`, which the structural check must report.
pub fn run_props(seed: u64, trials: usize, corrupt_phase: bool) -> Result<PropsSummary> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    for double in standard_doubles()? {
        let double = if corrupt_phase {
            let q = double.algebra.exchange_q();
            double.with_exchange_override(-q)
        } else {
            double
        };
        checks.push(structural(&double));
        checks.push(twisted_product_identities(&double, &mut rng, trials)?);
        if corrupt_phase {
            continue;
        }
        let basis = build_adapted_basis(&double)?;
        checks.push(round_trip(&double, &basis, &mut rng, trials)?);
        checks.push(equivalence(&double, &basis, &mut rng, trials)?);
        checks.push(dominance(&double, &basis, &mut rng, trials)?);
        checks.push(hilbert_sum_rule(&double, &basis, &mut rng)?);
    }
    if !corrupt_phase {
        for double in duality_doubles()? {
            checks.push(duality(&double)?);
        }
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(PropsSummary {
        seed,
        trials,
        corrupt_phase,
        checks,
        passed,
    })
}

/// Most negative eigenvalue of the Hermitian part, relative to the spectral scale.
pub fn relative_min_eig(m: &CMatrix) -> Result<f64> {
    let v = linalg::psd_check(m, GRAM_TOL)?;
    Ok(v.min_eig / v.scale.max(f64::MIN_POSITIVE))
}
