//! Hamiltonian builders for the standard examples on small lattices.
//!
//! Every builder returns the double together with `H` and checks `Θ(H) = H`
//! before returning. Sums written as `Σ_{λ≠λ'}` run over ordered pairs.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::algebra::{Element, Side, SiteAlgebra, Sparse};
use crate::couplings::AdaptedBasis;
use crate::doubles::{
    build_classical_double_with_flip, build_gauge_double, build_parafermion_double, build_spin_double_with_site,
    BondLattice, Double, Family, FiniteGroupTable, ReflectionLattice,
};
use crate::error::{param, Error, Result};
use crate::functionals::reflection_defect;
use crate::linalg::{self, CMatrix};

const INVARIANCE_TOL: f64 = 1e-12;
const FIELD_TOL: f64 = 1e-10;
/// Largest number of point configurations enumerated for one multi-site function.
const MAX_CONFIGURATIONS: usize = 1 << 22;

/// A double together with a Hamiltonian on it.
#[derive(Debug, Clone)]
pub struct Model {
    pub name: String,
    pub double: Double,
    pub hamiltonian: Element,
}

fn finish(name: impl Into<String>, double: Double, h: Element) -> Result<Model> {
    let defect = reflection_defect(&double.algebra, &h)?;
    if defect > INVARIANCE_TOL * h.max_abs().max(1.0) {
        return Err(Error::ConstraintViolation(format!(
            "the Hamiltonian is not reflection invariant (|Θ(H) − H| = {defect:e})"
        )));
    }
    Ok(Model {
        name: name.into(),
        double,
        hamiltonian: h,
    })
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

/// Inner-product weights of the structural basis under the normalized module trace.
fn basis_weights(site: &SiteAlgebra) -> Result<Vec<f64>> {
    let module = site
        .module
        .as_ref()
        .ok_or_else(|| Error::ConstraintViolation("site has no matrix module".into()))?;
    Ok(module.norms.iter().map(|n| n / module.dim as f64).collect())
}

/// Attaches the preferred basis `[1, named…, completion…]` to a site.
///
/// The named elements must be orthonormal and orthogonal to the unit under the
/// normalized trace. The completion orthonormalizes the structural basis against them.
fn with_named_basis(site: SiteAlgebra, named: Vec<(String, Sparse)>) -> std::result::Result<SiteAlgebra, String> {
    let w = basis_weights(&site).map_err(|e| e.to_string())?;
    let n = site.dim();
    let dense = |s: &Sparse| {
        let mut v = vec![C64::new(0.0, 0.0); n];
        for &(a, c) in s {
            v[a] += c;
        }
        v
    };
    let inner = |x: &[C64], y: &[C64]| -> C64 { (0..n).map(|a| x[a].conj() * y[a] * w[a]).sum() };
    let mut labels = vec!["1".to_string()];
    let mut vecs = vec![dense(&vec![(0, one())])];
    for (label, s) in named {
        let v = dense(&s);
        for (k, u) in vecs.iter().enumerate() {
            let c = inner(u, &v);
            if c.norm() > FIELD_TOL {
                return Err(format!("`{label}` is not orthogonal to `{}` (overlap {c})", labels[k]));
            }
        }
        let norm = inner(&v, &v).re;
        if (norm - 1.0).abs() > FIELD_TOL {
            return Err(format!("`{label}` is not normalized (mean square {norm})"));
        }
        labels.push(label);
        vecs.push(v);
    }
    let mut extra = 0;
    for a in 0..n {
        if vecs.len() == n {
            break;
        }
        let mut v = vec![C64::new(0.0, 0.0); n];
        v[a] = one();
        for u in &vecs {
            let c = inner(u, &v);
            for (vi, ui) in v.iter_mut().zip(u) {
                *vi -= c * ui;
            }
        }
        let norm = inner(&v, &v).re.sqrt();
        if norm > 1e-8 {
            for vi in &mut v {
                *vi /= norm;
            }
            extra += 1;
            labels.push(format!("b{extra}"));
            vecs.push(v);
        }
    }
    let elements = vecs
        .into_iter()
        .map(|v| {
            v.into_iter()
                .enumerate()
                .filter(|(_, c)| c.norm() > 1e-14)
                .collect::<Sparse>()
        })
        .collect();
    Ok(site.with_preferred(labels, elements))
}

/// Expands `f(ω_{s₁}, …, ω_{s_k})` over function-algebra slots as an element.
///
/// Each slot must carry a complete diagonal basis; the expansion is a separable
/// transform along each slot axis.
pub fn function_element<F: Fn(&[usize]) -> C64>(alg: &crate::algebra::Algebra, slots: &[usize], f: F) -> Result<Element> {
    let mut dims = Vec::with_capacity(slots.len());
    let mut transforms = Vec::with_capacity(slots.len());
    for (i, &s) in slots.iter().enumerate() {
        if s >= alg.slots().len() || slots[..i].contains(&s) {
            return Err(param("slots", "must be distinct slot indices"));
        }
        let site = &alg.slots()[s].site;
        let module = site
            .module
            .as_ref()
            .filter(|m| m.diagonal && m.dim == site.dim())
            .ok_or_else(|| Error::ConstraintViolation(format!("slot {} is not a complete function algebra", alg.slots()[s].label)))?;
        let r = module.dim;
        let mut t = vec![vec![C64::new(0.0, 0.0); r]; r];
        for (a, row) in t.iter_mut().enumerate() {
            let v = site.point_values(a).expect("diagonal module");
            for x in 0..r {
                row[x] = v[x].conj() / module.norms[a];
            }
        }
        dims.push(r);
        transforms.push(t);
    }
    let total = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d).filter(|&t| t <= MAX_CONFIGURATIONS));
    let total = total.ok_or_else(|| Error::Resource(format!("more than {MAX_CONFIGURATIONS} configurations")))?;
    let mut values: Vec<C64> = Vec::with_capacity(total);
    let mut point = vec![0usize; dims.len()];
    for idx in 0..total {
        let mut rem = idx;
        for k in (0..dims.len()).rev() {
            point[k] = rem % dims[k];
            rem /= dims[k];
        }
        values.push(f(&point));
    }
    let mut stride = total;
    for (axis, t) in transforms.iter().enumerate() {
        let r = dims[axis];
        stride /= r;
        let mut out = vec![C64::new(0.0, 0.0); total];
        for outer in 0..total / (r * stride) {
            let base = outer * r * stride;
            for (a, row) in t.iter().enumerate() {
                for inner in 0..stride {
                    let mut acc = C64::new(0.0, 0.0);
                    for (x, c) in row.iter().enumerate() {
                        acc += c * values[base + x * stride + inner];
                    }
                    out[base + a * stride + inner] = acc;
                }
            }
        }
        values = out;
    }
    let mut locals = vec![0usize; alg.slots().len()];
    let mut terms = Vec::new();
    for (idx, c) in values.into_iter().enumerate() {
        if c.norm() <= 1e-14 {
            continue;
        }
        let mut rem = idx;
        for k in (0..dims.len()).rev() {
            locals[slots[k]] = rem % dims[k];
            rem /= dims[k];
        }
        terms.push((alg.encode(&locals), c));
    }
    alg.element(terms)
}

/// Classical site on `r` points whose preferred basis starts with the given fields.
fn field_site(fields: &[Vec<f64>]) -> Result<SiteAlgebra> {
    let r = fields.first().map_or(0, |f| f.len());
    if r < 2 || fields.iter().any(|f| f.len() != r || f.iter().any(|x| !x.is_finite())) {
        return Err(Error::InvalidField(
            "fields must be finite and share a sample space of at least two points".into(),
        ));
    }
    let rn = r as f64;
    for (a, fa) in fields.iter().enumerate() {
        let mean = fa.iter().sum::<f64>() / rn;
        if mean.abs() > FIELD_TOL {
            return Err(Error::InvalidField(format!("field {a} is not centered (mean {mean})")));
        }
        for (b, fb) in fields.iter().enumerate() {
            let cov = fa.iter().zip(fb).map(|(x, y)| x * y).sum::<f64>() / rn;
            let want = if a == b { 1.0 } else { 0.0 };
            if (cov - want).abs() > FIELD_TOL {
                return Err(Error::InvalidField(format!(
                    "covariance of fields {a} and {b} is {cov}, expected {want}"
                )));
            }
        }
    }
    let site = SiteAlgebra::cyclic(r)?;
    let named = fields
        .iter()
        .enumerate()
        .map(|(a, f)| {
            let values: Vec<C64> = f.iter().map(|&x| C64::new(x, 0.0)).collect();
            (format!("phi{}", a + 1), site.expand_function(&values).expect("diagonal module"))
        })
        .collect();
    with_named_basis(site, named).map_err(Error::InvalidField)
}

/// Point involution ρ with `φ^a ∘ ρ = s^a φ^a`, or `None` when every sign is `+1`.
fn field_flip(fields: &[Vec<f64>], signs: &[i8]) -> Result<Option<Vec<usize>>> {
    if signs.len() != fields.len() || signs.iter().any(|s| s.abs() != 1) {
        return Err(param("signs", "need one sign ±1 per field"));
    }
    if signs.iter().all(|&s| s == 1) {
        return Ok(None);
    }
    let r = fields[0].len();
    let mut flip = Vec::with_capacity(r);
    for x in 0..r {
        let y = (0..r)
            .find(|&y| {
                fields
                    .iter()
                    .zip(signs)
                    .all(|(f, &s)| (f[y] - f64::from(s) * f[x]).abs() < FIELD_TOL)
            })
            .ok_or_else(|| Error::InvalidField(format!("no sample point realizes the sign flip of point {x}")))?;
        flip.push(y);
    }
    if (0..r).any(|x| flip[flip[x]] != x) {
        return Err(Error::InvalidField("the sign flip is not an involution of the sample points".into()));
    }
    Ok(Some(flip))
}

/// `−H = Σ_{λ≠λ'} Σ_{ab} J^{ab}_{λλ'} φ^a_λ φ^b_{λ'} + Σ_λ V_λ(ω_λ)`.
///
/// `fields[a][x]` is the value of `φ^a` at sample point `x` (uniform measure); the
/// reflection sends `φ^a` to `s^a φ^a`. `coupling(λ, λ', a, b)` returns `J^{ab}_{λλ'}`.
/// `potential` is empty or holds one table per site.
pub fn long_range_pair_model<F>(
    lattice: &ReflectionLattice,
    fields: &[Vec<f64>],
    signs: &[i8],
    coupling: F,
    potential: &[Vec<f64>],
) -> Result<Model>
where
    F: Fn(usize, usize, usize, usize) -> f64,
{
    if fields.is_empty() {
        return Err(Error::InvalidField("at least one field is required".into()));
    }
    let site = field_site(fields)?;
    let flip = field_flip(fields, signs)?;
    if flip.is_some() && lattice.has_fixed_points() {
        return Err(param("signs", "sites on the reflection plane require every sign to be +1"));
    }
    let r = fields[0].len();
    if !potential.is_empty() && (potential.len() != lattice.len() || potential.iter().any(|v| v.len() != r)) {
        return Err(param("potential", format!("need {} tables of {r} values", lattice.len())));
    }
    let field_elems: Vec<Sparse> = site.preferred_basis().1[1..=fields.len()].to_vec();
    let double = build_classical_double_with_flip(lattice, site, flip.as_deref())?;
    let alg = &double.algebra;
    let n = lattice.len();
    let phi: Vec<Vec<Element>> = (0..n)
        .map(|l| field_elems.iter().map(|e| alg.local_combination(l, e)).collect())
        .collect();
    let mut minus_h = alg.zero();
    for l in 0..n {
        for lp in 0..n {
            if l == lp {
                continue;
            }
            for a in 0..fields.len() {
                for b in 0..fields.len() {
                    let j = coupling(l, lp, a, b);
                    if j != 0.0 {
                        minus_h.axpy(C64::new(j, 0.0), &alg.multiply(&phi[l][a], &phi[lp][b])?)?;
                    }
                }
            }
        }
    }
    for (l, v) in potential.iter().enumerate() {
        let values: Vec<C64> = v.iter().map(|&x| C64::new(x, 0.0)).collect();
        minus_h.axpy(one(), &function_element(alg, &[l], |x| values[x[0]])?)?;
    }
    finish("long_range_pair", double, minus_h.neg())
}

/// Pair interaction `h(ω_a, ω_b)` on the bond from `a` to `b`; `table[x][y] = h(x, y)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub table: Vec<Vec<C64>>,
}

/// Nearest-neighbour model and, when the lattice meets the plane, the split `H = Θ(H₊) + H₊`.
#[derive(Debug, Clone)]
pub struct NearestNeighborModel {
    pub model: Model,
    pub plus: Option<Element>,
}

/// `−H = Σ_bonds h(ω_a, ω_b) + Σ_λ V_λ(ω_λ)` on a lattice with unit nearest-neighbour spacing.
///
/// Each bond is listed once. When Λ₀ is non-empty the split uses weight ½ on
/// bonds and potentials lying entirely in Λ₀.
pub fn nearest_neighbor_classical(
    lattice: &ReflectionLattice,
    site: SiteAlgebra,
    bonds: &[Bond],
    potentials: &[Vec<C64>],
) -> Result<NearestNeighborModel> {
    let r = site.module.as_ref().map_or(0, |m| m.dim);
    for (k, bond) in bonds.iter().enumerate() {
        if bond.a >= lattice.len() || bond.b >= lattice.len() || bond.a == bond.b {
            return Err(param("bonds", format!("bond {k} has invalid endpoints")));
        }
        if let Some(d) = lattice.distance(bond.a, bond.b) {
            if (d - 1.0).abs() > 1e-9 {
                return Err(param("bonds", format!("bond {k} joins sites at distance {d}, not 1")));
            }
        }
        if bond.table.len() != r || bond.table.iter().any(|row| row.len() != r) {
            return Err(param("bonds", format!("bond {k} needs an {r}x{r} table")));
        }
    }
    if !potentials.is_empty() && (potentials.len() != lattice.len() || potentials.iter().any(|v| v.len() != r)) {
        return Err(param("potential", format!("need {} tables of {r} values", lattice.len())));
    }
    let double = build_classical_double_with_flip(lattice, site, None)?;
    let alg = &double.algebra;
    let split = lattice.has_fixed_points();
    let mut minus_h = alg.zero();
    let mut minus_h_plus = alg.zero();
    let in_plus = |l: usize| lattice.side(l) != Side::Minus;
    let weight = |ls: &[usize]| if ls.iter().all(|&l| lattice.side(l) == Side::Zero) { 0.5 } else { 1.0 };
    for bond in bonds {
        let e = function_element(alg, &[bond.a, bond.b], |x| bond.table[x[0]][x[1]])?;
        minus_h.axpy(one(), &e)?;
        if split {
            let (pa, pb) = (in_plus(bond.a), in_plus(bond.b));
            let (ma, mb) = (lattice.side(bond.a) != Side::Plus, lattice.side(bond.b) != Side::Plus);
            if !(pa && pb) && !(ma && mb) {
                return Err(Error::InvalidLattice("a bond jumps across the reflection plane".into()));
            }
            if pa && pb {
                minus_h_plus.axpy(C64::new(weight(&[bond.a, bond.b]), 0.0), &e)?;
            }
        }
    }
    for (l, v) in potentials.iter().enumerate() {
        let e = function_element(alg, &[l], |x| v[x[0]])?;
        minus_h.axpy(one(), &e)?;
        if split && in_plus(l) {
            minus_h_plus.axpy(C64::new(weight(&[l]), 0.0), &e)?;
        }
    }
    let h = minus_h.neg();
    let plus = if split {
        let h_plus = minus_h_plus.neg();
        let total = alg.reflect(&h_plus)?.plus(&h_plus)?;
        let dev = total.max_abs_diff(&h)?;
        if dev > INVARIANCE_TOL * h.max_abs().max(1.0) {
            return Err(Error::ConstraintViolation(format!(
                "H is not reflection invariant; Θ(H₊) + H₊ misses H by {dev:e}"
            )));
        }
        Some(h_plus)
    } else {
        None
    };
    let model = finish("nearest_neighbor_classical", double, h)?;
    Ok(NearestNeighborModel { model, plus })
}

/// Hermitian spin matrices `(S^x, S^y, S^z)` of the highest-weight representation of spin `s = two_s / 2`.
///
/// `π(e)`, `π(f)`, `π(h)` are real, so `S^x` and `S^z` are real and `S^y` is imaginary.
pub fn spin_matrices(two_s: usize) -> [CMatrix; 3] {
    let n = two_s + 1;
    let s = two_s as f64 / 2.0;
    let mut e = CMatrix::zeros(n, n);
    let mut h = CMatrix::zeros(n, n);
    for k in 0..n {
        let m = s - k as f64;
        h[(k, k)] = C64::new(2.0 * m, 0.0);
        if k > 0 {
            // e |m⟩ = √((s − m)(s + m + 1)) |m + 1⟩
            e[(k - 1, k)] = C64::new(((s - m) * (s + m + 1.0)).sqrt(), 0.0);
        }
    }
    let f = e.transpose();
    let sx = (&e + &f) * C64::new(0.5, 0.0);
    let sy = (&e - &f) * C64::new(0.0, -0.5);
    let sz = h * C64::new(0.5, 0.0);
    [sx, sy, sz]
}

/// Largest chain half handled by [`heisenberg_model`].
pub const MAX_HEISENBERG_SITES_PER_SIDE: usize = 3;

/// Long-range Heisenberg chain `−H = J Σ_{λ≠λ'} |λ−λ'|^{−v} Σ_a S^a_λ S^a_{λ'}`.
///
/// Sites sit at `±(k + ½)`; the reflection is `Θ(A) = conj(R A R⁻¹)` on the mirror site
/// with `R = exp(iπ S^y)`. The preferred site basis starts with `S^a / c`, `c² = s(s+1)/3`.
pub fn heisenberg_model(sites_per_side: usize, two_s: usize, j: f64, v: f64) -> Result<Model> {
    if sites_per_side == 0 || sites_per_side > MAX_HEISENBERG_SITES_PER_SIDE {
        return Err(Error::Resource(format!(
            "sites per side must be between 1 and {MAX_HEISENBERG_SITES_PER_SIDE}"
        )));
    }
    if !(1..=3).contains(&two_s) {
        return Err(param("spin", "supported spins are 1/2, 1 and 3/2"));
    }
    if !j.is_finite() {
        return Err(param("j", "must be finite"));
    }
    if !(v.is_finite() && v >= 0.0) {
        return Err(param("v", "must be finite and nonnegative"));
    }
    let n = two_s + 1;
    let s = two_s as f64 / 2.0;
    let spins = spin_matrices(two_s);
    let r = linalg::mat_exp(&(&spins[1] * C64::new(0.0, PI)))?;
    let c = (s * (s + 1.0) / 3.0).sqrt();
    let base = SiteAlgebra::clock_shift(n)?;
    let named = ["Sx", "Sy", "Sz"]
        .iter()
        .zip(&spins)
        .map(|(l, m)| (l.to_string(), base.expand_matrix(&(m / C64::new(c, 0.0))).expect("matrix module")))
        .collect();
    let site = with_named_basis(base, named).map_err(Error::ConstraintViolation)?;
    let spin_elems: Vec<Sparse> = site
        .preferred_basis()
        .1
        .iter()
        .skip(1)
        .take(3)
        .map(|e| e.iter().map(|&(a, z)| (a, z * c)).collect())
        .collect();
    let lattice = ReflectionLattice::chain(sites_per_side, false);
    let double = build_spin_double_with_site(&lattice, site, &r)?;
    let alg = &double.algebra;
    let sites = lattice.len();
    let ops: Vec<Vec<Element>> = (0..sites)
        .map(|l| spin_elems.iter().map(|e| alg.local_combination(l, e)).collect())
        .collect();
    let mut minus_h = alg.zero();
    for l in 0..sites {
        for lp in 0..sites {
            if l == lp {
                continue;
            }
            let d = lattice.distance(l, lp).expect("chain has coordinates");
            let w = C64::new(j * d.powf(-v), 0.0);
            for a in 0..3 {
                minus_h.axpy(w, &alg.multiply(&ops[l][a], &ops[lp][a])?)?;
            }
        }
    }
    finish("heisenberg", double, minus_h.neg())
}

/// `H = −Σ J_IJ B_IJ` for a Hermitian coupling matrix over an adapted basis.
///
/// Entries joining different degrees are rejected, since `B_IJ` would not be neutral.
pub fn hamiltonian_from_couplings(double: &Double, basis: &AdaptedBasis, j: &CMatrix) -> Result<Element> {
    let n = basis.len();
    if j.nrows() != n || j.ncols() != n {
        return Err(param("couplings", format!("must be {n}x{n} to match the adapted basis")));
    }
    if j.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(param("couplings", "entries must be finite"));
    }
    let dev = linalg::hermitian_deviation(j);
    if dev > INVARIANCE_TOL * j.norm().max(1.0) {
        return Err(param("couplings", format!("matrix must be Hermitian (deviation {dev:e})")));
    }
    for a in 0..n {
        for b in 0..n {
            if basis.degrees[a] != basis.degrees[b] && j[(a, b)] != C64::new(0.0, 0.0) {
                return Err(Error::Grading(format!(
                    "coupling ({a}, {b}) joins degrees {} and {}",
                    basis.degrees[a], basis.degrees[b]
                )));
            }
        }
    }
    let cm = crate::couplings::CouplingMatrix {
        matrix: j.clone(),
        degrees: basis.degrees.clone(),
        labels: basis.labels.clone(),
        unit: basis.unit,
    };
    crate::couplings::reconstruct(double, basis, &cm)
}

/// Parafermion chain with `−H = Σ J_IJ B_IJ` over the adapted basis of the double.
pub fn parafermion_chain(
    p: usize,
    sites_per_side: usize,
    couplings: &CMatrix,
    zeta: Option<C64>,
) -> Result<Model> {
    let lattice = ReflectionLattice::chain(sites_per_side, false);
    let double = build_parafermion_double(p, &lattice, zeta)?;
    let basis = crate::couplings::build_adapted_basis(&double)?;
    let h = hamiltonian_from_couplings(&double, &basis, couplings)?;
    finish("parafermion_chain", double, h)
}

/// Term `coeff · ψ_{m₁} ψ_{m₂} ⋯` of `−H`, with modes named by slot label.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FermionTerm {
    pub coeff: C64,
    pub modes: Vec<String>,
}

/// `−H = Σ coeff · ψ_{m₁} ⋯ ψ_{m_k}` in a Grassmann or Clifford double.
///
/// Every term must contain an even number of generators.
pub fn fermion_hamiltonian(double: Double, terms: &[FermionTerm]) -> Result<Model> {
    if !matches!(double.family, Family::Grassmann | Family::Clifford) {
        return Err(param("family", "fermion Hamiltonians need a Grassmann or Clifford double"));
    }
    let alg = &double.algebra;
    let mut minus_h = alg.zero();
    for (k, term) in terms.iter().enumerate() {
        if term.modes.len() % 2 != 0 {
            return Err(Error::Grading(format!("term {k} has an odd number of generators")));
        }
        let mut e = alg.scalar(term.coeff);
        for m in &term.modes {
            let slot = alg
                .slots()
                .iter()
                .position(|s| &s.label == m)
                .ok_or_else(|| param("modes", format!("term {k}: unknown mode `{m}`")))?;
            e = alg.multiply(&e, &alg.local(slot, 1))?;
        }
        minus_h.axpy(one(), &e)?;
    }
    let name = format!("{}_fermion", double.family.name());
    let h = minus_h.neg();
    finish(name, double, h)
}

/// Upper bound on the number of unit plaquettes for [`wilson_action`].
pub const MAX_PLAQUETTES: usize = 4;

/// `H = −S_YM / (2 g₀²)` with `S_YM = Σ_P [χ(U_P) + χ(U_P⁻¹)]` over the unit plaquettes.
///
/// `U_P` is the holonomy of the chosen irrep along the eight half-bonds of the midpoint
/// refinement; the second term is the reversed orientation.
pub fn wilson_action(group: &FiniteGroupTable, lattice: &BondLattice, irrep: &str, g0: f64) -> Result<Model> {
    if !(g0.is_finite() && g0 != 0.0) {
        return Err(param("g0", "must be finite and nonzero"));
    }
    let rho = group
        .irrep_index(irrep)
        .map(|k| &group.irreps()[k])
        .ok_or_else(|| param("irrep", format!("unknown irrep `{irrep}`")))?;
    let plaquettes = lattice.unit_plaquettes();
    if plaquettes.len() > MAX_PLAQUETTES {
        return Err(Error::Resource(format!(
            "{} plaquettes exceed the limit of {MAX_PLAQUETTES}",
            plaquettes.len()
        )));
    }
    let double = build_gauge_double(group, lattice)?;
    let alg = &double.algebra;
    let refined = lattice.refine();
    let chi: Vec<C64> = rho.mats.iter().map(|m| m.trace()).collect();
    let mut action = alg.zero();
    for cycle in &plaquettes {
        let mut steps = Vec::with_capacity(8);
        for i in 0..4 {
            let (u, v) = (cycle[i], cycle[(i + 1) % 4]);
            let k = lattice.bond_between(u, v).expect("plaquette edges are bonds");
            let m = lattice.midpoint(k);
            for (a, b) in [(u, m), (m, v)] {
                let hb = BondLattice::find_half_bond(&refined, a, b).expect("refinement covers every bond");
                steps.push(hb);
            }
        }
        let slots: Vec<usize> = steps.iter().map(|s| s.0).collect();
        let e = function_element(alg, &slots, |x| {
            let mut g = group.identity();
            for (pos, &(_, forward)) in steps.iter().enumerate() {
                let h = if forward { x[pos] } else { group.inv(x[pos]) };
                g = group.mul(g, h);
            }
            chi[g] + chi[group.inv(g)]
        })?;
        action.axpy(one(), &e)?;
    }
    let h = action.scaled(C64::new(-1.0 / (2.0 * g0 * g0), 0.0));
    finish("wilson", double, h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spin_half_matrices_are_pauli_halves() {
        let [sx, sy, sz] = spin_matrices(1);
        assert!((sx[(0, 1)] - 0.5).norm() < 1e-15);
        assert!((sy[(0, 1)] - C64::new(0.0, -0.5)).norm() < 1e-15);
        assert!((sz[(0, 0)] - 0.5).norm() < 1e-15);
        assert!((sz[(1, 1)] + 0.5).norm() < 1e-15);
    }

    #[test]
    fn field_validation() {
        assert!(matches!(field_site(&[vec![1.0, 1.0]]), Err(Error::InvalidField(_))));
        assert!(matches!(field_site(&[vec![2.0, -2.0]]), Err(Error::InvalidField(_))));
        assert!(field_site(&[vec![1.0, -1.0]]).is_ok());
    }

    #[test]
    fn odd_fermion_term_is_rejected() {
        let lat = ReflectionLattice::chain(1, false);
        let d = crate::doubles::build_clifford_double(&lat, 1, None, None).unwrap();
        let t = FermionTerm { coeff: one(), modes: vec!["0.5".into()] };
        assert!(matches!(fermion_hamiltonian(d, &[t]), Err(Error::Grading(_))));
    }
}
