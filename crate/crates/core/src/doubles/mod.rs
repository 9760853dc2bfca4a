//! Constructors for the q-double families and the structural self-check.

mod group;
mod lattice;

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

pub use group::{FiniteGroupTable, Irrep, IrrepSpec};
pub use lattice::{BondLattice, HalfBond, ReflectionLattice};

use crate::algebra::{canonical_zeta, Algebra, AlgebraParts, SharpKind, Side, SiteAlgebra, Slot, SlotTerm};
use crate::error::{param, Error, Result};
use crate::functionals::Functional;
use crate::linalg::{self, CMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Spin,
    Grassmann,
    Clifford,
    Parafermion,
    Gauge,
    Classical,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Spin => "spin",
            Family::Grassmann => "grassmann",
            Family::Clifford => "clifford",
            Family::Parafermion => "parafermion",
            Family::Gauge => "gauge",
            Family::Classical => "classical",
        }
    }
}

/// A graded algebra with reflection together with its background functional.
#[derive(Debug, Clone)]
pub struct Double {
    pub family: Family,
    pub algebra: Algebra,
    pub background: Functional,
}

impl Double {
    /// Same double with the two halves exchanged and ζ conjugated.
    pub fn mirrored(&self) -> Double {
        let algebra = self.algebra.mirrored();
        let background = self.background.rebind(&algebra);
        Double {
            family: self.family,
            algebra,
            background,
        }
    }

    /// Copy whose exchange constant is replaced; for negative controls.
    pub fn with_exchange_override(&self, q: C64) -> Double {
        let algebra = self.algebra.with_exchange_override(q);
        let background = self.background.rebind(&algebra);
        Double {
            family: self.family,
            algebra,
            background,
        }
    }
}

fn unit_image(s: usize) -> Vec<SlotTerm> {
    vec![(s, 0, C64::new(1.0, 0.0))]
}

fn resolve_zeta(p: usize, zeta: Option<C64>) -> Result<C64> {
    match zeta {
        Some(z) => Ok(z),
        None => canonical_zeta(p),
    }
}

/// Slots in lattice order, one per site, sharing one local algebra.
fn site_slots(lattice: &ReflectionLattice, site: Arc<SiteAlgebra>) -> Vec<Slot> {
    (0..lattice.len())
        .map(|i| Slot {
            label: lattice.label(i).to_string(),
            side: lattice.side(i),
            mirror: lattice.theta(i),
            site: site.clone(),
        })
        .collect()
}

/// Matrix-algebra double `⊗_λ M_n(ℂ)` in the clock-shift basis with `Θ(A_λ) = conj(R A R⁻¹)_{ϑλ}`.
pub fn build_spin_double(lattice: &ReflectionLattice, n: usize, r: &CMatrix) -> Result<Double> {
    build_spin_double_with_site(lattice, SiteAlgebra::clock_shift(n)?, r)
}

/// Spin double over a caller-provided matrix-algebra site (e.g. with a preferred basis).
pub fn build_spin_double_with_site(
    lattice: &ReflectionLattice,
    site: SiteAlgebra,
    r: &CMatrix,
) -> Result<Double> {
    if lattice.has_fixed_points() {
        return Err(Error::InvalidLattice(
            "quantum spin doubles need a reflection without fixed sites".into(),
        ));
    }
    let module = site
        .module
        .as_ref()
        .ok_or_else(|| Error::ConstraintViolation("spin site needs a matrix module".into()))?;
    let n = module.dim;
    if site.dim() != n * n {
        return Err(Error::ConstraintViolation("spin site must span the full matrix algebra".into()));
    }
    if r.nrows() != n || r.ncols() != n {
        return Err(param("R", format!("must be {n}x{n}")));
    }
    let r_inv = r
        .clone()
        .try_inverse()
        .filter(|_| linalg::rank(r, 1e-12).map(|k| k == n).unwrap_or(false))
        .ok_or_else(|| param("R", "must be invertible"))?;
    // Θ² = Id needs conj(R) R to be a multiple of the identity.
    let rr = r.map(|z| z.conj()) * r;
    let c = rr[(0, 0)];
    if (rr - CMatrix::identity(n, n) * c).norm() > 1e-10 * c.norm().max(1.0) {
        return Err(param("R", "conj(R)·R must be proportional to the identity"));
    }
    let images: Vec<_> = (0..site.dim())
        .map(|a| {
            let m = site.module_matrix(a).expect("module");
            let img = (r * m * &r_inv).map(|z| z.conj());
            site.expand_matrix(&img).expect("module")
        })
        .collect();
    let site = Arc::new(site);
    let slots = site_slots(lattice, site);
    let theta = slots
        .iter()
        .enumerate()
        .map(|(s, slot)| {
            images
                .iter()
                .enumerate()
                .map(|(a, img)| {
                    if a == 0 {
                        unit_image(s)
                    } else {
                        img.iter().map(|&(b, c)| (slot.mirror, b, c)).collect()
                    }
                })
                .collect()
        })
        .collect();
    let algebra = Algebra::new(AlgebraParts {
        family: Family::Spin.name().into(),
        p: 1,
        zeta: C64::new(1.0, 0.0),
        exchange_q: C64::new(1.0, 0.0),
        slots,
        theta,
        sharp: SharpKind::Adjoint,
    })?;
    let background = Functional::product(&algebra, C64::new(1.0, 0.0));
    Ok(Double {
        family: Family::Spin,
        algebra,
        background,
    })
}

/// Parafermion double with generators `c_λ` of degree 1, `c_λ^p = 1` and `Θ(c_λ) = c_{ϑλ}^{-1}`.
pub fn build_parafermion_double(p: usize, lattice: &ReflectionLattice, zeta: Option<C64>) -> Result<Double> {
    if p < 2 {
        return Err(Error::UnsupportedGrading(p));
    }
    if !lattice.is_order_reversing() {
        return Err(Error::InvalidLattice(
            "parafermion doubles need an order-reversing reflection without fixed sites".into(),
        ));
    }
    let site = Arc::new(SiteAlgebra::parafermion(p)?);
    let slots = site_slots(lattice, site);
    let theta = slots
        .iter()
        .enumerate()
        .map(|(s, slot)| {
            (0..p)
                .map(|k| {
                    if k == 0 {
                        unit_image(s)
                    } else {
                        vec![(slot.mirror, p - k, C64::new(1.0, 0.0))]
                    }
                })
                .collect()
        })
        .collect();
    let algebra = Algebra::new(AlgebraParts {
        family: Family::Parafermion.name().into(),
        p,
        zeta: resolve_zeta(p, zeta)?,
        exchange_q: C64::from_polar(1.0, 2.0 * PI / p as f64),
        slots,
        theta,
        sharp: SharpKind::Adjoint,
    })?;
    let background = Functional::product(&algebra, C64::new(1.0, 0.0));
    Ok(Double {
        family: Family::Parafermion,
        algebra,
        background,
    })
}

/// Mode layout shared by the fermionic families.
///
/// Positive modes run over sites of Λ₊ ∪ Λ₀ in lattice order, then generator order.
/// Negative slot `j` mirrors positive mode `n₊ − 1 − j`, so negative slots come first
/// in reversed order.
struct ModeLayout {
    plus: Vec<(usize, usize)>,
    labels: Vec<String>,
}

impl ModeLayout {
    fn new(lattice: &ReflectionLattice, modes: usize) -> Self {
        let plus: Vec<(usize, usize)> = (0..lattice.len())
            .filter(|&i| lattice.side(i) != Side::Minus)
            .flat_map(|i| (0..modes).map(move |w| (i, w)))
            .collect();
        let name = |site: usize, w: usize, bar: bool| {
            let base = lattice.label(site).to_string();
            let base = if modes > 1 { format!("{base}:{w}") } else { base };
            if bar {
                format!("{base}~")
            } else {
                base
            }
        };
        let np = plus.len();
        let mut labels = Vec::with_capacity(2 * np);
        for j in 0..np {
            let (site, w) = plus[np - 1 - j];
            labels.push(name(lattice.theta(site), w, lattice.side(site) == Side::Zero));
        }
        for &(site, w) in &plus {
            labels.push(name(site, w, false));
        }
        ModeLayout { plus, labels }
    }

    fn n_plus(&self) -> usize {
        self.plus.len()
    }

    fn plus_slot(&self, k: usize) -> usize {
        self.n_plus() + k
    }

    fn minus_slot(&self, k: usize) -> usize {
        self.n_plus() - 1 - k
    }

    /// Positive-mode index of generator `w` at site `site`.
    fn index(&self) -> HashMap<(usize, usize), usize> {
        self.plus.iter().enumerate().map(|(k, &key)| (key, k)).collect()
    }

    fn slots(&self, site: Arc<SiteAlgebra>) -> Vec<Slot> {
        let np = self.n_plus();
        (0..2 * np)
            .map(|s| Slot {
                label: self.labels[s].clone(),
                side: if s < np { Side::Minus } else { Side::Plus },
                mirror: 2 * np - 1 - s,
                site: site.clone(),
            })
            .collect()
    }

    /// `Θ(ψ⁺_{λ,i}) = Σ_j r_ji ψ⁻_{ϑλ,j}` and `Θ(ψ⁻) = conj(r)⁻¹` on the way back.
    fn theta(&self, r: &CMatrix) -> Result<Vec<Vec<Vec<SlotTerm>>>> {
        let w = r.nrows();
        let back = r
            .map(|z| z.conj())
            .try_inverse()
            .ok_or_else(|| param("rho", "site reflection must be invertible"))?;
        let index = self.index();
        let np = self.n_plus();
        let mut theta = vec![Vec::new(); 2 * np];
        for (k, &(site, i)) in self.plus.iter().enumerate() {
            let ps = self.plus_slot(k);
            let ms = self.minus_slot(k);
            let mut img_plus = Vec::new();
            let mut img_minus = Vec::new();
            for j in 0..w {
                let kj = index[&(site, j)];
                if r[(j, i)].norm() > 0.0 {
                    img_plus.push((self.minus_slot(kj), 1, r[(j, i)]));
                }
                if back[(j, i)].norm() > 0.0 {
                    img_minus.push((self.plus_slot(kj), 1, back[(j, i)]));
                }
            }
            theta[ps] = vec![unit_image(ps), img_plus];
            theta[ms] = vec![unit_image(ms), img_minus];
        }
        Ok(theta)
    }
}

fn site_reflection(rho: Option<&CMatrix>, modes: usize) -> Result<CMatrix> {
    let r = rho.cloned().unwrap_or_else(|| CMatrix::identity(modes, modes));
    if r.nrows() != modes || r.ncols() != modes {
        return Err(param("rho", format!("must be {modes}x{modes}")));
    }
    Ok(r)
}

/// Grassmann double on `⋀V` with Berezin background and Hodge ♯.
///
/// `modes` generators per site; sites on the plane carry the doubled space `W ⊕ W̄`.
/// The Berezin scale is fixed by `τ(μ₋ μ₊) = 1` with `μ₋ = Θ(μ₊)`.
pub fn build_grassmann_double(
    lattice: &ReflectionLattice,
    modes: usize,
    rho: Option<&CMatrix>,
    zeta: Option<C64>,
) -> Result<Double> {
    let r = site_reflection(rho, modes)?;
    let det = r.determinant();
    if (det - 1.0).norm() > 1e-10 {
        return Err(param("rho", format!("site reflection must preserve volume (det = {det})")));
    }
    let layout = ModeLayout::new(lattice, modes);
    if !layout.n_plus().is_multiple_of(2) {
        return Err(Error::ConstraintViolation(format!(
            "the positive half has {} generators; an even number is required for a reflection-invariant Berezin integral",
            layout.n_plus()
        )));
    }
    let slots = layout.slots(Arc::new(SiteAlgebra::grassmann()));
    let theta = layout.theta(&r)?;
    let algebra = Algebra::new(AlgebraParts {
        family: Family::Grassmann.name().into(),
        p: 2,
        zeta: resolve_zeta(2, zeta)?,
        exchange_q: C64::new(-1.0, 0.0),
        slots,
        theta,
        sharp: SharpKind::Hodge,
    })?;
    let top = algebra.plus_volume_index();
    let image = algebra.reflect_monomial(top);
    let c = match image.as_slice() {
        [] => return Err(Error::ConstraintViolation("reflection annihilates the volume".into())),
        terms => {
            let full = algebra.dim() - 1;
            let mut acc = C64::new(0.0, 0.0);
            for &(m, v) in terms {
                for (i, w) in algebra.mul_monomials(m, top) {
                    if i == full {
                        acc += v * w;
                    }
                }
            }
            acc
        }
    };
    if c.norm() < 1e-12 {
        return Err(Error::ConstraintViolation("reflected volume is degenerate".into()));
    }
    let background = Functional::product(&algebra, c.inv());
    Ok(Double {
        family: Family::Grassmann,
        algebra,
        background,
    })
}

/// Clifford double generated by Majorana modes with the tracial state.
///
/// `rho` acts on the `modes` generators of a site and must preserve the
/// anticommutation relations (`ρᵀρ = 1`).
pub fn build_clifford_double(
    lattice: &ReflectionLattice,
    modes: usize,
    rho: Option<&CMatrix>,
    zeta: Option<C64>,
) -> Result<Double> {
    let r = site_reflection(rho, modes)?;
    if (r.transpose() * &r - CMatrix::identity(modes, modes)).norm() > 1e-10 {
        return Err(Error::ConstraintViolation(
            "site reflection does not preserve the anticommutation relations".into(),
        ));
    }
    let layout = ModeLayout::new(lattice, modes);
    let slots = layout.slots(Arc::new(SiteAlgebra::majorana()?));
    let theta = layout.theta(&r)?;
    let algebra = Algebra::new(AlgebraParts {
        family: Family::Clifford.name().into(),
        p: 2,
        zeta: resolve_zeta(2, zeta)?,
        exchange_q: C64::new(-1.0, 0.0),
        slots,
        theta,
        sharp: SharpKind::Adjoint,
    })?;
    let background = Functional::product(&algebra, C64::new(1.0, 0.0));
    Ok(Double {
        family: Family::Clifford,
        algebra,
        background,
    })
}

/// Commutative slots reflected by complex conjugation onto the mirror slot.
fn conjugation_theta(slots: &[Slot]) -> Result<Vec<Vec<Vec<SlotTerm>>>> {
    slots
        .iter()
        .enumerate()
        .map(|(s, slot)| {
            let adj = slot
                .site
                .adjoint
                .as_ref()
                .ok_or_else(|| Error::ConstraintViolation("function slot needs an adjoint table".into()))?;
            Ok((0..slot.site.dim())
                .map(|a| {
                    if a == 0 {
                        unit_image(s)
                    } else {
                        adj[a].iter().map(|&(b, c)| (slot.mirror, b, c)).collect()
                    }
                })
                .collect())
        })
        .collect()
}

/// Gauge double: functions of the half-bond variables of a midpoint-refined lattice,
/// in the Peter–Weyl basis, with the Haar (uniform) average as background.
pub fn build_gauge_double(group: &FiniteGroupTable, lattice: &BondLattice) -> Result<Double> {
    let funcs = group.peter_weyl_functions();
    let (labels, basis): (Vec<String>, Vec<Vec<C64>>) = funcs
        .into_iter()
        .enumerate()
        .map(|(k, (l, f))| (if k == 0 { "1".to_string() } else { l }, f))
        .unzip();
    let site = Arc::new(SiteAlgebra::functions("group", labels, basis)?);
    let slots: Vec<Slot> = lattice
        .refine()
        .into_iter()
        .map(|(h, mirror)| Slot {
            label: h.label,
            side: h.side,
            mirror,
            site: site.clone(),
        })
        .collect();
    let theta = conjugation_theta(&slots)?;
    let algebra = Algebra::new(AlgebraParts {
        family: Family::Gauge.name().into(),
        p: 1,
        zeta: C64::new(1.0, 0.0),
        exchange_q: C64::new(1.0, 0.0),
        slots,
        theta,
        sharp: SharpKind::Adjoint,
    })?;
    let background = Functional::product(&algebra, C64::new(1.0, 0.0));
    Ok(Double {
        family: Family::Gauge,
        algebra,
        background,
    })
}

/// Classical double: functions on a finite single-site sample space with the uniform
/// measure, one slot per site, reflected by `f ↦ conj(f ∘ ϑ)`.
pub fn build_classical_double(lattice: &ReflectionLattice, site: SiteAlgebra) -> Result<Double> {
    build_classical_double_with_flip(lattice, site, None)
}

/// Classical double whose reflection also applies a point involution `ρ` of the
/// sample space: `Θ(f)(ω) = conj(f(ρ ω_{ϑλ}))`.
pub fn build_classical_double_with_flip(
    lattice: &ReflectionLattice,
    site: SiteAlgebra,
    flip: Option<&[usize]>,
) -> Result<Double> {
    let points = match site.module.as_ref() {
        Some(m) if m.diagonal => m.dim,
        _ => {
            return Err(Error::ConstraintViolation(
                "classical sites must be function algebras (diagonal module)".into(),
            ))
        }
    };
    let flip_images = match flip {
        None => None,
        Some(f) => {
            if f.len() != points || f.iter().enumerate().any(|(x, &y)| y >= points || f[y] != x) {
                return Err(param("flip", "must be an involution of the sample points"));
            }
            let images = (0..site.dim())
                .map(|a| {
                    let v = site.point_values(a).expect("diagonal module");
                    let w: Vec<C64> = (0..points).map(|x| v[f[x]].conj()).collect();
                    site.expand_function(&w).expect("diagonal module")
                })
                .collect::<Vec<_>>();
            Some(images)
        }
    };
    let slots = site_slots(lattice, Arc::new(site));
    let theta = match flip_images {
        None => conjugation_theta(&slots)?,
        Some(images) => slots
            .iter()
            .enumerate()
            .map(|(s, slot)| {
                images
                    .iter()
                    .enumerate()
                    .map(|(a, img)| {
                        if a == 0 {
                            unit_image(s)
                        } else {
                            img.iter().map(|&(b, c)| (slot.mirror, b, c)).collect()
                        }
                    })
                    .collect()
            })
            .collect(),
    };
    let algebra = Algebra::new(AlgebraParts {
        family: Family::Classical.name().into(),
        p: 1,
        zeta: C64::new(1.0, 0.0),
        exchange_q: C64::new(1.0, 0.0),
        slots,
        theta,
        sharp: SharpKind::Adjoint,
    })?;
    let background = Functional::product(&algebra, C64::new(1.0, 0.0));
    Ok(Double {
        family: Family::Classical,
        algebra,
        background,
    })
}

/// Outcome of the three structural checks on a double.
#[derive(Debug, Clone, Serialize)]
pub struct QDoubleReport {
    pub family: String,
    pub p: usize,
    pub q: C64,
    pub zeta: C64,
    /// True on the p = 1 path where all exchange phases are 1.
    pub bosonic: bool,
    pub dim: usize,
    pub span_rank: usize,
    pub span_ok: bool,
    pub exchange_ok: bool,
    pub exchange_max_deviation: f64,
    pub theta_ok: bool,
    pub theta_max_deviation: f64,
    pub grading_ok: bool,
}

impl QDoubleReport {
    pub fn passed(&self) -> bool {
        self.span_ok && self.exchange_ok && self.theta_ok && self.grading_ok
    }
}

/// Incremental rank of sparse complex rows.
struct SparseRank {
    pivots: HashMap<usize, Vec<(usize, C64)>>,
}

impl SparseRank {
    fn push(&mut self, row: Vec<(usize, C64)>) {
        let mut row: std::collections::BTreeMap<usize, C64> = row.into_iter().collect();
        let scale = row.values().map(|c| c.norm()).fold(0.0, f64::max);
        let cut = 1e-12 * scale.max(1e-300);
        loop {
            row.retain(|_, c| c.norm() > cut);
            let Some((&col, &lead)) = row.iter().next() else { return };
            match self.pivots.get(&col) {
                Some(p) => {
                    for &(j, v) in p {
                        *row.entry(j).or_default() -= lead * v;
                    }
                    row.remove(&col);
                }
                None => {
                    let p: Vec<(usize, C64)> = row.iter().map(|(&j, &v)| (j, v / lead)).collect();
                    self.pivots.insert(col, p);
                    return;
                }
            }
        }
    }

    fn rank(&self) -> usize {
        self.pivots.len()
    }
}

/// Checks span density of `𝔄₋𝔄₊`, para-commutation on generator pairs, `Θ² = Id`
/// and grading inversion.
pub fn verify_qdouble(alg: &Algebra) -> QDoubleReport {
    let tol = 1e-12;
    let p = alg.p();
    let q = alg.roots().q;

    // (1) span of m₋ m₊
    let minus = alg.minus_monomials();
    let plus = alg.plus_monomials();
    let mut seen = vec![false; alg.dim()];
    let mut rank = SparseRank { pivots: HashMap::new() };
    'outer: for &m in &minus {
        for &n in &plus {
            let prod = alg.mul_monomials(m, n);
            if let [(i, c)] = prod.as_slice() {
                if c.norm() > tol && !seen[*i] {
                    seen[*i] = true;
                    rank.push(prod);
                }
            } else {
                rank.push(prod);
            }
            if rank.rank() == alg.dim() {
                break 'outer;
            }
        }
    }
    let span_rank = rank.rank();

    // (2) para-commutation A₋A₊ = q^{|A₋||A₊|} A₊A₋ on generator pairs
    let slots = alg.slots();
    let mut exchange_dev = 0.0f64;
    for (s, ss) in slots.iter().enumerate() {
        if ss.side == Side::Plus {
            continue;
        }
        for (t, st) in slots.iter().enumerate() {
            if st.side == Side::Minus || s == t {
                continue;
            }
            for a in 1..ss.site.dim() {
                for b in 1..st.site.dim() {
                    let x = alg.local(s, a);
                    let y = alg.local(t, b);
                    let lhs = alg.multiply(&x, &y).expect("same algebra");
                    let k = (ss.site.degrees[a] * st.site.degrees[b]) % p;
                    let rhs = alg
                        .multiply(&y, &x)
                        .expect("same algebra")
                        .scaled(q.powu(k as u32));
                    exchange_dev = exchange_dev.max(lhs.max_abs_diff(&rhs).expect("same algebra"));
                }
            }
        }
    }

    // (3) Θ² = Id, multiplicativity within a slot, grading inversion
    let mut theta_dev = 0.0f64;
    let mut grading_ok = true;
    for (s, slot) in slots.iter().enumerate() {
        let n = slot.site.dim();
        for a in 0..n {
            let g = alg.local(s, a);
            let t = alg.reflect(&g).expect("same algebra");
            let want = (p - slot.site.degrees[a] % p) % p;
            if !t.is_zero() && alg.degree(&t) != Some(want) {
                grading_ok = false;
            }
            let tt = alg.reflect(&t).expect("same algebra");
            theta_dev = theta_dev.max(tt.max_abs_diff(&g).expect("same algebra"));
            for b in 0..n {
                let h = alg.local(s, b);
                let lhs = alg.reflect(&alg.multiply(&g, &h).expect("same algebra")).expect("same algebra");
                let rhs = alg
                    .multiply(&t, &alg.reflect(&h).expect("same algebra"))
                    .expect("same algebra");
                theta_dev = theta_dev.max(lhs.max_abs_diff(&rhs).expect("same algebra"));
            }
        }
    }

    QDoubleReport {
        family: alg.family().to_string(),
        p,
        q,
        zeta: alg.zeta(),
        bosonic: p == 1,
        dim: alg.dim(),
        span_rank,
        span_ok: span_rank == alg.dim(),
        exchange_ok: exchange_dev <= tol,
        exchange_max_deviation: exchange_dev,
        theta_ok: theta_dev <= tol,
        theta_max_deviation: theta_dev,
        grading_ok,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spin_double_has_expected_dimension_and_trace() {
        let lat = ReflectionLattice::chain(1, false);
        let d = build_spin_double(&lat, 2, &CMatrix::identity(2, 2)).unwrap();
        assert_eq!(d.algebra.dim(), 16);
        let report = verify_qdouble(&d.algebra);
        assert!(report.passed(), "{report:?}");
        assert!(report.bosonic);
    }

    #[test]
    fn spin_double_rejects_fixed_sites() {
        let lat = ReflectionLattice::chain(1, true);
        assert!(build_spin_double(&lat, 2, &CMatrix::identity(2, 2)).is_err());
    }

    #[test]
    fn parafermion_dimension_counts_exponents() {
        let lat = ReflectionLattice::chain(2, false);
        let d = build_parafermion_double(3, &lat, None).unwrap();
        assert_eq!(d.algebra.dim(), 81);
        assert!(verify_qdouble(&d.algebra).passed());
    }

    #[test]
    fn corrupted_exchange_fails_check_two() {
        let lat = ReflectionLattice::chain(1, false);
        let d = build_parafermion_double(3, &lat, None).unwrap();
        let bad = d.with_exchange_override(C64::new(1.0, 0.0));
        let report = verify_qdouble(&bad.algebra);
        assert!(!report.exchange_ok);
        assert!(report.theta_ok);
    }

    #[test]
    fn grassmann_rejects_odd_positive_half() {
        let lat = ReflectionLattice::chain(1, false);
        assert!(build_grassmann_double(&lat, 1, None, None).is_err());
    }

    #[test]
    fn grassmann_rejects_volume_change() {
        let lat = ReflectionLattice::chain(1, false);
        let r = CMatrix::identity(2, 2) * C64::new(2.0, 0.0);
        assert!(build_grassmann_double(&lat, 2, Some(&r), None).is_err());
    }

    #[test]
    fn clifford_rejects_non_orthogonal_reflection() {
        let lat = ReflectionLattice::chain(1, false);
        let mut r = CMatrix::identity(2, 2);
        r[(0, 1)] = C64::new(1.0, 0.0);
        assert!(matches!(
            build_clifford_double(&lat, 2, Some(&r), None),
            Err(Error::ConstraintViolation(_))
        ));
    }

    #[test]
    fn zeta_must_square_to_exchange_constant() {
        let lat = ReflectionLattice::chain(1, false);
        assert!(build_clifford_double(&lat, 1, None, Some(C64::new(1.0, 0.0))).is_err());
        assert!(build_clifford_double(&lat, 1, None, Some(C64::new(0.0, -1.0))).is_ok());
    }
}
