//! Finite-dimensional Z_p-graded algebras built as graded tensor products of slots.
//!
//! A monomial is a choice of local basis element per slot, stored as a mixed-radix
//! index with slot 0 most significant. Products are formed slot by slot with the
//! exchange phase `a_t b_s = q^{-|a_t||b_s|} b_s a_t` for `s < t`.

mod element;
mod exp;
pub mod site;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

pub use element::Element;
pub use site::{LocalModule, SiteAlgebra, Sparse};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::par;

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

/// Largest algebra dimension accepted by the dense regular representation.
pub const MAX_REGULAR_DIM: usize = 4096;
/// Largest total algebra dimension.
pub const MAX_DIM: usize = 1 << 22;

/// Order p of the grading group Z_p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GradingOrder(usize);

impl GradingOrder {
    pub fn new(p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::UnsupportedGrading(0));
        }
        Ok(GradingOrder(p))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

/// The pair `(q, ζ)` with `ζ² = q`, `q^p = 1` and `ζ^{p²} = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwistRoots {
    pub q: C64,
    pub zeta: C64,
}

impl TwistRoots {
    pub fn new(p: GradingOrder, zeta: C64) -> Result<Self> {
        let p = p.get();
        let q = zeta * zeta;
        let tol = 1e-12;
        if (zeta.norm() - 1.0).abs() > tol {
            return Err(Error::InvalidRoots(format!("|zeta| = {} is not 1", zeta.norm())));
        }
        if (q.powu(p as u32) - 1.0).norm() > tol {
            return Err(Error::InvalidRoots(format!("q = zeta^2 = {q} has q^{p} != 1")));
        }
        if (zeta.powu((p * p) as u32) - 1.0).norm() > tol {
            return Err(Error::InvalidRoots(format!("zeta^(p^2) != 1 for zeta = {zeta}")));
        }
        Ok(TwistRoots { q, zeta })
    }

    pub fn canonical(p: GradingOrder) -> Result<Self> {
        Self::new(p, canonical_zeta(p.get())?)
    }
}

/// Default ζ: `q^{(p+1)/2}` with `q = e^{2πi/p}` for odd p, `e^{iπ/p}` for even p.
pub fn canonical_zeta(p: usize) -> Result<C64> {
    match p {
        0 => Err(Error::UnsupportedGrading(0)),
        1 => Ok(C64::new(1.0, 0.0)),
        p if p % 2 == 1 => {
            let q = C64::from_polar(1.0, 2.0 * PI / p as f64);
            Ok(q.powu(p.div_ceil(2) as u32))
        }
        p => Ok(C64::from_polar(1.0, PI / p as f64)),
    }
}

/// Which half of the reflection a slot belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Minus,
    Zero,
    Plus,
}

impl Side {
    pub fn mirror(self) -> Side {
        match self {
            Side::Minus => Side::Plus,
            Side::Plus => Side::Minus,
            Side::Zero => Side::Zero,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Slot {
    pub label: String,
    pub side: Side,
    /// Slot that the reflection maps this one onto.
    pub mirror: usize,
    pub site: Arc<SiteAlgebra>,
}

/// How ♯ acts on the positive half.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SharpKind {
    /// The adjoint `*` (complex conjugation on commutative slots).
    Adjoint,
    /// Hodge star with respect to the ordered positive volume.
    Hodge,
}

/// A term `coeff · e_local` living in a single slot.
pub type SlotTerm = (usize, usize, C64);

/// Inputs for [`Algebra::new`].
#[derive(Debug, Clone)]
pub struct AlgebraParts {
    pub family: String,
    pub p: usize,
    pub zeta: C64,
    /// Constant q in the slot exchange rule.
    pub exchange_q: C64,
    pub slots: Vec<Slot>,
    /// `theta[s][a]`: image of local basis element `a` of slot `s` as a combination of
    /// single-slot basis elements.
    pub theta: Vec<Vec<Vec<SlotTerm>>>,
    pub sharp: SharpKind,
}

/// Decoded monomial: the non-unit factors in slot order plus the total degree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Monomial {
    pub word: Vec<(usize, usize)>,
    pub degree: usize,
}

/// An immutable graded algebra with reflection.
#[derive(Debug, Clone)]
pub struct Algebra {
    id: u64,
    family: String,
    grading: GradingOrder,
    roots: TwistRoots,
    exchange_q: C64,
    qneg: Vec<C64>,
    zeta_sq: Vec<C64>,
    slots: Vec<Slot>,
    strides: Vec<usize>,
    dim: usize,
    theta: Vec<Vec<Sparse>>,
    sharp: SharpKind,
}

impl Algebra {
    pub fn new(parts: AlgebraParts) -> Result<Self> {
        let grading = GradingOrder::new(parts.p)?;
        let p = grading.get();
        let roots = TwistRoots::new(grading, parts.zeta)?;
        if (parts.exchange_q.powu(p as u32) - 1.0).norm() > 1e-12 {
            return Err(Error::InvalidRoots(format!(
                "exchange constant {} is not a p-th root of unity",
                parts.exchange_q
            )));
        }
        if (parts.zeta * parts.zeta - parts.exchange_q).norm() > 1e-12 {
            return Err(Error::InvalidRoots(format!(
                "zeta^2 = {} does not match the exchange constant {}",
                parts.zeta * parts.zeta,
                parts.exchange_q
            )));
        }
        let n = parts.slots.len();
        if parts.theta.len() != n {
            return Err(Error::ConstraintViolation("reflection table size mismatch".into()));
        }
        let mut strides = vec![1usize; n];
        let mut dim = 1usize;
        for s in (0..n).rev() {
            strides[s] = dim;
            dim = dim
                .checked_mul(parts.slots[s].site.dim())
                .filter(|&d| d <= MAX_DIM)
                .ok_or_else(|| Error::Resource(format!("algebra dimension exceeds {MAX_DIM}")))?;
        }
        for (s, slot) in parts.slots.iter().enumerate() {
            if slot.site.degrees.iter().any(|&k| k >= p) {
                return Err(Error::Grading(format!("slot {s} has a degree outside Z_{p}")));
            }
            let m = slot.mirror;
            if m >= n || parts.slots[m].mirror != s {
                return Err(Error::InvalidLattice(format!("slot {s}: mirror map is not an involution")));
            }
            if parts.slots[m].side != slot.side.mirror() {
                return Err(Error::InvalidLattice(format!(
                    "slot {s}: mirror slot {m} is on the wrong side"
                )));
            }
            if parts.theta[s].len() != slot.site.dim() {
                return Err(Error::ConstraintViolation(format!("slot {s}: reflection table size")));
            }
        }
        let mut theta = Vec::with_capacity(n);
        for (s, slot) in parts.slots.iter().enumerate() {
            let mut images = Vec::with_capacity(slot.site.dim());
            for (a, img) in parts.theta[s].iter().enumerate() {
                let want = (p - slot.site.degrees[a] % p) % p;
                let mut acc: BTreeMap<usize, C64> = BTreeMap::new();
                for &(t, b, c) in img {
                    if t >= n || b >= parts.slots[t].site.dim() {
                        return Err(Error::ConstraintViolation(format!(
                            "slot {s}: reflection image refers to a missing basis element"
                        )));
                    }
                    if a != 0 && parts.slots[t].side != slot.side.mirror() {
                        return Err(Error::SideViolation(format!(
                            "reflection of slot {s} lands on slot {t} of the same side"
                        )));
                    }
                    let deg = if b == 0 { 0 } else { parts.slots[t].site.degrees[b] };
                    if deg != want {
                        return Err(Error::Grading(format!(
                            "reflection of {}[{}] has degree {deg}, expected {want}",
                            slot.site.labels[a], slot.label
                        )));
                    }
                    let idx = if b == 0 { 0 } else { b * strides[t] };
                    *acc.entry(idx).or_default() += c;
                }
                acc.retain(|_, c| c.norm() > 0.0);
                images.push(acc.into_iter().collect::<Sparse>());
            }
            theta.push(images);
        }
        let q = parts.exchange_q;
        let qinv = q.inv();
        let qneg = (0..p).map(|k| qinv.powu(k as u32)).collect();
        let zeta_sq = (0..p).map(|k| roots.zeta.powu((k * k) as u32)).collect();
        Ok(Algebra {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            family: parts.family,
            grading,
            roots,
            exchange_q: q,
            qneg,
            zeta_sq,
            slots: parts.slots,
            strides,
            dim,
            theta,
            sharp: parts.sharp,
        })
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn family(&self) -> &str {
        &self.family
    }

    pub fn p(&self) -> usize {
        self.grading.get()
    }

    pub fn grading(&self) -> GradingOrder {
        self.grading
    }

    pub fn roots(&self) -> TwistRoots {
        self.roots
    }

    pub fn zeta(&self) -> C64 {
        self.roots.zeta
    }

    pub fn exchange_q(&self) -> C64 {
        self.exchange_q
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn sharp_kind(&self) -> SharpKind {
        self.sharp
    }

    pub(crate) fn strides(&self) -> &[usize] {
        &self.strides
    }

    /// `ζ^{k²}`.
    pub fn zeta_sq(&self, k: usize) -> C64 {
        self.zeta_sq[k % self.p()]
    }

    /// `q^{-k}` for the exchange constant.
    pub(crate) fn qneg(&self, k: usize) -> C64 {
        self.qneg[k % self.p()]
    }

    /// Same algebra with the roles of the two halves swapped and ζ conjugated.
    pub fn mirrored(&self) -> Algebra {
        let mut out = self.clone();
        out.id = NEXT_ID.fetch_add(1, Ordering::Relaxed);
        for slot in &mut out.slots {
            slot.side = slot.side.mirror();
        }
        let zeta = self.roots.zeta.conj();
        out.roots = TwistRoots { q: zeta * zeta, zeta };
        out.zeta_sq = (0..self.p()).map(|k| zeta.powu((k * k) as u32)).collect();
        out
    }

    /// Copy whose multiplication uses a different exchange constant.
    ///
    /// Meant for negative controls of [`crate::doubles::verify_qdouble`].
    pub fn with_exchange_override(&self, q: C64) -> Algebra {
        let mut out = self.clone();
        out.id = NEXT_ID.fetch_add(1, Ordering::Relaxed);
        out.exchange_q = q;
        let qinv = q.inv();
        out.qneg = (0..self.p()).map(|k| qinv.powu(k as u32)).collect();
        out
    }

    // ----- monomials -------------------------------------------------------

    pub fn local_index(&self, m: usize, slot: usize) -> usize {
        (m / self.strides[slot]) % self.slots[slot].site.dim()
    }

    pub fn decode(&self, m: usize) -> Vec<usize> {
        (0..self.slots.len()).map(|s| self.local_index(m, s)).collect()
    }

    pub fn encode(&self, locals: &[usize]) -> usize {
        locals.iter().zip(&self.strides).map(|(a, st)| a * st).sum()
    }

    pub fn monomial_degree(&self, m: usize) -> usize {
        let p = self.p();
        if p == 1 {
            return 0;
        }
        let mut d = 0;
        for (s, slot) in self.slots.iter().enumerate() {
            d += slot.site.degrees[self.local_index(m, s)];
        }
        d % p
    }

    pub fn monomial_word(&self, m: usize) -> Monomial {
        let word = (0..self.slots.len())
            .map(|s| (s, self.local_index(m, s)))
            .filter(|&(_, a)| a != 0)
            .collect();
        Monomial {
            word,
            degree: self.monomial_degree(m),
        }
    }

    pub fn monomial_label(&self, m: usize) -> String {
        let parts: Vec<String> = (0..self.slots.len())
            .filter_map(|s| {
                let a = self.local_index(m, s);
                (a != 0).then(|| {
                    format!("{}[{}]", self.slots[s].site.labels[a], self.slots[s].label)
                })
            })
            .collect();
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join(" ")
        }
    }

    fn side_free(&self, m: usize, excluded: Side) -> bool {
        self.slots
            .iter()
            .enumerate()
            .all(|(s, slot)| slot.side != excluded || self.local_index(m, s) == 0)
    }

    /// Monomial lies in the positive subalgebra.
    pub fn in_plus(&self, m: usize) -> bool {
        self.side_free(m, Side::Minus)
    }

    /// Monomial lies in the negative subalgebra.
    pub fn in_minus(&self, m: usize) -> bool {
        self.side_free(m, Side::Plus)
    }

    fn side_monomials(&self, excluded: Side) -> Vec<usize> {
        let mut out = vec![0usize];
        for (s, slot) in self.slots.iter().enumerate() {
            if slot.side == excluded {
                continue;
            }
            let n = slot.site.dim();
            let st = self.strides[s];
            out = out
                .iter()
                .flat_map(|&base| (0..n).map(move |a| base + a * st))
                .collect();
        }
        out.sort_unstable();
        out
    }

    /// Monomials of the positive subalgebra in index order.
    pub fn plus_monomials(&self) -> Vec<usize> {
        self.side_monomials(Side::Minus)
    }

    /// Monomials of the negative subalgebra in index order.
    pub fn minus_monomials(&self) -> Vec<usize> {
        self.side_monomials(Side::Plus)
    }

    // ----- element constructors ---------------------------------------------

    pub fn zero(&self) -> Element {
        Element::empty(self.id)
    }

    pub fn scalar(&self, c: C64) -> Element {
        let mut e = self.zero();
        e.add_term(0, c);
        e
    }

    pub fn unit(&self) -> Element {
        self.scalar(C64::new(1.0, 0.0))
    }

    pub fn monomial(&self, m: usize) -> Element {
        let mut e = self.zero();
        e.add_term(m, C64::new(1.0, 0.0));
        e
    }

    pub fn element<I: IntoIterator<Item = (usize, C64)>>(&self, terms: I) -> Result<Element> {
        let mut e = self.zero();
        for (m, c) in terms {
            if m >= self.dim {
                return Err(Error::ConstraintViolation(format!("monomial index {m} out of range")));
            }
            e.add_term(m, c);
        }
        Ok(e)
    }

    /// Local basis element `a` of slot `s`.
    pub fn local(&self, slot: usize, a: usize) -> Element {
        self.monomial(a * self.strides[slot])
    }

    /// Local combination embedded in slot `s`.
    pub fn local_combination(&self, slot: usize, terms: &[(usize, C64)]) -> Element {
        let mut e = self.zero();
        for &(a, c) in terms {
            e.add_term(a * self.strides[slot], c);
        }
        e
    }

    fn check(&self, a: &Element) -> Result<()> {
        if a.alg != self.id {
            return Err(Error::Incompatible(self.id, a.alg));
        }
        Ok(())
    }

    /// Degree if the element is homogeneous; `None` for zero or mixed elements.
    pub fn degree(&self, a: &Element) -> Option<usize> {
        let mut deg = None;
        for (m, _) in a.terms() {
            let d = self.monomial_degree(m);
            match deg {
                None => deg = Some(d),
                Some(e) if e != d => return None,
                _ => {}
            }
        }
        deg
    }

    /// Homogeneous components indexed by degree.
    pub fn homogeneous_parts(&self, a: &Element) -> Vec<Element> {
        let mut parts = vec![self.zero(); self.p()];
        for (m, c) in a.terms() {
            parts[self.monomial_degree(m)].add_term(m, c);
        }
        parts
    }

    pub fn is_degree_zero(&self, a: &Element) -> bool {
        a.terms().all(|(m, _)| self.monomial_degree(m) == 0)
    }

    pub fn is_in_plus(&self, a: &Element) -> bool {
        a.terms().all(|(m, _)| self.in_plus(m))
    }

    pub fn is_in_minus(&self, a: &Element) -> bool {
        a.terms().all(|(m, _)| self.in_minus(m))
    }

    // ----- products ----------------------------------------------------------

    /// Feeds `coef · (m n)` into `sink` term by term.
    pub(crate) fn mul_monomials_into<F: FnMut(usize, C64)>(
        &self,
        m: usize,
        n: usize,
        coef: C64,
        sink: &mut F,
    ) {
        let p = self.p();
        let mut e = 0usize;
        let mut prefix = 0usize;
        let mut idx = 0usize;
        let mut c = coef;
        let mut multi: Vec<(usize, &Sparse)> = Vec::new();
        for (s, slot) in self.slots.iter().enumerate() {
            let site = &slot.site;
            let st = self.strides[s];
            let nd = site.dim();
            let a = (m / st) % nd;
            let b = (n / st) % nd;
            if p > 1 {
                e = (e + site.degrees[a] * prefix) % p;
                prefix = (prefix + site.degrees[b]) % p;
            }
            let prod = &site.mult[a][b];
            match prod.len() {
                0 => return,
                1 => {
                    idx += prod[0].0 * st;
                    c *= prod[0].1;
                }
                _ => multi.push((st, prod)),
            }
        }
        if p > 1 {
            c *= self.qneg[e];
        }
        if multi.is_empty() {
            sink(idx, c);
            return;
        }
        let mut acc = vec![(idx, c)];
        for (st, prod) in multi {
            acc = acc
                .iter()
                .flat_map(|&(i, v)| prod.iter().map(move |&(k, w)| (i + k * st, v * w)))
                .collect();
        }
        for (i, v) in acc {
            sink(i, v);
        }
    }

    /// Product of two monomials as a sparse list.
    pub fn mul_monomials(&self, m: usize, n: usize) -> Sparse {
        let mut out = Sparse::new();
        self.mul_monomials_into(m, n, C64::new(1.0, 0.0), &mut |i, v| out.push((i, v)));
        out
    }

    fn mul_sparse(&self, x: &[(usize, C64)], y: &[(usize, C64)]) -> Sparse {
        let mut acc: BTreeMap<usize, C64> = BTreeMap::new();
        for &(m, a) in x {
            for &(n, b) in y {
                self.mul_monomials_into(m, n, a * b, &mut |i, v| *acc.entry(i).or_default() += v);
            }
        }
        acc.into_iter().filter(|(_, v)| v.norm() > 0.0).collect()
    }

    /// Algebra product `A·B`.
    pub fn multiply(&self, a: &Element, b: &Element) -> Result<Element> {
        self.check(a)?;
        self.check(b)?;
        let mut acc: BTreeMap<usize, C64> = BTreeMap::new();
        for (m, x) in a.terms() {
            for (n, y) in b.terms() {
                self.mul_monomials_into(m, n, x * y, &mut |i, v| *acc.entry(i).or_default() += v);
            }
        }
        Ok(Element::from_map(self.id, acc))
    }

    /// `Θ` of a single monomial (coefficient 1).
    pub fn reflect_monomial(&self, m: usize) -> Sparse {
        let mut acc: Sparse = vec![(0, C64::new(1.0, 0.0))];
        for s in 0..self.slots.len() {
            let a = self.local_index(m, s);
            if a == 0 {
                continue;
            }
            acc = self.mul_sparse(&acc, &self.theta[s][a]);
        }
        acc
    }

    /// The reflection Θ: antilinear, multiplicative, squares to the identity.
    pub fn reflect(&self, a: &Element) -> Result<Element> {
        self.check(a)?;
        let mut acc: BTreeMap<usize, C64> = BTreeMap::new();
        for (m, c) in a.terms() {
            let cc = c.conj();
            for (i, v) in self.reflect_monomial(m) {
                *acc.entry(i).or_default() += cc * v;
            }
        }
        Ok(Element::from_map(self.id, acc))
    }

    /// Twisted product `A∘B = Σ_k ζ^{k²} A_{−k} B_k` for `A ∈ 𝔄₋`, `B ∈ 𝔄₊`.
    pub fn twisted_product(&self, a: &Element, b: &Element) -> Result<Element> {
        self.check(a)?;
        self.check(b)?;
        if !self.is_in_minus(a) {
            return Err(Error::SideViolation(
                "left operand of the twisted product must lie in the negative half".into(),
            ));
        }
        if !self.is_in_plus(b) {
            return Err(Error::SideViolation(
                "right operand of the twisted product must lie in the positive half".into(),
            ));
        }
        Ok(self.twisted_unchecked(a, b))
    }

    pub(crate) fn twisted_unchecked(&self, a: &Element, b: &Element) -> Element {
        let p = self.p();
        let mut acc: BTreeMap<usize, C64> = BTreeMap::new();
        for (m, x) in a.terms() {
            let dm = self.monomial_degree(m);
            for (n, y) in b.terms() {
                let dn = self.monomial_degree(n);
                if !(dm + dn).is_multiple_of(p) {
                    continue;
                }
                let w = self.zeta_sq(dn) * x * y;
                self.mul_monomials_into(m, n, w, &mut |i, v| *acc.entry(i).or_default() += v);
            }
        }
        Element::from_map(self.id, acc)
    }

    /// `Θ(A)∘B` for `A, B ∈ 𝔄₊`.
    pub fn theta_twisted(&self, a: &Element, b: &Element) -> Result<Element> {
        let ta = self.reflect(a)?;
        self.twisted_product(&ta, b)
    }

    /// The map ♯ on 𝔄₊: adjoint, or Hodge star for Grassmann doubles.
    pub fn sharp(&self, a: &Element) -> Result<Element> {
        self.check(a)?;
        if !self.is_in_plus(a) {
            return Err(Error::SideViolation("sharp is defined on the positive half only".into()));
        }
        let mut acc: BTreeMap<usize, C64> = BTreeMap::new();
        for (m, c) in a.terms() {
            let cc = c.conj();
            for (i, v) in self.sharp_monomial(m)? {
                *acc.entry(i).or_default() += cc * v;
            }
        }
        Ok(Element::from_map(self.id, acc))
    }

    fn sharp_monomial(&self, m: usize) -> Result<Sparse> {
        match self.sharp {
            SharpKind::Adjoint => {
                let mut acc: Sparse = vec![(0, C64::new(1.0, 0.0))];
                for s in (0..self.slots.len()).rev() {
                    let a = self.local_index(m, s);
                    if a == 0 {
                        continue;
                    }
                    let table = self.slots[s].site.adjoint.as_ref().ok_or_else(|| {
                        Error::ConstraintViolation(format!("slot {s} has no adjoint"))
                    })?;
                    let st = self.strides[s];
                    let local: Sparse = table[a].iter().map(|&(k, v)| (k * st, v)).collect();
                    acc = self.mul_sparse(&acc, &local);
                }
                Ok(acc)
            }
            SharpKind::Hodge => {
                let mut comp = 0usize;
                for (s, slot) in self.slots.iter().enumerate() {
                    if slot.side == Side::Plus && self.local_index(m, s) == 0 {
                        comp += self.strides[s];
                    }
                }
                let prod = self.mul_monomials(comp, m);
                let top = self.plus_volume_index();
                match prod.as_slice() {
                    [(i, eps)] if *i == top => Ok(vec![(comp, eps.inv())]),
                    _ => Err(Error::ConstraintViolation(
                        "Hodge star requires single-generator Grassmann slots".into(),
                    )),
                }
            }
        }
    }

    /// Monomial index of the ordered positive volume (every positive slot at local index 1).
    pub fn plus_volume_index(&self) -> usize {
        self.slots
            .iter()
            .enumerate()
            .filter(|(_, slot)| slot.side == Side::Plus)
            .map(|(s, _)| self.strides[s])
            .sum()
    }

    /// Left-multiplication matrix: column j holds the coefficients of `A·e_j`.
    pub fn regular_representation(&self, a: &Element) -> Result<CMatrix> {
        self.check(a)?;
        let d = self.dim;
        if d > MAX_REGULAR_DIM {
            return Err(Error::Resource(format!(
                "regular representation of dimension {d} exceeds {MAX_REGULAR_DIM}"
            )));
        }
        let terms: Vec<(usize, C64)> = a.terms().collect();
        let cols = par::map_range(d, |j| {
            let mut col = Vec::new();
            for &(m, x) in &terms {
                self.mul_monomials_into(m, j, x, &mut |i, v| col.push((i, v)));
            }
            col
        });
        let mut out = CMatrix::zeros(d, d);
        for (j, col) in cols.into_iter().enumerate() {
            for (i, v) in col {
                out[(i, j)] += v;
            }
        }
        Ok(out)
    }

    /// Dense coefficient vector.
    pub fn to_dense(&self, a: &Element) -> Result<Vec<C64>> {
        self.check(a)?;
        let mut v = vec![C64::new(0.0, 0.0); self.dim];
        for (m, c) in a.terms() {
            v[m] = c;
        }
        Ok(v)
    }

    pub fn from_dense(&self, v: &[C64]) -> Element {
        let mut e = self.zero();
        for (m, &c) in v.iter().enumerate() {
            if c != C64::new(0.0, 0.0) {
                e.terms.insert(m, c);
            }
        }
        e
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one() -> C64 {
        C64::new(1.0, 0.0)
    }

    /// Two parafermion slots (minus, plus) with Θ(c) = c^{-1} on the mirror.
    fn pf_pair(p: usize) -> Algebra {
        let site = Arc::new(SiteAlgebra::parafermion(p).unwrap());
        let slots = vec![
            Slot { label: "-".into(), side: Side::Minus, mirror: 1, site: site.clone() },
            Slot { label: "+".into(), side: Side::Plus, mirror: 0, site },
        ];
        let theta = (0..2)
            .map(|s| (0..p).map(|k| vec![(1 - s, (p - k) % p, one())]).collect())
            .collect();
        let q = C64::from_polar(1.0, 2.0 * PI / p as f64);
        Algebra::new(AlgebraParts {
            family: "parafermion".into(),
            p,
            zeta: canonical_zeta(p).unwrap(),
            exchange_q: q,
            slots,
            theta,
            sharp: SharpKind::Adjoint,
        })
        .unwrap()
    }

    #[test]
    fn canonical_zeta_values() {
        assert!(canonical_zeta(0).is_err());
        assert_eq!(canonical_zeta(1).unwrap(), one());
        assert!((canonical_zeta(2).unwrap() - C64::new(0.0, 1.0)).norm() < 1e-15);
        let z3 = canonical_zeta(3).unwrap();
        assert!((z3 - C64::from_polar(1.0, 4.0 * PI / 3.0)).norm() < 1e-15);
        for p in 1..9 {
            assert!(TwistRoots::canonical(GradingOrder::new(p).unwrap()).is_ok());
        }
    }

    #[test]
    fn cpr_exchange_phase() {
        let alg = pf_pair(3);
        let c0 = alg.local(0, 1);
        let c1 = alg.local(1, 1);
        // c_1 c_0 = q̄ c_0 c_1
        let lhs = alg.multiply(&c1, &c0).unwrap();
        let rhs = alg.multiply(&c0, &c1).unwrap();
        let q = C64::from_polar(1.0, 2.0 * PI / 3.0);
        assert!(lhs.max_abs_diff(&rhs.scaled(q.conj())).unwrap() < 1e-15);
    }

    #[test]
    fn reflect_squares_to_identity() {
        let alg = pf_pair(3);
        let a = alg
            .element([(4, C64::new(1.0, 2.0)), (5, C64::new(-0.5, 0.25)), (0, one())])
            .unwrap();
        let back = alg.reflect(&alg.reflect(&a).unwrap()).unwrap();
        assert!(back.max_abs_diff(&a).unwrap() < 1e-15);
    }

    #[test]
    fn twisted_rejects_wrong_sides() {
        let alg = pf_pair(3);
        let c_plus = alg.local(1, 1);
        assert!(matches!(
            alg.twisted_product(&c_plus, &c_plus),
            Err(Error::SideViolation(_))
        ));
    }
}
