//! Linear functionals: evaluation, neutrality, reflection invariance,
//! factorization, strict positivity and Boltzmann perturbation.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::algebra::{Algebra, Element};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::par;

/// Identity tolerance for functional checks, relative to `max(1, scale)`.
pub const IDENTITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub enum Functional {
    /// `scale · Π_s τ_s(a_s)` with per-slot local values.
    Product {
        alg: u64,
        scale: C64,
        local: Vec<Vec<C64>>,
        /// `pairing[s][a][b] = τ_s(e_a e_b)`.
        pairing: Vec<Vec<Vec<C64>>>,
    },
    /// Dense value table over all monomials.
    Covector { alg: u64, values: Vec<C64> },
}

impl Functional {
    /// Product of the slot-local functionals, times `scale`.
    pub fn product(alg: &Algebra, scale: C64) -> Functional {
        let local = alg.slots().iter().map(|s| s.site.trace.clone()).collect();
        let pairing = alg.slots().iter().map(|s| s.site.pairing()).collect();
        Functional::Product {
            alg: alg.id(),
            scale,
            local,
            pairing,
        }
    }

    pub fn covector(alg: &Algebra, values: Vec<C64>) -> Result<Functional> {
        if values.len() != alg.dim() {
            return Err(Error::ConstraintViolation(format!(
                "covector has length {} but the algebra has dimension {}",
                values.len(),
                alg.dim()
            )));
        }
        Ok(Functional::Covector {
            alg: alg.id(),
            values,
        })
    }

    pub fn zero(alg: &Algebra) -> Functional {
        Functional::Covector {
            alg: alg.id(),
            values: vec![C64::new(0.0, 0.0); alg.dim()],
        }
    }

    pub fn algebra_id(&self) -> u64 {
        match self {
            Functional::Product { alg, .. } | Functional::Covector { alg, .. } => *alg,
        }
    }

    /// Same functional attached to another algebra with identical slot layout.
    pub fn rebind(&self, alg: &Algebra) -> Functional {
        let mut out = self.clone();
        match &mut out {
            Functional::Product { alg: id, .. } | Functional::Covector { alg: id, .. } => {
                *id = alg.id()
            }
        }
        out
    }

    pub fn scaled(&self, c: C64) -> Functional {
        let mut out = self.clone();
        match &mut out {
            Functional::Product { scale, .. } => *scale *= c,
            Functional::Covector { values, .. } => values.iter_mut().for_each(|v| *v *= c),
        }
        out
    }

    fn check(&self, alg: &Algebra) -> Result<()> {
        if self.algebra_id() != alg.id() {
            return Err(Error::Incompatible(self.algebra_id(), alg.id()));
        }
        Ok(())
    }

    /// Value on a single monomial.
    pub fn monomial_value(&self, alg: &Algebra, m: usize) -> C64 {
        match self {
            Functional::Product { scale, local, .. } => {
                let mut v = *scale;
                for (s, vals) in local.iter().enumerate() {
                    v *= vals[alg.local_index(m, s)];
                    if v == C64::new(0.0, 0.0) {
                        break;
                    }
                }
                v
            }
            Functional::Covector { values, .. } => values[m],
        }
    }

    /// Linear evaluation on an element.
    pub fn evaluate(&self, alg: &Algebra, a: &Element) -> Result<C64> {
        self.check(alg)?;
        if a.algebra_id() != alg.id() {
            return Err(Error::Incompatible(alg.id(), a.algebra_id()));
        }
        Ok(a.terms().map(|(m, c)| c * self.monomial_value(alg, m)).sum())
    }

    /// `τ(m n)` for monomials, without forming the product when possible.
    pub fn pair_monomials(&self, alg: &Algebra, m: usize, n: usize) -> C64 {
        match self {
            Functional::Product { scale, pairing, .. } => {
                let p = alg.p();
                let mut v = *scale;
                let mut e = 0usize;
                let mut prefix = 0usize;
                for (s, slot) in alg.slots().iter().enumerate() {
                    let a = alg.local_index(m, s);
                    let b = alg.local_index(n, s);
                    v *= pairing[s][a][b];
                    if v == C64::new(0.0, 0.0) {
                        return v;
                    }
                    if p > 1 {
                        e = (e + slot.site.degrees[a] * prefix) % p;
                        prefix = (prefix + slot.site.degrees[b]) % p;
                    }
                }
                v * alg.qneg(e)
            }
            Functional::Covector { values, .. } => {
                let mut acc = C64::new(0.0, 0.0);
                alg.mul_monomials_into(m, n, C64::new(1.0, 0.0), &mut |i, c| acc += c * values[i]);
                acc
            }
        }
    }

    /// `τ(X Y)`.
    pub fn pair(&self, alg: &Algebra, x: &Element, y: &Element) -> Result<C64> {
        self.check(alg)?;
        let mut acc = C64::new(0.0, 0.0);
        for (m, a) in x.terms() {
            for (n, b) in y.terms() {
                acc += a * b * self.pair_monomials(alg, m, n);
            }
        }
        Ok(acc)
    }

    /// Dense table of values on every monomial.
    pub fn to_covector(&self, alg: &Algebra) -> Result<Vec<C64>> {
        self.check(alg)?;
        Ok(par::map_range(alg.dim(), |m| self.monomial_value(alg, m)))
    }
}

/// Largest |ϱ(m)| over monomials of nonzero degree.
pub fn neutrality_defect(f: &Functional, alg: &Algebra) -> Result<f64> {
    f.check(alg)?;
    if alg.p() == 1 {
        return Ok(0.0);
    }
    let vals = par::map_range(alg.dim(), |m| {
        if alg.monomial_degree(m) == 0 {
            0.0
        } else {
            f.monomial_value(alg, m).norm()
        }
    });
    Ok(vals.into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct InvarianceReport {
    pub invariant: bool,
    pub max_deviation: f64,
}

/// Tests `ϱ(Θ(m)) = conj(ϱ(m))` on every monomial.
pub fn check_reflection_invariant(f: &Functional, alg: &Algebra) -> Result<InvarianceReport> {
    f.check(alg)?;
    let devs = par::map_range(alg.dim(), |m| {
        let lhs: C64 = alg
            .reflect_monomial(m)
            .into_iter()
            .map(|(i, c)| c * f.monomial_value(alg, i))
            .sum();
        let rhs = f.monomial_value(alg, m).conj();
        ((lhs - rhs).norm(), rhs.norm())
    });
    let scale = devs.iter().map(|d| d.1).fold(1.0, f64::max);
    let max_deviation = devs.iter().map(|d| d.0).fold(0.0, f64::max);
    Ok(InvarianceReport {
        invariant: max_deviation <= IDENTITY_TOL * scale,
        max_deviation,
    })
}

/// `F_{mn} = ϱ(Θ(m)∘n)` over positive monomials.
fn factor_entry(f: &Functional, alg: &Algebra, tm: &[(usize, C64)], n: usize) -> C64 {
    let p = alg.p();
    let dn = alg.monomial_degree(n);
    let w = alg.zeta_sq(dn);
    let mut acc = C64::new(0.0, 0.0);
    for &(i, c) in tm {
        if !(alg.monomial_degree(i) + dn).is_multiple_of(p) {
            continue;
        }
        acc += c * f.pair_monomials(alg, i, n);
    }
    acc * w
}

/// Induced positive-side functional `τ₊`, as values over [`Algebra::plus_monomials`].
///
/// Picks the positive monomial `A*` with the largest `ϱ(Θ(A*)∘A*)` and sets
/// `τ₊(B) = ϱ(Θ(A*)∘B) / √ϱ(Θ(A*)∘A*)`. Exact whenever ϱ factorizes.
pub fn induced_plus(f: &Functional, alg: &Algebra) -> Result<Vec<C64>> {
    f.check(alg)?;
    let plus = alg.plus_monomials();
    let reflected: Vec<Vec<(usize, C64)>> =
        par::map_slice(&plus, |&m| alg.reflect_monomial(m));
    let diag = par::map_range(plus.len(), |k| factor_entry(f, alg, &reflected[k], plus[k]).re);
    let (best, &top) = diag
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| Error::ConstraintViolation("empty positive half".into()))?;
    if top <= 0.0 {
        return Ok(vec![C64::new(0.0, 0.0); plus.len()]);
    }
    let norm = top.sqrt();
    Ok(par::map_range(plus.len(), |k| {
        factor_entry(f, alg, &reflected[best], plus[k]) / norm
    }))
}

#[derive(Debug, Clone, Serialize)]
pub struct FactorizationReport {
    pub factorizing: bool,
    pub max_deviation: f64,
    /// Induced `τ₊` over the positive monomials, in index order.
    #[serde(skip)]
    pub tau_plus: Vec<C64>,
}

/// Tests `ϱ(Θ(A)∘B) = conj(τ₊(A)) τ₊(B)` on all pairs of positive monomials.
pub fn check_factorizing(f: &Functional, alg: &Algebra) -> Result<FactorizationReport> {
    let tau_plus = induced_plus(f, alg)?;
    let plus = alg.plus_monomials();
    let reflected: Vec<Vec<(usize, C64)>> =
        par::map_slice(&plus, |&m| alg.reflect_monomial(m));
    let rows = par::map_range(plus.len(), |i| {
        let mut dev = 0.0f64;
        let mut scale = 0.0f64;
        for (j, &n) in plus.iter().enumerate() {
            let v = factor_entry(f, alg, &reflected[i], n);
            let expect = tau_plus[i].conj() * tau_plus[j];
            dev = dev.max((v - expect).norm());
            scale = scale.max(v.norm());
        }
        (dev, scale)
    });
    let max_deviation = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let scale = rows.iter().map(|r| r.1).fold(1.0, f64::max);
    Ok(FactorizationReport {
        factorizing: max_deviation <= IDENTITY_TOL * scale,
        max_deviation,
        tau_plus,
    })
}

/// Positive-side functional as a full covector (zero off the positive half).
pub fn plus_functional(alg: &Algebra, tau_plus: &[C64]) -> Result<Functional> {
    let plus = alg.plus_monomials();
    if tau_plus.len() != plus.len() {
        return Err(Error::ConstraintViolation("tau_plus length mismatch".into()));
    }
    let mut values = vec![C64::new(0.0, 0.0); alg.dim()];
    for (&m, &v) in plus.iter().zip(tau_plus) {
        values[m] = v;
    }
    Functional::covector(alg, values)
}

/// Restriction of ϱ to the positive half.
pub fn restriction_plus(f: &Functional, alg: &Algebra) -> Result<Functional> {
    let plus = alg.plus_monomials();
    let vals: Vec<C64> = plus.iter().map(|&m| f.monomial_value(alg, m)).collect();
    plus_functional(alg, &vals)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct StrictPositivityReport {
    pub strictly_positive: bool,
    pub min_eig: f64,
    /// `max |M − I|` over the monomial basis.
    pub identity_deviation: f64,
}

/// Gram matrix `M_{IJ} = τ₊(C_I^♯ C_J)` over a list of positive elements.
pub fn sharp_gram(alg: &Algebra, tau_plus: &Functional, elems: &[Element]) -> Result<CMatrix> {
    let sharps = elems
        .iter()
        .map(|e| alg.sharp(e))
        .collect::<Result<Vec<_>>>()?;
    let n = elems.len();
    let rows = par::map_range(n, |i| {
        (0..n)
            .map(|j| tau_plus.pair(alg, &sharps[i], &elems[j]))
            .collect::<Result<Vec<_>>>()
    });
    let mut m = CMatrix::zeros(n, n);
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row?.into_iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    Ok(m)
}

/// Strict positivity of `τ₊` with respect to ♯ on the positive monomial basis.
pub fn check_strictly_positive(alg: &Algebra, tau_plus: &Functional) -> Result<StrictPositivityReport> {
    let elems: Vec<Element> = alg.plus_monomials().into_iter().map(|m| alg.monomial(m)).collect();
    let m = sharp_gram(alg, tau_plus, &elems)?;
    let n = m.nrows();
    let identity_deviation = (&m - CMatrix::identity(n, n))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let verdict = linalg::psd_check(&m, linalg::PSD_TOL)?;
    let herm = linalg::hermitian_deviation(&m) <= 1e-10 * verdict.scale;
    Ok(StrictPositivityReport {
        strictly_positive: herm && verdict.min_eig > linalg::PSD_TOL * verdict.scale,
        min_eig: verdict.min_eig,
        identity_deviation,
    })
}

/// `max |Θ(H) − H|`.
pub fn reflection_defect(alg: &Algebra, h: &Element) -> Result<f64> {
    alg.reflect(h)?.max_abs_diff(h)
}

/// Covector `w_m = τ(m E)` for a density `E`.
pub fn density_covector(f: &Functional, alg: &Algebra, density: &Element) -> Result<Vec<C64>> {
    f.check(alg)?;
    let dense = alg.to_dense(density)?;
    match f {
        Functional::Product { scale, pairing, .. } => {
            let rows: Vec<Vec<Vec<(usize, C64)>>> = pairing
                .iter()
                .map(|tab| {
                    tab.iter()
                        .map(|row| {
                            row.iter()
                                .enumerate()
                                .filter(|(_, v)| v.norm() > 0.0)
                                .map(|(b, &v)| (b, v))
                                .collect()
                        })
                        .collect()
                })
                .collect();
            let strides = alg.strides();
            let p = alg.p();
            Ok(par::map_range(alg.dim(), |m| {
                let locals = alg.decode(m);
                let mut acc = C64::new(0.0, 0.0);
                // Depth-first over slot choices: (slot, index, coefficient, prefix, exponent).
                let mut stack = vec![(0usize, 0usize, *scale, 0usize, 0usize)];
                while let Some((s, idx, c, prefix, e)) = stack.pop() {
                    if s == locals.len() {
                        acc += c * alg.qneg(e) * dense[idx];
                        continue;
                    }
                    let site = &alg.slots()[s].site;
                    let a = locals[s];
                    let ne = if p > 1 { (e + site.degrees[a] * prefix) % p } else { 0 };
                    for &(b, v) in &rows[s][a] {
                        let np = if p > 1 { (prefix + site.degrees[b]) % p } else { 0 };
                        stack.push((s + 1, idx + b * strides[s], c * v, np, ne));
                    }
                }
                acc
            }))
        }
        Functional::Covector { values, .. } => {
            if alg.dim() > crate::algebra::MAX_REGULAR_DIM {
                return Err(Error::Resource(
                    "Boltzmann perturbation of a dense covector needs dimension <= 4096".into(),
                ));
            }
            let terms: Vec<(usize, C64)> = density.terms().collect();
            Ok(par::map_range(alg.dim(), |m| {
                let mut acc = C64::new(0.0, 0.0);
                for &(n, x) in &terms {
                    alg.mul_monomials_into(m, n, x, &mut |i, c| acc += c * values[i]);
                }
                acc
            }))
        }
    }
}

/// Boltzmann functional `A ↦ τ(A e^{−βH})`.
pub fn boltzmann(tau: &Functional, alg: &Algebra, h: &Element, beta: f64) -> Result<Functional> {
    if !alg.is_degree_zero(h) {
        return Err(Error::Grading("Boltzmann perturbation needs a degree-zero H".into()));
    }
    if beta == 0.0 {
        return Ok(tau.clone());
    }
    let e = alg.exp_neg(h, beta)?;
    let values = density_covector(tau, alg, &e)?;
    if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::NumericOverflow(format!("Boltzmann weights overflow at beta = {beta}")));
    }
    Functional::covector(alg, values)
}
