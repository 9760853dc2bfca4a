//! Adapted basis, dual pairs, coupling matrices and the `H = H₋ + H₀ + H₊` split.

use std::io::Write;
use std::path::Path;

use nalgebra::Cholesky;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::algebra::{Algebra, Element, Side};
use crate::doubles::Double;
use crate::error::{Error, Result};
use crate::functionals::{self, Functional};
use crate::linalg::{self, CMatrix, PsdVerdict};
use crate::par;

pub use crate::linalg::psd_check;

/// Tolerance for B2 after orthonormalization.
pub const B2_TOL: f64 = 1e-10;
/// Largest positive half handled by the dense basis construction.
pub const MAX_PLUS_DIM: usize = 4096;

/// Homogeneous basis of 𝔄₊ with unit first and `τ₊(C_I^♯ C_J) = δ_IJ`.
#[derive(Debug, Clone)]
pub struct AdaptedBasis {
    pub elements: Vec<Element>,
    pub sharps: Vec<Element>,
    pub theta: Vec<Element>,
    pub theta_sharps: Vec<Element>,
    pub degrees: Vec<usize>,
    pub labels: Vec<String>,
    /// Index I₀ of the unit.
    pub unit: usize,
    /// The positive-side functional τ₊ used for B2.
    pub tau_plus: Functional,
    /// Whether the background functional factorizes.
    pub factorizing: bool,
    pub factorization_deviation: f64,
    /// Whether Gram–Schmidt changed the seed basis.
    pub orthonormalized: bool,
    /// `max |M − I|` after construction.
    pub b2_deviation: f64,
}

impl AdaptedBasis {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Indices of degree `k`, in basis order.
    pub fn indices_of_degree(&self, k: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.degrees[i] == k).collect()
    }
}

/// Seed elements: products of each positive slot's preferred local elements.
fn seed_basis(alg: &Algebra) -> Result<(Vec<String>, Vec<Element>, Vec<usize>)> {
    let mut labels = vec![String::new()];
    let mut elems = vec![alg.unit()];
    let mut degrees = vec![0usize];
    let p = alg.p();
    for (s, slot) in alg.slots().iter().enumerate() {
        if slot.side == Side::Minus {
            continue;
        }
        let (names, locals) = slot.site.preferred_basis();
        let mut local_elems = Vec::with_capacity(locals.len());
        for (a, terms) in locals.iter().enumerate() {
            let e = alg.local_combination(s, terms);
            let d = alg.degree(&e).ok_or_else(|| {
                Error::Grading(format!("preferred element {} of slot {} is not homogeneous", names[a], slot.label))
            })?;
            local_elems.push((d, e));
        }
        let mut next_labels = Vec::with_capacity(labels.len() * locals.len());
        let mut next_elems = Vec::with_capacity(elems.len() * locals.len());
        let mut next_degrees = Vec::with_capacity(elems.len() * locals.len());
        for ((label, e), d) in labels.iter().zip(&elems).zip(&degrees) {
            for (a, (da, la)) in local_elems.iter().enumerate() {
                next_elems.push(alg.multiply(e, la)?);
                next_degrees.push((d + da) % p);
                next_labels.push(if a == 0 {
                    label.clone()
                } else if label.is_empty() {
                    format!("{}[{}]", names[a], slot.label)
                } else {
                    format!("{label} {}[{}]", names[a], slot.label)
                });
            }
        }
        labels = next_labels;
        elems = next_elems;
        degrees = next_degrees;
    }
    let mut order: Vec<usize> = (0..elems.len()).collect();
    order.sort_by_key(|&i| degrees[i]);
    let labels = order
        .iter()
        .map(|&i| if labels[i].is_empty() { "1".to_string() } else { labels[i].clone() })
        .collect();
    let elems = order.iter().map(|&i| elems[i].clone()).collect();
    let degrees = order.iter().map(|&i| degrees[i]).collect();
    Ok((labels, elems, degrees))
}

/// Monomial Gram `G_mn = τ₊(m^♯ n)` over the positive monomials.
fn monomial_gram(alg: &Algebra, tau_plus: &Functional, plus: &[usize]) -> Result<CMatrix> {
    let sharps = plus
        .iter()
        .map(|&m| alg.sharp(&alg.monomial(m)))
        .collect::<Result<Vec<_>>>()?;
    let n = plus.len();
    let rows = par::map_range(n, |i| {
        plus.iter()
            .map(|&m| tau_plus.pair(alg, &sharps[i], &alg.monomial(m)))
            .collect::<Result<Vec<_>>>()
    });
    let mut g = CMatrix::zeros(n, n);
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row?.into_iter().enumerate() {
            g[(i, j)] = v;
        }
    }
    Ok(g)
}

fn max_identity_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    (m - CMatrix::identity(n, n)).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Builds the adapted basis of a double.
///
/// The seed is the product of preferred local bases, degree-major with the unit first.
/// It is kept when already orthonormal for `⟨A,B⟩ = τ₊(A^♯B)`; otherwise it is
/// orthonormalized in order (a Cholesky factorization of the seed Gram matrix).
pub fn build_adapted_basis(double: &Double) -> Result<AdaptedBasis> {
    let alg = &double.algebra;
    let plus = alg.plus_monomials();
    if plus.len() > MAX_PLUS_DIM {
        return Err(Error::Resource(format!(
            "positive half of dimension {} exceeds {MAX_PLUS_DIM}",
            plus.len()
        )));
    }
    let fr = functionals::check_factorizing(&double.background, alg)?;
    let tau_plus = if fr.factorizing {
        functionals::plus_functional(alg, &fr.tau_plus)?
    } else {
        functionals::restriction_plus(&double.background, alg)?
    };
    let (labels, seeds, degrees) = seed_basis(alg)?;
    if seeds.len() != plus.len() {
        return Err(Error::ConstraintViolation(format!(
            "preferred bases give {} elements but the positive half has dimension {}",
            seeds.len(),
            plus.len()
        )));
    }
    let pos: std::collections::HashMap<usize, usize> =
        plus.iter().enumerate().map(|(k, &m)| (m, k)).collect();
    let n = plus.len();
    let mut x = CMatrix::zeros(n, n);
    for (j, e) in seeds.iter().enumerate() {
        for (m, c) in e.terms() {
            x[(pos[&m], j)] = c;
        }
    }
    let g = monomial_gram(alg, &tau_plus, &plus)?;
    let m = x.adjoint() * &g * &x;
    let mut orthonormalized = false;
    if max_identity_deviation(&m) > 1e-12 {
        let herm = linalg::hermitian_part(&m);
        let chol = Cholesky::new(herm.clone()).ok_or_else(|| {
            let min = linalg::hermitian_eigen(&herm).map(|(v, _)| v[0]).unwrap_or(f64::NAN);
            Error::StrictPositivity(min)
        })?;
        let l_adj_inv = chol
            .l()
            .adjoint()
            .try_inverse()
            .ok_or(Error::StrictPositivity(0.0))?;
        x *= l_adj_inv;
        orthonormalized = true;
    }
    let b2_deviation = max_identity_deviation(&(x.adjoint() * &g * &x));
    if b2_deviation > B2_TOL {
        return Err(Error::StrictPositivity(-b2_deviation));
    }
    let elements: Vec<Element> = if orthonormalized {
        (0..n)
            .map(|j| {
                alg.element(
                    (0..n)
                        .filter(|&i| x[(i, j)].norm() > 1e-15)
                        .map(|i| (plus[i], x[(i, j)])),
                )
            })
            .collect::<Result<_>>()?
    } else {
        seeds
    };
    if elements[0].max_abs_diff(&alg.unit())? > 1e-12 {
        return Err(Error::ConstraintViolation("the unit must satisfy τ₊(1) = 1".into()));
    }
    let sharps = par::map_slice(&elements, |e| alg.sharp(e)).into_iter().collect::<Result<Vec<_>>>()?;
    let theta = par::map_slice(&elements, |e| alg.reflect(e)).into_iter().collect::<Result<Vec<_>>>()?;
    let theta_sharps = par::map_slice(&sharps, |e| alg.reflect(e)).into_iter().collect::<Result<Vec<_>>>()?;
    Ok(AdaptedBasis {
        elements,
        sharps,
        theta,
        theta_sharps,
        degrees,
        labels,
        unit: 0,
        tau_plus,
        factorizing: fr.factorizing,
        factorization_deviation: fr.max_deviation,
        orthonormalized,
        b2_deviation,
    })
}

/// `w(A∘B)` for a covector `w` over all monomials, without forming `A∘B`.
pub(crate) fn twisted_value(alg: &Algebra, a: &Element, b: &Element, w: &[C64]) -> C64 {
    let p = alg.p();
    let mut acc = C64::new(0.0, 0.0);
    for (m, x) in a.terms() {
        let dm = alg.monomial_degree(m);
        for (n, y) in b.terms() {
            let dn = alg.monomial_degree(n);
            if !(dm + dn).is_multiple_of(p) {
                continue;
            }
            let c = alg.zeta_sq(dn) * x * y;
            alg.mul_monomials_into(m, n, c, &mut |i, v| acc += v * w[i]);
        }
    }
    acc
}

/// `(B_IJ, B̂_IJ) = (Θ(C_I)∘C_J, Θ(C_I^♯)∘C_J^♯)`.
///
/// Pairs of different degree give zero elements.
pub fn dual_pair(alg: &Algebra, basis: &AdaptedBasis, i: usize, j: usize) -> (Element, Element) {
    let b = alg.twisted_unchecked(&basis.theta[i], &basis.elements[j]);
    let bh = alg.twisted_unchecked(&basis.theta_sharps[i], &basis.sharps[j]);
    (b, bh)
}

/// Matrix of coupling constants over the adapted basis.
#[derive(Debug, Clone)]
pub struct CouplingMatrix {
    pub matrix: CMatrix,
    pub degrees: Vec<usize>,
    pub labels: Vec<String>,
    pub unit: usize,
}

#[derive(Debug, Clone, Serialize)]
struct CouplingJson<'a> {
    labels: &'a [String],
    degrees: &'a [usize],
    unit_index: usize,
    real: Vec<Vec<f64>>,
    imag: Vec<Vec<f64>>,
    j0_spectrum: Vec<f64>,
}

impl CouplingMatrix {
    pub fn len(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.nrows() == 0
    }

    /// Indices other than I₀.
    pub fn j0_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| i != self.unit).collect()
    }

    /// `J⁰`: the matrix with the I₀ row and column removed.
    pub fn j0(&self) -> CMatrix {
        let idx = self.j0_indices();
        CMatrix::from_fn(idx.len(), idx.len(), |a, b| self.matrix[(idx[a], idx[b])])
    }

    /// Degree blocks of J⁰ as `(degree, basis indices, matrix)`.
    pub fn j0_blocks(&self, p: usize) -> Vec<(usize, Vec<usize>, CMatrix)> {
        (0..p)
            .filter_map(|k| {
                let idx: Vec<usize> = self
                    .j0_indices()
                    .into_iter()
                    .filter(|&i| self.degrees[i] == k)
                    .collect();
                (!idx.is_empty()).then(|| {
                    let m = CMatrix::from_fn(idx.len(), idx.len(), |a, b| self.matrix[(idx[a], idx[b])]);
                    (k, idx, m)
                })
            })
            .collect()
    }

    pub fn j0_psd(&self, tol: f64) -> Result<PsdVerdict> {
        linalg::psd_check(&self.j0(), tol)
    }

    /// Ascending eigenvalues of the Hermitian part of J⁰.
    pub fn j0_spectrum(&self) -> Result<Vec<f64>> {
        let j0 = self.j0();
        if j0.nrows() == 0 {
            return Ok(Vec::new());
        }
        Ok(linalg::hermitian_eigen(&linalg::hermitian_part(&j0))?.0)
    }

    /// Largest `|J_IJ|` with `|C_I| ≠ |C_J|`.
    pub fn cross_degree_max(&self) -> f64 {
        let n = self.len();
        let mut out = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if self.degrees[i] != self.degrees[j] {
                    out = out.max(self.matrix[(i, j)].norm());
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<serde_json::Value> {
        let n = self.len();
        let real = (0..n).map(|i| (0..n).map(|j| self.matrix[(i, j)].re).collect()).collect();
        let imag = (0..n).map(|i| (0..n).map(|j| self.matrix[(i, j)].im).collect()).collect();
        Ok(serde_json::to_value(CouplingJson {
            labels: &self.labels,
            degrees: &self.degrees,
            unit_index: self.unit,
            real,
            imag,
            j0_spectrum: self.j0_spectrum()?,
        })?)
    }

    /// Long-format CSV: one row per entry with labels, degrees, and real/imaginary parts.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["row", "col", "row_label", "col_label", "row_degree", "col_degree", "re", "im", "unit"])?;
        let n = self.len();
        for i in 0..n {
            for j in 0..n {
                let z = self.matrix[(i, j)];
                let unit = i == self.unit || j == self.unit;
                w.write_record([
                    i.to_string(),
                    j.to_string(),
                    self.labels[i].clone(),
                    self.labels[j].clone(),
                    self.degrees[i].to_string(),
                    self.degrees[j].to_string(),
                    format!("{:e}", z.re),
                    format!("{:e}", z.im),
                    unit.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// `J_IJ = τ(B̂_IJ · (−H))`, so that `−H = Σ J_IJ B_IJ`.
pub fn extract_couplings(double: &Double, basis: &AdaptedBasis, h: &Element) -> Result<CouplingMatrix> {
    let alg = &double.algebra;
    if !basis.factorizing {
        return Err(Error::NonFactorizing(basis.factorization_deviation));
    }
    if !alg.is_degree_zero(h) {
        return Err(Error::Grading("coupling extraction needs a degree-zero H".into()));
    }
    let w = functionals::density_covector(&double.background, alg, &h.neg())?;
    let n = basis.len();
    let rows = par::map_range(n, |i| {
        (0..n)
            .map(|j| {
                if basis.degrees[i] != basis.degrees[j] {
                    C64::new(0.0, 0.0)
                } else {
                    twisted_value(alg, &basis.theta_sharps[i], &basis.sharps[j], &w)
                }
            })
            .collect::<Vec<_>>()
    });
    let matrix = CMatrix::from_fn(n, n, |i, j| rows[i][j]);
    Ok(CouplingMatrix {
        matrix,
        degrees: basis.degrees.clone(),
        labels: basis.labels.clone(),
        unit: basis.unit,
    })
}

/// `Σ_{(I,J) ∈ pairs} J_IJ B_IJ`.
fn assemble(alg: &Algebra, basis: &AdaptedBasis, j: &CMatrix, skip_unit: bool) -> Element {
    let n = basis.len();
    let parts = par::map_range(n, |i| {
        let mut acc = alg.zero();
        if skip_unit && i == basis.unit {
            return acc;
        }
        for k in 0..n {
            if (skip_unit && k == basis.unit) || basis.degrees[i] != basis.degrees[k] {
                continue;
            }
            let c = j[(i, k)];
            if c == C64::new(0.0, 0.0) {
                continue;
            }
            let b = alg.twisted_unchecked(&basis.theta[i], &basis.elements[k]);
            acc.axpy(c, &b).expect("same algebra");
        }
        acc
    });
    let mut out = alg.zero();
    for p in parts {
        out.axpy(C64::new(1.0, 0.0), &p).expect("same algebra");
    }
    out
}

/// `H = −Σ J_IJ B_IJ`.
pub fn reconstruct(double: &Double, basis: &AdaptedBasis, j: &CouplingMatrix) -> Result<Element> {
    if j.len() != basis.len() {
        return Err(Error::ConstraintViolation("coupling matrix does not match the basis".into()));
    }
    let cross = j.cross_degree_max();
    if cross > 0.0 {
        return Err(Error::Grading(format!(
            "coupling matrix has entries between different degrees (max {cross:e})"
        )));
    }
    Ok(assemble(&double.algebra, basis, &j.matrix, false).neg())
}

/// The three parts of `H = Θ(H₊) + H₀ + H₊`.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub minus: Element,
    pub zero: Element,
    pub plus: Element,
    /// `max |H − (H₋ + H₀ + H₊)|`.
    pub residual: f64,
    pub j0: PsdVerdict,
}

/// Splits H using the coupling matrix, provided J⁰ is PSD.
pub fn decompose(double: &Double, basis: &AdaptedBasis, h: &Element, j: &CouplingMatrix) -> Result<Decomposition> {
    let alg = &double.algebra;
    let j0 = j.j0_psd(linalg::PSD_TOL)?;
    if !j0.psd {
        return Err(Error::DecompositionUnavailable(j0.min_eig));
    }
    let zero = assemble(alg, basis, &j.matrix, true).neg();
    let u = basis.unit;
    let mut neg_plus = alg.scalar(j.matrix[(u, u)] * 0.5);
    for k in 0..basis.len() {
        if k != u && basis.degrees[k] == 0 {
            neg_plus.axpy(j.matrix[(u, k)], &basis.elements[k])?;
        }
    }
    let plus = neg_plus.neg();
    let minus = alg.reflect(&plus)?;
    let total = minus.plus(&zero)?.plus(&plus)?;
    let residual = total.max_abs_diff(h)?;
    Ok(Decomposition {
        minus,
        zero,
        plus,
        residual,
        j0,
    })
}

/// `K` lies in the closed cone iff its full coupling matrix (of `H = −K`) is PSD.
pub fn cone_membership(double: &Double, basis: &AdaptedBasis, k: &Element) -> Result<bool> {
    let j = extract_couplings(double, basis, &k.neg())?;
    Ok(linalg::psd_check(&j.matrix, linalg::PSD_TOL)?.psd)
}
