use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Sparse complex combination of monomials of one algebra.
///
/// Coefficients that are exactly zero are never stored. Iteration follows
/// monomial index order, which keeps every derived output deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub(crate) alg: u64,
    pub(crate) terms: BTreeMap<usize, C64>,
}

impl Element {
    pub(crate) fn empty(alg: u64) -> Self {
        Element {
            alg,
            terms: BTreeMap::new(),
        }
    }

    pub(crate) fn from_map(alg: u64, mut terms: BTreeMap<usize, C64>) -> Self {
        terms.retain(|_, c| *c != C64::new(0.0, 0.0));
        Element { alg, terms }
    }

    pub fn algebra_id(&self) -> u64 {
        self.alg
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, C64)> + '_ {
        self.terms.iter().map(|(&m, &c)| (m, c))
    }

    pub fn coeff(&self, monomial: usize) -> C64 {
        self.terms.get(&monomial).copied().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub(crate) fn add_term(&mut self, monomial: usize, c: C64) {
        let slot = self.terms.entry(monomial).or_default();
        *slot += c;
        if *slot == C64::new(0.0, 0.0) {
            self.terms.remove(&monomial);
        }
    }

    fn check(&self, other: &Element) -> Result<()> {
        if self.alg != other.alg {
            return Err(Error::Incompatible(self.alg, other.alg));
        }
        Ok(())
    }

    /// `self += alpha · other`.
    pub fn axpy(&mut self, alpha: C64, other: &Element) -> Result<()> {
        self.check(other)?;
        for (&m, &c) in &other.terms {
            self.add_term(m, alpha * c);
        }
        Ok(())
    }

    pub fn plus(&self, other: &Element) -> Result<Element> {
        let mut out = self.clone();
        out.axpy(C64::new(1.0, 0.0), other)?;
        Ok(out)
    }

    pub fn minus(&self, other: &Element) -> Result<Element> {
        let mut out = self.clone();
        out.axpy(C64::new(-1.0, 0.0), other)?;
        Ok(out)
    }

    pub fn scaled(&self, alpha: C64) -> Element {
        Element::from_map(
            self.alg,
            self.terms.iter().map(|(&m, &c)| (m, alpha * c)).collect(),
        )
    }

    pub fn neg(&self) -> Element {
        self.scaled(C64::new(-1.0, 0.0))
    }

    /// Drops coefficients with modulus at most `tol`.
    pub fn pruned(&self, tol: f64) -> Element {
        let mut out = self.clone();
        out.terms.retain(|_, c| c.norm() > tol);
        out
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest coefficient-wise deviation between two elements.
    pub fn max_abs_diff(&self, other: &Element) -> Result<f64> {
        Ok(self.minus(other)?.max_abs())
    }

    /// True if every coefficient is finite.
    pub fn is_finite(&self) -> bool {
        self.terms.values().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}
