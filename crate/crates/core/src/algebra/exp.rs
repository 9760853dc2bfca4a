//! `e^{−βH}` for degree-zero elements.
//!
//! Four routes, chosen from the slot data:
//! scalar `H`; nilpotent slots (finite series); diagonal modules (pointwise
//! exponential through separable transforms); matrix modules (Jordan–Wigner
//! assembly into a faithful representation). The dense regular representation
//! is the fallback.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use super::{Algebra, Element};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::par;

/// Dense per-slot transform, indexed `[row][col]`.
type Table = Vec<Vec<C64>>;

/// Largest module dimension used by the matrix-module route.
pub const MAX_MODULE_DIM: usize = 4096;

impl Algebra {
    /// `e^{−βH}`.
    pub fn exp_neg(&self, h: &Element, beta: f64) -> Result<Element> {
        self.check(h)?;
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::ConstraintViolation(format!("beta = {beta} must be finite and >= 0")));
        }
        if !self.is_degree_zero(h) {
            return Err(Error::Grading("exp_neg requires a degree-zero element".into()));
        }
        if !h.is_finite() {
            return Err(Error::NumericOverflow("non-finite coefficient in H".into()));
        }
        let out = if beta == 0.0 || h.is_zero() {
            self.unit()
        } else if h.terms().all(|(m, _)| m == 0) {
            self.scalar((-beta * h.coeff(0)).exp())
        } else if self.slots.iter().all(|s| s.site.nilpotent) {
            self.exp_nilpotent(h, beta)?
        } else if self.slots.iter().all(|s| s.site.module.as_ref().is_some_and(|m| m.diagonal)) {
            self.exp_diagonal(h, beta)?
        } else if self.slots.iter().all(|s| s.site.module.is_some())
            && self.module_dim() <= MAX_MODULE_DIM
        {
            self.exp_module(h, beta)?
        } else {
            let l = self.regular_representation(&h.scaled(C64::new(-beta, 0.0)))?;
            let e = linalg::mat_exp(&l)?;
            self.from_dense(&e.column(0).iter().copied().collect::<Vec<_>>())
        };
        if !out.is_finite() {
            return Err(Error::NumericOverflow(format!(
                "exp(-beta H) overflowed at beta = {beta}"
            )));
        }
        Ok(out)
    }

    fn module_dim(&self) -> usize {
        self.slots
            .iter()
            .map(|s| s.site.module.as_ref().map_or(usize::MAX, |m| m.dim))
            .try_fold(1usize, |acc, r| acc.checked_mul(r))
            .unwrap_or(usize::MAX)
    }

    fn exp_nilpotent(&self, h: &Element, beta: f64) -> Result<Element> {
        let h0 = h.coeff(0);
        let mut n = h.clone();
        n.add_term(0, -h0);
        let step = n.scaled(C64::new(-beta, 0.0));
        let mut term = self.unit();
        let mut sum = self.unit();
        for k in 1..=self.slots.len() + 1 {
            term = self.multiply(&term, &step)?.scaled(C64::new(1.0 / k as f64, 0.0));
            if term.is_zero() {
                break;
            }
            sum.axpy(C64::new(1.0, 0.0), &term)?;
        }
        Ok(sum.scaled((-beta * h0).exp()))
    }

    /// Applies a per-slot linear map along one tensor axis.
    fn axis_transform(data: &[C64], dims: &mut [usize], axis: usize, t: &[Vec<C64>]) -> Vec<C64> {
        let inner: usize = dims[axis + 1..].iter().product();
        let outer: usize = dims[..axis].iter().product();
        let n_in = dims[axis];
        let n_out = t.len();
        let mut out = vec![C64::new(0.0, 0.0); outer * n_out * inner];
        for o in 0..outer {
            for (g, row) in t.iter().enumerate() {
                let dst = (o * n_out + g) * inner;
                for (a, &w) in row.iter().enumerate() {
                    if w == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let src = (o * n_in + a) * inner;
                    for i in 0..inner {
                        out[dst + i] += w * data[src + i];
                    }
                }
            }
        }
        dims[axis] = n_out;
        out
    }

    fn exp_diagonal(&self, h: &Element, beta: f64) -> Result<Element> {
        let mut dims: Vec<usize> = self.slots.iter().map(|s| s.site.dim()).collect();
        let mut data = self.to_dense(h)?;
        let tables: Vec<(Table, Table)> = self
            .slots
            .iter()
            .map(|slot| {
                let site = &slot.site;
                let module = site.module.as_ref().expect("diagonal module");
                let n = site.dim();
                let vals: Vec<Vec<C64>> =
                    (0..n).map(|a| site.point_values(a).expect("diagonal")).collect();
                let fwd = (0..module.dim).map(|g| (0..n).map(|a| vals[a][g]).collect()).collect();
                let back = (0..n)
                    .map(|a| (0..module.dim).map(|g| vals[a][g].conj() / module.norms[a]).collect())
                    .collect();
                (fwd, back)
            })
            .collect();
        for (s, (fwd, _)) in tables.iter().enumerate() {
            data = Self::axis_transform(&data, &mut dims, s, fwd);
        }
        for v in &mut data {
            *v = (-beta * *v).exp();
        }
        for (s, (_, back)) in tables.iter().enumerate() {
            data = Self::axis_transform(&data, &mut dims, s, back);
        }
        Ok(self.from_dense(&data))
    }

    /// Sparse entries of the Jordan–Wigner image of monomial `m`.
    pub(crate) fn module_entries(&self, m: usize) -> Vec<(usize, usize, C64)> {
        let p = self.p();
        let n = self.slots.len();
        let locals = self.decode(m);
        let mut later = vec![0usize; n];
        let mut acc = 0usize;
        for s in (0..n).rev() {
            later[s] = acc % p;
            acc += self.slots[s].site.degrees[locals[s]];
        }
        let mut entries = vec![(0usize, 0usize, C64::new(1.0, 0.0))];
        for s in 0..n {
            let module = self.slots[s].site.module.as_ref().expect("module");
            let r = module.dim;
            let k = later[s] as u32;
            let local: Vec<(usize, usize, C64)> = module.mats[locals[s]]
                .iter()
                .map(|&(i, j, v)| {
                    let tw = if k == 0 { C64::new(1.0, 0.0) } else { module.grading[j].inv().powu(k) };
                    (i, j, v * tw)
                })
                .collect();
            entries = entries
                .iter()
                .flat_map(|&(i0, j0, v0)| {
                    local.iter().map(move |&(i, j, v)| (i0 * r + i, j0 * r + j, v0 * v))
                })
                .collect();
        }
        entries
    }

    /// Norm `tr(π(m)† π(m))` of a monomial's module image.
    pub(crate) fn module_norm(&self, m: usize) -> f64 {
        self.slots
            .iter()
            .enumerate()
            .map(|(s, slot)| slot.site.module.as_ref().expect("module").norms[self.local_index(m, s)])
            .product()
    }

    /// Dense module image `π(A)`.
    pub fn module_matrix(&self, a: &Element) -> Result<CMatrix> {
        self.check(a)?;
        if !self.slots.iter().all(|s| s.site.module.is_some()) {
            return Err(Error::ConstraintViolation("algebra has slots without a module".into()));
        }
        let r = self.module_dim();
        if r > MAX_MODULE_DIM {
            return Err(Error::Resource(format!("module dimension {r} exceeds {MAX_MODULE_DIM}")));
        }
        let mut out = CMatrix::zeros(r, r);
        for (m, c) in a.terms() {
            for (i, j, v) in self.module_entries(m) {
                out[(i, j)] += c * v;
            }
        }
        Ok(out)
    }

    /// Reads an element back from its module image.
    pub fn from_module_matrix(&self, mat: &CMatrix) -> Result<Element> {
        let r = self.module_dim();
        if mat.nrows() != r || mat.ncols() != r {
            return Err(Error::ConstraintViolation("module matrix has the wrong size".into()));
        }
        let coeffs = par::map_range(self.dim, |m| {
            let mut c = C64::new(0.0, 0.0);
            for (i, j, v) in self.module_entries(m) {
                c += v.conj() * mat[(i, j)];
            }
            c / self.module_norm(m)
        });
        let mut acc = BTreeMap::new();
        for (m, c) in coeffs.into_iter().enumerate() {
            if c != C64::new(0.0, 0.0) {
                acc.insert(m, c);
            }
        }
        Ok(Element::from_map(self.id, acc))
    }

    fn exp_module(&self, h: &Element, beta: f64) -> Result<Element> {
        let mh = self.module_matrix(&h.scaled(C64::new(-beta, 0.0)))?;
        let e = linalg::mat_exp(&mh)?;
        self.from_module_matrix(&e)
    }
}
