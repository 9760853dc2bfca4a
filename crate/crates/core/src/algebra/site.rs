//! Single-slot algebras: the local factors of a graded tensor product.
//!
//! Each slot carries a homogeneous basis with the unit at index 0, sparse
//! structure constants, a local functional, and (except for Grassmann slots)
//! a faithful matrix module whose basis images are trace-orthogonal.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// Sparse coefficient list `(index, coefficient)`.
pub type Sparse = Vec<(usize, C64)>;

/// Structure-constant cutoff applied when constants are derived numerically.
const PRUNE: f64 = 1e-13;

/// Faithful matrix module for a slot.
#[derive(Debug, Clone)]
pub struct LocalModule {
    /// Module dimension r.
    pub dim: usize,
    /// Sparse entries `(row, col, value)` of π(a) for every basis element.
    pub mats: Vec<Vec<(usize, usize, C64)>>,
    /// `tr(π(a)† π(a))`.
    pub norms: Vec<f64>,
    /// Diagonal of the grading operator P, with `P π(b) P⁻¹ = q^{|b|} π(b)`.
    pub grading: Vec<C64>,
    /// True when every π(a) is diagonal.
    pub diagonal: bool,
}

#[derive(Debug, Clone)]
pub struct SiteAlgebra {
    pub name: String,
    pub labels: Vec<String>,
    /// Degree of each basis element in `0..p`.
    pub degrees: Vec<usize>,
    /// `mult[a][b]` lists `(c, coeff)` with `e_a e_b = Σ coeff e_c`.
    pub mult: Vec<Vec<Sparse>>,
    /// Local adjoint `e_a* = Σ coeff e_c` (antilinear extension implied).
    pub adjoint: Option<Vec<Sparse>>,
    /// Local background functional on basis elements.
    pub trace: Vec<C64>,
    pub module: Option<LocalModule>,
    /// All non-unit basis elements are nilpotent.
    pub nilpotent: bool,
    /// Preferred local basis used to seed the adapted basis: labels and
    /// homogeneous combinations of basis elements, unit first.
    pub preferred: Option<(Vec<String>, Vec<Sparse>)>,
}

impl SiteAlgebra {
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    /// Builds a slot from matrices that are trace-orthogonal and closed under products.
    ///
    /// Structure constants, the adjoint table and the normalized trace are read off
    /// the module: `c_abk = tr(π(k)† π(a) π(b)) / ν_k`.
    pub fn from_module(
        name: &str,
        labels: Vec<String>,
        degrees: Vec<usize>,
        mats: Vec<CMatrix>,
        grading: Vec<C64>,
        q: C64,
    ) -> Result<Self> {
        let n = mats.len();
        if n == 0 || labels.len() != n || degrees.len() != n {
            return Err(Error::ConstraintViolation(format!(
                "slot `{name}`: basis, labels and degrees disagree in length"
            )));
        }
        let r = mats[0].nrows();
        if mats.iter().any(|m| m.nrows() != r || m.ncols() != r) || grading.len() != r {
            return Err(Error::ConstraintViolation(format!(
                "slot `{name}`: module matrices must all be {r}x{r}"
            )));
        }
        if (&mats[0] - CMatrix::identity(r, r)).norm() > 1e-12 {
            return Err(Error::ConstraintViolation(format!(
                "slot `{name}`: basis element 0 must act as the identity"
            )));
        }
        let adj: Vec<CMatrix> = mats.iter().map(|m| m.adjoint()).collect();
        let mut norms = vec![0.0; n];
        for a in 0..n {
            for b in 0..n {
                let t = (&adj[a] * &mats[b]).trace();
                if a == b {
                    norms[a] = t.re;
                } else if t.norm() > 1e-10 * r as f64 {
                    return Err(Error::ConstraintViolation(format!(
                        "slot `{name}`: module images of {} and {} are not trace-orthogonal",
                        labels[a], labels[b]
                    )));
                }
            }
        }
        if norms.iter().any(|&v| v <= 1e-12) {
            return Err(Error::ConstraintViolation(format!(
                "slot `{name}`: a basis element acts as zero"
            )));
        }
        let pmat = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(grading.clone()));
        let pinv = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(
            grading.iter().map(|z| z.inv()).collect(),
        ));
        for (b, m) in mats.iter().enumerate() {
            let lhs = &pmat * m * &pinv;
            let rhs = m * q.powu(degrees[b] as u32);
            if (lhs - rhs).norm() > 1e-12 * m.norm().max(1.0) {
                return Err(Error::ConstraintViolation(format!(
                    "slot `{name}`: grading operator does not twist {} by q^{}",
                    labels[b], degrees[b]
                )));
            }
        }
        let expand = |target: &CMatrix, what: &str| -> Result<Sparse> {
            let mut out = Sparse::new();
            let mut rebuilt = CMatrix::zeros(r, r);
            for k in 0..n {
                let c = (&adj[k] * target).trace() / norms[k];
                if c.norm() > PRUNE {
                    out.push((k, c));
                    rebuilt += &mats[k] * c;
                }
            }
            if (rebuilt - target).norm() > 1e-10 * target.norm().max(1.0) {
                return Err(Error::ConstraintViolation(format!(
                    "slot `{name}`: {what} leaves the span of the basis"
                )));
            }
            Ok(out)
        };
        let mut mult = vec![vec![Sparse::new(); n]; n];
        for a in 0..n {
            for b in 0..n {
                let prod = &mats[a] * &mats[b];
                mult[a][b] = expand(&prod, &format!("{}*{}", labels[a], labels[b]))?;
            }
        }
        let mut adjoint = Vec::with_capacity(n);
        for a in 0..n {
            adjoint.push(expand(&adj[a], &format!("adjoint of {}", labels[a]))?);
        }
        let trace = mats.iter().map(|m| m.trace() / r as f64).collect();
        let sparse_mats: Vec<Vec<(usize, usize, C64)>> = mats
            .iter()
            .map(|m| {
                let mut e = Vec::new();
                for i in 0..r {
                    for j in 0..r {
                        if m[(i, j)].norm() > 1e-14 {
                            e.push((i, j, m[(i, j)]));
                        }
                    }
                }
                e
            })
            .collect();
        let diagonal = sparse_mats.iter().all(|e| e.iter().all(|&(i, j, _)| i == j));
        Ok(SiteAlgebra {
            name: name.to_string(),
            labels,
            degrees,
            mult,
            adjoint: Some(adjoint),
            trace,
            module: Some(LocalModule {
                dim: r,
                mats: sparse_mats,
                norms,
                grading,
                diagonal,
            }),
            nilpotent: false,
            preferred: None,
        })
    }

    /// Full matrix algebra M_n(ℂ) in the clock-shift basis `X^a Z^b`, index `a·n + b`.
    ///
    /// These are orthonormal under the normalized trace.
    pub fn clock_shift(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ConstraintViolation("matrix size must be positive".into()));
        }
        let w = C64::from_polar(1.0, 2.0 * PI / n as f64);
        let mut mats = Vec::with_capacity(n * n);
        let mut labels = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                let mut m = CMatrix::zeros(n, n);
                for j in 0..n {
                    m[((j + a) % n, j)] = w.powu((b * j) as u32);
                }
                mats.push(m);
                labels.push(match (a, b) {
                    (0, 0) => "1".to_string(),
                    (0, b) => format!("Z{b}"),
                    (a, 0) => format!("X{a}"),
                    (a, b) => format!("X{a}Z{b}"),
                });
            }
        }
        let degrees = vec![0; n * n];
        Self::from_module(
            &format!("M{n}"),
            labels,
            degrees,
            mats,
            vec![C64::new(1.0, 0.0); n],
            C64::new(1.0, 0.0),
        )
    }

    /// Parafermion slot `{1, c, …, c^{p−1}}` with `c^p = 1`, `c` of degree 1.
    ///
    /// Module: `c ↦ X` (cyclic shift), grading operator the clock matrix.
    pub fn parafermion(p: usize) -> Result<Self> {
        if p < 2 {
            return Err(Error::UnsupportedGrading(p));
        }
        let q = C64::from_polar(1.0, 2.0 * PI / p as f64);
        let mut mats = Vec::with_capacity(p);
        for k in 0..p {
            let mut m = CMatrix::zeros(p, p);
            for j in 0..p {
                m[((j + k) % p, j)] = C64::new(1.0, 0.0);
            }
            mats.push(m);
        }
        let labels = (0..p)
            .map(|k| match k {
                0 => "1".to_string(),
                1 => "c".to_string(),
                k => format!("c^{k}"),
            })
            .collect();
        let grading = (0..p).map(|j| q.powu(j as u32)).collect();
        Self::from_module("parafermion", labels, (0..p).collect(), mats, grading, q)
    }

    /// Majorana slot `{1, c}` with `c² = 1`, `c` odd.
    pub fn majorana() -> Result<Self> {
        let mut s = Self::parafermion(2)?;
        s.name = "majorana".into();
        s.labels = vec!["1".into(), "c".into()];
        Ok(s)
    }

    /// Grassmann slot `{1, ψ}` with `ψ² = 0`; local functional is the Berezin coefficient.
    pub fn grassmann() -> Self {
        let one = C64::new(1.0, 0.0);
        SiteAlgebra {
            name: "grassmann".into(),
            labels: vec!["1".into(), "psi".into()],
            degrees: vec![0, 1],
            mult: vec![vec![vec![(0, one)], vec![(1, one)]], vec![vec![(1, one)], vec![]]],
            adjoint: None,
            trace: vec![C64::new(0.0, 0.0), one],
            module: None,
            nilpotent: true,
            preferred: None,
        }
    }

    /// Commutative algebra of functions on a finite set with the uniform measure.
    ///
    /// `basis[k][x]` is the value of basis function k at point x; basis 0 must be
    /// the constant 1 and the family must be orthogonal under the uniform average.
    pub fn functions(name: &str, labels: Vec<String>, basis: Vec<Vec<C64>>) -> Result<Self> {
        let r = basis.first().map(|v| v.len()).unwrap_or(0);
        if r == 0 || basis.iter().any(|v| v.len() != r) {
            return Err(Error::ConstraintViolation(format!(
                "slot `{name}`: basis functions must share a non-empty domain"
            )));
        }
        let mats = basis
            .iter()
            .map(|v| CMatrix::from_diagonal(&nalgebra::DVector::from_vec(v.clone())))
            .collect();
        let degrees = vec![0; basis.len()];
        Self::from_module(
            name,
            labels,
            degrees,
            mats,
            vec![C64::new(1.0, 0.0); r],
            C64::new(1.0, 0.0),
        )
    }

    /// Characters of the cyclic group Z_m, `χ_k(x) = e^{2πikx/m}`.
    pub fn cyclic(m: usize) -> Result<Self> {
        let basis = (0..m)
            .map(|k| {
                (0..m)
                    .map(|x| C64::from_polar(1.0, 2.0 * PI * (k * x) as f64 / m as f64))
                    .collect()
            })
            .collect();
        let labels = (0..m)
            .map(|k| if k == 0 { "1".into() } else { format!("chi{k}") })
            .collect();
        Self::functions(&format!("Z{m}"), labels, basis)
    }

    /// Values of a diagonal-module basis element at each point, if the module is diagonal.
    pub fn point_values(&self, a: usize) -> Option<Vec<C64>> {
        let module = self.module.as_ref()?;
        if !module.diagonal {
            return None;
        }
        let mut v = vec![C64::new(0.0, 0.0); module.dim];
        for &(i, _, z) in &module.mats[a] {
            v[i] = z;
        }
        Some(v)
    }

    /// Expands a function on the points of a diagonal module in the slot basis.
    pub fn expand_function(&self, values: &[C64]) -> Option<Sparse> {
        let module = self.module.as_ref()?;
        if !module.diagonal || values.len() != module.dim {
            return None;
        }
        let mut out = Sparse::new();
        for a in 0..self.dim() {
            let mut c = C64::new(0.0, 0.0);
            for &(i, _, z) in &module.mats[a] {
                c += z.conj() * values[i];
            }
            let c = c / module.norms[a];
            if c.norm() > PRUNE {
                out.push((a, c));
            }
        }
        Some(out)
    }

    /// Expands a matrix on the module space in the slot basis (`tr(π(a)† M)/ν_a`).
    pub fn expand_matrix(&self, m: &CMatrix) -> Option<Sparse> {
        let module = self.module.as_ref()?;
        let mut out = Sparse::new();
        for a in 0..self.dim() {
            let mut c = C64::new(0.0, 0.0);
            for &(i, j, z) in &module.mats[a] {
                c += z.conj() * m[(i, j)];
            }
            let c = c / module.norms[a];
            if c.norm() > PRUNE {
                out.push((a, c));
            }
        }
        Some(out)
    }

    /// Dense module matrix of basis element `a`.
    pub fn module_matrix(&self, a: usize) -> Option<CMatrix> {
        let module = self.module.as_ref()?;
        let mut m = CMatrix::zeros(module.dim, module.dim);
        for &(i, j, z) in &module.mats[a] {
            m[(i, j)] = z;
        }
        Some(m)
    }

    pub fn with_preferred(mut self, labels: Vec<String>, elements: Vec<Sparse>) -> Self {
        self.preferred = Some((labels, elements));
        self
    }

    /// Preferred local basis, or the structural basis when none is set.
    pub fn preferred_basis(&self) -> (Vec<String>, Vec<Sparse>) {
        match &self.preferred {
            Some(p) => p.clone(),
            None => (
                self.labels.clone(),
                (0..self.dim()).map(|a| vec![(a, C64::new(1.0, 0.0))]).collect(),
            ),
        }
    }

    /// Pairing table `P[a][b] = τ_s(e_a e_b)`.
    pub fn pairing(&self) -> Vec<Vec<C64>> {
        let n = self.dim();
        let mut p = vec![vec![C64::new(0.0, 0.0); n]; n];
        for a in 0..n {
            for b in 0..n {
                p[a][b] = self.mult[a][b].iter().map(|&(c, v)| v * self.trace[c]).sum();
            }
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clock_shift_products_are_single_terms() {
        let s = SiteAlgebra::clock_shift(3).unwrap();
        assert_eq!(s.dim(), 9);
        for a in 0..9 {
            for b in 0..9 {
                assert_eq!(s.mult[a][b].len(), 1);
            }
        }
        assert!((s.trace[0] - 1.0).norm() < 1e-15);
        assert!(s.trace[1..].iter().all(|t| t.norm() < 1e-15));
    }

    #[test]
    fn parafermion_power_relation() {
        let s = SiteAlgebra::parafermion(3).unwrap();
        // c · c^2 = 1
        assert_eq!(s.mult[1][2].len(), 1);
        assert_eq!(s.mult[1][2][0].0, 0);
        assert!((s.mult[1][2][0].1 - 1.0).norm() < 1e-14);
        // c* = c^2
        let adj = s.adjoint.as_ref().unwrap();
        assert_eq!(adj[1][0].0, 2);
    }

    #[test]
    fn cyclic_characters_multiply() {
        let s = SiteAlgebra::cyclic(4).unwrap();
        assert_eq!(s.mult[1][3][0].0, 0);
        assert_eq!(s.mult[2][3][0].0, 1);
        let adj = s.adjoint.as_ref().unwrap();
        assert_eq!(adj[1][0].0, 3);
    }

    #[test]
    fn non_orthogonal_module_is_rejected() {
        let one = CMatrix::identity(2, 2);
        let mut m = CMatrix::identity(2, 2);
        m[(0, 1)] = C64::new(1.0, 0.0);
        let err = SiteAlgebra::from_module(
            "bad",
            vec!["1".into(), "m".into()],
            vec![0, 0],
            vec![one, m],
            vec![C64::new(1.0, 0.0); 2],
            C64::new(1.0, 0.0),
        );
        assert!(err.is_err());
    }
}
