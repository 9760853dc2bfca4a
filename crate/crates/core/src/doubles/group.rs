use std::collections::VecDeque;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

const GROUP_TOL: f64 = 1e-10;

/// Unitary irreducible representation given by its matrices on every group element.
#[derive(Debug, Clone, PartialEq)]
pub struct Irrep {
    pub label: String,
    pub mats: Vec<CMatrix>,
}

impl Irrep {
    pub fn dim(&self) -> usize {
        self.mats.first().map_or(0, |m| m.nrows())
    }
}

/// Serializable form of user-supplied irreps: `mats[g][row][col] = [re, im]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IrrepSpec {
    pub label: String,
    pub mats: Vec<Vec<Vec<[f64; 2]>>>,
}

impl IrrepSpec {
    pub fn to_irrep(&self) -> Result<Irrep> {
        let mats = self
            .mats
            .iter()
            .map(|rows| {
                let n = rows.len();
                if rows.iter().any(|r| r.len() != n) {
                    return Err(Error::InvalidGroup(format!("irrep `{}` has a non-square matrix", self.label)));
                }
                Ok(CMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Irrep { label: self.label.clone(), mats })
    }
}

/// Finite group given by its multiplication table, with a complete set of irreps.
#[derive(Debug, Clone)]
pub struct FiniteGroupTable {
    names: Vec<String>,
    mul: Vec<Vec<usize>>,
    inv: Vec<usize>,
    identity: usize,
    irreps: Vec<Irrep>,
}

impl FiniteGroupTable {
    /// Cyclic group Z_n with its characters.
    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGroup("a group needs at least one element".into()));
        }
        let names = (0..n).map(|k| format!("g{k}")).collect();
        let mul = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Self::abelian(names, mul)
    }

    /// Abelian group from a multiplication table; characters are computed.
    pub fn abelian(names: Vec<String>, mul: Vec<Vec<usize>>) -> Result<Self> {
        let (identity, inv) = check_axioms(&mul)?;
        let n = mul.len();
        if names.len() != n {
            return Err(Error::InvalidGroup("names and table differ in size".into()));
        }
        for a in 0..n {
            for b in 0..n {
                if mul[a][b] != mul[b][a] {
                    return Err(Error::InvalidGroup(
                        "the table is not commutative; supply irrep matrices instead".into(),
                    ));
                }
            }
        }
        let chars = abelian_characters(&mul, identity)?;
        let irreps = chars
            .into_iter()
            .enumerate()
            .map(|(k, chi)| Irrep {
                label: if k == 0 { "trivial".into() } else { format!("chi{k}") },
                mats: chi.into_iter().map(|z| CMatrix::from_element(1, 1, z)).collect(),
            })
            .collect();
        let g = FiniteGroupTable { names, mul, inv, identity, irreps };
        g.check_irreps()?;
        Ok(g)
    }

    /// Any finite group with user-supplied irreps, validated by orthonormality and completeness.
    pub fn with_irreps(names: Vec<String>, mul: Vec<Vec<usize>>, irreps: Vec<Irrep>) -> Result<Self> {
        let (identity, inv) = check_axioms(&mul)?;
        if names.len() != mul.len() {
            return Err(Error::InvalidGroup("names and table differ in size".into()));
        }
        let g = FiniteGroupTable { names, mul, inv, identity, irreps };
        g.check_irreps()?;
        Ok(g)
    }

    /// Symmetric group S₃ with its trivial, sign and two-dimensional irreps.
    pub fn s3() -> Result<Self> {
        // Elements as permutations of {0,1,2}.
        let perms: Vec<[usize; 3]> =
            vec![[0, 1, 2], [1, 2, 0], [2, 0, 1], [1, 0, 2], [0, 2, 1], [2, 1, 0]];
        let compose = |a: &[usize; 3], b: &[usize; 3]| [a[b[0]], a[b[1]], a[b[2]]];
        let mul: Vec<Vec<usize>> = perms
            .iter()
            .map(|a| {
                perms
                    .iter()
                    .map(|b| {
                        let c = compose(a, b);
                        perms.iter().position(|p| *p == c).expect("closed")
                    })
                    .collect()
            })
            .collect();
        let names = ["e", "r", "r2", "s01", "s12", "s02"].iter().map(|s| s.to_string()).collect();
        let sign: Vec<f64> = vec![1.0, 1.0, 1.0, -1.0, -1.0, -1.0];
        // Standard representation on the plane orthogonal to (1,1,1).
        let basis = [
            [1.0 / 2f64.sqrt(), -1.0 / 2f64.sqrt(), 0.0],
            [1.0 / 6f64.sqrt(), 1.0 / 6f64.sqrt(), -2.0 / 6f64.sqrt()],
        ];
        let standard = perms
            .iter()
            .map(|p| {
                CMatrix::from_fn(2, 2, |i, j| {
                    let mut v = [0.0; 3];
                    for k in 0..3 {
                        v[p[k]] += basis[j][k];
                    }
                    C64::new((0..3).map(|k| basis[i][k] * v[k]).sum(), 0.0)
                })
            })
            .collect();
        let one = |x: f64| CMatrix::from_element(1, 1, C64::new(x, 0.0));
        let irreps = vec![
            Irrep { label: "trivial".into(), mats: vec![one(1.0); 6] },
            Irrep { label: "sign".into(), mats: sign.iter().map(|&s| one(s)).collect() },
            Irrep { label: "standard".into(), mats: standard },
        ];
        Self::with_irreps(names, mul, irreps)
    }

    pub fn order(&self) -> usize {
        self.mul.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn irreps(&self) -> &[Irrep] {
        &self.irreps
    }

    fn check_irreps(&self) -> Result<()> {
        let n = self.order();
        if self.irreps.is_empty() || self.irreps[0].dim() != 1 {
            return Err(Error::InvalidGroup("the first irrep must be the trivial one".into()));
        }
        for rho in &self.irreps {
            let d = rho.dim();
            if rho.mats.len() != n || rho.mats.iter().any(|m| m.nrows() != d || m.ncols() != d) {
                return Err(Error::InvalidGroup(format!("irrep `{}` has the wrong shape", rho.label)));
            }
            for a in 0..n {
                for b in 0..n {
                    let lhs = &rho.mats[a] * &rho.mats[b];
                    if (lhs - &rho.mats[self.mul[a][b]]).norm() > GROUP_TOL {
                        return Err(Error::InvalidGroup(format!(
                            "irrep `{}` is not a homomorphism at ({}, {})",
                            rho.label, self.names[a], self.names[b]
                        )));
                    }
                }
            }
        }
        if self.irreps[0].mats.iter().any(|m| (m[(0, 0)] - 1.0).norm() > GROUP_TOL) {
            return Err(Error::InvalidGroup("the first irrep must be the trivial one".into()));
        }
        // Schur orthogonality: (d_ρ/|G|) Σ_g conj(D^ρ_ab(g)) D^σ_cd(g) = δ_ρσ δ_ac δ_bd.
        let funcs = self.peter_weyl_functions();
        for (i, (_, f)) in funcs.iter().enumerate() {
            for (j, (_, h)) in funcs.iter().enumerate().skip(i) {
                let ip: C64 = f.iter().zip(h).map(|(x, y)| x.conj() * y).sum::<C64>() / n as f64;
                let want = if i == j { 1.0 } else { 0.0 };
                if (ip - want).norm() > GROUP_TOL {
                    return Err(Error::InvalidGroup(
                        "irrep matrix elements are not orthonormal under the uniform average".into(),
                    ));
                }
            }
        }
        if funcs.len() != n {
            return Err(Error::InvalidGroup(format!(
                "irreps are incomplete: Σ d² = {} but |G| = {n}",
                funcs.len()
            )));
        }
        Ok(())
    }

    /// Orthonormal basis `√d_ρ D^ρ_ab(g)` of functions on the group, trivial first.
    pub fn peter_weyl_functions(&self) -> Vec<(String, Vec<C64>)> {
        let mut out = Vec::new();
        for rho in &self.irreps {
            let d = rho.dim();
            let s = (d as f64).sqrt();
            for a in 0..d {
                for b in 0..d {
                    let label = if d == 1 {
                        rho.label.clone()
                    } else {
                        format!("{}[{a}{b}]", rho.label)
                    };
                    out.push((label, rho.mats.iter().map(|m| m[(a, b)] * s).collect()));
                }
            }
        }
        out
    }

    /// Position of irrep `label`.
    pub fn irrep_index(&self, label: &str) -> Option<usize> {
        self.irreps.iter().position(|r| r.label == label)
    }
}

fn check_axioms(mul: &[Vec<usize>]) -> Result<(usize, Vec<usize>)> {
    let n = mul.len();
    if n == 0 {
        return Err(Error::InvalidGroup("a group needs at least one element".into()));
    }
    if mul.iter().any(|r| r.len() != n || r.iter().any(|&x| x >= n)) {
        return Err(Error::InvalidGroup("the multiplication table must be n×n over 0..n".into()));
    }
    let identity = (0..n)
        .find(|&e| (0..n).all(|a| mul[e][a] == a && mul[a][e] == a))
        .ok_or_else(|| Error::InvalidGroup("no identity element".into()))?;
    let mut inv = vec![0; n];
    for a in 0..n {
        inv[a] = (0..n)
            .find(|&b| mul[a][b] == identity && mul[b][a] == identity)
            .ok_or_else(|| Error::InvalidGroup(format!("element {a} has no inverse")))?;
    }
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if mul[mul[a][b]][c] != mul[a][mul[b][c]] {
                    return Err(Error::InvalidGroup("the table is not associative".into()));
                }
            }
        }
    }
    Ok((identity, inv))
}

/// All characters of a finite abelian group, trivial first.
fn abelian_characters(mul: &[Vec<usize>], identity: usize) -> Result<Vec<Vec<C64>>> {
    let n = mul.len();
    let order = |g: usize| {
        let mut k = 1;
        let mut x = g;
        while x != identity {
            x = mul[x][g];
            k += 1;
        }
        k
    };
    // Greedy generating set.
    let mut gens: Vec<usize> = Vec::new();
    let mut span = vec![false; n];
    span[identity] = true;
    for g in 0..n {
        if span[g] {
            continue;
        }
        gens.push(g);
        let mut queue: VecDeque<usize> = (0..n).filter(|&h| span[h]).collect();
        while let Some(h) = queue.pop_front() {
            for &s in &gens {
                let x = mul[h][s];
                if !span[x] {
                    span[x] = true;
                    queue.push_back(x);
                }
            }
        }
    }
    let orders: Vec<usize> = gens.iter().map(|&g| order(g)).collect();
    let total: usize = orders.iter().product();
    let mut chars: Vec<Vec<C64>> = Vec::new();
    for code in 0..total {
        let mut rem = code;
        let gen_vals: Vec<C64> = orders
            .iter()
            .map(|&o| {
                let k = rem % o;
                rem /= o;
                C64::from_polar(1.0, 2.0 * PI * k as f64 / o as f64)
            })
            .collect();
        let mut chi: Vec<Option<C64>> = vec![None; n];
        chi[identity] = Some(C64::new(1.0, 0.0));
        let mut queue = VecDeque::from([identity]);
        let mut consistent = true;
        while let Some(h) = queue.pop_front() {
            let vh = chi[h].expect("assigned");
            for (i, &s) in gens.iter().enumerate() {
                let x = mul[h][s];
                let v = vh * gen_vals[i];
                match chi[x] {
                    None => {
                        chi[x] = Some(v);
                        queue.push_back(x);
                    }
                    Some(w) if (w - v).norm() > GROUP_TOL => consistent = false,
                    _ => {}
                }
            }
        }
        if consistent {
            let chi: Vec<C64> = chi.into_iter().map(|v| v.expect("generated")).collect();
            if !chars.iter().any(|c| c.iter().zip(&chi).all(|(a, b)| (a - b).norm() < GROUP_TOL)) {
                chars.push(chi);
            }
        }
    }
    if chars.len() != n {
        return Err(Error::InvalidGroup(format!(
            "found {} characters for an abelian group of order {n}",
            chars.len()
        )));
    }
    Ok(chars)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn klein_four_has_four_real_characters() {
        let mul = vec![vec![0, 1, 2, 3], vec![1, 0, 3, 2], vec![2, 3, 0, 1], vec![3, 2, 1, 0]];
        let g = FiniteGroupTable::abelian((0..4).map(|k| k.to_string()).collect(), mul).unwrap();
        assert_eq!(g.irreps().len(), 4);
        for rho in g.irreps() {
            for m in &rho.mats {
                assert!(m[(0, 0)].im.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn haar_average_of_nontrivial_character_vanishes() {
        let g = FiniteGroupTable::cyclic(3).unwrap();
        for (k, (_, f)) in g.peter_weyl_functions().iter().enumerate() {
            let avg: C64 = f.iter().sum::<C64>() / 3.0;
            let want = if k == 0 { 1.0 } else { 0.0 };
            assert!((avg - want).norm() < 1e-14);
        }
    }

    #[test]
    fn s3_irreps_are_complete() {
        let g = FiniteGroupTable::s3().unwrap();
        assert_eq!(g.peter_weyl_functions().len(), 6);
    }

    #[test]
    fn broken_irrep_is_rejected() {
        let g = FiniteGroupTable::cyclic(2).unwrap();
        let names = g.names().to_vec();
        let mul = vec![vec![0, 1], vec![1, 0]];
        let bad = Irrep {
            label: "bad".into(),
            mats: vec![CMatrix::from_element(1, 1, C64::new(1.0, 0.0)); 2],
        };
        let triv = g.irreps()[0].clone();
        let err = FiniteGroupTable::with_irreps(names, mul, vec![triv, bad]);
        assert!(matches!(err, Err(Error::InvalidGroup(_))));
    }
}
