//! JSON model specifications with a top-level `"family"` discriminator.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::algebra::SiteAlgebra;
use crate::doubles::{build_clifford_double, build_grassmann_double, BondLattice, FiniteGroupTable, ReflectionLattice};
use crate::error::{param, Result};
use crate::linalg::CMatrix;
use crate::models::{self, Bond, FermionTerm, Model};

/// A model file: family parameters plus optional run defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelSpec {
    #[serde(flatten)]
    pub model: ModelKind,
    /// Default β list when the command line gives none.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub betas: Option<Vec<f64>>,
    /// Twist root override `[re, im]` for graded families.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelKind {
    /// `−H = J Σ_{λ≠λ'} |λ−λ'|^{−v} S_λ·S_λ'` on a chain.
    Heisenberg { sites_per_side: usize, spin: f64, j: f64, v: f64 },
    /// `J^{ab}_{λλ'} = K^{ab} |λ−λ'|^{−s}` for fields with values on a finite sample space.
    LongRangePair {
        sites_per_side: usize,
        #[serde(default)]
        centered: bool,
        fields: Vec<Vec<f64>>,
        #[serde(default)]
        signs: Option<Vec<i8>>,
        coupling: Vec<Vec<f64>>,
        kernel_power: f64,
        #[serde(default)]
        potential: Option<Vec<f64>>,
    },
    /// The same bond table on every nearest-neighbour pair of a chain, oriented away from the plane.
    NearestNeighbor {
        sites_per_side: usize,
        #[serde(default = "default_true")]
        centered: bool,
        bond: Vec<Vec<f64>>,
        #[serde(default)]
        potential: Option<Vec<f64>>,
    },
    /// `−H = Σ J_IJ B_IJ`; each entry also sets its Hermitian mirror.
    ParafermionChain { p: usize, sites_per_side: usize, couplings: Vec<CouplingEntry> },
    /// `−H` as a sum of even products of generators.
    Fermion {
        algebra: FermionAlgebra,
        sites_per_side: usize,
        #[serde(default)]
        centered: bool,
        #[serde(default = "default_one")]
        modes: usize,
        terms: Vec<FermionTerm>,
    },
    /// Wilson action on a rectangular patch cut halfway through its horizontal bonds.
    Wilson { group: String, columns_per_side: usize, rows: usize, irrep: String, g0: f64 },
}

fn default_true() -> bool {
    true
}

fn default_one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FermionAlgebra {
    Clifford,
    Grassmann,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CouplingEntry {
    pub row: usize,
    pub col: usize,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

/// `"Z<n>"` or `"S3"`.
pub fn parse_group(name: &str) -> Result<FiniteGroupTable> {
    let upper = name.trim().to_ascii_uppercase();
    if upper == "S3" {
        return FiniteGroupTable::s3();
    }
    match upper.strip_prefix('Z').and_then(|n| n.parse::<usize>().ok()) {
        Some(n) if n >= 1 => FiniteGroupTable::cyclic(n),
        _ => Err(param("group", format!("unknown group `{name}` (expected Z<n> or S3)"))),
    }
}

fn real_table(rows: &[Vec<f64>]) -> Vec<Vec<C64>> {
    rows.iter().map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect()).collect()
}

fn chain_bonds(lattice: &ReflectionLattice) -> Vec<(usize, usize)> {
    let coords: Vec<f64> = lattice.coords().expect("chain coordinates").iter().map(|c| c[0]).collect();
    let mut out = Vec::new();
    for a in 0..coords.len() {
        for b in 0..coords.len() {
            let outward = coords[b].abs() > coords[a].abs()
                || (coords[b].abs() == coords[a].abs() && coords[b] > coords[a]);
            if (coords[a] - coords[b]).abs() == 1.0 && outward {
                out.push((a, b));
            }
        }
    }
    out
}

impl ModelSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    fn zeta(&self) -> Option<C64> {
        self.zeta.map(|[re, im]| C64::new(re, im))
    }

    fn reject_zeta(&self, family: &str) -> Result<()> {
        match self.zeta() {
            Some(z) if (z - 1.0).norm() > 1e-12 => {
                Err(param("zeta", format!("the {family} family is ungraded; ζ must be 1")))
            }
            _ => Ok(()),
        }
    }

    /// Validates β values from the file.
    pub fn validated_betas(&self) -> Result<Option<Vec<f64>>> {
        if let Some(b) = &self.betas {
            if let Some(bad) = b.iter().find(|x| !x.is_finite() || **x < 0.0) {
                return Err(param("betas", format!("{bad} must be finite and nonnegative")));
            }
        }
        Ok(self.betas.clone())
    }

    pub fn family(&self) -> &'static str {
        match &self.model {
            ModelKind::Heisenberg { .. } => "heisenberg",
            ModelKind::LongRangePair { .. } => "long_range_pair",
            ModelKind::NearestNeighbor { .. } => "nearest_neighbor",
            ModelKind::ParafermionChain { .. } => "parafermion_chain",
            ModelKind::Fermion { .. } => "fermion",
            ModelKind::Wilson { .. } => "wilson",
        }
    }

    pub fn build(&self) -> Result<Model> {
        match &self.model {
            ModelKind::Heisenberg { sites_per_side, spin, j, v } => {
                self.reject_zeta("heisenberg")?;
                let two_s = 2.0 * spin;
                if !(two_s.fract() == 0.0 && two_s >= 1.0) {
                    return Err(param("spin", format!("{spin} is not a positive half-integer")));
                }
                models::heisenberg_model(*sites_per_side, two_s as usize, *j, *v)
            }
            ModelKind::LongRangePair { sites_per_side, centered, fields, signs, coupling, kernel_power, potential } => {
                self.reject_zeta("long_range_pair")?;
                let k = fields.len();
                if coupling.len() != k || coupling.iter().any(|r| r.len() != k) {
                    return Err(param("coupling", format!("must be {k}x{k}")));
                }
                if !(kernel_power.is_finite() && *kernel_power >= 0.0) {
                    return Err(param("kernel_power", "must be finite and nonnegative"));
                }
                let lattice = ReflectionLattice::chain(*sites_per_side, *centered);
                let x: Vec<f64> = lattice.coords().expect("chain").iter().map(|c| c[0]).collect();
                let signs = signs.clone().unwrap_or_else(|| vec![1; k]);
                let pot: Vec<Vec<f64>> = match potential {
                    Some(v) => vec![v.clone(); lattice.len()],
                    None => Vec::new(),
                };
                models::long_range_pair_model(
                    &lattice,
                    fields,
                    &signs,
                    |l, lp, a, b| coupling[a][b] * (x[l] - x[lp]).abs().powf(-kernel_power),
                    &pot,
                )
            }
            ModelKind::NearestNeighbor { sites_per_side, centered, bond, potential } => {
                self.reject_zeta("nearest_neighbor")?;
                let r = bond.len();
                let lattice = ReflectionLattice::chain(*sites_per_side, *centered);
                let site = SiteAlgebra::cyclic(r.max(1))?;
                let table = real_table(bond);
                let bonds: Vec<Bond> = chain_bonds(&lattice)
                    .into_iter()
                    .map(|(a, b)| Bond { a, b, table: table.clone() })
                    .collect();
                let pots: Vec<Vec<C64>> = match potential {
                    Some(v) => vec![v.iter().map(|&x| C64::new(x, 0.0)).collect(); lattice.len()],
                    None => Vec::new(),
                };
                Ok(models::nearest_neighbor_classical(&lattice, site, &bonds, &pots)?.model)
            }
            ModelKind::ParafermionChain { p, sites_per_side, couplings } => {
                let lattice = ReflectionLattice::chain(*sites_per_side, false);
                let double = crate::doubles::build_parafermion_double(*p, &lattice, self.zeta())?;
                let n = crate::couplings::build_adapted_basis(&double)?.len();
                let mut j = CMatrix::zeros(n, n);
                for (k, e) in couplings.iter().enumerate() {
                    if e.row >= n || e.col >= n {
                        return Err(param("couplings", format!("entry {k} is outside the {n}x{n} basis")));
                    }
                    let z = C64::new(e.re, e.im);
                    j[(e.row, e.col)] = z;
                    j[(e.col, e.row)] = z.conj();
                }
                models::parafermion_chain(*p, *sites_per_side, &j, self.zeta())
            }
            ModelKind::Fermion { algebra, sites_per_side, centered, modes, terms } => {
                let lattice = ReflectionLattice::chain(*sites_per_side, *centered);
                let double = match algebra {
                    FermionAlgebra::Clifford => build_clifford_double(&lattice, *modes, None, self.zeta())?,
                    FermionAlgebra::Grassmann => build_grassmann_double(&lattice, *modes, None, self.zeta())?,
                };
                models::fermion_hamiltonian(double, terms)
            }
            ModelKind::Wilson { group, columns_per_side, rows, irrep, g0 } => {
                self.reject_zeta("wilson")?;
                let g = parse_group(group)?;
                let lattice = BondLattice::rectangle(*columns_per_side, *rows)?;
                models::wilson_action(&g, &lattice, irrep, *g0)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heisenberg_spec_parses_and_builds() {
        let s = ModelSpec::from_json(r#"{"family":"heisenberg","sites_per_side":1,"spin":0.5,"j":-1,"v":1}"#).unwrap();
        assert_eq!(s.family(), "heisenberg");
        let m = s.build().unwrap();
        assert_eq!(m.double.algebra.dim(), 16);
    }

    #[test]
    fn missing_field_is_named() {
        let e = ModelSpec::from_json(r#"{"family":"heisenberg","sites_per_side":1,"spin":0.5,"v":1}"#).unwrap_err();
        assert!(e.to_string().contains("`j`"), "{e}");
    }

    #[test]
    fn groups_parse() {
        assert_eq!(parse_group("Z3").unwrap().order(), 3);
        assert_eq!(parse_group("s3").unwrap().order(), 6);
        assert!(parse_group("Q8").is_err());
    }

    #[test]
    fn nearest_neighbour_bonds_point_outward() {
        let lat = ReflectionLattice::chain(1, true);
        assert_eq!(chain_bonds(&lat), vec![(1, 0), (1, 2)]);
        let lat = ReflectionLattice::chain(1, false);
        assert_eq!(chain_bonds(&lat), vec![(0, 1)]);
    }
}
