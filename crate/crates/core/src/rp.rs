//! Direct reflection-positivity tests: Gram blocks, verdicts, witnesses,
//! dominance and the OS Hilbert space.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::algebra::Element;
use crate::couplings::{self, twisted_value, AdaptedBasis};
use crate::doubles::Double;
use crate::error::{Error, Result};
use crate::functionals::{self, Functional};
use crate::linalg::{self, CMatrix, PsdVerdict};
use crate::par;

/// Geometric β grid for the witness scan: `2^{-10}, …, 2^2`.
pub fn witness_grid() -> Vec<f64> {
    (-10..=2).map(|k| 2f64.powi(k)).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct GramBlock {
    pub degree: usize,
    /// Basis indices of this block.
    pub indices: Vec<usize>,
    #[serde(skip)]
    pub matrix: CMatrix,
}

/// Per-degree Gram matrices `G_IJ = ϱ(Θ(C_I)∘C_J)`.
#[derive(Debug, Clone, Serialize)]
pub struct GramBlocks {
    pub zeta: C64,
    pub blocks: Vec<GramBlock>,
    /// Largest `|ϱ(Θ(C_I)C_J)|` across different degrees.
    pub cross_degree_max: f64,
}

/// Covector of `ϱ` over all monomials.
fn covector(f: &Functional, double: &Double) -> Result<Vec<C64>> {
    f.to_covector(&double.algebra)
}

pub fn gram_matrix(double: &Double, f: &Functional, basis: &AdaptedBasis) -> Result<GramBlocks> {
    let alg = &double.algebra;
    let w = covector(f, double)?;
    let n = basis.len();
    let rows = par::map_range(n, |i| {
        (0..n)
            .map(|j| {
                if basis.degrees[i] == basis.degrees[j] {
                    (twisted_value(alg, &basis.theta[i], &basis.elements[j], &w), 0.0)
                } else {
                    let mut acc = C64::new(0.0, 0.0);
                    for (m, x) in basis.theta[i].terms() {
                        for (k, y) in basis.elements[j].terms() {
                            alg.mul_monomials_into(m, k, x * y, &mut |t, v| acc += v * w[t]);
                        }
                    }
                    (C64::new(0.0, 0.0), acc.norm())
                }
            })
            .collect::<Vec<_>>()
    });
    let cross_degree_max = rows.iter().flatten().map(|e| e.1).fold(0.0, f64::max);
    let blocks = (0..alg.p())
        .filter_map(|k| {
            let idx = basis.indices_of_degree(k);
            (!idx.is_empty()).then(|| GramBlock {
                degree: k,
                matrix: CMatrix::from_fn(idx.len(), idx.len(), |a, b| rows[idx[a]][idx[b]].0),
                indices: idx,
            })
        })
        .collect();
    Ok(GramBlocks {
        zeta: alg.zeta(),
        blocks,
        cross_degree_max,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockVerdict {
    pub degree: usize,
    pub min_eig: f64,
    pub psd: bool,
    pub hermitian_deviation: f64,
    pub scale: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BetaVerdict {
    pub beta: f64,
    pub blocks: Vec<BlockVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl BetaVerdict {
    pub fn psd(&self) -> bool {
        self.error.is_none() && self.blocks.iter().all(|b| b.psd)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Rp,
    NotRp,
    /// The coupling criterion fails but no negative Gram value was found on the grid.
    InconclusiveScan,
}

#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub beta: f64,
    /// `⟨A,A⟩` at `beta`.
    pub value: f64,
    pub degree: usize,
    /// Coefficients χ over the adapted basis (χ_{I₀} = 0).
    pub chi: Vec<C64>,
    /// `A = Σ χ_I C_I^♯` as (monomial label, coefficient).
    pub element: Vec<(String, C64)>,
    #[serde(skip)]
    pub a: Element,
}

#[derive(Debug, Clone, Serialize)]
pub struct RPVerdict {
    pub family: String,
    pub zeta: C64,
    pub tol: f64,
    pub betas: Vec<BetaVerdict>,
    /// Every block at every tested β is PSD.
    pub rp: bool,
    /// PSD verdict of J⁰ when the background factorizes.
    pub coupling_psd: Option<bool>,
    pub j0_min_eig: Option<f64>,
    /// Both criteria give the same answer.
    pub agreement: Option<bool>,
    /// `max |Θ(H) − H|`; nonzero values make Gram blocks non-Hermitian.
    pub hamiltonian_reflection_defect: f64,
    pub status: Status,
    pub witness: Option<Witness>,
}

fn block_verdicts(g: &GramBlocks, tol: f64) -> Result<Vec<BlockVerdict>> {
    g.blocks
        .iter()
        .map(|b| {
            let v = linalg::psd_check(&b.matrix, tol)?;
            Ok(BlockVerdict {
                degree: b.degree,
                min_eig: v.min_eig,
                psd: v.psd,
                hermitian_deviation: v.hermitian_deviation,
                scale: v.scale,
            })
        })
        .collect()
}

fn gram_at(double: &Double, basis: &AdaptedBasis, h: &Element, beta: f64) -> Result<GramBlocks> {
    let f = functionals::boltzmann(&double.background, &double.algebra, h, beta)?;
    gram_matrix(double, &f, basis)
}

/// Runs the Gram test at each β and, for factorizing backgrounds, the coupling criterion.
pub fn verify_rp(double: &Double, basis: &AdaptedBasis, h: &Element, betas: &[f64], tol: f64) -> Result<RPVerdict> {
    let alg = &double.algebra;
    if let Some(b) = betas.iter().find(|b| !b.is_finite() || **b < 0.0) {
        return Err(crate::error::param("beta", format!("{b} must be finite and nonnegative")));
    }
    let defect = functionals::reflection_defect(alg, h)?;
    let mut results = Vec::with_capacity(betas.len());
    for &beta in betas {
        let entry = match gram_at(double, basis, h, beta) {
            Ok(g) => BetaVerdict { beta, blocks: block_verdicts(&g, tol)?, error: None },
            Err(e @ (Error::NumericOverflow(_) | Error::Numeric(_))) => {
                BetaVerdict { beta, blocks: Vec::new(), error: Some(e.to_string()) }
            }
            Err(e) => return Err(e),
        };
        results.push(entry);
    }
    let rp = results.iter().all(|r| r.psd());
    let (coupling_psd, j0_min_eig, witness) = if basis.factorizing {
        let j = couplings::extract_couplings(double, basis, h)?;
        let v = j.j0_psd(tol)?;
        let witness = if v.psd { None } else { rp_counterexample_witness(double, basis, h, tol)? };
        (Some(v.psd), Some(v.min_eig), witness)
    } else {
        (None, None, None)
    };
    let status = match (rp, coupling_psd, &witness) {
        (false, _, _) | (_, _, Some(_)) => Status::NotRp,
        (true, Some(false), None) => Status::InconclusiveScan,
        _ => Status::Rp,
    };
    Ok(RPVerdict {
        family: alg.family().to_string(),
        zeta: alg.zeta(),
        tol,
        betas: results,
        rp,
        coupling_psd,
        j0_min_eig,
        agreement: coupling_psd.map(|c| c == rp),
        hamiltonian_reflection_defect: defect,
        status,
        witness,
    })
}

/// `⟨A,A⟩` under `τ_{βH}`.
pub fn os_norm(double: &Double, h: &Element, a: &Element, beta: f64) -> Result<C64> {
    let alg = &double.algebra;
    let f = functionals::boltzmann(&double.background, alg, h, beta)?;
    let ta = alg.reflect(a)?;
    let x = alg.twisted_product(&ta, a)?;
    f.evaluate(alg, &x)
}

/// Builds `A = Σ χ_I C_I^♯` from the most negative eigenvector of a J⁰ degree block and
/// scans the β grid for `⟨A,A⟩ < −tol`.
///
/// Returns `None` when J⁰ is PSD or when the scan finds no violation.
pub fn rp_counterexample_witness(
    double: &Double,
    basis: &AdaptedBasis,
    h: &Element,
    tol: f64,
) -> Result<Option<Witness>> {
    let alg = &double.algebra;
    let j = couplings::extract_couplings(double, basis, h)?;
    let mut best: Option<(f64, usize, Vec<usize>, Vec<C64>)> = None;
    for (k, idx, m) in j.j0_blocks(alg.p()) {
        let herm = linalg::hermitian_part(&m);
        let (vals, vecs) = linalg::hermitian_eigen(&herm)?;
        let scale = linalg::spectral_norm(&herm)?.max(1.0);
        if vals[0] < -tol * scale && best.as_ref().is_none_or(|b| vals[0] < b.0) {
            best = Some((vals[0], k, idx, vecs.column(0).iter().copied().collect()));
        }
    }
    let Some((_, degree, idx, v)) = best else { return Ok(None) };
    let mut chi = vec![C64::new(0.0, 0.0); basis.len()];
    let mut a = alg.zero();
    for (pos, &i) in idx.iter().enumerate() {
        chi[i] = v[pos];
        a.axpy(v[pos], &basis.sharps[i])?;
    }
    for beta in witness_grid() {
        let value = match os_norm(double, h, &a, beta) {
            Ok(v) => v.re,
            Err(Error::NumericOverflow(_)) => break,
            Err(e) => return Err(e),
        };
        if value < -tol {
            let element = a.terms().map(|(m, c)| (alg.monomial_label(m), c)).collect();
            return Ok(Some(Witness {
                beta,
                value,
                degree,
                chi,
                element,
                a,
            }));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Serialize)]
pub struct DominanceReport {
    /// False when `−H` is outside the cone; the inequality is then not claimed.
    pub applicable: bool,
    pub min_eig: Option<f64>,
    pub dominated: Option<bool>,
}

/// Tests `G_{τ_H} − G_τ ⪰ 0` blockwise for cone Hamiltonians.
pub fn dominance_check(double: &Double, basis: &AdaptedBasis, h: &Element, tol: f64) -> Result<DominanceReport> {
    if !couplings::cone_membership(double, basis, &h.neg())? {
        return Ok(DominanceReport { applicable: false, min_eig: None, dominated: None });
    }
    let gh = gram_at(double, basis, h, 1.0)?;
    let g0 = gram_matrix(double, &double.background, basis)?;
    let mut min_eig = f64::INFINITY;
    let mut dominated = true;
    for (a, b) in gh.blocks.iter().zip(&g0.blocks) {
        let v = linalg::psd_check(&(&a.matrix - &b.matrix), tol)?;
        min_eig = min_eig.min(v.min_eig);
        dominated &= v.psd;
    }
    Ok(DominanceReport {
        applicable: true,
        min_eig: Some(min_eig),
        dominated: Some(dominated),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct HilbertBlock {
    pub degree: usize,
    pub dim: usize,
    pub null_dim: usize,
    /// Columns: orthonormal representatives as coefficients over the block's basis indices.
    #[serde(skip)]
    pub representatives: CMatrix,
}

/// Quotient `𝔄₊/𝒩` graded by degree.
#[derive(Debug, Clone, Serialize)]
pub struct OSHilbertSpace {
    pub blocks: Vec<HilbertBlock>,
    pub total_dim: usize,
    pub null_dim: usize,
    pub plus_dim: usize,
}

/// Eigendecomposes each Gram block; eigenvalues above `tol · scale` span ℋ.
pub fn os_hilbert_space(gram: &GramBlocks, tol: f64) -> Result<OSHilbertSpace> {
    let mut blocks = Vec::with_capacity(gram.blocks.len());
    for b in &gram.blocks {
        let v: PsdVerdict = linalg::psd_check(&b.matrix, tol)?;
        if !v.psd {
            return Err(Error::NotReflectionPositive { degree: b.degree, min_eig: v.min_eig });
        }
        let (vals, vecs) = linalg::hermitian_eigen(&linalg::hermitian_part(&b.matrix))?;
        let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > tol * v.scale).collect();
        let reps = CMatrix::from_fn(vals.len(), keep.len(), |r, c| vecs[(r, keep[c])] / vals[keep[c]].sqrt());
        blocks.push(HilbertBlock {
            degree: b.degree,
            dim: keep.len(),
            null_dim: vals.len() - keep.len(),
            representatives: reps,
        });
    }
    let total_dim = blocks.iter().map(|b| b.dim).sum();
    let null_dim = blocks.iter().map(|b| b.null_dim).sum();
    let plus_dim = gram.blocks.iter().map(|b| b.indices.len()).sum();
    Ok(OSHilbertSpace { blocks, total_dim, null_dim, plus_dim })
}
