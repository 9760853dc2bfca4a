#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rpcheck::algebra::{Algebra, Element};

pub type M = DMatrix<C64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn random_c(r: &mut ChaCha8Rng) -> C64 {
    C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))
}

/// Random element with `k` random monomials.
pub fn random_element(alg: &Algebra, r: &mut ChaCha8Rng, k: usize) -> Element {
    let terms: Vec<(usize, C64)> = (0..k).map(|_| (r.gen_range(0..alg.dim()), random_c(r))).collect();
    alg.element(terms).unwrap()
}

/// Random element supported on the given monomials.
pub fn random_on(alg: &Algebra, r: &mut ChaCha8Rng, monomials: &[usize]) -> Element {
    alg.element(monomials.iter().map(|&m| (m, random_c(r)))).unwrap()
}

pub fn kron(a: &M, b: &M) -> M {
    a.kronecker(b)
}

pub fn kron_all(ms: &[M]) -> M {
    let mut out = M::identity(1, 1);
    for m in ms {
        out = kron(&out, m);
    }
    out
}

/// Cyclic shift `X e_j = e_{j+1}` and clock `Z = diag(ω^j)` on ℂ^n.
pub fn shift_clock(n: usize) -> (M, M) {
    let w = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / n as f64);
    let mut x = M::zeros(n, n);
    let mut z = M::zeros(n, n);
    for j in 0..n {
        x[((j + 1) % n, j)] = c(1.0, 0.0);
        z[(j, j)] = w.powu(j as u32);
    }
    (x, z)
}

/// Generators `c_s = X_s ⊗ Z_{s+1} ⊗ … ⊗ Z_{N}`, which satisfy
/// `c_t c_s = ω̄ c_s c_t` for `s < t` and `c_s^n = 1`.
pub fn parafermion_generators(n: usize, slots: usize) -> Vec<M> {
    let (x, z) = shift_clock(n);
    let id = M::identity(n, n);
    (0..slots)
        .map(|s| {
            let factors: Vec<M> = (0..slots)
                .map(|t| if t < s { id.clone() } else if t == s { x.clone() } else { z.clone() })
                .collect();
            kron_all(&factors)
        })
        .collect()
}

/// Dense image of an element of a one-generator-per-slot algebra (parafermion or Majorana),
/// using the ordered product of generator powers.
pub fn generator_image(alg: &Algebra, gens: &[M], a: &Element) -> M {
    let dim = gens[0].nrows();
    let mut out = M::zeros(dim, dim);
    for (m, coef) in a.terms() {
        let mut mat = M::identity(dim, dim);
        for (s, g) in gens.iter().enumerate() {
            let k = alg.local_index(m, s);
            for _ in 0..k {
                mat = &mat * g;
            }
        }
        out += mat * coef;
    }
    out
}

/// Tensor image of an element of a matrix-algebra (spin) double: slot factors multiply
/// without phases.
pub fn spin_image(alg: &Algebra, a: &Element) -> M {
    let mut out: Option<M> = None;
    for (m, coef) in a.terms() {
        let factors: Vec<M> = alg
            .slots()
            .iter()
            .enumerate()
            .map(|(s, slot)| slot.site.module_matrix(alg.local_index(m, s)).unwrap())
            .collect();
        let t = kron_all(&factors) * coef;
        out = Some(match out {
            Some(o) => o + t,
            None => t,
        });
    }
    out.unwrap_or_else(|| {
        let n: usize = alg
            .slots()
            .iter()
            .map(|s| s.site.module.as_ref().unwrap().dim)
            .product();
        M::zeros(n, n)
    })
}

pub fn max_diff(a: &M, b: &M) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
