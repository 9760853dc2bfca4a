use serde::{Deserialize, Serialize};

use crate::algebra::Side;
use crate::error::{Error, Result};

const COORD_TOL: f64 = 1e-9;

/// Finite site set with a reflection ϑ and the split into Λ₋, Λ₀, Λ₊.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReflectionLattice {
    labels: Vec<String>,
    theta: Vec<usize>,
    sides: Vec<Side>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coords: Option<Vec<Vec<f64>>>,
}

fn format_coords(c: &[f64]) -> String {
    let parts: Vec<String> = c.iter().map(|x| format!("{x}")).collect();
    if parts.len() == 1 {
        parts[0].clone()
    } else {
        format!("({})", parts.join(","))
    }
}

impl ReflectionLattice {
    pub fn new(labels: Vec<String>, theta: Vec<usize>, sides: Vec<Side>) -> Result<Self> {
        let lat = ReflectionLattice {
            labels,
            theta,
            sides,
            coords: None,
        };
        lat.validate()?;
        Ok(lat)
    }

    /// Lattice embedded in R^d, reflected by `x₀ ↦ −x₀`.
    ///
    /// Sites with `x₀ = 0` form Λ₀.
    pub fn from_coords(coords: Vec<Vec<f64>>) -> Result<Self> {
        if coords.iter().any(|c| c.is_empty() || c.iter().any(|x| !x.is_finite())) {
            return Err(Error::InvalidLattice("coordinates must be finite and non-empty".into()));
        }
        let mut theta = Vec::with_capacity(coords.len());
        for (i, c) in coords.iter().enumerate() {
            let mut r = c.clone();
            r[0] = -r[0];
            let j = coords
                .iter()
                .position(|d| d.len() == r.len() && d.iter().zip(&r).all(|(a, b)| (a - b).abs() < COORD_TOL))
                .ok_or_else(|| {
                    Error::InvalidLattice(format!(
                        "site {} has no mirror image in the lattice",
                        format_coords(c)
                    ))
                })?;
            if j == i && c[0].abs() >= COORD_TOL {
                return Err(Error::InvalidLattice("duplicate site coordinates".into()));
            }
            theta.push(j);
        }
        let sides = coords
            .iter()
            .map(|c| {
                if c[0].abs() < COORD_TOL {
                    Side::Zero
                } else if c[0] < 0.0 {
                    Side::Minus
                } else {
                    Side::Plus
                }
            })
            .collect();
        let labels = coords.iter().map(|c| format_coords(c)).collect();
        let lat = ReflectionLattice {
            labels,
            theta,
            sides,
            coords: Some(coords),
        };
        lat.validate()?;
        Ok(lat)
    }

    /// One-dimensional chain with `per_side` sites on each side.
    ///
    /// Without a centre the sites sit at `±(k + ½)`; with a centre they sit at
    /// the integers `−per_side..=per_side` and the origin forms Λ₀.
    pub fn chain(per_side: usize, centered: bool) -> Self {
        let coords: Vec<Vec<f64>> = if centered {
            let n = per_side as i64;
            (-n..=n).map(|x| vec![x as f64]).collect()
        } else {
            let n = per_side as f64;
            (0..2 * per_side).map(|k| vec![k as f64 - n + 0.5]).collect()
        };
        Self::from_coords(coords).expect("chain coordinates are symmetric")
    }

    fn validate(&self) -> Result<()> {
        let n = self.labels.len();
        if self.theta.len() != n || self.sides.len() != n {
            return Err(Error::InvalidLattice("labels, reflection and sides differ in length".into()));
        }
        for i in 0..n {
            let j = self.theta[i];
            if j >= n || self.theta[j] != i {
                return Err(Error::InvalidLattice(format!("reflection is not an involution at site {i}")));
            }
            let fixed = j == i;
            if fixed != (self.sides[i] == Side::Zero) {
                return Err(Error::InvalidLattice(format!(
                    "site {}: fixed points of the reflection must be exactly the sites on the plane",
                    self.labels[i]
                )));
            }
            if self.sides[j] != self.sides[i].mirror() {
                return Err(Error::InvalidLattice(format!(
                    "site {}: the reflection must exchange the two halves",
                    self.labels[i]
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn theta(&self, i: usize) -> usize {
        self.theta[i]
    }

    pub fn side(&self, i: usize) -> Side {
        self.sides[i]
    }

    pub fn coords(&self) -> Option<&[Vec<f64>]> {
        self.coords.as_deref()
    }

    pub fn sites_on(&self, side: Side) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.sides[i] == side).collect()
    }

    pub fn has_fixed_points(&self) -> bool {
        self.sides.contains(&Side::Zero)
    }

    /// Sites of Λ₋ all precede those of Λ₊ and ϑ reverses their order.
    pub fn is_order_reversing(&self) -> bool {
        if self.has_fixed_points() {
            return false;
        }
        let n = self.len();
        (0..n).all(|i| self.theta[i] == n - 1 - i)
            && (0..n / 2).all(|i| self.sides[i] == Side::Minus)
    }

    /// Euclidean distance between two embedded sites.
    pub fn distance(&self, i: usize, j: usize) -> Option<f64> {
        let c = self.coords.as_ref()?;
        Some(
            c[i].iter()
                .zip(&c[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
        )
    }
}

/// Coarse lattice of sites and undirected bonds, refined at bond midpoints.
///
/// The reflection is `x₀ ↦ −x₀`; no coarse site may lie on the plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BondLattice {
    pub coords: Vec<Vec<f64>>,
    pub bonds: Vec<(usize, usize)>,
}

/// Half of a coarse bond after midpoint refinement, oriented `from → to`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HalfBond {
    pub label: String,
    /// Node ids: coarse sites first, then one midpoint per coarse bond.
    pub from: usize,
    pub to: usize,
    pub side: Side,
}

impl BondLattice {
    pub fn new(coords: Vec<Vec<f64>>, bonds: Vec<(usize, usize)>) -> Result<Self> {
        let lat = BondLattice { coords, bonds };
        lat.validate()?;
        Ok(lat)
    }

    /// Rectangular patch: `columns_per_side` columns at `x = ±(k + ½)` and `rows` rows,
    /// with nearest-neighbour bonds and no periodic wrap.
    pub fn rectangle(columns_per_side: usize, rows: usize) -> Result<Self> {
        let n = columns_per_side as f64;
        let mut coords = Vec::new();
        for c in 0..2 * columns_per_side {
            for r in 0..rows {
                coords.push(vec![c as f64 - n + 0.5, r as f64]);
            }
        }
        let id = |c: usize, r: usize| c * rows + r;
        let mut bonds = Vec::new();
        for c in 0..2 * columns_per_side {
            for r in 0..rows {
                if c + 1 < 2 * columns_per_side {
                    bonds.push((id(c, r), id(c + 1, r)));
                }
                if r + 1 < rows {
                    bonds.push((id(c, r), id(c, r + 1)));
                }
            }
        }
        Self::new(coords, bonds)
    }

    fn reflect_point(p: &[f64]) -> Vec<f64> {
        let mut r = p.to_vec();
        r[0] = -r[0];
        r
    }

    fn find_site(&self, p: &[f64]) -> Option<usize> {
        self.coords.iter().position(|c| {
            c.len() == p.len() && c.iter().zip(p).all(|(a, b)| (a - b).abs() < COORD_TOL)
        })
    }

    fn validate(&self) -> Result<()> {
        let n = self.coords.len();
        if self.coords.iter().any(|c| c.is_empty() || c.iter().any(|x| !x.is_finite())) {
            return Err(Error::InvalidLattice("coordinates must be finite and non-empty".into()));
        }
        if self.coords.iter().any(|c| c[0].abs() < COORD_TOL) {
            return Err(Error::InvalidLattice(
                "the reflection plane passes through a coarse site; it must cut bonds halfway".into(),
            ));
        }
        for (k, &(u, v)) in self.bonds.iter().enumerate() {
            if u >= n || v >= n || u == v {
                return Err(Error::InvalidLattice(format!("bond {k} has invalid endpoints")));
            }
            let mirror = self.mirror_bond(k);
            if mirror.is_none() {
                return Err(Error::InvalidLattice(format!("bond {k} has no mirror image")));
            }
        }
        for i in 0..n {
            if self.find_site(&Self::reflect_point(&self.coords[i])).is_none() {
                return Err(Error::InvalidLattice(format!("site {i} has no mirror image")));
            }
        }
        Ok(())
    }

    fn site_mirror(&self, i: usize) -> Option<usize> {
        self.find_site(&Self::reflect_point(&self.coords[i]))
    }

    fn mirror_bond(&self, k: usize) -> Option<usize> {
        let (u, v) = self.bonds[k];
        let (mu, mv) = (self.site_mirror(u)?, self.site_mirror(v)?);
        self.bonds
            .iter()
            .position(|&(a, b)| (a == mu && b == mv) || (a == mv && b == mu))
    }

    fn node_coords(&self, node: usize) -> Vec<f64> {
        let n = self.coords.len();
        if node < n {
            self.coords[node].clone()
        } else {
            let (u, v) = self.bonds[node - n];
            self.coords[u].iter().zip(&self.coords[v]).map(|(a, b)| 0.5 * (a + b)).collect()
        }
    }

    fn node_mirror(&self, node: usize) -> usize {
        let n = self.coords.len();
        if node < n {
            self.site_mirror(node).expect("validated")
        } else {
            n + self.mirror_bond(node - n).expect("validated")
        }
    }

    /// Half-bonds ordered with Λ₋ first, then Λ₊ in the same mirror order, each
    /// paired with the index of its mirror.
    ///
    /// A minus half-bond is stored as the image `ϑa → ϑb` of its partner `a → b`,
    /// so ϑ always maps stored orientations onto stored orientations.
    pub fn refine(&self) -> Vec<(HalfBond, usize)> {
        let n = self.coords.len();
        let mut plus = Vec::new();
        for (k, &(u, v)) in self.bonds.iter().enumerate() {
            let m = n + k;
            for (a, b) in [(u, m), (m, v)] {
                let ca = self.node_coords(a);
                let cb = self.node_coords(b);
                if ca[0] + cb[0] > 0.0 {
                    plus.push((a, b));
                }
            }
        }
        let np = plus.len();
        let mut out = Vec::with_capacity(2 * np);
        let label = |a: usize, b: usize| {
            format!("{}-{}", format_coords(&self.node_coords(a)), format_coords(&self.node_coords(b)))
        };
        for (k, &(a, b)) in plus.iter().enumerate() {
            let (ma, mb) = (self.node_mirror(a), self.node_mirror(b));
            out.push((
                HalfBond { label: label(ma, mb), from: ma, to: mb, side: Side::Minus },
                np + k,
            ));
        }
        for (k, &(a, b)) in plus.iter().enumerate() {
            out.push((HalfBond { label: label(a, b), from: a, to: b, side: Side::Plus }, k));
        }
        out
    }

    /// Index of the half-bond joining two nodes, and whether it is stored as `a → b`.
    pub fn find_half_bond(refined: &[(HalfBond, usize)], a: usize, b: usize) -> Option<(usize, bool)> {
        refined.iter().enumerate().find_map(|(i, (h, _))| {
            if h.from == a && h.to == b {
                Some((i, true))
            } else if h.from == b && h.to == a {
                Some((i, false))
            } else {
                None
            }
        })
    }

    /// Midpoint node of coarse bond `k`.
    pub fn midpoint(&self, k: usize) -> usize {
        self.coords.len() + k
    }

    /// Coarse bond joining two sites, if any.
    pub fn bond_between(&self, u: usize, v: usize) -> Option<usize> {
        self.bonds
            .iter()
            .position(|&(a, b)| (a == u && b == v) || (a == v && b == u))
    }

    /// Elementary plaquettes of a planar grid given as counter-clockwise site cycles.
    pub fn unit_plaquettes(&self) -> Vec<[usize; 4]> {
        let mut out = Vec::new();
        for (u, cu) in self.coords.iter().enumerate() {
            if cu.len() != 2 {
                continue;
            }
            let shifted = |dx: f64, dy: f64| self.find_site(&[cu[0] + dx, cu[1] + dy]);
            if let (Some(a), Some(b), Some(c)) = (shifted(1.0, 0.0), shifted(1.0, 1.0), shifted(0.0, 1.0)) {
                let cycle = [u, a, b, c];
                if (0..4).all(|i| self.bond_between(cycle[i], cycle[(i + 1) % 4]).is_some()) {
                    out.push(cycle);
                }
            }
        }
        out
    }
}
