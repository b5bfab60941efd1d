//! Markov operators of piecewise-uniform copulas, acting on step functions.
//!
//! For a copula `C` with cell masses `m_ij`, the Markov operator sends a step
//! function `psi` on the `v`-mesh to the step function
//! `(T_C psi)_i = sum_j m_ij psi_j / dx_i` on the `u`-mesh. Its adjoint
//! `T*_C` uses the transposed masses and equals `T_{C^t}`.
//!
//! Sets here are unions of mesh cells ([`CellSet`]). At this resolution the
//! sets whose indicator is sent to an indicator are exactly the unions of
//! connected components of the bipartite support graph, which
//! [`sigma_atoms`] enumerates. This under-approximates the continuum
//! sigma-algebra: sets that cut through cells are never considered.

mod implicit;
mod stepmap;

pub use implicit::{address_sets, build_implicit_pair, depth_mesh, graph_mass, verify_markov_factorization, MarkovReport};
pub use stepmap::StepMap;

use std::collections::BTreeSet;

use num_traits::{One, Zero};

use crate::copula::PatchedCopula;
use crate::error::{Error, Result};
use crate::mesh;
use crate::tmatrix::components;
use crate::Rational;

/// A function constant on each cell of a mesh.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    breaks: Vec<Rational>,
    values: Vec<Rational>,
}

impl Step {
    pub fn new(breaks: Vec<Rational>, values: Vec<Rational>) -> Result<Self> {
        mesh::check_partition(&breaks)?;
        if values.len() + 1 != breaks.len() {
            return Err(Error::MeshMismatch(format!(
                "{} values for a mesh of {} cells",
                values.len(),
                breaks.len() - 1
            )));
        }
        Ok(Self { breaks, values })
    }

    pub fn constant(breaks: &[Rational], value: Rational) -> Self {
        Self {
            values: vec![value; breaks.len() - 1],
            breaks: breaks.to_vec(),
        }
    }

    pub fn breaks(&self) -> &[Rational] {
        &self.breaks
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    /// `int_0^1 psi`.
    pub fn integral(&self) -> Rational {
        self.values
            .iter()
            .zip(self.breaks.windows(2))
            .map(|(v, w)| v * (&w[1] - &w[0]))
            .sum()
    }

    /// `int_0^1 psi phi` for two steps on the same mesh.
    pub fn inner(&self, other: &Step) -> Result<Rational> {
        same_mesh(&self.breaks, &other.breaks, "inner product")?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .zip(self.breaks.windows(2))
            .map(|((a, b), w)| a * b * (&w[1] - &w[0]))
            .sum())
    }

    /// Pointwise product.
    pub fn product(&self, other: &Step) -> Result<Step> {
        same_mesh(&self.breaks, &other.breaks, "pointwise product")?;
        Ok(Step {
            breaks: self.breaks.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        })
    }

    /// The cells where the step equals one, if it only takes values 0 and 1.
    pub fn as_indicator(&self) -> Option<CellSet> {
        if !mesh::is_zero_one_valued(&self.values) {
            return None;
        }
        let members = self
            .values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_one())
            .map(|(i, _)| i)
            .collect();
        Some(CellSet {
            mesh: self.breaks.clone(),
            members,
        })
    }
}

/// A union of cells of a mesh.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellSet {
    mesh: Vec<Rational>,
    members: BTreeSet<usize>,
}

impl CellSet {
    pub fn new(mesh: Vec<Rational>, members: impl IntoIterator<Item = usize>) -> Result<Self> {
        mesh::check_partition(&mesh)?;
        let cells = mesh.len() - 1;
        let members: BTreeSet<usize> = members.into_iter().collect();
        if let Some(&bad) = members.iter().find(|&&c| c >= cells) {
            return Err(Error::MeshMismatch(format!("cell {bad} outside a mesh of {cells} cells")));
        }
        Ok(Self { mesh, members })
    }

    pub fn full(mesh: &[Rational]) -> Self {
        Self {
            mesh: mesh.to_vec(),
            members: (0..mesh.len() - 1).collect(),
        }
    }

    pub fn mesh(&self) -> &[Rational] {
        &self.mesh
    }

    pub fn members(&self) -> &BTreeSet<usize> {
        &self.members
    }

    pub fn contains(&self, cell: usize) -> bool {
        self.members.contains(&cell)
    }

    /// Lebesgue measure.
    pub fn measure(&self) -> Rational {
        self.members.iter().map(|&c| &self.mesh[c + 1] - &self.mesh[c]).sum()
    }

    pub fn indicator(&self) -> Step {
        let values = (0..self.mesh.len() - 1)
            .map(|c| if self.contains(c) { Rational::one() } else { Rational::zero() })
            .collect();
        Step {
            breaks: self.mesh.clone(),
            values,
        }
    }

    pub fn complement(&self) -> CellSet {
        CellSet {
            mesh: self.mesh.clone(),
            members: (0..self.mesh.len() - 1).filter(|c| !self.contains(*c)).collect(),
        }
    }

    pub fn intersection(&self, other: &CellSet) -> Result<CellSet> {
        same_mesh(&self.mesh, &other.mesh, "intersection")?;
        Ok(CellSet {
            mesh: self.mesh.clone(),
            members: self.members.intersection(&other.members).copied().collect(),
        })
    }

    pub fn union(&self, other: &CellSet) -> Result<CellSet> {
        same_mesh(&self.mesh, &other.mesh, "union")?;
        Ok(CellSet {
            mesh: self.mesh.clone(),
            members: self.members.union(&other.members).copied().collect(),
        })
    }
}

/// One mesh-level atom: a connected component of the support graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SigmaAtom {
    /// `u`-side cells.
    pub x: CellSet,
    /// `v`-side cells.
    pub y: CellSet,
    /// `lambda(x) = lambda(y)`.
    pub measure: Rational,
}

fn same_mesh(a: &[Rational], b: &[Rational], what: &str) -> Result<()> {
    if a != b {
        return Err(Error::MeshMismatch(format!(
            "{what}: meshes with {} and {} cells differ",
            a.len() - 1,
            b.len() - 1
        )));
    }
    Ok(())
}

/// `T_C psi`, with `psi` on `C`'s `v`-mesh; the result lives on the `u`-mesh.
pub fn operator_apply(c: &PatchedCopula, psi: &Step) -> Result<Step> {
    same_mesh(c.y_breaks(), &psi.breaks, "operator input must live on the copula's v-mesh")?;
    let values = c
        .mass()
        .rows()
        .into_iter()
        .enumerate()
        .map(|(i, row)| {
            let s: Rational = row
                .iter()
                .zip(&psi.values)
                .filter(|(m, v)| !m.is_zero() && !v.is_zero())
                .map(|(m, v)| m * v)
                .sum();
            s / c.dx(i)
        })
        .collect();
    Ok(Step {
        breaks: c.x_breaks().to_vec(),
        values,
    })
}

/// `T*_C phi`, with `phi` on `C`'s `u`-mesh; the result lives on the `v`-mesh.
pub fn operator_apply_adjoint(c: &PatchedCopula, phi: &Step) -> Result<Step> {
    same_mesh(c.x_breaks(), &phi.breaks, "adjoint input must live on the copula's u-mesh")?;
    let values = c
        .mass()
        .columns()
        .into_iter()
        .enumerate()
        .map(|(j, col)| {
            let s: Rational = col
                .iter()
                .zip(&phi.values)
                .filter(|(m, v)| !m.is_zero() && !v.is_zero())
                .map(|(m, v)| m * v)
                .sum();
            s / c.dy(j)
        })
        .collect();
    Ok(Step {
        breaks: c.y_breaks().to_vec(),
        values,
    })
}

/// `mu_C(R x S)` for cell sets on the two axes.
pub fn rectangle_mass(c: &PatchedCopula, r: &CellSet, s: &CellSet) -> Result<Rational> {
    same_mesh(c.x_breaks(), &r.mesh, "rectangle u-side")?;
    same_mesh(c.y_breaks(), &s.mesh, "rectangle v-side")?;
    let mut total = Rational::zero();
    for &i in &r.members {
        for &j in &s.members {
            total += &c.mass()[[i, j]];
        }
    }
    Ok(total)
}

/// Returns `R` when `T_C 1_S = 1_R`, after cross-checking
/// `mu_C(R x S) = lambda(R) = lambda(S)`.
pub fn indicator_check(c: &PatchedCopula, s: &CellSet) -> Result<Option<CellSet>> {
    let image = operator_apply(c, &s.indicator())?;
    let Some(r) = image.as_indicator() else {
        return Ok(None);
    };
    let lr = r.measure();
    if lr != s.measure() || rectangle_mass(c, &r, s)? != lr {
        return Ok(None);
    }
    Ok(Some(r))
}

/// Connected components of the bipartite graph on `u`-cells and `v`-cells
/// with an edge wherever the cell mass is positive, ordered by smallest
/// `u`-cell. Each component's `v`-side indicator is mapped by `T_C` to its
/// `u`-side indicator.
pub fn sigma_atoms(c: &PatchedCopula) -> Vec<SigmaAtom> {
    let comps = components(c.x_cells(), c.y_cells(), c.support_cells().into_iter());
    comps
        .into_iter()
        .map(|(xs, ys)| {
            let x = CellSet {
                mesh: c.x_breaks().to_vec(),
                members: xs.into_iter().collect(),
            };
            let y = CellSet {
                mesh: c.y_breaks().to_vec(),
                members: ys.into_iter().collect(),
            };
            let measure = x.measure();
            SigmaAtom { x, y, measure }
        })
        .collect()
}
