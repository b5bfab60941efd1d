use num_traits::Zero;

use super::{same_mesh, CellSet, Step};
use crate::error::{Error, Result};
use crate::mesh;
use crate::Rational;

/// A measure-preserving map at mesh resolution.
///
/// Every source cell is sent to one target cell, and for each target cell the
/// source cells sent to it have total width equal to the target's width. It
/// stands for any measure-preserving map that rearranges those source cells
/// onto the target cell; composition with it (`psi o f`) and its conditional
/// average are exact at this resolution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepMap {
    source: Vec<Rational>,
    target: Vec<Rational>,
    assignment: Vec<usize>,
}

impl StepMap {
    pub fn new(source: Vec<Rational>, target: Vec<Rational>, assignment: Vec<usize>) -> Result<Self> {
        mesh::check_partition(&source)?;
        mesh::check_partition(&target)?;
        let (ns, nt) = (source.len() - 1, target.len() - 1);
        if assignment.len() != ns {
            return Err(Error::MeshMismatch(format!(
                "{} assignments for {ns} source cells",
                assignment.len()
            )));
        }
        if let Some(&bad) = assignment.iter().find(|&&t| t >= nt) {
            return Err(Error::MeshMismatch(format!("target cell {bad} outside a mesh of {nt} cells")));
        }
        let mut covered = vec![Rational::zero(); nt];
        for (s, &t) in assignment.iter().enumerate() {
            covered[t] += &source[s + 1] - &source[s];
        }
        for (t, got) in covered.iter().enumerate() {
            let want = &target[t + 1] - &target[t];
            if *got != want {
                return Err(Error::NotMeasurePreserving(format!(
                    "target cell {t} of width {want} receives source width {got}"
                )));
            }
        }
        Ok(Self {
            source,
            target,
            assignment,
        })
    }

    /// Identity on `mesh`.
    pub fn identity(mesh: &[Rational]) -> Self {
        Self {
            source: mesh.to_vec(),
            target: mesh.to_vec(),
            assignment: (0..mesh.len() - 1).collect(),
        }
    }

    /// Sends every cell of `source` to the single target cell `(0, 1]`.
    pub fn collapse(source: &[Rational]) -> Self {
        Self {
            source: source.to_vec(),
            target: mesh::uniform(1),
            assignment: vec![0; source.len() - 1],
        }
    }

    pub fn source(&self) -> &[Rational] {
        &self.source
    }

    pub fn target(&self) -> &[Rational] {
        &self.target
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn target_cells(&self) -> usize {
        self.target.len() - 1
    }

    /// `f^{-1}(B)` for a union of target cells.
    pub fn preimage(&self, b: &CellSet) -> Result<CellSet> {
        same_mesh(&self.target, b.mesh(), "preimage")?;
        let members = self
            .assignment
            .iter()
            .enumerate()
            .filter(|(_, t)| b.contains(**t))
            .map(|(s, _)| s);
        CellSet::new(self.source.clone(), members)
    }

    /// `psi o f`: a step on the target mesh pulled back to the source mesh.
    pub fn push(&self, psi: &Step) -> Result<Step> {
        same_mesh(&self.target, psi.breaks(), "composition")?;
        let values = self.assignment.iter().map(|&t| psi.values()[t].clone()).collect();
        Step::new(self.source.clone(), values)
    }

    /// Conditional average of a source step over each target cell; the left
    /// inverse of [`StepMap::push`].
    pub fn average(&self, phi: &Step) -> Result<Step> {
        same_mesh(&self.source, phi.breaks(), "averaging")?;
        let mut acc = vec![Rational::zero(); self.target_cells()];
        for (s, &t) in self.assignment.iter().enumerate() {
            acc[t] += &phi.values()[s] * (&self.source[s + 1] - &self.source[s]);
        }
        let values = acc
            .into_iter()
            .enumerate()
            .map(|(t, v)| v / (&self.target[t + 1] - &self.target[t]))
            .collect();
        Step::new(self.target.clone(), values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;
    use proptest::prelude::*;

    fn interleave() -> StepMap {
        // sources of width 1/4 sent alternately to two halves
        StepMap::new(mesh::uniform(4), mesh::uniform(2), vec![0, 1, 0, 1]).unwrap()
    }

    #[test]
    fn rejects_non_measure_preserving() {
        let bad = StepMap::new(mesh::uniform(4), mesh::uniform(2), vec![0, 0, 0, 1]);
        assert!(matches!(bad, Err(Error::NotMeasurePreserving(_))));
        assert!(StepMap::new(mesh::uniform(4), mesh::uniform(2), vec![0, 1]).is_err());
        assert!(StepMap::new(mesh::uniform(2), mesh::uniform(2), vec![0, 2]).is_err());
    }

    #[test]
    fn identity_push_and_average() {
        let id = StepMap::identity(&mesh::uniform(3));
        let psi = Step::new(mesh::uniform(3), vec![rat(1, 2), rat(-3, 1), rat(7, 5)]).unwrap();
        assert_eq!(id.push(&psi).unwrap(), psi);
        assert_eq!(id.average(&psi).unwrap(), psi);
    }

    #[test]
    fn preimage_and_push() {
        let f = interleave();
        let b = CellSet::new(mesh::uniform(2), [1]).unwrap();
        assert_eq!(f.preimage(&b).unwrap().members().iter().copied().collect::<Vec<_>>(), vec![1, 3]);
        let psi = Step::new(mesh::uniform(2), vec![rat(2, 1), rat(5, 1)]).unwrap();
        assert_eq!(f.push(&psi).unwrap().values(), &[rat(2, 1), rat(5, 1), rat(2, 1), rat(5, 1)]);
        assert!(f.push(&Step::constant(&mesh::uniform(3), rat(1, 1))).is_err());
    }

    proptest! {
        #[test]
        fn average_inverts_push(a in -50i64..50, b in -50i64..50, c in 1i64..9) {
            let f = interleave();
            let psi = Step::new(mesh::uniform(2), vec![rat(a, c), rat(b, c)]).unwrap();
            prop_assert_eq!(f.average(&f.push(&psi).unwrap()).unwrap(), psi);
        }

        #[test]
        fn push_preserves_products(a in -9i64..9, b in -9i64..9, c in -9i64..9, d in -9i64..9) {
            let f = interleave();
            let psi = Step::new(mesh::uniform(2), vec![rat(a, 1), rat(b, 1)]).unwrap();
            let phi = Step::new(mesh::uniform(2), vec![rat(c, 1), rat(d, 1)]).unwrap();
            let lhs = f.push(&psi.product(&phi).unwrap()).unwrap();
            let rhs = f.push(&psi).unwrap().product(&f.push(&phi).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
