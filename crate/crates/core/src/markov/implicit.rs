//! Grid witnesses for implicit dependence.
//!
//! For a decomposable matrix, the cells of `[A]^d(Pi)` carry a block address
//! `(n_1, ..., n_d)` on each axis, and all mass lies on cells whose `u` and
//! `v` addresses agree. Sending every cell to an interval indexed by its
//! address gives measure-preserving step maps `f` (on `u`) and `g` (on `v`)
//! with `T_C(theta o g) = theta o f`, and `mu_C(graph{f = g}) = 1`.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::Rng;

use super::{operator_apply, same_mesh, CellSet, Step, StepMap};
use crate::copula::PatchedCopula;
use crate::error::{Error, Result};
use crate::mesh;
use crate::tmatrix::Decomposition;
use crate::Rational;

/// One axis of the mesh of `[A]^depth(Pi)`, given that axis's breakpoints.
pub fn depth_mesh(breaks: &[Rational], depth: usize) -> Vec<Rational> {
    let mut cur = mesh::uniform(1);
    for _ in 0..depth {
        let mut next = Vec::with_capacity((breaks.len() - 1) * (cur.len() - 1) + 1);
        for w in breaks.windows(2) {
            mesh::push_scaled(&mut next, &cur, &w[0], &w[1]);
        }
        next.push(Rational::one());
        cur = next;
    }
    cur
}

/// Most significant digit first.
fn digits(mut index: usize, radix: usize, depth: usize) -> Vec<usize> {
    let mut out = vec![0; depth];
    for slot in out.iter_mut().rev() {
        *slot = index % radix;
        index /= radix;
    }
    out
}

fn cells_with_digits(choices: &[&[usize]], radix: usize) -> Vec<usize> {
    let mut out = vec![0usize];
    for allowed in choices {
        out = out
            .iter()
            .flat_map(|&prefix| allowed.iter().map(move |&d| prefix * radix + d))
            .collect();
    }
    out
}

/// `F_{n_1} o ... o F_{n_d}((0,1))` and `G_{n_1} o ... o G_{n_d}((0,1))` as
/// cell sets on the depth-`d` meshes, `d = address.len()`. Block indices are
/// zero based. Both sets have measure `|A_{n_1}| ... |A_{n_d}|`.
pub fn address_sets(d: &Decomposition, address: &[usize]) -> Result<(CellSet, CellSet)> {
    let nb = d.len();
    if let Some(&entry) = address.iter().find(|&&n| n >= nb) {
        return Err(Error::BadAddress { entry, blocks: nb });
    }
    let a = d.source();
    let depth = address.len();
    let cols: Vec<&[usize]> = address.iter().map(|&n| d.blocks()[n].columns.as_slice()).collect();
    let rows: Vec<&[usize]> = address.iter().map(|&n| d.blocks()[n].rows.as_slice()).collect();
    let fset = CellSet::new(depth_mesh(a.p(), depth), cells_with_digits(&cols, a.columns()))?;
    let gset = CellSet::new(depth_mesh(a.q(), depth), cells_with_digits(&rows, a.rows()))?;
    Ok((fset, gset))
}

/// Step maps `(f, g)` on the depth-`depth` meshes sending each cell to the
/// target interval of its block address. Targets are ordered
/// lexicographically by address, each of width `prod_t |A_{n_t}|`.
pub fn build_implicit_pair(d: &Decomposition, depth: usize) -> (StepMap, StepMap) {
    let nb = d.len();
    let a = d.source();
    let addresses = nb.pow(depth as u32);
    let mut target = Vec::with_capacity(addresses + 1);
    let mut acc = Rational::zero();
    target.push(acc.clone());
    for alpha in 0..addresses {
        let width: Rational = digits(alpha, nb, depth)
            .into_iter()
            .map(|n| d.blocks()[n].mass.clone())
            .product();
        acc += width;
        target.push(acc.clone());
    }

    let col_block: Vec<usize> = (0..a.columns()).map(|i| d.column_block(i)).collect();
    let row_block: Vec<usize> = (0..a.rows()).map(|j| d.row_block(j)).collect();
    let address_of = |cell: usize, radix: usize, owner: &[usize]| {
        digits(cell, radix, depth)
            .into_iter()
            .fold(0usize, |acc, digit| acc * nb + owner[digit])
    };

    let fsrc = depth_mesh(a.p(), depth);
    let fassign = (0..fsrc.len() - 1).map(|c| address_of(c, a.columns(), &col_block)).collect();
    let gsrc = depth_mesh(a.q(), depth);
    let gassign = (0..gsrc.len() - 1).map(|c| address_of(c, a.rows(), &row_block)).collect();

    let f = StepMap::new(fsrc, target.clone(), fassign).expect("block addresses preserve measure");
    let g = StepMap::new(gsrc, target, gassign).expect("block addresses preserve measure");
    (f, g)
}

/// Outcome of [`verify_markov_factorization`].
#[derive(Debug, Clone, Default)]
pub struct MarkovReport {
    pub cells_checked: usize,
    pub unions_checked: usize,
    pub steps_checked: usize,
    pub failures: Vec<String>,
}

impl MarkovReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn check_meshes(c: &PatchedCopula, f: &StepMap, g: &StepMap) -> Result<()> {
    same_mesh(f.target(), g.target(), "f and g must share a target mesh")?;
    same_mesh(c.x_breaks(), f.source(), "f must start from the copula's u-mesh")?;
    same_mesh(c.y_breaks(), g.source(), "g must start from the copula's v-mesh")
}

/// Checks `T_C 1_{g^-1(B)} = 1_{f^-1(B)}` for every target cell `B` and for
/// `trials` random unions of target cells, then `T_C(theta o g) = theta o f`
/// for `trials` random steps `theta` on the target mesh. The right-hand side
/// is computed as `T_ef T_ge (theta o g)`, i.e. averaging along `g` and then
/// composing with `f`.
pub fn verify_markov_factorization<R: Rng + ?Sized>(
    c: &PatchedCopula,
    f: &StepMap,
    g: &StepMap,
    trials: usize,
    rng: &mut R,
) -> Result<MarkovReport> {
    check_meshes(c, f, g)?;
    let nt = f.target_cells();
    let mut report = MarkovReport::default();

    let check_set = |b: CellSet, report: &mut MarkovReport| -> Result<()> {
        let lhs = operator_apply(c, &g.preimage(&b)?.indicator())?;
        let rhs = f.preimage(&b)?.indicator();
        if lhs != rhs {
            report
                .failures
                .push(format!("indicator of target cells {:?} is not transported", b.members()));
        }
        Ok(())
    };

    for t in 0..nt {
        check_set(CellSet::new(f.target().to_vec(), [t])?, &mut report)?;
        report.cells_checked += 1;
    }
    for _ in 0..trials {
        let members: Vec<usize> = (0..nt).filter(|_| rng.random_bool(0.5)).collect();
        check_set(CellSet::new(f.target().to_vec(), members)?, &mut report)?;
        report.unions_checked += 1;
    }
    for trial in 0..trials {
        let values = (0..nt)
            .map(|_| Rational::new(rng.random_range(-20i64..=20).into(), rng.random_range(1i64..=6).into()))
            .collect();
        let theta = Step::new(f.target().to_vec(), values)?;
        let psi = g.push(&theta)?;
        let lhs = operator_apply(c, &psi)?;
        let rhs = f.push(&g.average(&psi)?)?;
        if lhs != rhs {
            report.failures.push(format!("random g-measurable step #{trial} is not transported"));
        }
        report.steps_checked += 1;
    }
    Ok(report)
}

/// `mu_C(B_n)` with `B_n = union_I f^{-1}(I) x g^{-1}(I)`, `I` running over
/// the dyadic intervals of length `2^-level`.
///
/// Step maps cannot separate points inside a target cell, so each target
/// cell is assigned whole to the dyadic interval containing its left end.
/// Once the dyadic intervals are finer than the target cells this is the
/// partition into target cells. The value is nonincreasing in `level`.
pub fn graph_mass(c: &PatchedCopula, f: &StepMap, g: &StepMap, level: u32) -> Result<Rational> {
    check_meshes(c, f, g)?;
    let scale = Rational::from_integer(BigInt::one() << level);
    let key: Vec<BigInt> = f.target()[..f.target_cells()]
        .iter()
        .map(|left| (left * &scale).floor().to_integer())
        .collect();
    let mut total = Rational::zero();
    for ((i, j), m) in c.mass().indexed_iter() {
        if !m.is_zero() && key[f.assignment()[i]] == key[g.assignment()[j]] {
            total += m;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{fixtures, patch, rat};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn depth_mesh_matches_iterates() {
        let a3 = fixtures::a3();
        for d in 0..3 {
            let c = patch::iterate(&a3, &PatchedCopula::independence(), d);
            assert_eq!(depth_mesh(a3.p(), d), c.x_breaks());
            assert_eq!(depth_mesh(a3.q(), d), c.y_breaks());
        }
    }

    #[test]
    fn single_block_addresses() {
        let d = fixtures::a2().invariant_pairs();
        for (n, b) in d.blocks().iter().enumerate() {
            let (fs, gs) = address_sets(&d, &[n]).unwrap();
            assert_eq!(fs.measure(), b.mass);
            assert_eq!(gs.measure(), b.mass);
        }
        let (fs, gs) = address_sets(&d, &[1]).unwrap();
        assert_eq!(fs.members().iter().copied().collect::<Vec<_>>(), vec![1]);
        assert_eq!(gs.members().iter().copied().collect::<Vec<_>>(), vec![1]);
        assert_eq!(fs.mesh(), &[rat(0, 1), rat(1, 3), rat(2, 3), rat(1, 1)]);
    }

    #[test]
    fn address_measures_multiply() {
        let d = fixtures::a3().invariant_pairs();
        for address in [[0, 0], [0, 1], [1, 0], [1, 1]] {
            let (fs, gs) = address_sets(&d, &address).unwrap();
            let want = &d.blocks()[address[0]].mass * &d.blocks()[address[1]].mass;
            assert_eq!(fs.measure(), want);
            assert_eq!(gs.measure(), want);
        }
        assert!(matches!(address_sets(&d, &[0, 2]), Err(Error::BadAddress { entry: 2, blocks: 2 })));
    }

    #[test]
    fn a2_pair_at_depth_one() {
        let d = fixtures::a2().invariant_pairs();
        let (f, g) = build_implicit_pair(&d, 1);
        assert_eq!(g.target(), &[rat(0, 1), rat(2, 3), rat(1, 1)]);
        assert_eq!(g.assignment(), &[0, 1, 0]);
        assert_eq!(f.assignment(), &[0, 1, 0]);
    }

    #[test]
    fn implicit_pair_verifies() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for a in [fixtures::a2(), fixtures::a3(), fixtures::a1()] {
            let d = a.invariant_pairs();
            for depth in 1..=2 {
                let c = patch::iterate(&a, &PatchedCopula::independence(), depth);
                let (f, g) = build_implicit_pair(&d, depth);
                let report = verify_markov_factorization(&c, &f, &g, 10, &mut rng).unwrap();
                assert!(report.passed(), "{:?}", report.failures);
                for level in 0..=depth as u32 + 2 {
                    assert_eq!(graph_mass(&c, &f, &g, level).unwrap(), rat(1, 1));
                }
            }
        }
    }

    #[test]
    fn independence_fails_factorization() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pi = PatchedCopula::independence().refine(&mesh::uniform(2), &mesh::uniform(2)).unwrap();
        let id = StepMap::identity(&mesh::uniform(2));
        let report = verify_markov_factorization(&pi, &id, &id, 5, &mut rng).unwrap();
        assert!(!report.passed());
    }

    #[test]
    fn graph_mass_of_independence() {
        for n in 1..=5usize {
            let pi = PatchedCopula::independence().refine(&mesh::uniform(n), &mesh::uniform(n)).unwrap();
            let id = StepMap::identity(&mesh::uniform(n));
            assert_eq!(graph_mass(&pi, &id, &id, n as u32).unwrap(), Rational::new(1.into(), n.into()));
            let flat = StepMap::collapse(&mesh::uniform(n));
            assert_eq!(graph_mass(&pi, &flat, &flat, n as u32).unwrap(), rat(1, 1));
        }
    }

    #[test]
    fn graph_mass_is_monotone() {
        let pi = PatchedCopula::independence().refine(&mesh::uniform(6), &mesh::uniform(6)).unwrap();
        let id = StepMap::identity(&mesh::uniform(6));
        let masses: Vec<Rational> = (0..6).map(|n| graph_mass(&pi, &id, &id, n).unwrap()).collect();
        assert_eq!(masses[0], rat(1, 1));
        assert!(masses.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(masses[5], rat(1, 6));
    }

    #[test]
    fn star_of_step_map_copulas_factorizes() {
        // C = C_{ef} * C_{ge}: the copula of (f(U), ...) built from two step maps
        let f = StepMap::new(mesh::uniform(4), mesh::uniform(2), vec![1, 0, 0, 1]).unwrap();
        let g = StepMap::new(mesh::uniform(6), mesh::uniform(2), vec![0, 1, 1, 0, 0, 1]).unwrap();
        let c = graph_copula(&f).star(&graph_copula(&g).transpose());
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let report = verify_markov_factorization(&c, &f, &g, 20, &mut rng).unwrap();
        assert!(report.passed(), "{:?}", report.failures);
    }

    /// Copula with `u`-mesh `f.source`, `v`-mesh `f.target`, carrying each
    /// source cell's width on its assigned target cell.
    fn graph_copula(f: &StepMap) -> PatchedCopula {
        let mut mass = ndarray::Array2::from_elem((f.source().len() - 1, f.target_cells()), Rational::zero());
        for (s, &t) in f.assignment().iter().enumerate() {
            mass[[s, t]] = &f.source()[s + 1] - &f.source()[s];
        }
        PatchedCopula::from_parts(f.source().to_vec(), f.target().to_vec(), mass).unwrap()
    }
}
