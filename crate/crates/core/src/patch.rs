//! The patching operator `[A]` and its iterates.
//!
//! `[A](C)` places a copy of `C`, scaled affinely onto the rectangle
//! `[p_i, p_{i+1}] x [q_j, q_{j+1}]` and weighted by `a_ij`, in every cell of
//! the grid induced by `A`. Every rectangle in column `i` shares the `u`-range
//! of that column, so the new `u`-mesh is simply the concatenation of the
//! scaled copies of `C`'s `u`-mesh; the same holds for `v`. A `k x l` matrix
//! therefore turns an `m x n` mesh into a `km x ln` one.

use ndarray::Array2;
use num_traits::{One, Zero};

use crate::copula::{PatchedCopula, SobolevDistance};
use crate::error::{Error, Result};
use crate::mesh;
use crate::{sqrt_upper, Rational, TransformationMatrix};

/// Depth cap used by the command-line driver when none is given.
pub const DEFAULT_MAX_DEPTH: usize = 6;

/// `[A](C)`.
pub fn apply(a: &TransformationMatrix, c: &PatchedCopula) -> PatchedCopula {
    let (k, l) = (a.columns(), a.rows());
    let (m, n) = (c.x_cells(), c.y_cells());

    let mut xb = Vec::with_capacity(k * m + 1);
    for i in 0..k {
        mesh::push_scaled(&mut xb, c.x_breaks(), &a.p()[i], &a.p()[i + 1]);
    }
    xb.push(Rational::one());
    let mut yb = Vec::with_capacity(l * n + 1);
    for j in 0..l {
        mesh::push_scaled(&mut yb, c.y_breaks(), &a.q()[j], &a.q()[j + 1]);
    }
    yb.push(Rational::one());

    let mut mass = Array2::from_elem((k * m, l * n), Rational::zero());
    for ((i, j), w) in a.entries().indexed_iter() {
        if w.is_zero() {
            continue;
        }
        for ((s, t), cm) in c.mass().indexed_iter() {
            if !cm.is_zero() {
                mass[[i * m + s, j * n + t]] = w * cm;
            }
        }
    }
    PatchedCopula::from_parts_unchecked(xb, yb, mass).expect("patched mesh matches mass shape")
}

/// `[A]^depth(C)`; depth zero returns `C`.
pub fn iterate(a: &TransformationMatrix, c: &PatchedCopula, depth: usize) -> PatchedCopula {
    let mut cur = c.clone();
    for _ in 0..depth {
        cur = apply(a, &cur);
    }
    cur
}

/// `[A](Pi)`: the matrix itself read as a copula on its own grid.
pub fn from_matrix(a: &TransformationMatrix) -> PatchedCopula {
    apply(a, &PatchedCopula::independence())
}

/// Outcome of [`fixpoint`].
#[derive(Debug, Clone)]
pub struct Fixpoint {
    /// The last iterate.
    pub copula: PatchedCopula,
    /// Number of patching steps applied.
    pub depth: usize,
    /// Whether the squared step distance fell to `tol^2` or below.
    pub converged: bool,
    /// Sobolev distance between consecutive iterates, one entry per step.
    pub steps: Vec<SobolevDistance>,
    /// Certified upper bound on the squared Sobolev distance from the last
    /// iterate to the invariant copula: `r^(2d) |[A](seed) - seed|^2 / (1 - r)^2`
    /// with `r` rounded up. `None` when `[A]` is not a contraction.
    pub apriori_bound_sq: Option<Rational>,
}

impl Fixpoint {
    /// Squared distance of the final step, if any step was taken.
    pub fn final_step_sq(&self) -> Option<Rational> {
        self.steps.last().map(SobolevDistance::total)
    }
}

/// Iterates `[A]` from `seed` until consecutive iterates are within `tol` in
/// the modified Sobolev norm, or `max_depth` steps have been taken.
///
/// The comparison is `dist^2 <= tol^2`, so no square roots are taken. The
/// `1 x 1` matrix `[1]` fixes every copula and has no unique fixed point; it
/// always ends in [`Error::NoContraction`], as does any non-contracting
/// matrix (a single row or column) that misses the tolerance.
pub fn fixpoint(a: &TransformationMatrix, seed: &PatchedCopula, tol: &Rational, max_depth: usize) -> Result<Fixpoint> {
    let r2 = a.contraction_factor();
    let contracting = r2 < Rational::one();
    let trivial = a.columns() == 1 && a.rows() == 1;
    let tol2 = tol * tol;

    let mut cur = seed.clone();
    let mut steps = Vec::new();
    let mut converged = false;
    while steps.len() < max_depth {
        let next = apply(a, &cur);
        let dist = cur.sobolev_distance(&next);
        let done = dist.total() <= tol2;
        steps.push(dist);
        cur = next;
        if done && !trivial {
            converged = true;
            break;
        }
    }
    if !converged && (trivial || !contracting) {
        return Err(Error::NoContraction { depth: steps.len() });
    }

    let depth = steps.len();
    let apriori_bound_sq = steps.first().and_then(|first| apriori_bound_sq(&r2, &first.total(), depth));
    Ok(Fixpoint {
        copula: cur,
        depth,
        converged,
        steps,
        apriori_bound_sq,
    })
}

/// Certified upper bound on `|C_d - C_A|^2` from the first step distance:
/// `r^(2d) first_sq / (1 - r)^2`, with `r` rounded up to a dyadic rational.
/// `None` unless `r2 < 1`.
pub fn apriori_bound_sq(r2: &Rational, first_sq: &Rational, depth: usize) -> Option<Rational> {
    if *r2 >= Rational::one() {
        return None;
    }
    let r = sqrt_upper(r2, 48);
    (r < Rational::one()).then(|| {
        let gap = Rational::one() - r;
        num_traits::pow(r2.clone(), depth) * first_sq / (&gap * &gap)
    })
}
