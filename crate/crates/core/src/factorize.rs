//! Left/right complete-dependence factorization of invariant copulas.
//!
//! When every invariant-pair block of `A` has rank one, `A` splits into a left
//! complete-dependence matrix `L` and a right one `R` with
//! `[L](C1) * [R](C2) = [A](C1 * C2)` for all copulas. Iterating from the
//! idempotent seed `Pi` gives `[L]^d(Pi) * [R]^d(Pi) = [A]^d(Pi)` exactly at
//! every depth, and in the limit `C_A = C_L * C_R`.
//!
//! The factors are iterated from `Pi`, not from `M`: `M` is singular and not
//! representable here, while both seeds lead to the same fixed points.

use std::collections::BTreeMap;

use ndarray::Array2;
use num_traits::Zero;

use crate::copula::PatchedCopula;
use crate::error::{Error, Result};
use crate::markov::sigma_atoms;
use crate::patch;
use crate::{Rational, TransformationMatrix};

/// `(L, R)` from the finest decomposition of `a`.
pub fn build_lr(a: &TransformationMatrix) -> Result<(TransformationMatrix, TransformationMatrix)> {
    a.invariant_pairs().rank_one_factorize()
}

/// Both sides of `[L](C1) * [R](C2) = [A](C1 * C2)`.
pub fn product_identity_sides(
    a: &TransformationMatrix,
    l: &TransformationMatrix,
    r: &TransformationMatrix,
    c1: &PatchedCopula,
    c2: &PatchedCopula,
) -> (PatchedCopula, PatchedCopula) {
    let lhs = patch::apply(l, c1).star(&patch::apply(r, c2));
    let rhs = patch::apply(a, &c1.star(c2));
    (lhs, rhs)
}

pub fn product_identity_check(
    a: &TransformationMatrix,
    l: &TransformationMatrix,
    r: &TransformationMatrix,
    c1: &PatchedCopula,
    c2: &PatchedCopula,
) -> bool {
    let (lhs, rhs) = product_identity_sides(a, l, r, c1, c2);
    lhs.same_measure(&rhs)
}

/// Depth-`d` approximations of `C_L`, `C_R` and `C_A`, all seeded with `Pi`.
#[derive(Debug, Clone)]
pub struct FactorFixpoints {
    pub left: PatchedCopula,
    pub right: PatchedCopula,
    pub product: PatchedCopula,
}

/// Iterates `L`, `R` and `A` to depth `d` and confirms
/// `[L]^d(Pi) * [R]^d(Pi) = [A]^d(Pi)`.
pub fn factor_fixpoints(a: &TransformationMatrix, depth: usize) -> Result<FactorFixpoints> {
    let (l, r) = build_lr(a)?;
    let pi = PatchedCopula::independence();
    let left = patch::iterate(&l, &pi, depth);
    let right = patch::iterate(&r, &pi, depth);
    let product = patch::iterate(a, &pi, depth);
    if !left.star(&right).same_measure(&product) {
        return Err(Error::FactorizationMismatch { depth });
    }
    Ok(FactorFixpoints { left, right, product })
}

/// Result of [`left_invertibility_check`].
#[derive(Debug, Clone)]
pub struct InvertibilityReport {
    /// `v`-cells grouped by sigma-atom.
    pub partition: Vec<Vec<usize>>,
    /// `C^t * C`.
    pub gram: PatchedCopula,
    /// The block-diagonal uniform copula it is compared against.
    pub expected: PatchedCopula,
    pub passed: bool,
}

/// Computes `C^t * C` and compares it with the block-diagonal uniform copula
/// on `C`'s `v`-mesh whose blocks are the `v`-sides of the sigma-atoms of `C`.
///
/// For `C = [L]^d(Pi)` every atom is a single `v`-cell, so the expected value
/// is the grid version of `M` on the depth-`d` row partition.
pub fn left_invertibility_check(c: &PatchedCopula) -> InvertibilityReport {
    let gram = c.transpose().star(c);
    let n = c.y_cells();
    let mut owner = vec![0usize; n];
    let mut partition = Vec::new();
    let mut block_measure = BTreeMap::new();
    for (b, atom) in sigma_atoms(c).into_iter().enumerate() {
        for &j in atom.y.members() {
            owner[j] = b;
        }
        partition.push(atom.y.members().iter().copied().collect::<Vec<_>>());
        block_measure.insert(b, atom.measure);
    }
    let mass = Array2::from_shape_fn((n, n), |(a, b)| {
        if owner[a] == owner[b] {
            c.dy(a) * c.dy(b) / &block_measure[&owner[a]]
        } else {
            Rational::zero()
        }
    });
    let expected = PatchedCopula::from_parts(c.y_breaks().to_vec(), c.y_breaks().to_vec(), mass)
        .expect("block-diagonal uniform masses have uniform marginals");
    let passed = gram == expected;
    InvertibilityReport {
        partition,
        gram,
        expected,
        passed,
    }
}

/// Mirror of [`left_invertibility_check`] for right factors: checks
/// `C * C^t` through the transpose.
pub fn right_invertibility_check(c: &PatchedCopula) -> InvertibilityReport {
    left_invertibility_check(&c.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{fixtures, rat, sample, DependenceKind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn factors_of_examples() {
        let (l2, r2) = build_lr(&fixtures::a2()).unwrap();
        assert_eq!(l2, fixtures::l2());
        assert_eq!(r2, fixtures::l2().transpose());
        let (l3, r3) = build_lr(&fixtures::a3()).unwrap();
        assert_eq!((l3.dependence_kind(), r3.dependence_kind()), (DependenceKind::Left, DependenceKind::Right));
        assert!(matches!(build_lr(&fixtures::a1()), Err(Error::RankExceedsOne { block: 0, .. })));
    }

    #[test]
    fn product_identity_with_independence() {
        let a2 = fixtures::a2();
        let (l, r) = build_lr(&a2).unwrap();
        let pi = PatchedCopula::independence();
        assert!(product_identity_check(&a2, &l, &r, &pi, &pi));
        assert_eq!(patch::from_matrix(&l).star(&patch::from_matrix(&r)), patch::from_matrix(&a2));
    }

    #[test]
    fn product_identity_random_and_perturbed() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let a3 = fixtures::a3();
        let (l, r) = build_lr(&a3).unwrap();
        for _ in 0..3 {
            let c1 = sample::random_copula(&mut rng, 3, 2);
            let c2 = sample::random_copula(&mut rng, 2, 3);
            assert!(product_identity_check(&a3, &l, &r, &c1, &c2));
            let (lhs, rhs) = product_identity_sides(&a3, &l, &r, &c1, &c2);
            let mut mass = lhs.mass().clone();
            mass[[0, 0]] += rat(1, 1000);
            let bumped = PatchedCopula::from_parts_unchecked(lhs.x_breaks().to_vec(), lhs.y_breaks().to_vec(), mass).unwrap();
            assert!(!bumped.same_measure(&rhs));
        }
    }

    #[test]
    fn fixpoints_factor_exactly() {
        for a in [fixtures::a2(), fixtures::a3()] {
            for d in 0..=3 {
                let fx = factor_fixpoints(&a, d).unwrap();
                assert_eq!(fx.product, patch::iterate(&a, &PatchedCopula::independence(), d));
            }
        }
        let fx = factor_fixpoints(&fixtures::a2(), 0).unwrap();
        assert_eq!(fx.left, PatchedCopula::independence());
        assert!(factor_fixpoints(&fixtures::a1(), 2).is_err());
    }

    #[test]
    fn left_factor_is_left_invertible() {
        let l2 = fixtures::l2();
        for d in 1..=3 {
            let cl = patch::iterate(&l2, &PatchedCopula::independence(), d);
            let report = left_invertibility_check(&cl);
            assert!(report.passed);
            assert_eq!(report.partition.len(), 2usize.pow(d as u32));
            assert!(report.partition.iter().all(|b| b.len() == 1));
            assert_eq!(report.gram.star(&report.gram), report.gram);
            assert_eq!(report.gram.transpose(), report.gram);
        }
        let cl1 = patch::from_matrix(&l2);
        assert_eq!(left_invertibility_check(&cl1).gram.mass()[[0, 0]], rat(2, 3));
        let pi = left_invertibility_check(&PatchedCopula::independence());
        assert!(pi.passed);
        assert_eq!(pi.gram, PatchedCopula::independence());
    }

    #[test]
    fn right_factor_is_right_invertible() {
        let r3 = fixtures::r3();
        let cr = patch::iterate(&r3, &PatchedCopula::independence(), 2);
        assert!(right_invertibility_check(&cr).passed);
        // A1's iterate is not left invertible
        let ca = patch::iterate(&fixtures::a1(), &PatchedCopula::independence(), 1);
        assert!(!left_invertibility_check(&ca).passed);
    }
}
