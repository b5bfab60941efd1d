//! Breakpoint sequences on the unit interval.
//!
//! A mesh is a strictly increasing sequence `0 = b_0 < b_1 < ... < b_m = 1`.
//! Cell `i` (zero based) is the interval `(b_i, b_{i+1}]`.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::Rational;

pub fn check_partition(breaks: &[Rational]) -> Result<()> {
    if breaks.len() < 2 {
        return Err(Error::NotAPartition(format!(
            "need at least two breakpoints, got {}",
            breaks.len()
        )));
    }
    if !breaks[0].is_zero() {
        return Err(Error::NotAPartition(format!("first breakpoint is {}", breaks[0])));
    }
    let last = &breaks[breaks.len() - 1];
    if !last.is_one() {
        return Err(Error::NotAPartition(format!("last breakpoint is {last}")));
    }
    for (i, w) in breaks.windows(2).enumerate() {
        if w[0] >= w[1] {
            return Err(Error::NotAPartition(format!(
                "breakpoints {} and {} (positions {i}, {}) are not strictly increasing",
                w[0],
                w[1],
                i + 1
            )));
        }
    }
    Ok(())
}

/// Uniform mesh `0, 1/n, ..., 1`.
pub fn uniform(n: usize) -> Vec<Rational> {
    assert!(n >= 1, "uniform mesh needs at least one cell");
    (0..=n).map(|i| Rational::new(i.into(), n.into())).collect()
}

pub fn widths(breaks: &[Rational]) -> Vec<Rational> {
    breaks.windows(2).map(|w| &w[1] - &w[0]).collect()
}

/// Sorted union of two meshes.
pub fn merge(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j].clone());
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i].clone());
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// For every cell of `fine`, the index of the `coarse` cell containing it and
/// the fraction of that coarse cell's width it covers.
pub fn refinement(coarse: &[Rational], fine: &[Rational]) -> Result<Vec<(usize, Rational)>> {
    let mut out = Vec::with_capacity(fine.len().saturating_sub(1));
    let mut parent = 0;
    for w in fine.windows(2) {
        while parent + 1 < coarse.len() && coarse[parent + 1] <= w[0] {
            parent += 1;
        }
        if parent + 1 >= coarse.len() || w[1] > coarse[parent + 1] || w[0] < coarse[parent] {
            return Err(Error::MeshMismatch(format!(
                "cell ({}, {}] straddles a breakpoint of the coarser mesh",
                w[0], w[1]
            )));
        }
        let frac = (&w[1] - &w[0]) / (&coarse[parent + 1] - &coarse[parent]);
        out.push((parent, frac));
    }
    Ok(out)
}

/// Index of the cell containing `x`, using half-open cells `[b_i, b_{i+1})`
/// except that `1` belongs to the last cell.
pub fn locate(breaks: &[Rational], x: &Rational) -> usize {
    let cells = breaks.len() - 1;
    let idx = breaks.partition_point(|b| b <= x);
    idx.saturating_sub(1).min(cells - 1)
}

/// Affine image of `breaks` inside `[lo, hi]`, without the final point.
pub(crate) fn push_scaled(out: &mut Vec<Rational>, breaks: &[Rational], lo: &Rational, hi: &Rational) {
    let width = hi - lo;
    for b in &breaks[..breaks.len() - 1] {
        out.push(lo + &width * b);
    }
}

pub(crate) fn is_zero_one_valued(values: &[Rational]) -> bool {
    values.iter().all(|v| v.is_zero() || v.is_one())
}
