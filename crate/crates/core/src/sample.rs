//! Random rational test inputs: partitions, copulas and transformation
//! matrices with small denominators.

use ndarray::Array2;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::copula::PatchedCopula;
use crate::{rat, Rational, TransformationMatrix};

/// Random mesh with `cells` cells of integer-weighted widths.
pub fn random_partition<R: Rng + ?Sized>(rng: &mut R, cells: usize) -> Vec<Rational> {
    let weights: Vec<i64> = (0..cells).map(|_| rng.random_range(1..=5)).collect();
    let total: i64 = weights.iter().sum();
    let mut out = Vec::with_capacity(cells + 1);
    let mut acc = 0;
    out.push(Rational::zero());
    for w in weights {
        acc += w;
        out.push(rat(acc, total));
    }
    out
}

/// Random copula on the given meshes.
///
/// Starts from the independence copula and applies random mass-preserving
/// moves on 2x2 sub-grids (`+d, -d, -d, +d`), which keep both marginals
/// uniform and all masses nonnegative.
pub fn random_copula_on<R: Rng + ?Sized>(rng: &mut R, x_breaks: &[Rational], y_breaks: &[Rational]) -> PatchedCopula {
    let m = x_breaks.len() - 1;
    let n = y_breaks.len() - 1;
    let mut mass = Array2::from_shape_fn((m, n), |(i, j)| {
        (&x_breaks[i + 1] - &x_breaks[i]) * (&y_breaks[j + 1] - &y_breaks[j])
    });
    if m >= 2 && n >= 2 {
        for _ in 0..2 * m * n {
            let mut xs: Vec<usize> = (0..m).collect();
            let mut ys: Vec<usize> = (0..n).collect();
            xs.shuffle(rng);
            ys.shuffle(rng);
            let (i1, i2, j1, j2) = (xs[0], xs[1], ys[0], ys[1]);
            let room = mass[[i1, j2]].clone().min(mass[[i2, j1]].clone());
            let delta = room * rat(rng.random_range(0..=4), 4);
            mass[[i1, j1]] += &delta;
            mass[[i2, j2]] += &delta;
            mass[[i1, j2]] -= &delta;
            mass[[i2, j1]] -= &delta;
        }
    }
    PatchedCopula::from_parts(x_breaks.to_vec(), y_breaks.to_vec(), mass).expect("moves keep marginals uniform")
}

/// Random copula on random `m x n` meshes.
pub fn random_copula<R: Rng + ?Sized>(rng: &mut R, m: usize, n: usize) -> PatchedCopula {
    let xb = random_partition(rng, m);
    let yb = random_partition(rng, n);
    random_copula_on(rng, &xb, &yb)
}

/// Random valid `k x l` transformation matrix (k columns, l rows).
pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, k: usize, l: usize) -> TransformationMatrix {
    loop {
        let raw = Array2::from_shape_fn((k, l), |_| if rng.random_bool(0.35) { 0 } else { rng.random_range(1..=6i64) });
        let cols_ok = raw.rows().into_iter().all(|c| c.iter().any(|&v| v > 0));
        let rows_ok = raw.columns().into_iter().all(|r| r.iter().any(|&v| v > 0));
        if !(cols_ok && rows_ok) {
            continue;
        }
        let total: i64 = raw.iter().sum();
        let entries = raw.mapv(|v| rat(v, total));
        return TransformationMatrix::new(entries).expect("normalized and nonempty");
    }
}

/// Random `k x l` matrix whose invariant-pair blocks all have rank one.
///
/// Columns and rows are dealt to `blocks` groups (each gets at least one);
/// inside a group the entries are `u_i v_j` with positive integer weights.
pub fn random_factorizable<R: Rng + ?Sized>(rng: &mut R, k: usize, l: usize, blocks: usize) -> TransformationMatrix {
    assert!(blocks >= 1 && blocks <= k.min(l));
    let deal = |rng: &mut R, count: usize| {
        let mut owner: Vec<usize> = (0..count).map(|i| if i < blocks { i } else { rng.random_range(0..blocks) }).collect();
        owner.shuffle(rng);
        owner
    };
    let col_owner = deal(rng, k);
    let row_owner = deal(rng, l);
    let u: Vec<i64> = (0..k).map(|_| rng.random_range(1..=4)).collect();
    let v: Vec<i64> = (0..l).map(|_| rng.random_range(1..=4)).collect();
    let w: Vec<i64> = (0..blocks).map(|_| rng.random_range(1..=3)).collect();
    let raw = Array2::from_shape_fn((k, l), |(i, j)| {
        if col_owner[i] == row_owner[j] {
            w[col_owner[i]] * u[i] * v[j]
        } else {
            0
        }
    });
    let total: i64 = raw.iter().sum();
    TransformationMatrix::new(raw.mapv(|x| rat(x, total))).expect("every row and column meets its block")
}
