//! Transformation matrices.
//!
//! Entries are stored as `a[[i, j]]` with `i` the column counted from the left
//! and `j` the row counted from the *bottom*, both zero based. This is the
//! orientation of the unit square: column `i` spans `[p_i, p_{i+1}]` on the
//! `u` axis and row `j` spans `[q_j, q_{j+1}]` on the `v` axis. Use
//! [`TransformationMatrix::from_printed_rows`] to build one from a matrix
//! written the usual way, top row first.

use ndarray::Array2;
use num_traits::{One, Signed, Zero};

use crate::error::{Axis, Error, Result};
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformationMatrix {
    entries: Array2<Rational>,
    p: Vec<Rational>,
    q: Vec<Rational>,
}

/// Complete-dependence shape of a transformation matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DependenceKind {
    /// Every column has exactly one nonzero entry.
    Left,
    /// Every row has exactly one nonzero entry.
    Right,
    /// Both: a weighted permutation.
    Both,
    Neither,
}

impl TransformationMatrix {
    /// Validates `entries` (indexed `[[column, row_from_bottom]]`).
    pub fn new(entries: Array2<Rational>) -> Result<Self> {
        let (k, l) = entries.dim();
        if k == 0 || l == 0 {
            return Err(Error::BadShape);
        }
        for ((i, j), v) in entries.indexed_iter() {
            if v.is_negative() {
                return Err(Error::NegativeEntry { i, j, value: v.clone() });
            }
        }
        let total: Rational = entries.iter().sum();
        if !total.is_one() {
            return Err(Error::MassNotOne { total });
        }
        let col_sums: Vec<Rational> = (0..k).map(|i| entries.row(i).iter().sum()).collect();
        let row_sums: Vec<Rational> = (0..l).map(|j| entries.column(j).iter().sum()).collect();
        if let Some(i) = col_sums.iter().position(Zero::is_zero) {
            return Err(Error::EmptyRowOrColumn { axis: Axis::X, index: i });
        }
        if let Some(j) = row_sums.iter().position(Zero::is_zero) {
            return Err(Error::EmptyRowOrColumn { axis: Axis::Y, index: j });
        }
        Ok(Self {
            p: cumulative(&col_sums),
            q: cumulative(&row_sums),
            entries,
        })
    }

    /// Builds from rows as printed: `rows[0]` is the top row.
    pub fn from_printed_rows(rows: &[Vec<Rational>]) -> Result<Self> {
        let l = rows.len();
        let k = rows.first().map_or(0, Vec::len);
        if l == 0 || k == 0 || rows.iter().any(|r| r.len() != k) {
            return Err(Error::BadShape);
        }
        let entries = Array2::from_shape_fn((k, l), |(i, j)| rows[l - 1 - j][i].clone());
        Self::new(entries)
    }

    /// Rows in printed order, top row first.
    pub fn printed_rows(&self) -> Vec<Vec<Rational>> {
        let (k, l) = self.entries.dim();
        (0..l)
            .rev()
            .map(|j| (0..k).map(|i| self.entries[[i, j]].clone()).collect())
            .collect()
    }

    /// Number of columns `k`.
    pub fn columns(&self) -> usize {
        self.entries.nrows()
    }

    /// Number of rows `l`.
    pub fn rows(&self) -> usize {
        self.entries.ncols()
    }

    pub fn entry(&self, i: usize, j: usize) -> &Rational {
        &self.entries[[i, j]]
    }

    pub fn entries(&self) -> &Array2<Rational> {
        &self.entries
    }

    /// Column breakpoints `p_0 = 0 < ... < p_k = 1`.
    pub fn p(&self) -> &[Rational] {
        &self.p
    }

    /// Row breakpoints `q_0 = 0 < ... < q_l = 1`.
    pub fn q(&self) -> &[Rational] {
        &self.q
    }

    /// Width of column `i`, equal to its mass.
    pub fn dp(&self, i: usize) -> Rational {
        &self.p[i + 1] - &self.p[i]
    }

    /// Height of row `j`, equal to its mass.
    pub fn dq(&self, j: usize) -> Rational {
        &self.q[j + 1] - &self.q[j]
    }

    /// The two scaling sums `(sum a_ij^2 dq_j / dp_i, sum a_ij^2 dp_i / dq_j)`.
    ///
    /// Patching multiplies the squared `L^2` norm of `d/du` of a difference of
    /// copulas by the first and that of `d/dv` by the second, exactly.
    pub fn sobolev_scalings(&self) -> (Rational, Rational) {
        let mut s1 = Rational::zero();
        let mut s2 = Rational::zero();
        let dp: Vec<Rational> = (0..self.columns()).map(|i| self.dp(i)).collect();
        let dq: Vec<Rational> = (0..self.rows()).map(|j| self.dq(j)).collect();
        for ((i, j), a) in self.entries.indexed_iter() {
            if a.is_zero() {
                continue;
            }
            let sq = a * a;
            s1 += &sq * &dq[j] / &dp[i];
            s2 += sq * &dp[i] / &dq[j];
        }
        (s1, s2)
    }

    /// Squared Lipschitz constant `r^2` of the patching operator in the
    /// modified Sobolev norm. Strictly below one when `k, l >= 2`.
    pub fn contraction_factor(&self) -> Rational {
        let (s1, s2) = self.sobolev_scalings();
        s1.max(s2)
    }

    /// Finest decomposition into disjoint invariant pairs: the connected
    /// components of the bipartite graph joining column `i` and row `j`
    /// whenever `a_ij > 0`. Blocks are ordered by their smallest column.
    pub fn invariant_pairs(&self) -> Decomposition {
        let (k, l) = self.entries.dim();
        let mut uf = UnionFind::new(k + l);
        for ((i, j), a) in self.entries.indexed_iter() {
            if !a.is_zero() {
                uf.union(i, k + j);
            }
        }
        let mut label = vec![usize::MAX; k + l];
        let mut blocks: Vec<Block> = Vec::new();
        for i in 0..k {
            let root = uf.find(i);
            if label[root] == usize::MAX {
                label[root] = blocks.len();
                blocks.push(Block {
                    columns: Vec::new(),
                    rows: Vec::new(),
                    mass: Rational::zero(),
                });
            }
            let b = &mut blocks[label[root]];
            b.columns.push(i);
            b.mass += self.dp(i);
        }
        for j in 0..l {
            // Every row has a positive entry, so its root was labelled above.
            let b = label[uf.find(k + j)];
            blocks[b].rows.push(j);
        }
        Decomposition {
            source: self.clone(),
            blocks,
        }
    }

    pub fn dependence_kind(&self) -> DependenceKind {
        let single = |count: usize| count == 1;
        let left = self
            .entries
            .rows()
            .into_iter()
            .all(|col| single(col.iter().filter(|a| !a.is_zero()).count()));
        let right = self
            .entries
            .columns()
            .into_iter()
            .all(|row| single(row.iter().filter(|a| !a.is_zero()).count()));
        match (left, right) {
            (true, true) => DependenceKind::Both,
            (true, false) => DependenceKind::Left,
            (false, true) => DependenceKind::Right,
            (false, false) => DependenceKind::Neither,
        }
    }

    /// Matrix with columns and rows swapped; patching with it transposes.
    pub fn transpose(&self) -> TransformationMatrix {
        TransformationMatrix {
            entries: self.entries.t().to_owned(),
            p: self.q.clone(),
            q: self.p.clone(),
        }
    }
}

fn cumulative(widths: &[Rational]) -> Vec<Rational> {
    let mut out = Vec::with_capacity(widths.len() + 1);
    let mut acc = Rational::zero();
    out.push(acc.clone());
    for w in widths {
        acc += w;
        out.push(acc.clone());
    }
    out
}

/// Column pair, row pair and value of a nonzero 2x2 minor.
pub type RankWitness = ((usize, usize), (usize, usize), Rational);

/// One invariant pair `(I_n, J_n)` of a decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    /// Column indices `I_n`, ascending.
    pub columns: Vec<usize>,
    /// Row indices `J_n`, ascending.
    pub rows: Vec<usize>,
    /// `|A_n|`, the total mass of the block.
    pub mass: Rational,
}

/// Partition of a transformation matrix into disjoint invariant pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    source: TransformationMatrix,
    blocks: Vec<Block>,
}

impl Decomposition {
    pub fn source(&self) -> &TransformationMatrix {
        &self.source
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Block index owning column `i`.
    pub fn column_block(&self, i: usize) -> usize {
        self.blocks
            .iter()
            .position(|b| b.columns.binary_search(&i).is_ok())
            .expect("column belongs to a block")
    }

    /// Block index owning row `j`.
    pub fn row_block(&self, j: usize) -> usize {
        self.blocks
            .iter()
            .position(|b| b.rows.binary_search(&j).is_ok())
            .expect("row belongs to a block")
    }

    /// `A_n`: the source entries restricted to block `n`, zero elsewhere.
    pub fn block_matrix(&self, n: usize) -> Array2<Rational> {
        let b = &self.blocks[n];
        let mut out = Array2::from_elem(self.source.entries.dim(), Rational::zero());
        for &i in &b.columns {
            for &j in &b.rows {
                out[[i, j]] = self.source.entries[[i, j]].clone();
            }
        }
        out
    }

    /// First nonzero 2x2 minor of block `n`, if any.
    pub fn block_rank_witness(&self, n: usize) -> Option<RankWitness> {
        let b = &self.blocks[n];
        let a = &self.source.entries;
        for (ci, &i1) in b.columns.iter().enumerate() {
            for &i2 in &b.columns[ci + 1..] {
                for (rj, &j1) in b.rows.iter().enumerate() {
                    for &j2 in &b.rows[rj + 1..] {
                        let minor = &a[[i1, j1]] * &a[[i2, j2]] - &a[[i1, j2]] * &a[[i2, j1]];
                        if !minor.is_zero() {
                            return Some(((i1, i2), (j1, j2), minor));
                        }
                    }
                }
            }
        }
        None
    }

    /// Rank of block `n`, by exact Gaussian elimination.
    pub fn block_rank(&self, n: usize) -> usize {
        let b = &self.blocks[n];
        let mut rows: Vec<Vec<Rational>> = b
            .columns
            .iter()
            .map(|&i| b.rows.iter().map(|&j| self.source.entries[[i, j]].clone()).collect())
            .collect();
        let width = b.rows.len();
        let mut rank = 0;
        for col in 0..width {
            let Some(p) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
                continue;
            };
            rows.swap(rank, p);
            let (top, rest) = rows.split_at_mut(rank + 1);
            let pivot = &top[rank];
            for row in rest.iter_mut().filter(|row| !row[col].is_zero()) {
                let factor = &row[col] / &pivot[col];
                for (x, y) in row.iter_mut().zip(pivot).skip(col) {
                    *x -= &factor * y;
                }
            }
            rank += 1;
        }
        rank
    }

    /// Splits every rank-one block as `A_n = L_n R_n / |A_n|`.
    ///
    /// Returns `L` (k columns, N rows) holding the column sums of each block
    /// in row `n`, and `R` (N columns, l rows) holding the row sums of each
    /// block in column `n`.
    pub fn rank_one_factorize(&self) -> Result<(TransformationMatrix, TransformationMatrix)> {
        let k = self.source.columns();
        let l = self.source.rows();
        let nb = self.blocks.len();
        for n in 0..nb {
            if let Some((columns, rows, value)) = self.block_rank_witness(n) {
                return Err(Error::RankExceedsOne {
                    block: n,
                    columns,
                    rows,
                    value,
                });
            }
        }
        let mut left = Array2::from_elem((k, nb), Rational::zero());
        let mut right = Array2::from_elem((nb, l), Rational::zero());
        for (n, b) in self.blocks.iter().enumerate() {
            for &i in &b.columns {
                left[[i, n]] = self.source.dp(i);
            }
            for &j in &b.rows {
                right[[n, j]] = self.source.dq(j);
            }
        }
        Ok((TransformationMatrix::new(left)?, TransformationMatrix::new(right)?))
    }

    /// `sum_n lambda_in rho_nj / |A_n|`, the matrix rebuilt from factors.
    pub fn reconstruct(&self, left: &TransformationMatrix, right: &TransformationMatrix) -> Array2<Rational> {
        let k = left.columns();
        let l = right.rows();
        Array2::from_shape_fn((k, l), |(i, j)| {
            self.blocks
                .iter()
                .enumerate()
                .map(|(n, b)| left.entry(i, n) * right.entry(n, j) / &b.mass)
                .sum()
        })
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

pub(crate) fn components(nx: usize, ny: usize, edges: impl Iterator<Item = (usize, usize)>) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut uf = UnionFind::new(nx + ny);
    for (i, j) in edges {
        uf.union(i, nx + j);
    }
    let mut label = vec![usize::MAX; nx + ny];
    let mut out: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    for v in 0..nx + ny {
        let root = uf.find(v);
        if label[root] == usize::MAX {
            label[root] = out.len();
            out.push((Vec::new(), Vec::new()));
        }
        let c = &mut out[label[root]];
        if v < nx {
            c.0.push(v);
        } else {
            c.1.push(v - nx);
        }
    }
    out
}
