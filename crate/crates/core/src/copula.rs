//! Piecewise-uniform copulas.
//!
//! A [`PatchedCopula`] is a doubly stochastic measure on the unit square with
//! constant density on every cell of a rectangular rational mesh. The same
//! value is the copula `C`, its measure `mu_C`, and the kernel of the Markov
//! operator `T_C`. Mass is indexed `mass[[i, j]]` with `i` the `u`-cell from
//! the left and `j` the `v`-cell from the bottom.

use ndarray::Array2;
use num_traits::{One, Signed, Zero};

use crate::error::{Axis, Error, Result};
use crate::mesh;
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatchedCopula {
    x_breaks: Vec<Rational>,
    y_breaks: Vec<Rational>,
    mass: Array2<Rational>,
}

/// Squared distances in the modified Sobolev norm, split by partial
/// derivative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SobolevDistance {
    /// `int int |d/du (C - D)|^2`
    pub d1sq: Rational,
    /// `int int |d/dv (C - D)|^2`
    pub d2sq: Rational,
}

impl SobolevDistance {
    /// `d1sq + d2sq`, the squared modified Sobolev distance.
    pub fn total(&self) -> Rational {
        &self.d1sq + &self.d2sq
    }
}

impl PatchedCopula {
    pub fn from_parts(x_breaks: Vec<Rational>, y_breaks: Vec<Rational>, mass: Array2<Rational>) -> Result<Self> {
        mesh::check_partition(&x_breaks)?;
        mesh::check_partition(&y_breaks)?;
        let c = Self::from_parts_unchecked(x_breaks, y_breaks, mass)?;
        c.check_marginals()?;
        Ok(c)
    }

    /// Shape check only; marginals are trusted.
    pub(crate) fn from_parts_unchecked(
        x_breaks: Vec<Rational>,
        y_breaks: Vec<Rational>,
        mass: Array2<Rational>,
    ) -> Result<Self> {
        let want = (x_breaks.len() - 1, y_breaks.len() - 1);
        if mass.dim() != want {
            return Err(Error::NotAPartition(format!(
                "mass matrix is {:?} but the meshes have {:?} cells",
                mass.dim(),
                want
            )));
        }
        Ok(Self {
            x_breaks,
            y_breaks,
            mass,
        })
    }

    /// Verifies nonnegativity and uniform marginals.
    pub fn check_marginals(&self) -> Result<()> {
        for ((i, j), v) in self.mass.indexed_iter() {
            if v.is_negative() {
                return Err(Error::NegativeEntry { i, j, value: v.clone() });
            }
        }
        for i in 0..self.x_cells() {
            let found: Rational = self.mass.row(i).iter().sum();
            let expected = self.dx(i);
            if found != expected {
                return Err(Error::BadMarginal {
                    axis: Axis::X,
                    index: i,
                    found: Box::new(found),
                    expected: Box::new(expected),
                });
            }
        }
        for j in 0..self.y_cells() {
            let found: Rational = self.mass.column(j).iter().sum();
            let expected = self.dy(j);
            if found != expected {
                return Err(Error::BadMarginal {
                    axis: Axis::Y,
                    index: j,
                    found: Box::new(found),
                    expected: Box::new(expected),
                });
            }
        }
        Ok(())
    }

    /// The independence copula `Pi(u, v) = uv`: one cell of mass one.
    pub fn independence() -> Self {
        Self {
            x_breaks: mesh::uniform(1),
            y_breaks: mesh::uniform(1),
            mass: Array2::from_elem((1, 1), Rational::one()),
        }
    }

    /// `M_n`: mass `1/n` on each diagonal cell of the uniform `n x n` mesh.
    pub fn diagonal(n: usize) -> Self {
        Self::permutation_grid(n, |i| i)
    }

    /// `W_n`: mass `1/n` on each antidiagonal cell of the uniform `n x n` mesh.
    pub fn antidiagonal(n: usize) -> Self {
        Self::permutation_grid(n, |i| n - 1 - i)
    }

    fn permutation_grid(n: usize, sigma: impl Fn(usize) -> usize) -> Self {
        let w = Rational::new(1.into(), n.into());
        let mut mass = Array2::from_elem((n, n), Rational::zero());
        for i in 0..n {
            mass[[i, sigma(i)]] = w.clone();
        }
        Self {
            x_breaks: mesh::uniform(n),
            y_breaks: mesh::uniform(n),
            mass,
        }
    }

    pub fn x_breaks(&self) -> &[Rational] {
        &self.x_breaks
    }

    pub fn y_breaks(&self) -> &[Rational] {
        &self.y_breaks
    }

    pub fn mass(&self) -> &Array2<Rational> {
        &self.mass
    }

    pub fn x_cells(&self) -> usize {
        self.mass.nrows()
    }

    pub fn y_cells(&self) -> usize {
        self.mass.ncols()
    }

    pub fn dx(&self, i: usize) -> Rational {
        &self.x_breaks[i + 1] - &self.x_breaks[i]
    }

    pub fn dy(&self, j: usize) -> Rational {
        &self.y_breaks[j + 1] - &self.y_breaks[j]
    }

    /// Density of `mu_C` on cell `(i, j)`.
    pub fn density(&self, i: usize, j: usize) -> Rational {
        &self.mass[[i, j]] / (self.dx(i) * self.dy(j))
    }

    /// Cells carrying positive mass, in row-major `(i, j)` order.
    pub fn support_cells(&self) -> Vec<(usize, usize)> {
        self.mass
            .indexed_iter()
            .filter(|(_, m)| !m.is_zero())
            .map(|(ij, _)| ij)
            .collect()
    }

    /// `C(u, v)`, exact.
    pub fn cdf(&self, u: &Rational, v: &Rational) -> Result<Rational> {
        for t in [u, v] {
            if t.is_negative() || *t > Rational::one() {
                return Err(Error::OutOfRange(t.clone()));
            }
        }
        let fx = cell_fractions(&self.x_breaks, u);
        let fy = cell_fractions(&self.y_breaks, v);
        let mut total = Rational::zero();
        for (i, wx) in fx.iter().enumerate() {
            if wx.is_zero() {
                continue;
            }
            for (j, wy) in fy.iter().enumerate() {
                let m = &self.mass[[i, j]];
                if wy.is_zero() || m.is_zero() {
                    continue;
                }
                total += m * wx * wy;
            }
        }
        Ok(total)
    }

    /// `C` at every mesh point: entry `[[a, b]]` is `C(x_a, y_b)`.
    pub fn cdf_grid(&self) -> Array2<Rational> {
        let (m, n) = self.mass.dim();
        let mut g = Array2::from_elem((m + 1, n + 1), Rational::zero());
        for i in 0..m {
            for j in 0..n {
                let v = &g[[i, j + 1]] + &g[[i + 1, j]] - &g[[i, j]] + &self.mass[[i, j]];
                g[[i + 1, j + 1]] = v;
            }
        }
        g
    }

    /// The same measure on finer meshes. Both meshes must contain the
    /// current breakpoints.
    pub fn refine(&self, x_breaks: &[Rational], y_breaks: &[Rational]) -> Result<Self> {
        if x_breaks == self.x_breaks.as_slice() && y_breaks == self.y_breaks.as_slice() {
            return Ok(self.clone());
        }
        let rx = mesh::refinement(&self.x_breaks, x_breaks)?;
        let ry = mesh::refinement(&self.y_breaks, y_breaks)?;
        let mut mass = Array2::from_elem((rx.len(), ry.len()), Rational::zero());
        for (a, (pi, fx)) in rx.iter().enumerate() {
            for (b, (pj, fy)) in ry.iter().enumerate() {
                let m = &self.mass[[*pi, *pj]];
                if !m.is_zero() {
                    mass[[a, b]] = m * fx * fy;
                }
            }
        }
        Ok(Self {
            x_breaks: x_breaks.to_vec(),
            y_breaks: y_breaks.to_vec(),
            mass,
        })
    }

    /// Both copulas on the union of their meshes.
    pub fn common_refinement(&self, other: &Self) -> (Self, Self) {
        let xb = mesh::merge(&self.x_breaks, &other.x_breaks);
        let yb = mesh::merge(&self.y_breaks, &other.y_breaks);
        let a = self.refine(&xb, &yb).expect("merged mesh refines both");
        let b = other.refine(&xb, &yb).expect("merged mesh refines both");
        (a, b)
    }

    /// Equality as measures, regardless of how finely each is meshed.
    pub fn same_measure(&self, other: &Self) -> bool {
        if self.x_breaks == other.x_breaks && self.y_breaks == other.y_breaks {
            return self.mass == other.mass;
        }
        let (a, b) = self.common_refinement(other);
        a.mass == b.mass
    }

    /// The `*`-product, `(C*D)(u,v) = int dC/dt(u,t) dD/dt(t,v) dt`.
    ///
    /// The result lives on `self`'s `u`-mesh and `other`'s `v`-mesh. With `t`
    /// running over the union of `self`'s `v`-mesh and `other`'s `u`-mesh,
    /// cell `(i, k)` receives `sum_t m_C(i,t) m_D(t,k) / dt`.
    pub fn star(&self, other: &Self) -> Self {
        let t = mesh::merge(&self.y_breaks, &other.x_breaks);
        let left = self.refine(&self.x_breaks, &t).expect("merged mesh refines");
        let right = other.refine(&t, &other.y_breaks).expect("merged mesh refines");
        let dt = mesh::widths(&t);
        // Nonzero entries of each row of the right factor, pre-divided by dt.
        let rows: Vec<Vec<(usize, Rational)>> = (0..dt.len())
            .map(|s| {
                right
                    .mass
                    .row(s)
                    .indexed_iter()
                    .filter(|(_, m)| !m.is_zero())
                    .map(|(k, m)| (k, m / &dt[s]))
                    .collect()
            })
            .collect();
        let (m, n) = (left.x_cells(), right.y_cells());
        let mut mass = Array2::from_elem((m, n), Rational::zero());
        for i in 0..m {
            for (s, a) in left.mass.row(i).indexed_iter() {
                if a.is_zero() {
                    continue;
                }
                for (k, b) in &rows[s] {
                    mass[[i, *k]] += a * b;
                }
            }
        }
        Self {
            x_breaks: self.x_breaks.clone(),
            y_breaks: other.y_breaks.clone(),
            mass,
        }
    }

    /// `C^t(u, v) = C(v, u)`.
    pub fn transpose(&self) -> Self {
        Self {
            x_breaks: self.y_breaks.clone(),
            y_breaks: self.x_breaks.clone(),
            mass: self.mass.t().to_owned(),
        }
    }

    /// `alpha C + (1 - alpha) D` on the common refinement.
    pub fn convex(alpha: &Rational, c: &Self, d: &Self) -> Result<Self> {
        if alpha.is_negative() || *alpha > Rational::one() {
            return Err(Error::OutOfRange(alpha.clone()));
        }
        let (a, b) = c.common_refinement(d);
        let beta = Rational::one() - alpha;
        let mass = Array2::from_shape_fn(a.mass.dim(), |ij| alpha * &a.mass[ij] + &beta * &b.mass[ij]);
        Ok(Self { mass, ..a })
    }

    /// Exact squared modified Sobolev distance between two copulas.
    ///
    /// On the common mesh, `d/du (C - D)` is constant in `u` and linear in
    /// `v` within each cell, running from `a` at the bottom edge to `b` at
    /// the top. Its squared integral over the cell is
    /// `dx dy (a^2 + ab + b^2) / 3`; the `d/dv` part is the mirror image.
    pub fn sobolev_distance(&self, other: &Self) -> SobolevDistance {
        let (a, b) = self.common_refinement(other);
        let delta = &a.mass - &b.mass;
        let dx = mesh::widths(&a.x_breaks);
        let dy = mesh::widths(&a.y_breaks);
        let three = Rational::from_integer(3.into());
        let d1sq = directional_energy(&delta, &dx, &dy) / &three;
        let d2sq = directional_energy(&delta.t().to_owned(), &dy, &dx) / &three;
        SobolevDistance { d1sq, d2sq }
    }

    /// `max |C - D|`, attained at a point of the merged mesh.
    pub fn sup_distance(&self, other: &Self) -> Rational {
        let (a, b) = self.common_refinement(other);
        let (ga, gb) = (a.cdf_grid(), b.cdf_grid());
        ga.iter()
            .zip(gb.iter())
            .map(|(x, y)| (x - y).abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

/// `sum over cells of (w_i / dx_i) * (s^2 + s(s+d) + (s+d)^2)` where `s` is
/// the running sum of `delta` along the second index. Multiply by `1/3` for
/// the squared integral of the first partial derivative.
fn directional_energy(delta: &Array2<Rational>, dx: &[Rational], dy: &[Rational]) -> Rational {
    let mut total = Rational::zero();
    for (i, row) in delta.rows().into_iter().enumerate() {
        let mut s = Rational::zero();
        let mut acc = Rational::zero();
        for (j, d) in row.iter().enumerate() {
            let next = &s + d;
            if !(s.is_zero() && next.is_zero()) {
                acc += (&s * &s + &s * &next + &next * &next) * &dy[j];
            }
            s = next;
        }
        if !acc.is_zero() {
            total += acc / &dx[i];
        }
    }
    total
}

/// Fraction of each cell lying below `t`: `clamp((t - b_i) / w_i, 0, 1)`.
fn cell_fractions(breaks: &[Rational], t: &Rational) -> Vec<Rational> {
    breaks
        .windows(2)
        .map(|w| {
            if *t <= w[0] {
                Rational::zero()
            } else if *t >= w[1] {
                Rational::one()
            } else {
                (t - &w[0]) / (&w[1] - &w[0])
            }
        })
        .collect()
}
