//! Exact computation with self-similar bivariate copulas.
//!
//! A *transformation matrix* `A` (nonnegative, total mass one, no empty row or
//! column) acts on copulas by placing a mass-weighted, affinely scaled copy of
//! the input in every rectangle of the grid induced by its marginals. Iterating
//! that patching operator converges to an invariant copula `C_A` whose support
//! is a self-similar fractal.
//!
//! Everything in this crate works on *piecewise-uniform* copulas: doubly
//! stochastic measures whose density is constant on every cell of a rational
//! mesh. That class is closed under patching, the `*`-product, transposition
//! and convex combination, so every identity is checked with exact rational
//! equality rather than a floating-point tolerance.
//!
//! Modules:
//!
//! - [`tmatrix`]: validation, contraction factor, invariant-pair
//!   decomposition and rank-one factorization of transformation matrices.
//! - [`copula`]: the [`PatchedCopula`] value type with CDF evaluation,
//!   `*`-product, transpose, convex combination and exact distances.
//! - [`patch`]: the patching operator, its iterates and fixed-point driver.
//! - [`markov`]: Markov operators on step functions, indicator propagation,
//!   mesh-level sigma-algebra atoms and implicit-dependence witnesses.
//! - [`factorize`]: left/right complete-dependence factors of `C_A`.
//! - [`io`]: text formats, PGM and CSV rendering.
//!
//! ```
//! use fractal_copula::{fixtures, patch, PatchedCopula};
//!
//! let a2 = fixtures::a2();
//! let c = patch::iterate(&a2, &PatchedCopula::independence(), 2);
//! assert_eq!(c.x_cells(), 9);
//! assert_eq!(c.support_cells().len(), 25);
//! ```

pub mod copula;
pub mod error;
pub mod factorize;
pub mod fixtures;
pub mod io;
pub mod markov;
pub mod mesh;
pub mod patch;
pub mod sample;
pub mod tmatrix;

pub use copula::{PatchedCopula, SobolevDistance};
pub use error::{Axis, Error, Result};
pub use markov::{CellSet, Step, StepMap};
pub use tmatrix::{Block, Decomposition, DependenceKind, RankWitness, TransformationMatrix};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact arbitrary-precision fraction used for every computation.
pub type Rational = num_rational::BigRational;

/// Shorthand for `n/d`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Decimal approximation for display only.
pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Smallest rational `s` on the dyadic grid `2^-bits` with `s * s >= x`.
///
/// Used where a norm has to be reported without leaving exact arithmetic:
/// the result is a certified upper bound on `sqrt(x)`.
pub fn sqrt_upper(x: &Rational, bits: u32) -> Rational {
    assert!(!x.is_negative(), "square root of a negative number");
    let scale = BigInt::one() << bits;
    // Find the least integer m with (m / 2^bits)^2 >= x, i.e. m^2 >= x * 4^bits.
    let target = x * Rational::from_integer(&scale * &scale);
    let target = target.ceil().to_integer();
    if target.is_zero() {
        return Rational::zero();
    }
    let mut m = target.sqrt();
    if &m * &m < target {
        m += 1;
    }
    Rational::new(m, scale)
}

/// `floor(x + 1/2)` for nonnegative `x`.
pub(crate) fn round_half_up(x: &Rational) -> BigInt {
    let twice = x * Rational::from_integer(BigInt::from(2)) + Rational::one();
    twice.numer().div_floor(&(twice.denom() * BigInt::from(2)))
}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/transformation-matrices.md")]
    mod transformation_matrices {}
    #[doc = include_str!("../../../book/src/patched-copulas.md")]
    mod patched_copulas {}
    #[doc = include_str!("../../../book/src/patching.md")]
    mod patching {}
    #[doc = include_str!("../../../book/src/markov-operators.md")]
    mod markov_operators {}
    #[doc = include_str!("../../../book/src/factorization.md")]
    mod factorization {}
    #[doc = include_str!("../../../book/src/file-formats.md")]
    mod file_formats {}
}
