//! The worked example matrices, shipped as text files under `fixtures/`.
//!
//! `a3` carries center mass `3/10`. With the center at `1/3` the entries sum
//! to `31/30`; the factor matrices `L3`, `R3` (each of total mass one, with
//! center entry `3/10`) are only consistent with `3/10`. The uncorrected rows
//! are available from [`a3_printed_rows`].

use crate::io;
use crate::{Rational, TransformationMatrix};

pub const A1: &str = include_str!("../fixtures/a1.txt");
pub const A2: &str = include_str!("../fixtures/a2.txt");
pub const A3: &str = include_str!("../fixtures/a3.txt");
pub const A3_PRINTED: &str = include_str!("../fixtures/a3_printed.txt");
pub const L2: &str = include_str!("../fixtures/l2.txt");
pub const L3: &str = include_str!("../fixtures/l3.txt");
pub const R3: &str = include_str!("../fixtures/r3.txt");
pub const PI_LIKE: &str = include_str!("../fixtures/pi_like.txt");
pub const IDENTITY: &str = include_str!("../fixtures/identity.txt");

fn load(text: &str) -> TransformationMatrix {
    io::parse_matrix(text).expect("bundled fixture is valid")
}

/// `K0 + K1`: symmetric, two invariant pairs, outer block of rank two.
pub fn a1() -> TransformationMatrix {
    load(A1)
}

/// `K0 + K2`: symmetric, two invariant pairs of rank one.
pub fn a2() -> TransformationMatrix {
    load(A2)
}

/// `K0 + K3` with center mass `3/10`: non-symmetric, rank-one blocks.
pub fn a3() -> TransformationMatrix {
    load(A3)
}

pub fn a3_printed_rows() -> Vec<Vec<Rational>> {
    io::parse_rows(A3_PRINTED).expect("bundled fixture parses")
}

/// Left factor of `a2`; the right factor is its transpose.
pub fn l2() -> TransformationMatrix {
    load(L2)
}

pub fn l3() -> TransformationMatrix {
    load(L3)
}

pub fn r3() -> TransformationMatrix {
    load(R3)
}

/// Uniform 2x2 matrix; a single invariant pair.
pub fn pi_like() -> TransformationMatrix {
    load(PI_LIKE)
}

/// The 1x1 matrix `[1]`, which fixes every copula.
pub fn identity() -> TransformationMatrix {
    load(IDENTITY)
}
