use fractal_copula::{io, markov, patch, rat, sample};
use fractal_copula::{DependenceKind, PatchedCopula, Rational, TransformationMatrix};
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn copula(seed: u64, m: usize, n: usize) -> PatchedCopula {
    sample::random_copula(&mut ChaCha8Rng::seed_from_u64(seed), m, n)
}

fn matrix(seed: u64, k: usize, l: usize) -> TransformationMatrix {
    sample::random_matrix(&mut ChaCha8Rng::seed_from_u64(seed), k, l)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn star_is_associative(seed in any::<u64>(), dims in prop::array::uniform6(1usize..4)) {
        let a = copula(seed, dims[0], dims[1]);
        let b = copula(seed ^ 1, dims[2], dims[3]);
        let c = copula(seed ^ 2, dims[4], dims[5]);
        prop_assert!(a.star(&b).star(&c).same_measure(&a.star(&b.star(&c))));
    }

    #[test]
    fn independence_is_null(seed in any::<u64>(), m in 1usize..5, n in 1usize..5) {
        let c = copula(seed, m, n);
        let pi = PatchedCopula::independence();
        prop_assert!(c.star(&pi).same_measure(&pi));
        prop_assert!(pi.star(&c).same_measure(&pi));
    }

    #[test]
    fn transpose_reverses_products(seed in any::<u64>(), dims in prop::array::uniform4(1usize..5)) {
        let a = copula(seed, dims[0], dims[1]);
        let b = copula(seed ^ 7, dims[2], dims[3]);
        prop_assert_eq!(a.transpose().transpose(), a.clone());
        prop_assert!(a.star(&b).transpose().same_measure(&b.transpose().star(&a.transpose())));
    }

    #[test]
    fn patching_scales_sobolev_distance(seed in any::<u64>(), k in 1usize..4, l in 1usize..4, m in 1usize..5, n in 1usize..5) {
        let a = matrix(seed, k, l);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 3);
        let xb = sample::random_partition(&mut rng, m);
        let yb = sample::random_partition(&mut rng, n);
        let c = sample::random_copula_on(&mut rng, &xb, &yb);
        let d = sample::random_copula_on(&mut rng, &xb, &yb);
        let (s1, s2) = a.sobolev_scalings();
        let base = c.sobolev_distance(&d);
        let patched = patch::apply(&a, &c).sobolev_distance(&patch::apply(&a, &d));
        prop_assert_eq!(patched.d1sq, s1 * base.d1sq);
        prop_assert_eq!(patched.d2sq, s2 * base.d2sq);
    }

    #[test]
    fn contraction_below_one(seed in any::<u64>(), k in 2usize..7, l in 2usize..7) {
        let r2 = matrix(seed, k, l).contraction_factor();
        prop_assert!(r2 < Rational::one() && r2 > Rational::zero());
    }

    #[test]
    fn patching_yields_copulas(seed in any::<u64>(), k in 1usize..4, l in 1usize..4) {
        let a = matrix(seed, k, l);
        let c = copula(seed ^ 5, 2, 3);
        let p = patch::apply(&a, &c);
        prop_assert!(p.check_marginals().is_ok());
        prop_assert_eq!(p.x_cells(), 2 * k);
        prop_assert_eq!(p.y_cells(), 3 * l);
        prop_assert!(patch::apply(&a, &PatchedCopula::independence()).same_measure(&patch::from_matrix(&a)));
    }

    #[test]
    fn decomposition_partitions_the_matrix(seed in any::<u64>(), k in 1usize..7, l in 1usize..7) {
        let a = matrix(seed, k, l);
        let d = a.invariant_pairs();
        let mut cols: Vec<usize> = d.blocks().iter().flat_map(|b| b.columns.clone()).collect();
        let mut rows: Vec<usize> = d.blocks().iter().flat_map(|b| b.rows.clone()).collect();
        cols.sort();
        rows.sort();
        prop_assert_eq!(cols, (0..k).collect::<Vec<_>>());
        prop_assert_eq!(rows, (0..l).collect::<Vec<_>>());
        prop_assert_eq!(d.blocks().iter().map(|b| b.mass.clone()).sum::<Rational>(), Rational::one());
        for ((i, j), v) in a.entries().indexed_iter() {
            if !v.is_zero() {
                prop_assert_eq!(d.column_block(i), d.row_block(j));
            }
        }
        for b in d.blocks() {
            let cmass: Rational = b.columns.iter().map(|&i| a.dp(i)).sum();
            let rmass: Rational = b.rows.iter().map(|&j| a.dq(j)).sum();
            prop_assert_eq!(&cmass, &b.mass);
            prop_assert_eq!(&rmass, &b.mass);
        }
    }

    #[test]
    fn rank_one_blocks_factor(seed in any::<u64>(), k in 1usize..6, l in 1usize..6, blocks in 1usize..4) {
        let blocks = blocks.min(k).min(l);
        let a = sample::random_factorizable(&mut ChaCha8Rng::seed_from_u64(seed), k, l, blocks);
        let d = a.invariant_pairs();
        let (left, right) = d.rank_one_factorize().unwrap();
        prop_assert_eq!(&d.reconstruct(&left, &right), a.entries());
        prop_assert!(matches!(left.dependence_kind(), DependenceKind::Left | DependenceKind::Both));
        prop_assert!(matches!(right.dependence_kind(), DependenceKind::Right | DependenceKind::Both));
        let c1 = copula(seed ^ 11, 2, 2);
        let c2 = copula(seed ^ 12, 2, 3);
        prop_assert!(fractal_copula::factorize::product_identity_check(&a, &left, &right, &c1, &c2));
    }

    #[test]
    fn atoms_are_transported(seed in any::<u64>(), k in 2usize..4, blocks in 1usize..3) {
        let a = sample::random_factorizable(&mut ChaCha8Rng::seed_from_u64(seed), k, k, blocks);
        let c = patch::iterate(&a, &PatchedCopula::independence(), 2);
        let atoms = markov::sigma_atoms(&c);
        prop_assert_eq!(atoms.len(), a.invariant_pairs().len().pow(2));
        for atom in atoms {
            prop_assert_eq!(markov::indicator_check(&c, &atom.y).unwrap(), Some(atom.x.clone()));
        }
    }

    #[test]
    fn text_formats_round_trip(seed in any::<u64>(), k in 1usize..5, l in 1usize..5) {
        let a = matrix(seed, k, l);
        let text = io::write_matrix(&a);
        prop_assert_eq!(io::parse_matrix(&text).unwrap(), a);
        let c = copula(seed, k, l);
        prop_assert_eq!(io::parse_copula(&io::write_copula(&c)).unwrap(), c);
    }

    #[test]
    fn distances_are_symmetric_and_vanish_on_equal_measures(seed in any::<u64>(), m in 1usize..5, n in 1usize..5) {
        let c = copula(seed, m, n);
        let d = copula(seed ^ 9, n, m);
        prop_assert_eq!(c.sobolev_distance(&d).total(), d.sobolev_distance(&c).total());
        prop_assert_eq!(c.sup_distance(&d), d.sup_distance(&c));
        let fine = c.refine(&fractal_copula::mesh::merge(c.x_breaks(), d.x_breaks()), c.y_breaks()).unwrap();
        prop_assert!(c.sobolev_distance(&fine).total().is_zero());
        prop_assert!(c.sup_distance(&fine).is_zero());
        prop_assert!(c.sup_distance(&d) <= rat(1, 2));
    }
}
