use dyapack_core::dyadic_index::DyadicPattern;
use dyapack_core::dyadic_matrix::{DyadicMatrix, FlopCounter};
use dyapack_core::factorization::{
    factor_r, invert, sequential_orthogonalize, solve, FactorOptions, FastPath, TAU_ORTH,
};
use dyapack_core::generators::{spd_block_tridiagonal, spd_dyadic};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn general() -> FactorOptions {
    FactorOptions { fast_path: FastPath::Off, trace: false }
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn sweep_orthogonalizes(seed in any::<u64>(), n in 1u32..=5, k in 1usize..=4) {
        let s = spd_dyadic(n, k, seed, Some(1e4)).unwrap().sigma;
        let f = sequential_orthogonalize(&s, FactorOptions::default()).unwrap();
        prop_assert!(f.residual(&s).unwrap() <= TAU_ORTH);
        prop_assert_eq!(f.p.pattern(), DyadicPattern::vertical(n, k).unwrap());
        let pd = f.p.to_dense();
        let support = f.p.support(0.0);
        prop_assert!(support.is_subset_of(&DyadicPattern::vertical(n, k).unwrap().materialize()));
        // Column block b of P is orthogonal in the Σ inner product to every other column block.
        let g = pd.transpose() * s.to_dense() * &pd;
        prop_assert!((g - DMatrix::identity(s.dim(), s.dim())).amax() <= TAU_ORTH);
    }

    #[test]
    fn factor_r_inverts_p(seed in any::<u64>(), n in 1u32..=4, k in 1usize..=3) {
        let s = spd_dyadic(n, k, seed, Some(1e4)).unwrap().sigma;
        let f = sequential_orthogonalize(&s, FactorOptions::default()).unwrap();
        let r = factor_r(&s, &f.p).unwrap().to_dense();
        let d = s.dim();
        prop_assert!((&r * f.p.to_dense() - DMatrix::identity(d, d)).amax() <= 1e-8);
        prop_assert!((r.transpose() * &r - s.to_dense()).amax() <= 1e-8 * s.max_abs().max(1.0));
    }

    #[test]
    fn band_path_agrees_with_general(seed in any::<u64>(), n in 1u32..=6, k in 1usize..=3) {
        let s = spd_block_tridiagonal(n, k, seed).unwrap();
        let fast = sequential_orthogonalize(&s, FactorOptions { fast_path: FastPath::On, trace: false }).unwrap();
        let slow = sequential_orthogonalize(&s, general()).unwrap();
        prop_assert!(fast.fast_path);
        prop_assert!(!slow.fast_path);
        prop_assert!((fast.p.to_dense() - slow.p.to_dense()).amax() <= 1e-10);
        prop_assert!(fast.flops.block_multiplies <= slow.flops.block_multiplies);
    }
}

#[test]
fn intermediates_stay_on_their_patterns() {
    use dyapack_core::dyadic_index::{DerivedKind, DerivedPattern};
    for seed in 0..20 {
        let (n, k) = (5, 2);
        let s = spd_dyadic(n, k, seed, None).unwrap().sigma;
        let f = sequential_orthogonalize(&s, FactorOptions { fast_path: FastPath::Off, trace: true }).unwrap();
        assert_eq!(f.trace.len(), n as usize - 1);
        for t in &f.trace {
            let ed = DerivedPattern::new(DerivedKind::Elongated, n, t.level, k).unwrap().materialize();
            let diag = DerivedPattern::new(DerivedKind::Diagonal, n, t.level, k).unwrap().materialize();
            assert!(t.sigma_check.is_subset_of(&ed));
            assert!(t.sigma_check_prime.is_subset_of(&ed));
            assert!(t.a.is_subset_of(&ed));
            assert_eq!(t.sigma_tilde, diag);
        }
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let s = spd_dyadic(6, 3, 17, None).unwrap().sigma;
    let one = in_pool(1, || sequential_orthogonalize(&s, general()).unwrap());
    for threads in [2, 4, 7] {
        let many = in_pool(threads, || sequential_orthogonalize(&s, general()).unwrap());
        assert_eq!(one.p, many.p, "{threads} threads");
        assert_eq!(one.flops, many.flops);
    }
}

#[test]
fn solve_and_inverse_agree_with_dense() {
    for seed in 0..10 {
        let s = spd_dyadic(4, 2, seed, Some(1e4)).unwrap().sigma;
        let d = s.dim();
        let sd = s.to_dense();
        let (inv, _) = invert(&s, FactorOptions::default()).unwrap();
        assert!((&sd * &inv - DMatrix::identity(d, d)).amax() <= 1e-8);
        let y: Vec<f64> = (0..d).map(|i| ((i * 7 + seed as usize) % 5) as f64 - 2.0).collect();
        let x = solve(&s, &y, FactorOptions::default()).unwrap();
        let res = &sd * DVector::from_vec(x) - DVector::from_vec(y);
        assert!(res.amax() <= 1e-8);
    }
}

#[test]
fn inverse_flops_are_counted() {
    let s = DyadicMatrix::identity(DyadicPattern::symmetric(3, 1).unwrap());
    let f = sequential_orthogonalize(&s, FactorOptions::default()).unwrap();
    let mut fc = FlopCounter::new();
    f.inverse(&mut fc).unwrap();
    assert!(fc.block_multiplies > 0);
}
