use std::sync::OnceLock;

use arborlab::counting::{
    partition_function, read_cache, stream_partition_functions, truncated_partition, truncated_partition_exact,
    write_cache, ValueMode,
};
use arborlab::{catalan, enumerate_trees, CountTable, Mode};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use proptest::prelude::*;

fn exact() -> &'static CountTable {
    static T: OnceLock<CountTable> = OnceLock::new();
    T.get_or_init(|| CountTable::build(200, Mode::Exact).unwrap())
}

fn scaled() -> &'static CountTable {
    static T: OnceLock<CountTable> = OnceLock::new();
    T.get_or_init(|| CountTable::build(200, Mode::Scaled).unwrap())
}

/// Trees of size `n` and height at most `m` by the first-return decomposition,
/// with plain integers: a planted tree is an edge over a sequence of planted trees.
fn naive_l(n_max: usize, m_max: usize) -> Vec<Vec<u128>> {
    // forest[m][s]: sequences of planted trees of height <= m, total size s.
    let mut l = vec![vec![0u128; n_max + 1]; m_max + 1];
    for m in 1..=m_max {
        let mut forest = vec![0u128; n_max];
        forest[0] = 1;
        for s in 1..n_max {
            forest[s] = (1..=s).map(|k| l[m - 1][k] * forest[s - k]).sum();
        }
        for n in 1..=n_max {
            l[m][n] = forest[n - 1];
        }
    }
    l
}

#[test]
fn tables_match_the_naive_recursion() {
    let naive = naive_l(60, 60);
    let tri = exact().as_exact().unwrap();
    for n in 1..=60 {
        for m in 1..=60 {
            assert_eq!(tri.l(n, m), &BigUint::from(naive[m][n]), "L({n},{m})");
        }
    }
}

#[test]
fn tables_match_enumeration() {
    let tri = exact().as_exact().unwrap();
    for n in 1..=10 {
        let trees = enumerate_trees(n).unwrap();
        for h in 1..=n {
            let count = trees.iter().filter(|t| t.height() as usize == h).count();
            assert_eq!(tri.e(n, h), &BigUint::from(count));
        }
    }
}

#[test]
fn rows_sum_to_catalan() {
    let tri = exact().as_exact().unwrap();
    for n in 1..=200 {
        let row: BigUint = (1..=n).map(|h| tri.e(n, h).clone()).sum();
        assert_eq!(row, catalan(n));
        assert_eq!(tri.l(n, n), &catalan(n));
    }
}

#[test]
fn closed_form_anchors() {
    let tri = exact().as_exact().unwrap();
    for n in 1..=200 {
        assert_eq!(tri.l(n, 1), &BigUint::from(u8::from(n == 1)));
        assert_eq!(tri.l(n, 2), &BigUint::one());
        if n >= 2 {
            // L(N,3) = 2^{N-2}: compositions of N-1.
            assert_eq!(tri.l(n, 3), &(BigUint::one() << (n - 2)));
            for alpha in [-1, 0, 2] {
                let z = truncated_partition_exact(n, 2, alpha, exact()).unwrap();
                assert_eq!(z, BigRational::from_integer(BigInt::from(2)).pow(alpha));
            }
        }
    }
}

#[test]
fn partition_function_at_zero_is_catalan() {
    let z = partition_function(200, 0.0, exact(), ValueMode::ExactRational).unwrap();
    for n in 1..=200 {
        assert_eq!(z.exact(n).unwrap(), &BigRational::from_integer(BigInt::from(catalan(n))));
    }
}

#[test]
fn float_and_exact_partition_functions_agree() {
    for alpha in [-2.0, -1.0, 1.0, 3.0] {
        let e = partition_function(200, alpha, exact(), ValueMode::ExactRational).unwrap();
        let f = partition_function(200, alpha, scaled(), ValueMode::Float).unwrap();
        for n in [1, 2, 17, 100, 200] {
            let rel = (e.scaled(n) / f.scaled(n) - 1.0).abs();
            assert!(rel < 1e-12, "alpha {alpha}, n {n}: {rel}");
        }
    }
}

#[test]
fn streaming_agrees_with_the_table() {
    let alphas = [-1.0, 0.5, 2.0];
    let streamed = stream_partition_functions(200, &alphas, 20_000).unwrap();
    for (i, &alpha) in alphas.iter().enumerate() {
        let direct = partition_function(200, alpha, scaled(), ValueMode::Float).unwrap();
        for n in [1, 50, 200] {
            let rel = (streamed[i].scaled(n) / direct.scaled(n) - 1.0).abs();
            assert!(rel < 1e-12);
        }
    }
}

#[test]
fn truncated_partition_grows_to_the_full_one() {
    let full = partition_function(60, 1.0, exact(), ValueMode::ExactRational).unwrap();
    let mut last = 0.0;
    for m in 1..=60 {
        let z = truncated_partition(60, m, 1.0, exact()).unwrap();
        assert!(z >= last);
        last = z;
    }
    assert!((last / full.exact(60).unwrap().to_f64().unwrap() - 1.0).abs() < 1e-14);
}

#[test]
fn cache_round_trips() {
    for mode in [Mode::Exact, Mode::Scaled] {
        let table = CountTable::build(40, mode).unwrap();
        let mut buf = Vec::new();
        write_cache(&table, &mut buf).unwrap();
        let read = read_cache(&buf[..], mode, 40).unwrap().unwrap();
        assert_eq!(read, table);
        assert!(read_cache(&buf[..], mode, 20).unwrap().is_none());
        assert!(read_cache(&buf[..], mode, 41).unwrap().is_none());
    }
}

#[test]
fn out_of_range_requests_fail() {
    assert!(truncated_partition(201, 3, 0.0, exact()).is_err());
    assert!(truncated_partition_exact(10, 3, 0, scaled()).is_err());
    assert!(CountTable::build(0, Mode::Exact).is_err());
}

proptest! {
    #[test]
    fn scaled_entries_keep_relative_precision(n in 1usize..=200, h in 1usize..=200) {
        prop_assume!(h <= n);
        let e = exact().as_exact().unwrap().e(n, h).clone();
        let s = scaled().e_scaled(n, h);
        if e.is_zero() {
            prop_assert_eq!(s, 0.0);
        } else {
            let rel = (exact().e_scaled(n, h) / s - 1.0).abs();
            prop_assert!(rel < 1e-12, "E({}, {}): {}", n, h, rel);
        }
    }

    #[test]
    fn l_is_monotone_in_height(n in 1usize..=200, m in 1usize..200) {
        let tri = exact().as_exact().unwrap();
        prop_assert!(tri.l(n, m) <= tri.l(n, m + 1));
        prop_assert_eq!(tri.l(n, m + 1) - tri.l(n, m), tri.e(n, m + 1).clone());
    }
}
