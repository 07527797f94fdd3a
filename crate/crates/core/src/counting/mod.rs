//! Counts of planted plane trees by size and height.
//!
//! `L(N, m)` is the number of trees with `N` edges and height at most `m`,
//! the coefficient of `g^N` in `X_m(g)` where `X_1 = g` and
//! `X_{m+1} = g / (1 - X_m)`. `E(N, h) = L(N, h) - L(N, h - 1)` counts trees
//! of height exactly `h`.
//!
//! The exact kernel iterates the recursion on truncated power series with big
//! integers and differences consecutive levels. The scaled kernel substitutes
//! `g -> g/4` and advances the height-exact series directly through
//! `E_{m+1} = g * E_m / ((1 - X_m)(1 - X_{m-1}))`, which only adds and
//! multiplies non-negative numbers, so every entry keeps full relative
//! precision even when it is many orders of magnitude below its row sum.

mod cache;
mod partition;
mod value;

pub use cache::{read_cache, write_cache, CACHE_FORMAT, CACHE_VERSION};
pub use partition::{
    partition_function, stream_partition_functions, truncated_partition,
    truncated_partition_exact, truncated_partition_scaled, KahanSum, PartitionValues,
    PartitionVector, ValueMode,
};
pub use value::CountValue;
pub(crate) use partition::{float_power, integer_exponent, rational_power};
pub(crate) use value::{ldexp, scale_big};

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::CountError;

pub const DEFAULT_EXACT_CAP: usize = 512;
pub const DEFAULT_SCALED_CAP: usize = 20_000;
/// Largest table kept in memory by default; larger runs stream over levels.
pub const DEFAULT_MATERIALIZE_CAP: usize = 2048;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Scaled,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::Scaled => "scaled",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TableCaps {
    pub exact: usize,
    pub scaled: usize,
    pub materialize: usize,
}

impl Default for TableCaps {
    fn default() -> Self {
        TableCaps {
            exact: DEFAULT_EXACT_CAP,
            scaled: DEFAULT_SCALED_CAP,
            materialize: DEFAULT_MATERIALIZE_CAP,
        }
    }
}

/// Row-major lower triangle: row `n` (1-based) holds columns `1..=n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Triangle<T> {
    n_max: usize,
    cumulative: Vec<T>,
    exact_height: Vec<T>,
    zero: T,
}

fn offset(n: usize, m: usize) -> usize {
    n * (n - 1) / 2 + (m - 1)
}

impl<T: CountValue> Triangle<T> {
    fn new(n_max: usize) -> Self {
        let len = n_max * (n_max + 1) / 2;
        Triangle {
            n_max,
            cumulative: vec![T::zero(); len],
            exact_height: vec![T::zero(); len],
            zero: T::zero(),
        }
    }

    pub(crate) fn from_rows(n_max: usize, cumulative: Vec<T>, exact_height: Vec<T>) -> Self {
        Triangle {
            n_max,
            cumulative,
            exact_height,
            zero: T::zero(),
        }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// `L(n, m)`: trees with `n` edges and height at most `m`. Zero for `m = 0`.
    pub fn l(&self, n: usize, m: usize) -> &T {
        assert!(n >= 1 && n <= self.n_max, "size {n} outside table");
        if m == 0 {
            return &self.zero;
        }
        &self.cumulative[offset(n, m.min(n))]
    }

    /// `E(n, h)`: trees with `n` edges and height exactly `h`.
    pub fn e(&self, n: usize, h: usize) -> &T {
        assert!(n >= 1 && n <= self.n_max, "size {n} outside table");
        if h == 0 || h > n {
            return &self.zero;
        }
        &self.exact_height[offset(n, h)]
    }

    pub fn l_row(&self, n: usize) -> &[T] {
        &self.cumulative[offset(n, 1)..offset(n, 1) + n]
    }

    pub fn e_row(&self, n: usize) -> &[T] {
        &self.exact_height[offset(n, 1)..offset(n, 1) + n]
    }

    fn store(&mut self, m: usize, cumulative: &[T], exact_height: &[T]) {
        for n in m..=self.n_max {
            let at = offset(n, m);
            self.cumulative[at] = cumulative[n].clone();
            self.exact_height[at] = exact_height[n].clone();
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TableData {
    Exact(Triangle<BigUint>),
    Scaled(Triangle<f64>),
}

/// Materialized `L` and `E` tables for sizes `1..=N_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct CountTable {
    data: TableData,
}

impl CountTable {
    pub fn build(n_max: usize, mode: Mode) -> Result<Self, CountError> {
        Self::build_with_caps(n_max, mode, TableCaps::default())
    }

    pub fn build_with_caps(n_max: usize, mode: Mode, caps: TableCaps) -> Result<Self, CountError> {
        if n_max == 0 {
            return Err(CountError::EmptyTable);
        }
        let cap = match mode {
            Mode::Exact => caps.exact,
            Mode::Scaled => caps.scaled.min(caps.materialize),
        };
        if n_max > cap {
            return Err(CountError::CapExceeded {
                requested: n_max,
                cap,
            });
        }
        let data = match mode {
            Mode::Exact => {
                let mut tri = Triangle::new(n_max);
                exact_levels(n_max, |m, cumulative, exact| tri.store(m, cumulative, exact));
                TableData::Exact(tri)
            }
            Mode::Scaled => {
                let mut tri = Triangle::new(n_max);
                scaled_levels(n_max, |m, cumulative, exact| tri.store(m, cumulative, exact));
                TableData::Scaled(tri)
            }
        };
        Ok(CountTable { data })
    }

    pub(crate) fn from_data(data: TableData) -> Self {
        CountTable { data }
    }

    pub fn mode(&self) -> Mode {
        match self.data {
            TableData::Exact(_) => Mode::Exact,
            TableData::Scaled(_) => Mode::Scaled,
        }
    }

    pub fn n_max(&self) -> usize {
        match &self.data {
            TableData::Exact(t) => t.n_max(),
            TableData::Scaled(t) => t.n_max(),
        }
    }

    pub fn data(&self) -> &TableData {
        &self.data
    }

    pub fn as_exact(&self) -> Option<&Triangle<BigUint>> {
        match &self.data {
            TableData::Exact(t) => Some(t),
            TableData::Scaled(_) => None,
        }
    }

    pub fn as_scaled(&self) -> Option<&Triangle<f64>> {
        match &self.data {
            TableData::Scaled(t) => Some(t),
            TableData::Exact(_) => None,
        }
    }

    pub(crate) fn check_covers(&self, n: usize) -> Result<(), CountError> {
        if n == 0 || n > self.n_max() {
            return Err(CountError::OutOfRange {
                n,
                m: 0,
                n_max: self.n_max(),
            });
        }
        Ok(())
    }

    /// `L(n, m) * 4^-n`, in either mode.
    pub fn l_scaled(&self, n: usize, m: usize) -> f64 {
        match &self.data {
            TableData::Exact(t) => t.l(n, m).to_scaled(n),
            TableData::Scaled(t) => *t.l(n, m),
        }
    }

    /// `E(n, h) * 4^-n`, in either mode.
    pub fn e_scaled(&self, n: usize, h: usize) -> f64 {
        match &self.data {
            TableData::Exact(t) => t.e(n, h).to_scaled(n),
            TableData::Scaled(t) => *t.e(n, h),
        }
    }
}

/// `C_{n-1} = (2(n-1))! / (n! (n-1)!)`, the number of planted plane trees with `n` edges.
pub fn catalan(n: usize) -> BigUint {
    assert!(n >= 1, "catalan is indexed by tree size n >= 1");
    let mut c = BigUint::from(1u32);
    for k in 0..(n - 1) {
        c = c * BigUint::from(2 * (2 * k + 1)) / BigUint::from(k + 2);
    }
    c
}

/// Runs the exact recursion, calling `visit(m, L(., m), E(., m))` for `m = 1..=n_max`.
///
/// Slices are indexed by size, with index 0 unused.
pub fn exact_levels(n_max: usize, mut visit: impl FnMut(usize, &[BigUint], &[BigUint])) {
    let zero = BigUint::from(0u32);
    let mut x = vec![zero.clone(); n_max + 1];
    x[1] = BigUint::from(1u32);
    visit(1, &x, &x);
    // y = 1 / (1 - X_m); entries below m never change again once X_m agrees with X_inf there.
    let mut y = vec![zero.clone(); n_max];
    y[0] = BigUint::from(1u32);
    for m in 1..n_max {
        for k in m..n_max {
            let mut acc = zero.clone();
            for j in 1..=k {
                acc.add_mul(&x[j], &y[k - j]);
            }
            y[k] = acc;
        }
        let mut next = vec![zero.clone(); n_max + 1];
        let mut exact = vec![zero.clone(); n_max + 1];
        for n in 1..=n_max {
            next[n] = y[n - 1].clone();
            if n > m {
                exact[n] = &next[n] - &x[n];
            }
        }
        x = next;
        visit(m + 1, &x, &exact);
    }
}

/// Dot product of equal-length slices with eight fixed accumulators.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 8];
    let chunks = a.len() / 8;
    for c in 0..chunks {
        let (pa, pb) = (&a[8 * c..8 * c + 8], &b[8 * c..8 * c + 8]);
        for i in 0..8 {
            acc[i] += pa[i] * pb[i];
        }
    }
    let mut tail = 0.0;
    for i in 8 * chunks..a.len() {
        tail += a[i] * b[i];
    }
    ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail
}

const PARALLEL_THRESHOLD: usize = 512;

/// `out[n] = sum_{a = lo..=n} f[a] * rev[len - 1 - (n - a)]` for `n` in `lo..out.len()`,
/// where `rev` stores a series in reverse order.
fn convolve_reversed(f: &[f64], rev: &[f64], lo: usize, out: &mut [f64]) {
    let top = rev.len() - 1;
    let body = |n: usize| -> f64 {
        if n < lo {
            return 0.0;
        }
        let len = n - lo + 1;
        dot(&f[lo..=n], &rev[top + 1 - len..=top])
    };
    if out.len() - lo > PARALLEL_THRESHOLD {
        out.par_iter_mut().enumerate().for_each(|(n, o)| *o = body(n));
    } else {
        out.iter_mut().enumerate().for_each(|(n, o)| *o = body(n));
    }
}

/// Runs the scaled recursion, calling `visit(m, L(., m) 4^-., E(., m) 4^-.)` for `m = 1..=n_max`.
///
/// Slices are indexed by size, with index 0 unused.
pub fn scaled_levels(n_max: usize, mut visit: impl FnMut(usize, &[f64], &[f64])) {
    let len = n_max + 1;
    let mut x = vec![0.0; len];
    let mut e = vec![0.0; len];
    x[1] = 0.25;
    e[1] = 0.25;
    visit(1, &x, &e);
    // Reciprocals 1/(1 - X) stored reversed: rev[len - 1 - k] holds the k-th coefficient.
    let mut y_prev_rev = vec![0.0; len];
    y_prev_rev[len - 1] = 1.0;
    let mut y_rev = y_prev_rev.clone();
    let mut f = vec![0.0; len];
    let mut next = vec![0.0; len];
    for m in 1..n_max {
        y_rev.copy_from_slice(&y_prev_rev);
        for k in m..len {
            let v = dot(&x[1..=k], &y_rev[len - k..]);
            y_rev[len - 1 - k] = v;
        }
        // E_{m+1} = (g/4) * E_m * Y_m * Y_{m-1}, supported on sizes > m.
        convolve_reversed(&e, &y_rev, m, &mut f);
        convolve_reversed(&f, &y_prev_rev, m, &mut next);
        e.iter_mut().for_each(|v| *v = 0.0);
        for n in (m + 1)..len {
            e[n] = 0.25 * next[n - 1];
            x[n] += e[n];
        }
        std::mem::swap(&mut y_prev_rev, &mut y_rev);
        visit(m + 1, &x, &e);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::enumerate_trees;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn catalan_values() {
        assert_eq!(catalan(1), big(1));
        assert_eq!(catalan(5), big(14));
        assert_eq!(catalan(11), big(16796));
        let mut sum = 0.0;
        for n in 1..=200 {
            sum += catalan(n).to_scaled(n);
        }
        // The tail beyond 200 is about 1/(2 sqrt(200 pi)) ~ 0.0199.
        let tail = 0.5 - sum;
        assert!(tail > 0.0 && tail < 2e-2, "sum = {sum}");
        assert!((tail - 1.0 / (2.0 * (200.0 * std::f64::consts::PI).sqrt())).abs() < 1e-4);
    }

    #[test]
    fn small_rows_match_enumeration() {
        let table = CountTable::build(9, Mode::Exact).unwrap();
        let tri = table.as_exact().unwrap();
        for n in 1..=9 {
            let mut by_height = vec![0u64; n + 1];
            for tree in enumerate_trees(n).unwrap() {
                by_height[tree.height() as usize] += 1;
            }
            for h in 1..=n {
                assert_eq!(tri.e(n, h), &big(by_height[h]), "E({n},{h})");
            }
        }
        assert_eq!(tri.e(3, 2), &big(1));
        assert_eq!(tri.e(3, 3), &big(1));
        assert_eq!(
            (1..=4).map(|h| tri.e(4, h).clone()).collect::<Vec<_>>(),
            vec![big(0), big(1), big(3), big(1)]
        );
    }

    #[test]
    fn closed_form_columns() {
        let table = CountTable::build(60, Mode::Exact).unwrap();
        let tri = table.as_exact().unwrap();
        for n in 1..=60 {
            assert_eq!(tri.l(n, 1), &big(u64::from(n == 1)));
            assert_eq!(tri.l(n, 2), &big(1));
            // X_3 = g(1-g)/(1-2g): coefficients 1, 1, 2, 4, 8, ...
            let expected = if n == 1 { 1 } else { 1u64 << (n - 2) };
            assert_eq!(tri.l(n, 3), &big(expected));
        }
    }

    #[test]
    fn scaled_matches_exact() {
        let n_max = 120;
        let exact = CountTable::build(n_max, Mode::Exact).unwrap();
        let scaled = CountTable::build(n_max, Mode::Scaled).unwrap();
        let (ex, sc) = (exact.as_exact().unwrap(), scaled.as_scaled().unwrap());
        for n in 1..=n_max {
            for h in 1..=n {
                let want = ex.e(n, h).to_scaled(n);
                let got = *sc.e(n, h);
                assert!(
                    (got - want).abs() <= 1e-12 * want,
                    "E({n},{h}): {got} vs {want}"
                );
                let want = ex.l(n, h).to_scaled(n);
                assert!((sc.l(n, h) - want).abs() <= 1e-12 * want);
            }
        }
    }

    #[test]
    fn caps_are_enforced() {
        assert_eq!(
            CountTable::build(513, Mode::Exact),
            Err(CountError::CapExceeded {
                requested: 513,
                cap: 512
            })
        );
        assert_eq!(CountTable::build(0, Mode::Scaled), Err(CountError::EmptyTable));
        assert!(matches!(
            CountTable::build(3000, Mode::Scaled),
            Err(CountError::CapExceeded { cap: 2048, .. })
        ));
    }

    #[test]
    fn dot_matches_naive() {
        let a: Vec<f64> = (0..37).map(|i| i as f64 * 0.5).collect();
        let b: Vec<f64> = (0..37).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let naive: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        assert!((dot(&a, &b) - naive).abs() < 1e-12);
    }
}
