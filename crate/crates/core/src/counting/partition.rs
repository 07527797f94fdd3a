//! Partition functions `Z_N(alpha) = sum_T h(T)^alpha` and their height-truncated
//! variants `Z_{N,M}(alpha)`.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use super::{scaled_levels, CountTable, CountValue, TableData, Triangle};
use crate::error::CountError;

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValueMode {
    /// Exact rationals; needs an integer exponent and an exact table.
    ExactRational,
    /// Doubles carrying `Z_N * 4^-N`.
    Float,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PartitionValues {
    Exact(Vec<BigRational>),
    /// `Z_N * 4^-N`.
    Scaled(Vec<f64>),
}

/// `Z_1 .. Z_{N_max}` for one exponent.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionVector {
    pub alpha: f64,
    pub values: PartitionValues,
}

impl PartitionVector {
    pub fn n_max(&self) -> usize {
        match &self.values {
            PartitionValues::Exact(v) => v.len(),
            PartitionValues::Scaled(v) => v.len(),
        }
    }

    /// `Z_n * 4^-n`.
    pub fn scaled(&self, n: usize) -> f64 {
        match &self.values {
            PartitionValues::Exact(v) => rational_to_scaled(&v[n - 1], n),
            PartitionValues::Scaled(v) => v[n - 1],
        }
    }

    pub fn exact(&self, n: usize) -> Option<&BigRational> {
        match &self.values {
            PartitionValues::Exact(v) => Some(&v[n - 1]),
            PartitionValues::Scaled(_) => None,
        }
    }

    /// `Z_n` as a double; overflows to infinity beyond `n ~ 510`.
    pub fn value(&self, n: usize) -> f64 {
        match &self.values {
            PartitionValues::Exact(v) => v[n - 1].to_f64().unwrap_or(f64::INFINITY),
            PartitionValues::Scaled(v) => super::ldexp(v[n - 1], 2 * n as i64),
        }
    }
}

pub(crate) fn rational_to_scaled(q: &BigRational, n: usize) -> f64 {
    let (num, den) = (q.numer().magnitude(), q.denom().magnitude());
    let bits_num = num.bits() as i64;
    let bits_den = den.bits() as i64;
    // Both scaled to ~63 significant bits before dividing.
    let a = super::scale_big(num, bits_num - 63);
    let b = super::scale_big(den, bits_den - 63);
    super::ldexp(a / b, bits_num - bits_den - 2 * n as i64)
}

pub(crate) fn integer_exponent(alpha: f64) -> Option<i32> {
    (alpha.fract() == 0.0 && alpha.abs() <= 1e6).then_some(alpha as i32)
}

/// `h^alpha` as an exact rational.
pub(crate) fn rational_power(h: usize, alpha: i32) -> BigRational {
    let base = BigInt::from(h);
    let p = num_traits::pow(base, alpha.unsigned_abs() as usize);
    if alpha >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::one(), p)
    }
}

/// `h^alpha` in floating point, via `powi` when the exponent is integral.
pub(crate) fn float_power(h: usize, alpha: f64) -> f64 {
    match integer_exponent(alpha) {
        Some(k) => (h as f64).powi(k),
        None => (h as f64).powf(alpha),
    }
}

fn exact_row_sum(tri: &Triangle<BigUint>, n: usize, m: usize, alpha: i32) -> BigRational {
    let mut total = BigRational::zero();
    for h in 1..=m.min(n) {
        let count = tri.e(n, h);
        if !CountValue::is_zero(count) {
            total += rational_power(h, alpha) * BigRational::from_integer(BigInt::from(count.clone()));
        }
    }
    total
}

fn scaled_row_sum(table: &CountTable, n: usize, m: usize, alpha: f64) -> f64 {
    let mut sum = KahanSum::new();
    for h in 1..=m.min(n) {
        let count = table.e_scaled(n, h);
        if count > 0.0 {
            sum.add(float_power(h, alpha) * count);
        }
    }
    sum.value()
}

/// `Z_1 .. Z_{n_max}` from a materialized table.
pub fn partition_function(
    n_max: usize,
    alpha: f64,
    table: &CountTable,
    mode: ValueMode,
) -> Result<PartitionVector, CountError> {
    table.check_covers(n_max)?;
    let values = match mode {
        ValueMode::ExactRational => {
            let k = integer_exponent(alpha).ok_or(CountError::ModeMismatch { alpha })?;
            let tri = table.as_exact().ok_or(CountError::ModeMismatch { alpha })?;
            PartitionValues::Exact((1..=n_max).map(|n| exact_row_sum(tri, n, n, k)).collect())
        }
        ValueMode::Float => {
            PartitionValues::Scaled((1..=n_max).map(|n| scaled_row_sum(table, n, n, alpha)).collect())
        }
    };
    Ok(PartitionVector { alpha, values })
}

fn check_truncated(table: &CountTable, n: usize, m: usize) -> Result<(), CountError> {
    if n == 0 || m == 0 || n > table.n_max() {
        return Err(CountError::OutOfRange {
            n,
            m,
            n_max: table.n_max(),
        });
    }
    Ok(())
}

/// `Z_{N,M} * 4^-N`: contribution of trees with height at most `M`.
pub fn truncated_partition_scaled(
    n: usize,
    m: usize,
    alpha: f64,
    table: &CountTable,
) -> Result<f64, CountError> {
    check_truncated(table, n, m)?;
    Ok(match table.data() {
        TableData::Exact(tri) => match integer_exponent(alpha) {
            Some(k) => rational_to_scaled(&exact_row_sum(tri, n, m, k), n),
            None => scaled_row_sum(table, n, m, alpha),
        },
        TableData::Scaled(_) => scaled_row_sum(table, n, m, alpha),
    })
}

/// `Z_{N,M}` as a double.
pub fn truncated_partition(n: usize, m: usize, alpha: f64, table: &CountTable) -> Result<f64, CountError> {
    if let (TableData::Exact(tri), Some(k)) = (table.data(), integer_exponent(alpha)) {
        check_truncated(table, n, m)?;
        return Ok(exact_row_sum(tri, n, m, k).to_f64().unwrap_or(f64::INFINITY));
    }
    let scaled = truncated_partition_scaled(n, m, alpha, table)?;
    Ok(super::ldexp(scaled, 2 * n as i64))
}

/// `Z_{N,M}` exactly, for integer exponents on an exact table.
pub fn truncated_partition_exact(
    n: usize,
    m: usize,
    alpha: i32,
    table: &CountTable,
) -> Result<BigRational, CountError> {
    check_truncated(table, n, m)?;
    let tri = table.as_exact().ok_or(CountError::ModeMismatch {
        alpha: f64::from(alpha),
    })?;
    Ok(exact_row_sum(tri, n, m, alpha))
}

/// Scaled partition functions for several exponents at sizes beyond what is
/// worth materializing: streams over height levels keeping O(N_max) state per exponent.
pub fn stream_partition_functions(
    n_max: usize,
    alphas: &[f64],
    cap: usize,
) -> Result<Vec<PartitionVector>, CountError> {
    if n_max == 0 {
        return Err(CountError::EmptyTable);
    }
    if n_max > cap {
        return Err(CountError::CapExceeded { requested: n_max, cap });
    }
    let mut sums = vec![vec![KahanSum::new(); n_max + 1]; alphas.len()];
    scaled_levels(n_max, |h, _, exact| {
        for (alpha, row) in alphas.iter().zip(sums.iter_mut()) {
            let w = float_power(h, *alpha);
            for n in h..=n_max {
                if exact[n] > 0.0 {
                    row[n].add(w * exact[n]);
                }
            }
        }
    });
    Ok(alphas
        .iter()
        .zip(sums)
        .map(|(&alpha, row)| PartitionVector {
            alpha,
            values: PartitionValues::Scaled(row[1..].iter().map(KahanSum::value).collect()),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::{catalan, Mode};
    use crate::tree::enumerate_trees;

    fn q(num: i64, den: i64) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    #[test]
    fn examples() {
        let table = CountTable::build(10, Mode::Exact).unwrap();
        let z0 = partition_function(4, 0.0, &table, ValueMode::ExactRational).unwrap();
        assert_eq!(z0.exact(4), Some(&q(5, 1)));
        let zm1 = partition_function(4, -1.0, &table, ValueMode::ExactRational).unwrap();
        assert_eq!(zm1.exact(4), Some(&q(7, 4)));
        let z2 = partition_function(3, 2.0, &table, ValueMode::ExactRational).unwrap();
        assert_eq!(z2.exact(3), Some(&q(13, 1)));
        for alpha in [-1.0, 0.0, 2.0, 0.5] {
            let z = partition_function(10, alpha, &table, ValueMode::Float).unwrap();
            assert!((z.value(1) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn non_integer_exact_is_rejected() {
        let table = CountTable::build(5, Mode::Exact).unwrap();
        assert_eq!(
            partition_function(5, 0.5, &table, ValueMode::ExactRational),
            Err(CountError::ModeMismatch { alpha: 0.5 })
        );
        let scaled = CountTable::build(5, Mode::Scaled).unwrap();
        assert!(partition_function(5, 1.0, &scaled, ValueMode::ExactRational).is_err());
    }

    #[test]
    fn truncated_examples() {
        let table = CountTable::build(12, Mode::Exact).unwrap();
        for alpha in [-1, 0, 2] {
            for n in 2..=12 {
                assert_eq!(
                    truncated_partition_exact(n, 2, alpha, &table).unwrap(),
                    rational_power(2, alpha)
                );
            }
        }
        assert_eq!(truncated_partition(3, 3, 0.0, &table).unwrap(), 2.0);
        assert_eq!(truncated_partition(5, 1, 1.7, &table).unwrap(), 0.0);
        assert!(matches!(
            truncated_partition(13, 2, 0.0, &table),
            Err(CountError::OutOfRange { .. })
        ));
    }

    #[test]
    fn brute_force_equivalence() {
        let table = CountTable::build(8, Mode::Exact).unwrap();
        for alpha in [-2i32, -1, 0, 1, 2] {
            let exact = partition_function(8, f64::from(alpha), &table, ValueMode::ExactRational).unwrap();
            let float = partition_function(8, f64::from(alpha), &table, ValueMode::Float).unwrap();
            for n in 1..=8 {
                let brute: BigRational = enumerate_trees(n)
                    .unwrap()
                    .iter()
                    .map(|t| rational_power(t.height() as usize, alpha))
                    .sum();
                assert_eq!(exact.exact(n), Some(&brute));
                let want = brute.to_f64().unwrap();
                assert!((float.value(n) - want).abs() <= 1e-12 * want);
            }
        }
    }

    #[test]
    fn alpha_zero_reproduces_catalan() {
        let table = CountTable::build(64, Mode::Exact).unwrap();
        let z = partition_function(64, 0.0, &table, ValueMode::ExactRational).unwrap();
        for n in 1..=64 {
            assert_eq!(z.exact(n).unwrap(), &BigRational::from_integer(BigInt::from(catalan(n))));
        }
    }

    #[test]
    fn streaming_matches_materialized() {
        let table = CountTable::build(200, Mode::Scaled).unwrap();
        let alphas = [-1.5, 0.0, 2.0];
        let streamed = stream_partition_functions(200, &alphas, 20_000).unwrap();
        for (alpha, z) in alphas.iter().zip(&streamed) {
            let direct = partition_function(200, *alpha, &table, ValueMode::Float).unwrap();
            for n in 1..=200 {
                let (a, b) = (z.scaled(n), direct.scaled(n));
                assert!((a - b).abs() <= 1e-13 * b, "alpha {alpha} n {n}");
            }
        }
    }

    #[test]
    fn kahan_beats_naive_on_mixed_magnitudes() {
        let mut k = KahanSum::new();
        k.add(1.0);
        for _ in 0..1000 {
            k.add(1e-16);
        }
        assert!((k.value() - (1.0 + 1e-13)).abs() < 1e-18);
    }
}
