//! Scalar types a count table can hold.
//!
//! Exact tables hold the counts themselves. Scaled tables hold `count * 4^-size`,
//! which keeps every entry in `[0, 1]`. Both only ever add and multiply
//! non-negative values, so the same generic code runs on either.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;

pub trait CountValue: Clone + PartialOrd + Send + Sync + std::fmt::Debug + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add_assign_ref(&mut self, other: &Self);
    /// `self += a * b`
    fn add_mul(&mut self, a: &Self, b: &Self);
    /// `a - b`, saturating at zero.
    fn sub(a: &Self, b: &Self) -> Self;
    /// The value in scaled units, given the total size it counts structures of.
    fn to_scaled(&self, size: usize) -> f64;
    /// One factor of `g` in the generating variable (the identity for exact counts).
    fn g_factor(self) -> Self;
    /// A uniform draw from `[0, total)`.
    fn draw_below<R: Rng + ?Sized>(total: &Self, rng: &mut R) -> Self;
}

impl CountValue for BigUint {
    fn zero() -> Self {
        Zero::zero()
    }

    fn one() -> Self {
        BigUint::from(1u32)
    }

    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn add_assign_ref(&mut self, other: &Self) {
        *self += other;
    }

    fn add_mul(&mut self, a: &Self, b: &Self) {
        if !Zero::is_zero(a) && !Zero::is_zero(b) {
            *self += a * b;
        }
    }

    fn sub(a: &Self, b: &Self) -> Self {
        if a > b {
            a - b
        } else {
            Zero::zero()
        }
    }

    fn to_scaled(&self, size: usize) -> f64 {
        scale_big(self, 2 * size as i64)
    }

    fn g_factor(self) -> Self {
        self
    }

    fn draw_below<R: Rng + ?Sized>(total: &Self, rng: &mut R) -> Self {
        uniform_biguint_below(total, rng)
    }
}

impl CountValue for f64 {
    fn zero() -> Self {
        0.0
    }

    fn one() -> Self {
        1.0
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn add_assign_ref(&mut self, other: &Self) {
        *self += *other;
    }

    fn add_mul(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }

    fn sub(a: &Self, b: &Self) -> Self {
        (a - b).max(0.0)
    }

    fn to_scaled(&self, _size: usize) -> f64 {
        *self
    }

    fn g_factor(self) -> Self {
        0.25 * self
    }

    fn draw_below<R: Rng + ?Sized>(total: &Self, rng: &mut R) -> Self {
        rng.random::<f64>() * total
    }
}

/// `x * 2^-shift` as a double, without overflowing on the way.
pub(crate) fn scale_big(x: &BigUint, shift: i64) -> f64 {
    let bits = x.bits() as i64;
    if bits == 0 {
        return 0.0;
    }
    let drop = (bits - 63).max(0);
    let mantissa = (x >> drop as usize).to_u64().expect("fits in 63 bits") as f64;
    ldexp(mantissa, drop - shift)
}

pub(crate) fn ldexp(x: f64, exp: i64) -> f64 {
    // Split the exponent so no intermediate power of two leaves the f64 range.
    let mut value = x;
    let mut e = exp;
    while e > 1000 {
        value *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        value *= 2f64.powi(-1000);
        e += 1000;
    }
    value * 2f64.powi(e as i32)
}

/// Rejection sampling on random limbs; integer-only so draws are reproducible everywhere.
pub(crate) fn uniform_biguint_below<R: Rng + ?Sized>(bound: &BigUint, rng: &mut R) -> BigUint {
    assert!(!Zero::is_zero(bound), "cannot draw below zero");
    let bits = bound.bits();
    let words = bits.div_ceil(32) as usize;
    let top_bits = bits - 32 * (words as u64 - 1);
    let mask = if top_bits == 32 {
        u32::MAX
    } else {
        (1u32 << top_bits) - 1
    };
    loop {
        let mut digits: Vec<u32> = (0..words).map(|_| rng.next_u32()).collect();
        if let Some(last) = digits.last_mut() {
            *last &= mask;
        }
        let candidate = BigUint::new(digits);
        if &candidate < bound {
            return candidate;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn scale_big_matches_direct_conversion() {
        let x = BigUint::from(12345u32);
        assert_eq!(scale_big(&x, 4), 12345.0 / 16.0);
        let big = BigUint::from(3u32).pow(400);
        let direct = 3f64.powi(400) * 2f64.powi(-600);
        assert!((scale_big(&big, 600) / direct - 1.0).abs() < 1e-15);
        // 4^-512 is subnormal but still representable.
        assert_eq!(scale_big(&BigUint::from(1u32), 1024), 2f64.powi(-1024));
    }

    #[test]
    fn uniform_draws_stay_below_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let bound = BigUint::from(10u32).pow(30) + 17u32;
        for _ in 0..200 {
            assert!(uniform_biguint_below(&bound, &mut rng) < bound);
        }
        let small = BigUint::from(3u32);
        let mut seen = [0usize; 3];
        for _ in 0..3000 {
            let v = uniform_biguint_below(&small, &mut rng).to_usize().unwrap();
            seen[v] += 1;
        }
        assert!(seen.iter().all(|&c| c > 900));
    }
}
