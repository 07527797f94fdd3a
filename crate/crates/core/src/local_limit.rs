//! Masses of metric balls around a finite tree, exactly and by sampling, and
//! the limiting law `Λ(T₀) = R 2^{R+1} 4^{-|T₀|}`.
//!
//! A tree `T` has `B_r(T) = T₀` (with `r` the height of `T₀`) exactly when it
//! is `T₀` with planted branches `T_1..T_R` grafted at its `R` deepest
//! vertices. Then `|T| = |T₀| - R + Σ|T_i|` and `h(T) = r - 1 + max h(T_i)`,
//! so the ball mass only needs the number of branch tuples by total size and
//! maximal height: `[g^S] X_H^R - [g^S] X_{H-1}^R`.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::counting::{
    float_power, integer_exponent, rational_power, truncated_partition_exact, truncated_partition_scaled, CountTable,
    CountValue, KahanSum, TableData, Triangle,
};
use crate::error::{BallError, CountError};
use crate::sampler::{sample_mu, sample_uipt_ball};
use crate::tree::{enumerate_trees, Tree};

/// Normal quantile used for the Wilson interval of empirical masses.
pub const WILSON_Z: f64 = 3.0;

/// `Λ(T₀) = R 2^{R+1} 4^{-|T₀|}`, with `R` the number of vertices at the full height of `T₀`.
pub fn lambda(t0: &Tree) -> BigRational {
    let big_r = t0.vertices_at_depth(t0.height());
    lambda_from(big_r, t0.size())
}

fn lambda_from(big_r: usize, size: usize) -> BigRational {
    let num = BigInt::from(big_r) << (big_r + 1);
    let den = BigInt::one() << (2 * size);
    BigRational::new(num, den)
}

/// Partial sum of `Λ` over all trees of height `r` with at most `size_cap` edges.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaSum {
    pub r: u32,
    pub size_cap: usize,
    pub partial: f64,
    /// The partial sum as an exact dyadic rational `"p/q"`.
    pub partial_exact: String,
    /// Geometric extrapolation of the omitted sizes from the last two terms.
    pub tail_estimate: f64,
}

/// `Σ_{h(T₀) = r, |T₀| <= cap} Λ(T₀)`.
///
/// With `u` marking vertices at the deepest level, trees of height at most `j`
/// satisfy `Q_1 = g u`, `Q_{j+1} = g/(1 - Q_j)`. Trees of height exactly `r`
/// are the `u^R`, `R >= 1`, terms of `Q_r`, so the sum is
/// `4 Σ_N [g^N] ∂_u Q_r(g/4, u)` at `u = 2`, carried exactly as dyadic rationals.
pub fn lambda_partial_sum(r: u32, size_cap: usize) -> LambdaSum {
    assert!(r >= 1, "height must be at least 1");
    let len = size_cap + 1;
    let quarter = BigRational::new(BigInt::one(), BigInt::from(4));
    // value[k] = [g^k] Q_j(g/4, 2), deriv[k] = [g^k] ∂_u Q_j(g/4, u) at u = 2.
    let mut value = vec![BigRational::zero(); len];
    let mut deriv = vec![BigRational::zero(); len];
    if len > 1 {
        value[1] = BigRational::new(BigInt::one(), BigInt::from(2));
        deriv[1] = quarter.clone();
    }
    for _ in 1..r {
        let inv = series_geometric(&value);
        let inv_sq = series_mul(&inv, &inv);
        let d = series_mul(&deriv, &inv_sq);
        value = shift_scale(&inv, &quarter);
        deriv = shift_scale(&d, &quarter);
    }
    let four = BigRational::from_integer(BigInt::from(4));
    let terms: Vec<BigRational> = deriv.iter().map(|c| c * &four).collect();
    let partial: BigRational = terms.iter().fold(BigRational::zero(), |acc, t| acc + t);
    let last: Vec<f64> = terms.iter().rev().take(2).map(|t| t.to_f64().unwrap_or(0.0)).collect();
    let tail_estimate = match last.as_slice() {
        [a, b] if *a > 0.0 && *b > 0.0 && a < b => {
            let ratio = a / b;
            a * ratio / (1.0 - ratio)
        }
        [a, ..] => *a,
        [] => 0.0,
    };
    LambdaSum {
        r,
        size_cap,
        partial: partial.to_f64().unwrap_or(f64::NAN),
        partial_exact: partial.to_string(),
        tail_estimate,
    }
}

/// `1/(1 - p)` for a series with `p[0] = 0`.
fn series_geometric(p: &[BigRational]) -> Vec<BigRational> {
    let mut y = vec![BigRational::zero(); p.len()];
    if y.is_empty() {
        return y;
    }
    y[0] = BigRational::one();
    for k in 1..p.len() {
        let mut acc = BigRational::zero();
        for j in 1..=k {
            if !p[j].is_zero() {
                acc += &p[j] * &y[k - j];
            }
        }
        y[k] = acc;
    }
    y
}

fn series_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); a.len()];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for j in 0..a.len() - i {
            if !b[j].is_zero() {
                out[i + j] += ai * &b[j];
            }
        }
    }
    out
}

/// `c g p(g)`, truncated to the same length.
fn shift_scale(p: &[BigRational], c: &BigRational) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); p.len()];
    for k in 1..p.len() {
        out[k] = &p[k - 1] * c;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MassMethod {
    Dp,
    Bruteforce,
    Empirical,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallMassReport {
    #[serde(rename = "T0")]
    pub t0: Tree,
    pub r: u32,
    #[serde(rename = "R")]
    pub big_r: usize,
    #[serde(rename = "size")]
    pub t0_size: usize,
    pub alpha: f64,
    #[serde(rename = "N")]
    pub n: usize,
    /// The ball mass; for the empirical method, the observed frequency.
    pub exact_mass: f64,
    /// The exact mass as `"p/q"` when it was computed in rational arithmetic.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_mass_rational: Option<String>,
    pub lambda: String,
    pub lambda_value: f64,
    /// `exact_mass - lambda_value`.
    pub gap: f64,
    pub method: MassMethod,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci_halfwidth: Option<f64>,
}

impl BallMassReport {
    fn new(t0: &Tree, n: usize, alpha: f64, mass: f64, method: MassMethod) -> Self {
        let r = t0.height();
        let big_r = t0.vertices_at_depth(r);
        let lam = lambda_from(big_r, t0.size());
        let lambda_value = lam.to_f64().unwrap_or(f64::NAN);
        BallMassReport {
            t0: t0.clone(),
            r,
            big_r,
            t0_size: t0.size(),
            alpha,
            n,
            exact_mass: mass,
            exact_mass_rational: None,
            lambda: lam.to_string(),
            lambda_value,
            gap: mass - lambda_value,
            method,
            ci_halfwidth: None,
        }
    }
}

/// Branch-tuple counts for one base tree and one size, reusable across exponents.
///
/// `tuples[H]` counts `R`-tuples of planted trees with total size `S` and
/// every height at most `H` (scaled by `4^{-S}` for float tables).
#[derive(Debug, Clone)]
pub struct BallProfile<T> {
    t0: Tree,
    n: usize,
    tuples: Vec<T>,
}

fn check_ball(t0: &Tree, n: usize, table: &CountTable) -> Result<(), BallError> {
    if n < t0.size() {
        return Err(BallError::TooSmall { n, base: t0.size() });
    }
    if n > table.n_max() {
        return Err(CountError::OutOfRange {
            n,
            m: 0,
            n_max: table.n_max(),
        }
        .into());
    }
    Ok(())
}

fn truncated_mul<T: CountValue>(a: &[T], b: &[T]) -> Vec<T> {
    let len = a.len();
    let mut out = vec![T::zero(); len];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b[..len - i].iter().enumerate() {
            out[i + j].add_mul(ai, bj);
        }
    }
    out
}

/// `[g^s] x^power` for a series with `x[0] = 0`.
fn power_coefficient<T: CountValue>(x: &[T], power: usize, s: usize) -> T {
    if power == 1 {
        return x[s].clone();
    }
    // x^(power-1) by repeated squaring, then one dot product for the last factor.
    let mut result: Option<Vec<T>> = None;
    let mut base = x.to_vec();
    let mut e = power - 1;
    while e > 0 {
        if e & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => truncated_mul(&r, &base),
            });
        }
        e >>= 1;
        if e > 0 {
            base = truncated_mul(&base, &base);
        }
    }
    let partial = result.expect("power >= 2");
    let mut acc = T::zero();
    for k in 1..s {
        acc.add_mul(&partial[k], &x[s - k]);
    }
    acc
}

fn build_profile<T: CountValue>(tri: &Triangle<T>, t0: &Tree, n: usize) -> BallProfile<T> {
    let big_r = t0.vertices_at_depth(t0.height());
    let s = n - t0.size() + big_r;
    let h_max = s + 1 - big_r;
    let mut tuples: Vec<T> = (1..=h_max)
        .into_par_iter()
        .map(|h| {
            let mut x = vec![T::zero(); s + 1];
            for (k, slot) in x.iter_mut().enumerate().skip(1) {
                *slot = tri.l(k, h).clone();
            }
            power_coefficient(&x, big_r, s)
        })
        .collect();
    tuples.insert(0, T::zero());
    BallProfile {
        t0: t0.clone(),
        n,
        tuples,
    }
}

impl BallProfile<f64> {
    /// `μ_N(B_r(T) = T₀)` in double precision.
    pub fn mass(&self, alpha: f64, table: &CountTable) -> Result<f64, BallError> {
        let r = self.t0.height() as usize;
        let mut num = KahanSum::new();
        for h in 1..self.tuples.len() {
            let exact = CountValue::sub(&self.tuples[h], &self.tuples[h - 1]);
            if exact > 0.0 {
                num.add(float_power(r - 1 + h, alpha) * exact);
            }
        }
        let z = truncated_partition_scaled(self.n, self.n, alpha, table)?;
        let big_r = self.t0.vertices_at_depth(self.t0.height()) as i64;
        // Tuples carry 4^{-S} and Z carries 4^{-N}; S - N = R - |T₀|.
        let shift = 2 * (big_r - self.t0.size() as i64);
        Ok(crate::counting::ldexp(num.value() / z, shift))
    }
}

impl BallProfile<BigUint> {
    /// `μ_N(B_r(T) = T₀)` exactly, for an integer exponent.
    pub fn mass_exact(&self, alpha: i32, table: &CountTable) -> Result<BigRational, BallError> {
        let r = self.t0.height() as usize;
        let mut num = BigRational::zero();
        for h in 1..self.tuples.len() {
            let exact = &self.tuples[h] - &self.tuples[h - 1];
            if !Zero::is_zero(&exact) {
                num += rational_power(r - 1 + h, alpha) * BigRational::from_integer(BigInt::from(exact));
            }
        }
        let z = truncated_partition_exact(self.n, self.n, alpha, table)?;
        Ok(num / z)
    }
}

/// Branch-tuple counts from a scaled view of any table.
pub fn ball_profile(t0: &Tree, n: usize, table: &CountTable) -> Result<BallProfile<f64>, BallError> {
    check_ball(t0, n, table)?;
    Ok(match table.data() {
        TableData::Scaled(tri) => build_profile(tri, t0, n),
        TableData::Exact(tri) => {
            let exact = build_profile(tri, t0, n);
            let big_r = t0.vertices_at_depth(t0.height());
            let s = n - t0.size() + big_r;
            BallProfile {
                t0: exact.t0,
                n,
                tuples: exact.tuples.iter().map(|c| c.to_scaled(s)).collect(),
            }
        }
    })
}

/// Branch-tuple counts in exact integers; needs an exact table.
pub fn ball_profile_exact(t0: &Tree, n: usize, table: &CountTable) -> Result<BallProfile<BigUint>, BallError> {
    check_ball(t0, n, table)?;
    let tri = table.as_exact().ok_or(CountError::ModeMismatch { alpha: f64::NAN })?;
    Ok(build_profile(tri, t0, n))
}

/// `μ_N(B_{1/r}(T₀))` by the grafting decomposition.
///
/// Exact tables with an integer `α` give an exact rational mass; otherwise the
/// computation runs in scaled doubles.
pub fn exact_ball_mass(t0: &Tree, n: usize, alpha: f64, table: &CountTable) -> Result<BallMassReport, BallError> {
    if let (Some(_), Some(k)) = (table.as_exact(), integer_exponent(alpha)) {
        let mass = ball_profile_exact(t0, n, table)?.mass_exact(k, table)?;
        let mut report = BallMassReport::new(t0, n, alpha, mass.to_f64().unwrap_or(f64::NAN), MassMethod::Dp);
        report.exact_mass_rational = Some(mass.to_string());
        return Ok(report);
    }
    let mass = ball_profile(t0, n, table)?.mass(alpha, table)?;
    Ok(BallMassReport::new(t0, n, alpha, mass, MassMethod::Dp))
}

/// Exact rational ball mass; needs an exact table and an integer exponent.
pub fn exact_ball_mass_rational(t0: &Tree, n: usize, alpha: i32, table: &CountTable) -> Result<BigRational, BallError> {
    ball_profile_exact(t0, n, table)?.mass_exact(alpha, table)
}

/// Ball mass by enumerating every tree of size `n`. Exponential; an oracle for small sizes.
pub fn brute_force_ball_mass(t0: &Tree, n: usize, alpha: i32) -> Result<BigRational, BallError> {
    if n < t0.size() {
        return Err(BallError::TooSmall { n, base: t0.size() });
    }
    let trees = enumerate_trees(n)?;
    let r = t0.height();
    let mut hit = BigRational::zero();
    let mut total = BigRational::zero();
    for t in &trees {
        let w = rational_power(t.height() as usize, alpha);
        if t.height() >= r && &t.ball(r) == t0 {
            hit += &w;
        }
        total += w;
    }
    Ok(hit / total)
}

pub fn brute_force_report(t0: &Tree, n: usize, alpha: i32) -> Result<BallMassReport, BallError> {
    let mass = brute_force_ball_mass(t0, n, alpha)?;
    let mut report = BallMassReport::new(t0, n, f64::from(alpha), mass.to_f64().unwrap_or(f64::NAN), MassMethod::Bruteforce);
    report.exact_mass_rational = Some(mass.to_string());
    Ok(report)
}

/// Wilson score interval `(center, half-width)` for `hits` out of `draws`.
pub fn wilson_interval(hits: u64, draws: u64, z: f64) -> (f64, f64) {
    let n = draws as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    (center, half)
}

/// Fraction of `sample_mu` draws whose `r`-ball is `T₀`.
pub fn empirical_ball_mass<R: Rng + ?Sized>(
    t0: &Tree,
    n: usize,
    alpha: f64,
    draws: u64,
    table: &CountTable,
    rng: &mut R,
) -> Result<BallMassReport, BallError> {
    check_ball(t0, n, table)?;
    let r = t0.height();
    let mut hits = 0u64;
    for _ in 0..draws {
        let t = sample_mu(n, alpha, table, rng)?;
        if t.height() >= r && &t.ball(r) == t0 {
            hits += 1;
        }
    }
    Ok(empirical_report(t0, n, alpha, hits, draws))
}

/// Fraction of uniform-infinite-planar-tree balls `B_r` equal to `T₀`.
pub fn uipt_ball_frequency<R: Rng + ?Sized>(t0: &Tree, draws: u64, rng: &mut R) -> Result<BallMassReport, BallError> {
    let r = t0.height();
    let mut hits = 0u64;
    for _ in 0..draws {
        if &sample_uipt_ball(r, rng)? == t0 {
            hits += 1;
        }
    }
    Ok(empirical_report(t0, 0, f64::NAN, hits, draws))
}

fn empirical_report(t0: &Tree, n: usize, alpha: f64, hits: u64, draws: u64) -> BallMassReport {
    let freq = hits as f64 / draws.max(1) as f64;
    let mut report = BallMassReport::new(t0, n, alpha, freq, MassMethod::Empirical);
    report.ci_halfwidth = Some(wilson_interval(hits, draws.max(1), WILSON_Z).1);
    report
}
