use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::laurent::laurent_table;
use super::{rational_to_f64, AnalyticConstant, ConstantParams, Provenance};
use crate::counting::KahanSum;
use crate::error::AnalyticError;

/// `g_m = (1 + tan^2(π/(m+1)))/4`, the dominant pole of `X_m`.
pub fn critical_point(m: u32) -> Result<f64, AnalyticError> {
    if m < 2 {
        return Err(AnalyticError::Unsupported(format!("X_{m} has no pole")));
    }
    Ok(pole_of(m, 1))
}

/// The `p`-th pole of `X_m` on the positive axis, `(1 + tan^2(pπ/(m+1)))/4`.
fn pole_of(m: u32, p: u32) -> f64 {
    let t = (p as f64 * std::f64::consts::PI / (m as f64 + 1.0)).tan();
    0.25 * (1.0 + t * t)
}

/// An evaluation point, given either in the generating variable `g` or in `z = √(1-4g)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    G(Complex64),
    Z(Complex64),
}

impl Point {
    /// `(g, z)` with `Re z >= 0`. Everything evaluated here is even in `z`.
    fn resolve(self) -> (Complex64, Complex64) {
        let (g, z) = match self {
            Point::G(g) => (g, (Complex64::new(1.0, 0.0) - 4.0 * g).sqrt()),
            Point::Z(z) => ((Complex64::new(1.0, 0.0) - z * z) / 4.0, z),
        };
        if z.re < 0.0 {
            (g, -z)
        } else {
            (g, z)
        }
    }
}

/// `X_m = 2g [(1+z)^m - (1-z)^m] / [(1+z)^{m+1} - (1-z)^{m+1}]`.
///
/// For `m|z| < 1` both brackets are nearly zero, so the odd parts are divided by
/// `2z` exactly and summed as polynomials instead.
pub fn eval_xm(m: u32, point: Point) -> Result<Complex64, AnalyticError> {
    let (g, z) = point.resolve();
    if m == 0 {
        return Ok(Complex64::zero());
    }
    let one = Complex64::new(1.0, 0.0);
    if (m as f64) * z.norm() < 1.0 {
        let num = odd_part_over_z(m, z);
        let den = odd_part_over_z(m + 1, z);
        if den.norm() < 1e-14 * (m as f64 + 1.0) {
            return Err(AnalyticError::AtPole);
        }
        return Ok(2.0 * g * num / den);
    }
    let w = (one - z) / (one + z);
    let den = one - w.powu(m + 1);
    if den.norm() < 1e-13 {
        return Err(AnalyticError::AtPole);
    }
    Ok(2.0 * g / (one + z) * (one - w.powu(m)) / den)
}

/// `[(1+z)^m - (1-z)^m] / (2z) = Σ_{k odd} C(m,k) z^{k-1}`.
fn odd_part_over_z(m: u32, z: Complex64) -> Complex64 {
    let z2 = z * z;
    let mut binom = m as f64;
    let mut power = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::zero();
    let mut k = 1u32;
    while k <= m {
        sum += binom * power;
        if k + 2 > m {
            break;
        }
        binom *= (m - k) as f64 * (m - k - 1) as f64 / ((k + 1) as f64 * (k + 2) as f64);
        power *= z2;
        k += 2;
    }
    sum
}

/// `D_m(z) = (1+z)/2 P + (1-z)/2 P^{-1} - 1` with `P = ((1+z)/(1-z))^m`,
/// evaluated as `2 sinh^2(w/2) + z sinh w`, `w = 2m atanh z`, which keeps full
/// relative accuracy near `z = 0`.
pub fn eval_dm(m: u32, z: Complex64) -> Result<Complex64, AnalyticError> {
    if (z - 1.0).norm() == 0.0 || (z + 1.0).norm() == 0.0 {
        return Err(AnalyticError::AtBranchPoint);
    }
    let w = 2.0 * m as f64 * z.atanh();
    let s = (w / 2.0).sinh();
    Ok(2.0 * s * s + z * w.sinh())
}

/// Exact coefficient families for one `m`:
/// `((1+z)/(1-z))^m = 1 + Σ a_k (2mz)^k`,
/// `D_m = 2m(m+1) z^2 Σ b_{2k} (2mz)^{2k}` and
/// `z^2/D_m = (1/(2m(m+1))) Σ c_{2k} (2mz)^{2k}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WedgeCoefficients {
    pub m: u32,
    /// `a_0..=a_{2k_max+2}`, with `a_0 = 1`.
    pub a: Vec<BigRational>,
    /// `b_{2k}` at index `k`.
    pub b: Vec<BigRational>,
    /// `c_{2k}` at index `k`.
    pub c: Vec<BigRational>,
}

pub fn wedge_coefficients(m: u32, k_max: usize) -> WedgeCoefficients {
    assert!(m >= 1, "wedge coefficients need m >= 1");
    let len = 2 * k_max + 3;
    let mm = BigInt::from(m);
    // (1+z)^m and (1-z)^{-m} as coefficient lists.
    let mut up = vec![BigInt::one()];
    let mut down = vec![BigInt::one()];
    for j in 1..len {
        let j_big = BigInt::from(j);
        let next_up = &up[j - 1] * (&mm - BigInt::from(j - 1)) / &j_big;
        up.push(next_up);
        let next_down = &down[j - 1] * (&mm + BigInt::from(j - 1)) / &j_big;
        down.push(next_down);
    }
    let two_m = BigInt::from(2 * m as u64);
    let mut scale = BigInt::one();
    let mut a = Vec::with_capacity(len);
    for j in 0..len {
        let s: BigInt = (0..=j).map(|i| &up[i] * &down[j - i]).sum();
        a.push(BigRational::new(s, scale.clone()));
        scale *= &two_m;
    }
    let m_plus = BigRational::from_integer(BigInt::from(m as u64 + 1));
    let two_m_q = BigRational::from_integer(two_m);
    let b: Vec<BigRational> = (0..=k_max)
        .map(|k| (&two_m_q * &a[2 * k + 2] + &a[2 * k + 1]) / &m_plus)
        .collect();
    let mut c = vec![BigRational::one()];
    for k in 1..=k_max {
        let mut s = BigRational::zero();
        for l in 0..k {
            s += &c[l] * &b[k - l];
        }
        c.push(-s);
    }
    WedgeCoefficients { m, a, b, c }
}

/// A finite partial sum with a bound on the omitted tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncatedSeries {
    pub value: Complex64,
    pub tail_bound: f64,
    pub terms: u32,
}

/// `W_α^{(n)}(z) = Σ_m m^α/(2m(m+1)) (1 + Σ_{k=1}^n c_{2k}^m (2mz)^{2k})` summed to `m_trunc`.
///
/// The tail bound compares the remaining terms with an integral, using
/// `|c_{2k}^m| <= |A_k| + |c_{2k}^{M} - A_k|` for `m > M`, which is the
/// observed monotone `O(1/m)` approach of `c_{2k}^m` to `A_k`.
pub fn truncated_wn(alpha: f64, n: u32, z: Complex64, m_trunc: u32) -> Result<TruncatedSeries, AnalyticError> {
    let excess = alpha + 2.0 * n as f64 - 1.0;
    if excess >= 0.0 {
        return Err(AnalyticError::Divergent { excess });
    }
    if m_trunc == 0 {
        return Err(AnalyticError::Unsupported("m_trunc must be positive".into()));
    }
    let n = n as usize;
    let mut re = KahanSum::new();
    let mut im = KahanSum::new();
    let mut last_c = vec![0.0; n + 1];
    for m in 1..=m_trunc {
        let mf = m as f64;
        let mut bracket = Complex64::new(1.0, 0.0);
        if n > 0 {
            let c = wedge_coefficients(m, n).c;
            let x2 = (2.0 * mf * z).powu(2);
            let mut power = Complex64::new(1.0, 0.0);
            for (k, ck) in c.iter().enumerate().skip(1) {
                power *= x2;
                let cf = rational_to_f64(ck);
                bracket += cf * power;
                last_c[k] = cf;
            }
        }
        let term = mf.powf(alpha) / (2.0 * mf * (mf + 1.0)) * bracket;
        re.add(term.re);
        im.add(term.im);
    }
    let value = Complex64::new(re.value(), im.value());
    let a = laurent_table(n);
    let big_m = m_trunc as f64;
    let mut tail = big_m.powf(alpha - 1.0) / (2.0 * (1.0 - alpha));
    for k in 1..=n {
        let ak = rational_to_f64(&a[k]);
        let bound = ak.abs() + (last_c[k] - ak).abs();
        let weight = bound * (2.0 * z.norm()).powi(2 * k as i32);
        let p = alpha - 2.0 + 2.0 * k as f64;
        tail += 0.5 * weight * big_m.powf(p + 1.0) / (-p - 1.0);
    }
    Ok(TruncatedSeries {
        value,
        tail_bound: tail,
        terms: m_trunc,
    })
}

/// `W_α` as a function of real `z ∈ (0, 1)`: `Σ_m m^α z^2/D_m(z)`.
pub fn eval_w(alpha: f64, z: f64) -> Result<f64, AnalyticError> {
    if !(z > 0.0 && z < 1.0) {
        return Err(AnalyticError::Unsupported(format!("eval_w needs 0 < z < 1, got {z}")));
    }
    // Terms decay like m^α e^{-2m atanh z}; sum until that envelope is negligible.
    let rate = 2.0 * z.atanh();
    let mut sum = KahanSum::new();
    let mut m = 1u64;
    loop {
        let mf = m as f64;
        let w = rate * mf;
        let s = (w / 2.0).sinh();
        let d = 2.0 * s * s + z * w.sinh();
        let term = mf.powf(alpha) * z * z / d;
        sum.add(term);
        if w > 40.0 + alpha.max(0.0) * mf.ln() && term.abs() < 1e-18 * sum.value().abs() {
            break;
        }
        if !d.is_finite() {
            break;
        }
        m += 1;
    }
    Ok(sum.value())
}

/// `W_{α,M}(g) = Σ_{m=1}^M m^α (X_m - X_{m-1})(g)` on the real axis, by the recursion.
fn truncated_w_real(alpha: f64, big_m: u32, g: f64) -> f64 {
    let mut prev = 0.0;
    let mut x = g;
    let mut sum = 0.0;
    for m in 1..=big_m {
        if m > 1 {
            let next = g / (1.0 - x);
            prev = x;
            x = next;
        }
        sum += (m as f64).powf(alpha) * (x - prev);
    }
    sum
}

/// Residue `r_M = lim_{g -> g_M} (g_M - g) W_{α,M}(g)`, so that
/// `Z_{N,M} ≈ r_M g_M^{-(N+1)}`.
///
/// `h W_{α,M}(g_M - h)` is analytic in `h` on a disc reaching the next pole, so
/// four-point Richardson extrapolation on `h, h/2, h/4, h/8` converges quickly.
pub fn pole_residue(big_m: u32, alpha: f64) -> Result<AnalyticConstant, AnalyticError> {
    let g_m = critical_point(big_m)?;
    let mut reach = f64::INFINITY;
    if big_m >= 3 {
        reach = reach.min(pole_of(big_m - 1, 1) - g_m);
    }
    if big_m >= 4 {
        reach = reach.min(pole_of(big_m, 2) - g_m);
    }
    let h0 = if reach.is_finite() { reach / 64.0 } else { 0.1 };
    let mut table = [[0.0f64; 4]; 4];
    for (j, row) in table.iter_mut().enumerate() {
        let h = h0 / 2f64.powi(j as i32);
        row[0] = h * truncated_w_real(alpha, big_m, g_m - h);
    }
    for k in 1..4 {
        let factor = 2f64.powi(k as i32) - 1.0;
        for j in k..4 {
            table[j][k] = table[j][k - 1] + (table[j][k - 1] - table[j - 1][k - 1]) / factor;
        }
    }
    let value = table[3][3];
    let spread = (table[3][3] - table[3][2]).abs();
    if !value.is_finite() || spread > 1e-6 * value.abs().max(f64::MIN_POSITIVE) {
        return Err(AnalyticError::ExtrapolationUnstable { spread });
    }
    Ok(AnalyticConstant {
        value,
        error_estimate: spread,
        provenance: Provenance::Residue,
        params: ConstantParams {
            alpha: Some(alpha),
            big_m: Some(big_m),
            ..Default::default()
        },
        exact: None,
    })
}
