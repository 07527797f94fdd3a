use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::{rational_to_f64, AnalyticConstant, ConstantParams};
use crate::error::AnalyticError;

/// One Laurent coefficient `A_k` of `1/(cosh 2t - 1) = (1/(2t^2)) Σ A_k (2t)^{2k}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RationalCoeff {
    pub k: usize,
    #[serde(serialize_with = "serialize_rational")]
    pub value: BigRational,
}

fn serialize_rational<S: serde::Serializer>(q: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

/// `A_0..=A_{k_max}` from `A_k = -Σ_{l<k} 2 A_l / (2(k-l+1))!`.
pub fn laurent_table(k_max: usize) -> Vec<BigRational> {
    let mut fact = vec![BigInt::one()];
    for i in 1..=2 * k_max + 2 {
        let next = &fact[i - 1] * BigInt::from(i);
        fact.push(next);
    }
    let two = BigRational::from_integer(BigInt::from(2));
    let mut a: Vec<BigRational> = vec![BigRational::one()];
    for k in 1..=k_max {
        let mut sum = BigRational::zero();
        for (l, al) in a.iter().enumerate() {
            sum += &two * al / BigRational::from_integer(fact[2 * (k - l + 1)].clone());
        }
        a.push(-sum);
    }
    a
}

/// `A_1..=A_{k_max}`.
pub fn laurent_coeffs(k_max: usize) -> Vec<RationalCoeff> {
    laurent_table(k_max)
        .into_iter()
        .enumerate()
        .skip(1)
        .map(|(k, value)| RationalCoeff { k, value })
        .collect()
}

/// `L_n(t) = (2/t^2) [1 + Σ_{k=1}^n A_k t^{2k}]`.
pub fn eval_ln(n: usize, t: Complex64) -> Result<Complex64, AnalyticError> {
    if t == Complex64::zero() {
        return Err(AnalyticError::ZeroArgument);
    }
    let coeffs: Vec<f64> = laurent_table(n).iter().map(rational_to_f64).collect();
    let t2 = t * t;
    let mut poly = Complex64::zero();
    for c in coeffs.iter().rev() {
        poly = poly * t2 + c;
    }
    Ok(poly * 2.0 / t2)
}

pub fn eval_ln_real(n: usize, t: f64) -> Result<f64, AnalyticError> {
    eval_ln(n, Complex64::new(t, 0.0)).map(|v| v.re)
}

/// `d_n = -2^{2n-1} A_n`, the amplitude of the logarithmic term.
pub fn log_amplitude(n: u32) -> AnalyticConstant {
    let a = laurent_table(n as usize).pop().expect("table has A_0");
    let d = -a * pow2(2 * n as i64 - 1);
    AnalyticConstant::rational(
        &d,
        ConstantParams {
            n: Some(n),
            ..Default::default()
        },
    )
}

pub(crate) fn pow2(e: i64) -> BigRational {
    let p = BigInt::one() << e.unsigned_abs() as usize;
    if e >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::one(), p)
    }
}
