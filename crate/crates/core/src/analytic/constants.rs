use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use statrs::function::gamma::gamma;

use super::laurent::{laurent_table, pow2};
use super::quadrature::integrate;
use super::{rational_to_f64, AnalyticConstant, ConstantParams, Provenance};
use crate::error::AnalyticError;

/// Default tolerance for the singular amplitudes `c_α`.
pub const DEFAULT_QUAD_TOL: f64 = 1e-12;

/// Split point between the series part and the quadrature part of `c_α`.
const SPLIT: f64 = 1.0;
/// Series terms used on `[0, SPLIT]`; successive terms shrink by about `(SPLIT/π)^2`.
const SERIES_TERMS: usize = 40;

/// Which expansion governs the singular behaviour of `W_α` at `z = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaCase {
    /// `α > 1`: the integral converges without subtraction.
    Convergent,
    /// `-(2n+1) < α < -(2n-1)`: subtract the Laurent polynomial `L_n`.
    Subtracted { n: u32 },
    /// `α = -(2n-1)`: a logarithmic term appears.
    LogCase { n: u32 },
}

pub fn classify_alpha(alpha: f64) -> Result<AlphaCase, AnalyticError> {
    if !alpha.is_finite() {
        return Err(AnalyticError::Unsupported(format!("alpha = {alpha} is not finite")));
    }
    if alpha > 1.0 {
        return Ok(AlphaCase::Convergent);
    }
    let half = (1.0 - alpha) / 2.0;
    let n = half.floor();
    if n > u32::MAX as f64 / 4.0 {
        return Err(AnalyticError::Unsupported(format!("alpha = {alpha} is too negative")));
    }
    if half == n {
        Ok(AlphaCase::LogCase { n: n as u32 })
    } else {
        Ok(AlphaCase::Subtracted { n: n as u32 })
    }
}

pub fn c_alpha(alpha: f64) -> Result<AnalyticConstant, AnalyticError> {
    c_alpha_with_tol(alpha, DEFAULT_QUAD_TOL)
}

/// `c_α = ∫_0^∞ (t^α/(cosh 2t - 1) - t^α L_n(2t)) dt`, with no subtraction for `α > 1`.
///
/// On `[0, 1]` the regularized integrand is a convergent power series times
/// `t^α`, which is integrated term by term. `[1, T*]` goes to adaptive
/// Gauss–Kronrod, and beyond `T*` the subtracted polynomial is integrated in
/// closed form while the exponential part is bounded.
pub fn c_alpha_with_tol(alpha: f64, tol: f64) -> Result<AnalyticConstant, AnalyticError> {
    let subtract = match classify_alpha(alpha)? {
        AlphaCase::Convergent => None,
        AlphaCase::Subtracted { n } => Some(n as usize),
        AlphaCase::LogCase { n } => return Err(AnalyticError::LogCase { alpha, n }),
    };
    let first_kept = subtract.map_or(0, |n| n + 1);
    let table = laurent_table(first_kept + SERIES_TERMS);
    // Integrand terms: coef[k] * t^(α + 2k - 2).
    let coef: Vec<f64> = table
        .iter()
        .enumerate()
        .map(|(k, a)| rational_to_f64(&(a * pow2(2 * k as i64 - 1))))
        .collect();

    let mut near = 0.0;
    let mut near_abs = 0.0;
    let mut last = 0.0;
    for (k, c) in coef.iter().enumerate().skip(first_kept) {
        let p = alpha + 2.0 * k as f64 - 1.0;
        let term = c * SPLIT.powf(p) / p;
        near += term;
        near_abs += term.abs();
        last = term;
    }
    let near_err = 2.0 * last.abs() + near_abs * 4.0 * f64::EPSILON;

    let mut t_star: f64 = 2.0;
    while (-2.0 * t_star).exp() * t_star.powf(alpha.abs()) >= 1e-18 {
        t_star += 1.0;
    }
    let poly = |t: f64| -> f64 {
        match subtract {
            None => 0.0,
            Some(n) => (0..=n).map(|k| coef[k] * t.powf(alpha + 2.0 * k as f64 - 2.0)).sum(),
        }
    };
    let integrand = |t: f64| {
        let s = t.sinh();
        t.powf(alpha) / (2.0 * s * s) - poly(t)
    };
    let mid = integrate(integrand, SPLIT, t_star, tol, tol);

    // -∫_{T*}^∞ of the subtracted polynomial.
    let poly_tail: f64 = match subtract {
        None => 0.0,
        Some(n) => (0..=n)
            .map(|k| {
                let p = alpha + 2.0 * k as f64 - 1.0;
                coef[k] * t_star.powf(p) / p
            })
            .sum(),
    };
    // 1/(2 sinh^2 t) <= 2 e^{-2t} / (1 - e^{-2})^2 for t >= 1.
    let exp_factor = 2.0 / (1.0 - (-2.0f64).exp()).powi(2);
    let exp_tail = exp_factor * t_star.powf(alpha) * (-2.0 * t_star).exp() / (2.0 - alpha.max(0.0) / t_star);

    let value = near + mid.value + poly_tail;
    let error = near_err + mid.error + exp_tail + 4.0 * f64::EPSILON * (near_abs + mid.value.abs() + poly_tail.abs());
    Ok(AnalyticConstant {
        value,
        error_estimate: error,
        provenance: Provenance::Quadrature,
        params: ConstantParams {
            alpha: Some(alpha),
            n: subtract.map(|n| n as u32),
            ..Default::default()
        },
        exact: None,
    })
}

/// `C_α` in `Z_N ~ C_α N^{(α-3)/2} 4^N`.
///
/// `α = 1` sits on the boundary between the two regimes and is rejected; use
/// [`log_case_constant`]`(0)` for the value the logarithmic formula would give there.
pub fn leading_constant(alpha: f64) -> Result<AnalyticConstant, AnalyticError> {
    leading_constant_with_tol(alpha, DEFAULT_QUAD_TOL)
}

/// [`leading_constant`] with an explicit quadrature tolerance for `c_α`.
pub fn leading_constant_with_tol(alpha: f64, tol: f64) -> Result<AnalyticConstant, AnalyticError> {
    match classify_alpha(alpha)? {
        AlphaCase::LogCase { n: 0 } => Err(AnalyticError::Unsupported(
            "alpha = 1 has no leading-constant formula".into(),
        )),
        AlphaCase::LogCase { n } => Ok(log_case_constant(n)),
        AlphaCase::Convergent | AlphaCase::Subtracted { .. } => {
            let c = c_alpha_with_tol(alpha, tol)?;
            let gam = gamma((alpha - 1.0) / 2.0);
            let value = c.value / gam;
            Ok(AnalyticConstant {
                value,
                error_estimate: c.error_estimate / gam.abs() + 1e-13 * value.abs(),
                provenance: Provenance::Quadrature,
                params: c.params,
                exact: None,
            })
        }
    }
}

/// `4^{n-1} |A_n| n!`, the leading constant at `α = -(2n-1)`.
pub fn log_case_constant(n: u32) -> AnalyticConstant {
    let a = laurent_table(n as usize).pop().expect("table has A_0");
    let fact: BigInt = (1..=n as u64).map(BigInt::from).product();
    let value: BigRational = a.abs() * pow2(2 * n as i64 - 2) * BigRational::from_integer(fact);
    AnalyticConstant {
        value: value.to_f64().unwrap_or(f64::NAN),
        error_estimate: 0.0,
        provenance: Provenance::Formula,
        params: ConstantParams {
            alpha: Some(1.0 - 2.0 * n as f64),
            n: Some(n),
            ..Default::default()
        },
        exact: Some(value.to_string()),
    }
}
