//! Closed-form objects around the height-weighted generating function.
//!
//! Exact rationals where the recursions are exact (Laurent coefficients of
//! `1/(cosh 2t - 1)`, the coefficient families of `((1+z)/(1-z))^m`), and
//! double precision with explicit error estimates for everything that needs a
//! limit or an integral.

mod constants;
mod functions;
mod laurent;
mod quadrature;

use num_rational::BigRational;
use serde::Serialize;

pub use constants::{
    c_alpha, c_alpha_with_tol, classify_alpha, leading_constant, leading_constant_with_tol, log_case_constant, AlphaCase,
    DEFAULT_QUAD_TOL,
};
pub use functions::{
    critical_point, eval_dm, eval_w, eval_xm, pole_residue, truncated_wn, wedge_coefficients, Point,
    TruncatedSeries, WedgeCoefficients,
};
pub use laurent::{eval_ln, eval_ln_real, laurent_coeffs, laurent_table, log_amplitude, RationalCoeff};
pub use quadrature::{integrate, Quadrature};

/// Bound on the wedge coefficients, `2e^2`. Exposed for bound checks only.
pub const K: f64 = 2.0 * std::f64::consts::E * std::f64::consts::E;

/// `2(e^3 + 1)`. Exposed for bound checks only.
pub const L: f64 = 2.0 * (std::f64::consts::E * std::f64::consts::E * std::f64::consts::E + 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    RationalRecursion,
    Quadrature,
    Residue,
    Formula,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ConstantParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    pub big_m: Option<u32>,
}

/// A computed constant together with how it was obtained.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticConstant {
    pub value: f64,
    pub error_estimate: f64,
    pub provenance: Provenance,
    pub params: ConstantParams,
    /// The exact value as `"p/q"` when the constant is rational.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
}

impl AnalyticConstant {
    fn rational(value: &BigRational, params: ConstantParams) -> Self {
        AnalyticConstant {
            value: rational_to_f64(value),
            error_estimate: 0.0,
            provenance: Provenance::RationalRecursion,
            params,
            exact: Some(value.to_string()),
        }
    }
}

pub(crate) fn rational_to_f64(q: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or(f64::NAN)
}
