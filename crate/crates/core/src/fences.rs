//! Closed-form fence rules: Tukey's fixed coefficient and the Chauvenet-type
//! coefficient that grows with the sample size.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::num::{normal_quantile, QuartileSummary, MIN_QUARTILE_SAMPLE};
use crate::scalar::{from_count, lit, Scalar};

/// Tukey's standard fence coefficient.
pub const TUKEY_K: f64 = 1.5;

/// Divisor in the Chauvenet-type coefficient, as published (a rounding of
/// `2 Φ⁻¹(0.75) = 1.3489795...`).
pub const CHAUVENET_DIVISOR: f64 = 1.35;

/// An outlier rule together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum Method<T> {
    /// Fixed coefficient `k` (1.5 classically).
    Tukey { k: T },
    /// Coefficient chosen so about half an observation of a normal sample
    /// falls outside, whatever `n` is.
    Chauvenet,
    /// Holm step-down, family-wise error rate `alpha`.
    Holm { alpha: T },
    /// Benjamini-Hochberg step-up, false discovery rate `alpha`.
    Bh { alpha: T },
}

/// Whether an observation sitting exactly on a fence counts as flagged.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Only strictly outside values are flagged.
    Open,
    /// Values on the fence are flagged too.
    Closed,
}

impl<T: Scalar> Method<T> {
    pub fn tukey() -> Self {
        Method::Tukey { k: lit(TUKEY_K) }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::Tukey { .. } => "tukey",
            Method::Chauvenet => "chauvenet",
            Method::Holm { .. } => "holm",
            Method::Bh { .. } => "bh",
        }
    }

    pub fn alpha(&self) -> Option<T> {
        match *self {
            Method::Holm { alpha } | Method::Bh { alpha } => Some(alpha),
            _ => None,
        }
    }

    pub fn boundary(&self) -> Boundary {
        match self {
            Method::Bh { .. } => Boundary::Closed,
            _ => Boundary::Open,
        }
    }

    /// True for the p-value based rules.
    pub fn is_multiple_testing(&self) -> bool {
        matches!(self, Method::Holm { .. } | Method::Bh { .. })
    }

    /// Rejects out-of-range parameters up front.
    pub fn validate(&self) -> Result<()> {
        match *self {
            Method::Tukey { k } if !(k > T::zero() && k.is_finite()) => Err(domain("k", k)),
            Method::Holm { alpha } | Method::Bh { alpha }
                if !(alpha > T::zero() && alpha < T::one()) =>
            {
                Err(domain("alpha", alpha))
            }
            _ => Ok(()),
        }
    }
}

/// Resolved fences on the data scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FenceSpec<T> {
    pub method: Method<T>,
    pub lower: T,
    pub upper: T,
    /// The `k` actually applied, for the coefficient rules.
    pub coefficient: Option<T>,
}

impl<T: Scalar> FenceSpec<T> {
    /// Whether `x` lies outside the fences under the method's boundary
    /// convention.
    pub fn is_outside(&self, x: T) -> bool {
        match self.method.boundary() {
            Boundary::Open => x < self.lower || x > self.upper,
            Boundary::Closed => x <= self.lower || x >= self.upper,
        }
    }
}

/// `Q1 - k·IQR` and `Q3 + k·IQR`.
pub fn tukey_fences<T: Scalar>(q: &QuartileSummary<T>, k: T) -> Result<FenceSpec<T>> {
    let method = Method::Tukey { k };
    method.validate()?;
    Ok(coefficient_fences(q, k, method))
}

fn coefficient_fences<T: Scalar>(q: &QuartileSummary<T>, k: T, method: Method<T>) -> FenceSpec<T> {
    FenceSpec {
        method,
        lower: q.q1 - k * q.iqr,
        upper: q.q3 + k * q.iqr,
        coefficient: Some(k),
    }
}

/// Sample-size-adjusted fence coefficient `Φ⁻¹(1 - 0.25/n)/1.35 - 0.5`.
///
/// Strictly increasing in `n`. Crosses Tukey's 1.5 between `n = 72` and
/// `n = 73`. For `n = 1` the value is marginally negative (about -0.0004);
/// quartile-based callers never reach that case.
pub fn chauvenet_k<T: Scalar>(n: usize) -> Result<T> {
    if n == 0 {
        return Err(domain("n", 0));
    }
    let tail = lit::<T>(0.25) / from_count::<T>(n);
    // upper quantile taken by symmetry to keep precision at large n
    let z = -normal_quantile(tail)?;
    Ok(z / lit(CHAUVENET_DIVISOR) - lit(0.5))
}

/// Tukey-style fences with the coefficient `chauvenet_k(q.n)`.
pub fn chauvenet_fences<T: Scalar>(q: &QuartileSummary<T>) -> Result<FenceSpec<T>> {
    if q.n < MIN_QUARTILE_SAMPLE {
        return Err(Error::InsufficientData {
            required: MIN_QUARTILE_SAMPLE,
            actual: q.n,
        });
    }
    let k = chauvenet_k(q.n)?;
    Ok(coefficient_fences(q, k, Method::Chauvenet))
}
