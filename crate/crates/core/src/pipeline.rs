//! Error-rate controlled fences.
//!
//! The construction runs in four stages:
//!
//! 1. fit a normal null (center and scale) from the sample quartiles,
//! 2. turn every observation into a two-sided p-value under that null,
//! 3. run Holm's step-down (FWER) or Benjamini-Hochberg's step-up (FDR)
//!    procedure to get a per-observation threshold `t_star`,
//! 4. map `t_star` back to the data scale as symmetric fences around the
//!    null center.
//!
//! Holm flags the rejected set exactly; its `t_star = alpha / (m - k)`
//! separates rejected from accepted p-values strictly, so the fence falls
//! between the last rejected and first accepted observation. BH uses
//! `t_star = p_(k)` and flags `p <= t_star`, so the observation that set the
//! threshold sits on the fence and is reported. With no rejections both
//! draw the fences at the most stringent boundary, `alpha / m`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::fences::{FenceSpec, Method};
use crate::num::{normal_quantile, quartiles, Convention, QuartileSummary, Sample};
use crate::scalar::{from_count, lit, Scalar};

/// `2 Φ⁻¹(0.75)`: the interquartile range of a standard normal.
#[allow(clippy::excessive_precision)]
pub const NORMAL_IQR: f64 = 1.348_979_500_392_163_5;

/// Lower bound applied to p-values so extreme deviations stay positive.
pub const P_VALUE_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NullSource {
    /// Center = mid-quartile, scale = IQR / (2 Φ⁻¹(0.75)).
    QuartileRobust,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NullModel<T> {
    pub mu: T,
    pub sigma: T,
    pub source: NullSource,
}

impl<T: Scalar> NullModel<T> {
    pub fn new(mu: T, sigma: T) -> Result<Self> {
        if !mu.is_finite() {
            return Err(domain("mu", mu));
        }
        if !(sigma > T::zero() && sigma.is_finite()) {
            return Err(Error::DegenerateScale);
        }
        Ok(NullModel {
            mu,
            sigma,
            source: NullSource::QuartileRobust,
        })
    }
}

/// Robust normal null from quartiles. Fails when the IQR is zero.
pub fn estimate_null<T: Scalar>(q: &QuartileSummary<T>) -> Result<NullModel<T>> {
    if !(q.iqr > T::zero()) {
        return Err(Error::DegenerateScale);
    }
    let mu = q.q1 + (q.q3 - q.q1) / lit(2.0);
    NullModel::new(mu, q.iqr / lit(NORMAL_IQR))
}

/// Two-sided p-values, one per observation, in sample order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PValueSet<T> {
    p: Vec<T>,
}

impl<T: Scalar> PValueSet<T> {
    /// Wraps raw p-values; each must lie in `(0, 1]`.
    pub fn new(p: Vec<T>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some(&bad) = p.iter().find(|&&v| !(v > T::zero() && v <= T::one())) {
            return Err(domain("p-value", bad));
        }
        Ok(PValueSet { p })
    }

    pub fn values(&self) -> &[T] {
        &self.p
    }

    /// Number of hypotheses.
    pub fn m(&self) -> usize {
        self.p.len()
    }

    fn sorted(&self) -> Vec<T> {
        let mut sorted = self.p.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("p-values are finite"));
        sorted
    }
}

/// `p_i = 2 (1 - Φ(|x_i - mu| / sigma))`, floored at [`P_VALUE_FLOOR`].
pub fn p_values<T: Scalar>(sample: &Sample<T>, null: &NullModel<T>) -> PValueSet<T> {
    let floor = lit::<T>(P_VALUE_FLOOR).max(T::min_positive_value());
    let scale = null.sigma / T::FRAC_1_SQRT_2();
    let p = sample
        .values()
        .iter()
        .map(|&x| {
            // erfc(d / sqrt 2) is the two-sided tail without cancellation
            let tail = ((x - null.mu).abs() / scale).erfc();
            tail.max(floor).min(T::one())
        })
        .collect();
    PValueSet { p }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Procedure {
    Holm,
    Bh,
}

impl Procedure {
    pub fn name(self) -> &'static str {
        match self {
            Procedure::Holm => "holm",
            Procedure::Bh => "bh",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdjustedThreshold<T> {
    /// Effective two-sided per-observation threshold.
    pub t_star: T,
    pub rejected_count: usize,
    pub procedure: Procedure,
    pub alpha: T,
}

impl<T: Scalar> AdjustedThreshold<T> {
    /// Whether a p-value is rejected (flagged) under this threshold.
    pub fn rejects(&self, p: T) -> bool {
        match self.procedure {
            Procedure::Holm => p < self.t_star,
            Procedure::Bh => p <= self.t_star,
        }
    }

    /// Rejection decision for each entry of `pv`, in order.
    pub fn flags(&self, pv: &PValueSet<T>) -> Vec<bool> {
        pv.values().iter().map(|&p| self.rejects(p)).collect()
    }

    pub fn method(&self) -> Method<T> {
        match self.procedure {
            Procedure::Holm => Method::Holm { alpha: self.alpha },
            Procedure::Bh => Method::Bh { alpha: self.alpha },
        }
    }
}

fn check_alpha<T: Scalar>(alpha: T) -> Result<()> {
    if alpha > T::zero() && alpha < T::one() {
        Ok(())
    } else {
        Err(domain("alpha", alpha))
    }
}

/// Holm critical value for the `rank`-th smallest of `m` p-values (1-based).
#[inline]
pub(crate) fn holm_critical<T: Scalar>(alpha: T, rank: usize, m: usize) -> T {
    alpha / from_count::<T>(m - rank + 1)
}

/// Benjamini-Hochberg critical value for rank `rank` of `m` (1-based).
/// The top rank returns `alpha` itself since `alpha * m / m` can round
/// below it.
#[inline]
pub(crate) fn bh_critical<T: Scalar>(alpha: T, rank: usize, m: usize) -> T {
    if rank == m {
        alpha
    } else {
        alpha * from_count::<T>(rank) / from_count::<T>(m)
    }
}

/// Holm's step-down procedure at family-wise level `alpha`.
pub fn holm_adjust<T: Scalar>(pv: &PValueSet<T>, alpha: T) -> Result<AdjustedThreshold<T>> {
    check_alpha(alpha)?;
    let m = pv.m();
    let rejected = pv
        .sorted()
        .iter()
        .enumerate()
        .take_while(|&(i, &p)| p <= holm_critical(alpha, i + 1, m))
        .count();
    let t_star = if rejected < m {
        alpha / from_count::<T>(m - rejected)
    } else {
        T::one()
    };
    Ok(AdjustedThreshold {
        t_star,
        rejected_count: rejected,
        procedure: Procedure::Holm,
        alpha,
    })
}

/// Benjamini-Hochberg step-up procedure at false discovery rate `alpha`.
pub fn bh_adjust<T: Scalar>(pv: &PValueSet<T>, alpha: T) -> Result<AdjustedThreshold<T>> {
    check_alpha(alpha)?;
    let m = pv.m();
    let sorted = pv.sorted();
    let rejected = sorted
        .iter()
        .enumerate()
        .rev()
        .find(|&(i, &p)| p <= bh_critical(alpha, i + 1, m))
        .map_or(0, |(i, _)| i + 1);
    let t_star = if rejected > 0 {
        sorted[rejected - 1]
    } else {
        alpha / from_count::<T>(m)
    };
    Ok(AdjustedThreshold {
        t_star,
        rejected_count: rejected,
        procedure: Procedure::Bh,
        alpha,
    })
}

/// Symmetric data-scale fences `mu ± sigma Φ⁻¹(1 - t_star/2)`.
pub fn fences_from_threshold<T: Scalar>(
    t: &AdjustedThreshold<T>,
    null: &NullModel<T>,
) -> Result<FenceSpec<T>> {
    if !(t.t_star > T::zero() && t.t_star <= T::one()) {
        return Err(domain("t_star", t.t_star));
    }
    let half = t.t_star / lit(2.0);
    let z = -normal_quantile(half)?;
    let w = null.sigma * z.max(T::zero());
    Ok(FenceSpec {
        method: t.method(),
        lower: null.mu - w,
        upper: null.mu + w,
        coefficient: None,
    })
}

/// Every intermediate of one pipeline run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineFit<T> {
    pub summary: QuartileSummary<T>,
    pub null: NullModel<T>,
    pub p_values: PValueSet<T>,
    pub threshold: AdjustedThreshold<T>,
    pub fences: FenceSpec<T>,
}

impl<T: Scalar> PipelineFit<T> {
    /// Flag per observation, as decided by the testing procedure.
    pub fn flags(&self) -> Vec<bool> {
        self.threshold.flags(&self.p_values)
    }
}

/// Quartiles, robust null, p-values, adjustment and fences in one call.
pub fn pipeline<T: Scalar>(
    sample: &Sample<T>,
    procedure: Procedure,
    alpha: T,
    convention: Convention,
) -> Result<PipelineFit<T>> {
    check_alpha(alpha)?;
    let summary = quartiles(sample, convention)?;
    let null = estimate_null(&summary)?;
    let p_values = p_values(sample, &null);
    let threshold = match procedure {
        Procedure::Holm => holm_adjust(&p_values, alpha)?,
        Procedure::Bh => bh_adjust(&p_values, alpha)?,
    };
    let fences = fences_from_threshold(&threshold, &null)?;
    Ok(PipelineFit {
        summary,
        null,
        p_values,
        threshold,
        fences,
    })
}
