//! Full boxplot statistics (box, whiskers, fences, outlier report) for any
//! of the four rules.

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::fences::{chauvenet_fences, tukey_fences, FenceSpec, Method};
use crate::num::{quartiles, Convention, QuartileSummary, Sample};
use crate::pipeline::{pipeline, Procedure};
use crate::scalar::{lit, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Low,
    High,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutlierReport<T> {
    /// Positions in the original sample, ascending.
    pub indices: Vec<usize>,
    pub values: Vec<T>,
    pub sides: Vec<Side>,
    pub method: Method<T>,
    /// `t_star` for the multiple-testing rules.
    pub effective_threshold: Option<T>,
    pub count_low: usize,
    pub count_high: usize,
    /// Set when the IQR is zero but the values are not all equal: every
    /// value different from the median is flagged.
    pub degenerate_scale: bool,
}

impl<T> OutlierReport<T> {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxplotStats<T> {
    pub summary: QuartileSummary<T>,
    pub fences: FenceSpec<T>,
    pub whisker_low: T,
    pub whisker_high: T,
    pub outliers: OutlierReport<T>,
}

impl<T: Scalar> BoxplotStats<T> {
    /// Smallest and largest observation in the sample.
    pub fn data_range(&self) -> (T, T) {
        self.outliers
            .values
            .iter()
            .fold((self.whisker_low, self.whisker_high), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// Computes box, fences, whiskers and flagged observations.
///
/// Tukey, Chauvenet and Holm flag values strictly outside the fences; BH
/// also flags the value sitting on the fence. Whiskers end at the most
/// extreme unflagged observation, or at the box edge when there is none on
/// that side.
pub fn analyze<T: Scalar>(
    sample: &Sample<T>,
    method: Method<T>,
    convention: Convention,
) -> Result<BoxplotStats<T>> {
    method.validate()?;
    let summary = quartiles(sample, convention)?;
    let values = sample.values();

    let (fences, flags, threshold) = match method {
        Method::Tukey { k } => {
            let f = tukey_fences(&summary, k)?;
            (f, flag_outside(values, &f), None)
        }
        Method::Chauvenet => {
            let f = chauvenet_fences(&summary)?;
            (f, flag_outside(values, &f), None)
        }
        Method::Holm { alpha } | Method::Bh { alpha } => {
            let procedure = if matches!(method, Method::Holm { .. }) {
                Procedure::Holm
            } else {
                Procedure::Bh
            };
            if summary.iqr > T::zero() {
                let fit = pipeline(sample, procedure, alpha, convention)?;
                let flags = fit.flags();
                (fit.fences, flags, Some(fit.threshold.t_star))
            } else {
                let m = summary.median;
                let f = FenceSpec {
                    method,
                    lower: m,
                    upper: m,
                    coefficient: None,
                };
                let flags: Vec<bool> = values.iter().map(|&x| x != m).collect();
                (f, flags, None)
            }
        }
    };
    let degenerate = summary.iqr == T::zero() && values.iter().any(|&x| x != summary.median);

    let center = if summary.iqr == T::zero() {
        summary.median
    } else {
        fences.lower + (fences.upper - fences.lower) / lit(2.0)
    };
    let mut outliers = OutlierReport {
        indices: Vec::new(),
        values: Vec::new(),
        sides: Vec::new(),
        method,
        effective_threshold: threshold,
        count_low: 0,
        count_high: 0,
        degenerate_scale: degenerate,
    };
    let mut whisker_low = summary.q1;
    let mut whisker_high = summary.q3;
    for (i, (&x, flagged)) in values.iter().zip(flags).enumerate() {
        if flagged {
            let side = if x < center { Side::Low } else { Side::High };
            match side {
                Side::Low => outliers.count_low += 1,
                Side::High => outliers.count_high += 1,
            }
            outliers.indices.push(i);
            outliers.values.push(x);
            outliers.sides.push(side);
        } else {
            whisker_low = whisker_low.min(x);
            whisker_high = whisker_high.max(x);
        }
    }

    Ok(BoxplotStats {
        summary,
        fences,
        whisker_low,
        whisker_high,
        outliers,
    })
}

fn flag_outside<T: Scalar>(values: &[T], fences: &FenceSpec<T>) -> Vec<bool> {
    values.iter().map(|&x| fences.is_outside(x)).collect()
}

/// Result of analyzing one labeled group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupStats<T> {
    pub label: String,
    pub stats: Result<BoxplotStats<T>>,
}

impl<T: Serialize> Serialize for GroupStats<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("GroupStats", 2)?;
        st.serialize_field("label", &self.label)?;
        match &self.stats {
            Ok(stats) => st.serialize_field("stats", stats)?,
            Err(e) => st.serialize_field("error", &e.to_string())?,
        }
        st.end()
    }
}

/// Analyzes each group on its own: per-group `n` drives the Chauvenet
/// coefficient and the number of tests. A failing group keeps its label and
/// error; the others are unaffected. Output order follows input order.
pub fn analyze_groups<T: Scalar>(
    groups: &[(String, Sample<T>)],
    method: Method<T>,
    convention: Convention,
) -> Vec<GroupStats<T>> {
    groups
        .par_iter()
        .map(|(label, sample)| GroupStats {
            label: label.clone(),
            stats: analyze(sample, method, convention),
        })
        .collect()
}

/// Convenience for callers that want the first failure as an error.
pub fn analyze_groups_strict<T: Scalar>(
    groups: &[(String, Sample<T>)],
    method: Method<T>,
    convention: Convention,
) -> Result<Vec<(String, BoxplotStats<T>)>> {
    analyze_groups(groups, method, convention)
        .into_iter()
        .map(|g| g.stats.map(|s| (g.label, s)))
        .collect::<Result<Vec<_>, Error>>()
}
