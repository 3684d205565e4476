//! Boxplot-based outlier detection.
//!
//! Four rules share one set of quartile and normal-distribution primitives:
//!
//! * **Tukey**: fences at `Q1 - k·IQR` and `Q3 + k·IQR` with a fixed `k`
//!   (1.5 by default). Simple, but the number of flagged points grows
//!   linearly with the sample size.
//! * **Chauvenet**: the same fences with `k = Φ⁻¹(1 - 0.25/n)/1.35 - 0.5`,
//!   so about half an observation of normal data falls outside regardless
//!   of `n`.
//! * **Holm**: fences derived from quartile-based p-values and Holm's
//!   step-down procedure, controlling the family-wise error rate.
//! * **BH**: the same p-values with Benjamini-Hochberg's step-up procedure,
//!   controlling the false discovery rate.
//!
//! Small samples (a few dozen points) are well served by any rule; Holm is
//! the most conservative. For moderate sizes Chauvenet and BH balance
//! sensitivity and false flags. For large samples avoid fixed-`k` fences.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the
//! simulation harness works in `f64`. Aliases for the common `f64` types are
//! exported at the crate root.

pub mod boxstats;
pub mod error;
pub mod fences;
pub mod num;
pub mod pipeline;
pub mod scalar;
pub mod sim;

pub use boxstats::{
    analyze, analyze_groups, analyze_groups_strict, BoxplotStats, GroupStats, OutlierReport, Side,
};
pub use error::{Error, Result};
pub use fences::{
    chauvenet_fences, chauvenet_k, tukey_fences, Boundary, FenceSpec, Method, TUKEY_K,
};
pub use num::{
    normal_cdf, normal_pdf, normal_quantile, normal_sf, quartiles, Convention, QuartileSummary,
    Sample,
};
pub use pipeline::{
    bh_adjust, estimate_null, fences_from_threshold, holm_adjust, p_values, pipeline,
    AdjustedThreshold, NullModel, PValueSet, PipelineFit, Procedure,
};
pub use scalar::Scalar;
pub use sim::{
    generate, outside_rate_oracle, run, run_grid, standard_methods, GeneratedSample, MethodSummary,
    RateEstimate, Scenario, SimResult,
};

pub type Sample64 = Sample<f64>;
pub type Sample32 = Sample<f32>;
pub type Method64 = Method<f64>;
pub type QuartileSummary64 = QuartileSummary<f64>;
pub type FenceSpec64 = FenceSpec<f64>;
pub type BoxplotStats64 = BoxplotStats<f64>;
pub type BoxplotStats32 = BoxplotStats<f32>;
pub type OutlierReport64 = OutlierReport<f64>;
