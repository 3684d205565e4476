//! Numerical foundation: the standard normal distribution and sample
//! quartiles under the two supported conventions.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::scalar::{from_count, lit, Scalar};

/// Smallest sample for which quartiles are defined here.
pub const MIN_QUARTILE_SAMPLE: usize = 4;

/// A validated vector of finite observations, in caller order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample<T> {
    values: Vec<T>,
    source_labels: Option<Vec<String>>,
}

impl<T: Scalar> Sample<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                index,
                value: values[index].to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Sample {
            values,
            source_labels: None,
        })
    }

    /// Attaches one identifier per observation (row ids, names, ...).
    pub fn with_labels(values: Vec<T>, labels: Vec<String>) -> Result<Self> {
        if labels.len() != values.len() {
            return Err(Error::LabelMismatch {
                values: values.len(),
                labels: labels.len(),
            });
        }
        let mut sample = Self::new(values)?;
        sample.source_labels = Some(labels);
        Ok(sample)
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn source_labels(&self) -> Option<&[String]> {
        self.source_labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; kept for API symmetry with slices.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sorted copy of the observations; the sample itself is untouched.
    pub fn sorted(&self) -> Vec<T> {
        let mut sorted = self.values.clone();
        // values are finite, so partial_cmp is total here
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
        sorted
    }

    /// Maps every observation through `x -> scale * x + shift`.
    pub fn affine(&self, scale: T, shift: T) -> Result<Self> {
        let mut out = Self::new(self.values.iter().map(|&x| scale * x + shift).collect())?;
        out.source_labels = self.source_labels.clone();
        Ok(out)
    }
}

/// How sample quartiles are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// Tukey's hinges: medians of the lower and upper halves (the classic
    /// boxplot quartiles).
    #[default]
    Hinges,
    /// Linear interpolation between order statistics at `(n - 1) p + 1`.
    Type7,
}

impl Convention {
    pub fn name(self) -> &'static str {
        match self {
            Convention::Hinges => "hinges",
            Convention::Type7 => "type7",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuartileSummary<T> {
    pub q1: T,
    pub median: T,
    pub q3: T,
    pub iqr: T,
    pub n: usize,
    pub convention: Convention,
}

impl<T: Scalar> QuartileSummary<T> {
    /// Builds a summary from already-known quartiles. Used when fences are
    /// wanted for population values rather than a sample.
    pub fn from_parts(q1: T, median: T, q3: T, n: usize, convention: Convention) -> Result<Self> {
        if !(q1.is_finite() && median.is_finite() && q3.is_finite()) {
            return Err(domain("quartile", q1));
        }
        if !(q1 <= median && median <= q3) {
            return Err(domain("quartile ordering", median));
        }
        Ok(QuartileSummary {
            q1,
            median,
            q3,
            iqr: q3 - q1,
            n,
            convention,
        })
    }
}

/// Computes Q1, median and Q3 on a sorted copy of `sample`.
pub fn quartiles<T: Scalar>(
    sample: &Sample<T>,
    convention: Convention,
) -> Result<QuartileSummary<T>> {
    let n = sample.len();
    if n < MIN_QUARTILE_SAMPLE {
        return Err(Error::InsufficientData {
            required: MIN_QUARTILE_SAMPLE,
            actual: n,
        });
    }
    let sorted = sample.sorted();
    let (q1, median, q3) = match convention {
        Convention::Hinges => {
            // positions doubled so that half-integer depths stay exact
            let depth2 = (n + 3) / 2;
            (
                midpoint_at(&sorted, depth2),
                midpoint_at(&sorted, n + 1),
                midpoint_at(&sorted, 2 * (n + 1) - depth2),
            )
        }
        Convention::Type7 => (
            interpolate_quarter(&sorted, 1),
            interpolate_quarter(&sorted, 2),
            interpolate_quarter(&sorted, 3),
        ),
    };
    Ok(QuartileSummary {
        q1,
        median,
        q3,
        iqr: q3 - q1,
        n,
        convention,
    })
}

/// Mean of the order statistics at floor/ceil of the 1-based depth
/// `twice_depth / 2`.
fn midpoint_at<T: Scalar>(sorted: &[T], twice_depth: usize) -> T {
    let lo = twice_depth / 2;
    let hi = twice_depth.div_ceil(2);
    let (a, b) = (sorted[lo - 1], sorted[hi - 1]);
    if lo == hi {
        a
    } else {
        a + (b - a) / lit(2.0)
    }
}

/// Type 7 quantile at `p = quarters / 4`, with integer bookkeeping for the
/// interpolation position.
fn interpolate_quarter<T: Scalar>(sorted: &[T], quarters: usize) -> T {
    let scaled = (sorted.len() - 1) * quarters;
    let j = scaled / 4;
    let rem = scaled % 4;
    if rem == 0 {
        sorted[j]
    } else {
        let frac: T = from_count::<T>(rem) / lit(4.0);
        sorted[j] + frac * (sorted[j + 1] - sorted[j])
    }
}

/// Standard normal density.
pub fn normal_pdf<T: Scalar>(z: T) -> T {
    let inv_sqrt_2pi: T = lit(0.398_942_280_401_432_7);
    inv_sqrt_2pi * (-(z * z) / lit(2.0)).exp()
}

/// Standard normal CDF, `Φ(z)`.
pub fn normal_cdf<T: Scalar>(z: T) -> Result<T> {
    if !z.is_finite() {
        return Err(domain("z", z));
    }
    Ok(lower_tail(z))
}

/// Upper tail `1 - Φ(z)`, computed without cancellation.
pub fn normal_sf<T: Scalar>(z: T) -> Result<T> {
    if !z.is_finite() {
        return Err(domain("z", z));
    }
    Ok(upper_tail(z))
}

#[inline]
pub(crate) fn lower_tail<T: Scalar>(z: T) -> T {
    (-z * T::FRAC_1_SQRT_2()).erfc() / lit(2.0)
}

#[inline]
pub(crate) fn upper_tail<T: Scalar>(z: T) -> T {
    (z * T::FRAC_1_SQRT_2()).erfc() / lit(2.0)
}

/// Standard normal quantile `Φ⁻¹(p)` for `0 < p < 1`.
///
/// Wichura's AS 241 rational approximation followed by one Newton step
/// against [`normal_cdf`]. In the upper half the correction works on the
/// complement `1 - p`, which is exact there, so accuracy holds up to
/// `p = 1 - 2⁻⁵³`.
pub fn normal_quantile<T: Scalar>(p: T) -> Result<T> {
    if !(p > T::zero() && p < T::one()) {
        return Err(domain("p", p));
    }
    let z = as241(p);
    let density = normal_pdf(z);
    if !density.is_normal() {
        return Ok(z);
    }
    let half: T = lit(0.5);
    let residual = if p < half {
        lower_tail(z) - p
    } else {
        (T::one() - p) - upper_tail(z)
    };
    Ok(z - residual / density)
}

fn horner<T: Scalar>(coeffs: &[f64], x: T) -> T {
    coeffs
        .iter()
        .rev()
        .fold(T::zero(), |acc, &c| acc * x + lit(c))
}

#[allow(clippy::excessive_precision)]
fn as241<T: Scalar>(p: T) -> T {
    const CENTRAL_NUM: [f64; 8] = [
        3.387_132_872_796_366_608_0,
        1.331_416_678_917_843_774_5e2,
        1.971_590_950_306_551_442_7e3,
        1.373_169_376_550_946_112_5e4,
        4.592_195_393_154_987_145_7e4,
        6.726_577_092_700_870_085_3e4,
        3.343_057_558_358_812_810_5e4,
        2.509_080_928_730_122_672_7e3,
    ];
    const CENTRAL_DEN: [f64; 8] = [
        1.0,
        4.231_333_070_160_091_125_2e1,
        6.871_870_074_920_579_083_0e2,
        5.394_196_021_424_751_107_7e3,
        2.121_379_430_158_659_586_7e4,
        3.930_789_580_009_271_061_0e4,
        2.872_908_573_572_194_267_4e4,
        5.226_495_278_852_854_561_0e3,
    ];
    const MID_NUM: [f64; 8] = [
        1.423_437_110_749_683_577_34,
        4.630_337_846_156_545_295_90,
        5.769_497_221_460_691_405_50,
        3.647_848_324_763_204_605_04,
        1.270_458_252_452_368_382_58,
        2.417_807_251_774_506_117_70e-1,
        2.272_384_498_926_918_458_33e-2,
        7.745_450_142_783_414_076_40e-4,
    ];
    const MID_DEN: [f64; 8] = [
        1.0,
        2.053_191_626_637_758_821_87,
        1.676_384_830_183_803_849_40,
        6.897_673_349_851_000_045_50e-1,
        1.481_039_764_274_800_745_90e-1,
        1.519_866_656_361_645_719_66e-2,
        5.475_938_084_995_344_946_00e-4,
        1.050_750_071_644_416_843_24e-9,
    ];
    const TAIL_NUM: [f64; 8] = [
        6.657_904_643_501_103_777_20,
        5.463_784_911_164_114_369_90,
        1.784_826_539_917_291_335_80,
        2.965_605_718_285_048_912_30e-1,
        2.653_218_952_657_612_309_30e-2,
        1.242_660_947_388_078_438_60e-3,
        2.711_555_568_743_487_578_15e-5,
        2.010_334_399_292_288_132_65e-7,
    ];
    const TAIL_DEN: [f64; 8] = [
        1.0,
        5.998_322_065_558_879_376_90e-1,
        1.369_298_809_227_358_053_10e-1,
        1.487_536_129_085_061_485_25e-2,
        7.868_691_311_456_132_591_00e-4,
        1.846_318_317_510_054_681_80e-5,
        1.421_511_758_316_445_888_70e-7,
        2.044_263_103_389_939_785_64e-15,
    ];

    let half: T = lit(0.5);
    let q = p - half;
    if q.abs() <= lit(0.425) {
        let r: T = lit::<T>(0.180_625) - q * q;
        return q * horner(&CENTRAL_NUM, r) / horner(&CENTRAL_DEN, r);
    }
    let tail = if q < T::zero() { p } else { T::one() - p };
    let mut r = (-tail.ln()).sqrt();
    let z = if r <= lit(5.0) {
        r = r - lit(1.6);
        horner(&MID_NUM, r) / horner(&MID_DEN, r)
    } else {
        r = r - lit(5.0);
        horner(&TAIL_NUM, r) / horner(&TAIL_DEN, r)
    };
    if q < T::zero() {
        -z
    } else {
        z
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sample(values: &[f64]) -> Sample<f64> {
        Sample::new(values.to_vec()).unwrap()
    }

    // reference values: 80-digit bisection on mpmath's ncdf
    const CDF_TABLE: [(f64, f64); 10] = [
        (-37.0, 5.725_571_222_524_576_8e-300),
        (-8.0, 6.220_960_574_271_784_1e-16),
        (-3.0, 0.001_349_898_031_630_094_526_7),
        (-1.959964, 0.024_999_999_096_442_404_302),
        (-1.0, 0.158_655_253_931_457_051_41),
        (-0.5, 0.308_537_538_725_986_896_36),
        (0.3, 0.617_911_422_188_952_637_31),
        (1.959964, 0.975_000_000_903_557_595_7),
        (3.0, 0.998_650_101_968_369_905_47),
        (6.0, 0.999_999_999_013_412_354_96),
    ];

    const QUANTILE_TABLE: [(f64, f64); 10] = [
        (1e-300, -37.047_096_299_361_199_237),
        (1e-100, -21.273_453_560_965_324_295),
        (1e-20, -9.262_340_089_798_407_573_7),
        (1e-10, -6.361_340_902_404_056_204_7),
        (0.001, -3.090_232_306_167_813_541_5),
        (0.025, -1.959_963_984_540_054_235_5),
        (0.3, -0.524_400_512_708_040_784_04),
        (0.75, 0.674_489_750_196_081_743_2),
        (0.995, 2.575_829_303_548_900_761),
        (0.9999999, 5.199_337_582_192_816_931_6),
    ];

    #[test]
    fn cdf_matches_high_precision_table() {
        assert_eq!(normal_cdf(0.0).unwrap(), 0.5);
        for &(z, expected) in &CDF_TABLE {
            let got = normal_cdf(z).unwrap();
            assert!(
                (got - expected).abs() <= 1e-12,
                "z={z}: {got} vs {expected}"
            );
            if expected < 1e-3 {
                assert!(
                    ((got - expected) / expected).abs() < 1e-12,
                    "relative at z={z}"
                );
            }
        }
        assert_abs_diff_eq!(normal_cdf(1.959964).unwrap(), 0.975, epsilon = 1e-6);
        assert_abs_diff_eq!(normal_cdf(-3.0).unwrap(), 0.0013499, epsilon = 1e-6);
    }

    #[test]
    fn cdf_rejects_non_finite() {
        assert!(matches!(normal_cdf(f64::NAN), Err(Error::Domain { .. })));
        assert!(normal_cdf(f64::INFINITY).is_err());
        assert!(normal_sf(f64::NEG_INFINITY).is_err());
    }

    #[test]
    fn quantile_matches_high_precision_table() {
        assert_eq!(normal_quantile(0.5).unwrap(), 0.0);
        for &(p, expected) in &QUANTILE_TABLE {
            let got = normal_quantile(p).unwrap();
            assert!(
                ((got - expected) / expected).abs() <= 1e-9,
                "p={p}: {got} vs {expected}"
            );
        }
        let top = 1.0 - f64::EPSILON / 2.0;
        let got = normal_quantile(top).unwrap();
        assert!(
            (got / 8.209_536_151_601_386_855_6 - 1.0).abs() <= 1e-9,
            "{got}"
        );
    }

    #[test]
    fn quantile_domain() {
        for p in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(normal_quantile(p).is_err(), "p={p}");
        }
    }

    #[test]
    fn f32_normal_functions_are_usable() {
        let z: f32 = normal_quantile(0.975f32).unwrap();
        assert!((z - 1.959_964).abs() < 1e-4);
        let p: f32 = normal_cdf(z).unwrap();
        assert!((p - 0.975).abs() < 1e-5);
    }

    #[test]
    fn hinges_on_five_values() {
        let q = quartiles(&sample(&[5.0, 1.0, 4.0, 2.0, 3.0]), Convention::Hinges).unwrap();
        assert_eq!((q.q1, q.median, q.q3, q.iqr), (2.0, 3.0, 4.0, 2.0));
        assert_eq!(q.n, 5);
    }

    #[test]
    fn hinges_on_even_and_seven() {
        let q = quartiles(&sample(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]), Convention::Hinges).unwrap();
        assert_eq!((q.q1, q.median, q.q3), (2.0, 3.5, 5.0));
        let q = quartiles(
            &sample(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]),
            Convention::Hinges,
        )
        .unwrap();
        assert_eq!((q.q1, q.median, q.q3), (2.5, 4.0, 5.5));
    }

    #[test]
    fn type7_on_four_values() {
        let q = quartiles(&sample(&[4.0, 3.0, 2.0, 1.0]), Convention::Type7).unwrap();
        assert_eq!((q.q1, q.median, q.q3), (1.75, 2.5, 3.25));
        assert_eq!(q.iqr, 1.5);
    }

    #[test]
    fn constant_sample_collapses() {
        for conv in [Convention::Hinges, Convention::Type7] {
            let q = quartiles(&sample(&[7.25; 4]), conv).unwrap();
            assert_eq!((q.q1, q.median, q.q3, q.iqr), (7.25, 7.25, 7.25, 0.0));
        }
    }

    #[test]
    fn too_small_sample_rejected() {
        let err = quartiles(&sample(&[1.0, 2.0, 3.0]), Convention::Hinges).unwrap_err();
        assert_eq!(
            err,
            Error::InsufficientData {
                required: 4,
                actual: 3
            }
        );
    }

    #[test]
    fn sample_validation() {
        assert_eq!(Sample::<f64>::new(vec![]).unwrap_err(), Error::EmptySample);
        assert!(matches!(
            Sample::new(vec![1.0, f64::NAN]),
            Err(Error::NonFinite { index: 1, .. })
        ));
        assert!(Sample::with_labels(vec![1.0], vec![]).is_err());
        let s = Sample::with_labels(vec![1.0, 2.0], vec!["a".into(), "b".into()]).unwrap();
        assert_eq!(s.source_labels().unwrap()[1], "b");
    }

    #[test]
    fn quartiles_leave_input_order_alone() {
        let s = sample(&[3.0, 1.0, 2.0, 5.0, 4.0]);
        quartiles(&s, Convention::Type7).unwrap();
        assert_eq!(s.values(), &[3.0, 1.0, 2.0, 5.0, 4.0]);
    }

    #[test]
    fn quartiles_in_f32() {
        let s = Sample::new(vec![1.0f32, 2.0, 3.0, 4.0]).unwrap();
        let q = quartiles(&s, Convention::Type7).unwrap();
        assert_eq!(q.q1, 1.75f32);
    }
}
