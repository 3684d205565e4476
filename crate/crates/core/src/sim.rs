//! Seeded Monte-Carlo harness for contamination and calibration studies.
//!
//! Every replicate draws from its own ChaCha8 stream: the scenario seed
//! keys the generator and the replicate index selects the stream, so a
//! sample is a pure function of `(seed, replicate)`. Replicates run in
//! parallel and are reduced in index order, which keeps results
//! bit-identical for any thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boxstats::analyze;
use crate::error::{Error, Result};
use crate::fences::Method;
use crate::num::{Convention, Sample, MIN_QUARTILE_SAMPLE};

/// Sample sizes of the four-by-four comparison grid.
pub const COMPARISON_SIZES: [usize; 4] = [50, 500, 5_000, 50_000];
pub const DEFAULT_CONTAMINATION_REPLICATES: usize = 200;
pub const DEFAULT_CALIBRATION_REPLICATES: usize = 2_000;

/// Normal data with a few contaminants drawn from a shifted normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub n: usize,
    pub contaminant_count: usize,
    pub contaminant_mean: f64,
    pub contaminant_sd: f64,
    pub null_mean: f64,
    pub null_sd: f64,
    pub replicates: usize,
    pub seed: u64,
}

impl Scenario {
    /// `n - 3` standard normal draws plus three from N(5, 0.5²).
    pub fn contamination(n: usize, seed: u64) -> Self {
        Scenario {
            n,
            contaminant_count: 3,
            contaminant_mean: 5.0,
            contaminant_sd: 0.5,
            null_mean: 0.0,
            null_sd: 1.0,
            replicates: DEFAULT_CONTAMINATION_REPLICATES,
            seed,
        }
    }

    /// Pure N(0, 1) samples.
    pub fn null(n: usize, replicates: usize, seed: u64) -> Self {
        Scenario {
            contaminant_count: 0,
            replicates,
            ..Self::contamination(n, seed)
        }
    }

    pub fn with_replicates(mut self, replicates: usize) -> Self {
        self.replicates = replicates;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidScenario(msg));
        if self.n < MIN_QUARTILE_SAMPLE {
            return fail(format!("n = {} is below {MIN_QUARTILE_SAMPLE}", self.n));
        }
        if self.contaminant_count >= self.n {
            return fail(format!(
                "contaminant_count {} must be below n = {}",
                self.contaminant_count, self.n
            ));
        }
        if self.replicates == 0 {
            return fail("replicates must be at least 1".into());
        }
        for (name, sd) in [
            ("null_sd", self.null_sd),
            ("contaminant_sd", self.contaminant_sd),
        ] {
            if !(sd > 0.0 && sd.is_finite()) {
                return fail(format!("{name} must be positive and finite, got {sd}"));
            }
        }
        for (name, mean) in [
            ("null_mean", self.null_mean),
            ("contaminant_mean", self.contaminant_mean),
        ] {
            if !mean.is_finite() {
                return fail(format!("{name} must be finite, got {mean}"));
            }
        }
        Ok(())
    }

    fn stream(&self, replicate: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(replicate as u64);
        rng
    }
}

/// One generated data set with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedSample {
    pub sample: Sample<f64>,
    /// Positions of the contaminants (the tail of the sample).
    pub contaminants: Vec<usize>,
}

impl GeneratedSample {
    pub fn is_contaminant(&self, index: usize) -> bool {
        index >= self.sample.len() - self.contaminants.len()
    }
}

/// Draws replicate `replicate` of the scenario: null observations first,
/// contaminants appended.
pub fn generate(sc: &Scenario, replicate: usize) -> Result<GeneratedSample> {
    sc.validate()?;
    let mut rng = sc.stream(replicate);
    let null_count = sc.n - sc.contaminant_count;
    let mut values = Vec::with_capacity(sc.n);
    for _ in 0..null_count {
        let z: f64 = StandardNormal.sample(&mut rng);
        values.push(sc.null_mean + sc.null_sd * z);
    }
    for _ in 0..sc.contaminant_count {
        let z: f64 = StandardNormal.sample(&mut rng);
        values.push(sc.contaminant_mean + sc.contaminant_sd * z);
    }
    Ok(GeneratedSample {
        sample: Sample::new(values)?,
        contaminants: (null_count..sc.n).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplicateCount {
    pub total: usize,
    pub true_flagged: usize,
    pub false_flagged: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method<f64>,
    pub mean_flagged_total: f64,
    pub mean_true_flagged: f64,
    pub mean_false_flagged: f64,
    pub replicate_counts: Vec<ReplicateCount>,
}

impl MethodSummary {
    fn from_counts(method: Method<f64>, counts: Vec<ReplicateCount>) -> Self {
        let r = counts.len() as f64;
        let mean = |f: fn(&ReplicateCount) -> usize| counts.iter().map(f).sum::<usize>() as f64 / r;
        MethodSummary {
            method,
            mean_flagged_total: mean(|c| c.total),
            mean_true_flagged: mean(|c| c.true_flagged),
            mean_false_flagged: mean(|c| c.false_flagged),
            replicate_counts: counts,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub scenario: Scenario,
    pub convention: Convention,
    pub methods: Vec<MethodSummary>,
}

impl SimResult {
    pub fn summary(&self, name: &str) -> Option<&MethodSummary> {
        self.methods.iter().find(|m| m.method.name() == name)
    }
}

/// The four rules compared throughout: Tukey (k = 1.5), Chauvenet, Holm and
/// BH at `alpha`.
pub fn standard_methods(alpha: f64) -> Vec<Method<f64>> {
    vec![
        Method::tukey(),
        Method::Chauvenet,
        Method::Holm { alpha },
        Method::Bh { alpha },
    ]
}

/// Applies every method to the same generated sample in each replicate and
/// scores flags against the contaminant positions.
pub fn run(sc: &Scenario, methods: &[Method<f64>], convention: Convention) -> Result<SimResult> {
    sc.validate()?;
    for m in methods {
        m.validate()?;
    }
    let per_replicate: Vec<Vec<ReplicateCount>> = (0..sc.replicates)
        .into_par_iter()
        .map(|r| score_replicate(sc, r, methods, convention))
        .collect::<Result<_>>()?;

    let summaries = methods
        .iter()
        .enumerate()
        .map(|(j, &method)| {
            let counts = per_replicate.iter().map(|row| row[j]).collect();
            MethodSummary::from_counts(method, counts)
        })
        .collect();
    Ok(SimResult {
        scenario: *sc,
        convention,
        methods: summaries,
    })
}

fn score_replicate(
    sc: &Scenario,
    replicate: usize,
    methods: &[Method<f64>],
    convention: Convention,
) -> Result<Vec<ReplicateCount>> {
    let generated = generate(sc, replicate)?;
    methods
        .iter()
        .map(|&method| {
            let stats = analyze(&generated.sample, method, convention)?;
            let true_flagged = stats
                .outliers
                .indices
                .iter()
                .filter(|&&i| generated.is_contaminant(i))
                .count();
            Ok(ReplicateCount {
                total: stats.outliers.len(),
                true_flagged,
                false_flagged: stats.outliers.len() - true_flagged,
            })
        })
        .collect()
}

/// Runs the contamination scenario at each size in `sizes`.
pub fn run_grid(
    sizes: &[usize],
    replicates: usize,
    seed: u64,
    methods: &[Method<f64>],
    convention: Convention,
) -> Result<Vec<SimResult>> {
    sizes
        .iter()
        .map(|&n| {
            let sc = Scenario::contamination(n, seed).with_replicates(replicates);
            run(&sc, methods, convention)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    /// Mean fraction of observations flagged per sample.
    pub rate: f64,
    /// Standard error of `rate`; undefined for a single replicate.
    pub std_error: Option<f64>,
    pub replicates: usize,
}

/// Outside rate per observation of `method` on pure N(0, 1) samples of
/// size `n`.
pub fn outside_rate_oracle(
    method: Method<f64>,
    n: usize,
    replicates: usize,
    seed: u64,
    convention: Convention,
) -> Result<RateEstimate> {
    let sc = Scenario::null(n, replicates, seed);
    let result = run(&sc, &[method], convention)?;
    let rates: Vec<f64> = result.methods[0]
        .replicate_counts
        .iter()
        .map(|c| c.total as f64 / n as f64)
        .collect();
    let r = rates.len() as f64;
    let mean = rates.iter().sum::<f64>() / r;
    let std_error = (rates.len() > 1).then(|| {
        let var = rates.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (r - 1.0);
        (var / r).sqrt()
    });
    Ok(RateEstimate {
        rate: mean,
        std_error,
        replicates,
    })
}
