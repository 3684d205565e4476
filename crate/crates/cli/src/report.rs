//! Outlier reports as JSON, CSV or a fixed-precision text table.
//!
//! The JSON field order is fixed so output is byte-stable across runs and
//! survives a parse/serialize round trip unchanged.

use std::fmt::Write as _;

use boxfence::{BoxplotStats, Convention, Method, Side};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha: Option<f64>,
    pub convention: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quartiles {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub iqr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fences {
    pub lower: f64,
    pub upper: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub coefficient: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Whiskers {
    pub low: f64,
    pub high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flagged {
    pub index: usize,
    pub value: f64,
    pub side: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counts {
    pub low: usize,
    pub high: usize,
}

/// One group's report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub group: Option<String>,
    pub method: String,
    pub params: Params,
    pub n: usize,
    pub quartiles: Quartiles,
    pub fences: Fences,
    pub whiskers: Whiskers,
    pub outliers: Vec<Flagged>,
    pub counts: Counts,
    #[serde(skip_serializing_if = "std::ops::Not::not", default)]
    pub degenerate_scale: bool,
}

/// A group that could not be analyzed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupFailure {
    pub group: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Report(Box<Report>),
    Failure(GroupFailure),
}

fn side_name(side: Side) -> &'static str {
    match side {
        Side::Low => "low",
        Side::High => "high",
    }
}

impl Report {
    pub fn new(group: Option<String>, stats: &BoxplotStats<f64>, convention: Convention) -> Self {
        let method = stats.outliers.method;
        let k = match method {
            Method::Tukey { k } => Some(k),
            _ => None,
        };
        let r = &stats.outliers;
        Report {
            group,
            method: method.name().to_string(),
            params: Params {
                k,
                alpha: method.alpha(),
                convention: convention.name().to_string(),
            },
            n: stats.summary.n,
            quartiles: Quartiles {
                q1: stats.summary.q1,
                median: stats.summary.median,
                q3: stats.summary.q3,
                iqr: stats.summary.iqr,
            },
            fences: Fences {
                lower: stats.fences.lower,
                upper: stats.fences.upper,
                coefficient: stats.fences.coefficient,
                threshold: r.effective_threshold,
            },
            whiskers: Whiskers {
                low: stats.whisker_low,
                high: stats.whisker_high,
            },
            outliers: r
                .indices
                .iter()
                .zip(&r.values)
                .zip(&r.sides)
                .map(|((&index, &value), &side)| Flagged {
                    index,
                    value,
                    side: side_name(side).to_string(),
                })
                .collect(),
            counts: Counts {
                low: r.count_low,
                high: r.count_high,
            },
            degenerate_scale: r.degenerate_scale,
        }
    }
}

/// A single ungrouped report prints as an object, anything else as an
/// array.
pub fn to_json(entries: &[Entry]) -> String {
    let mut out = match entries {
        [Entry::Report(r)] if r.group.is_none() => serde_json::to_string_pretty(r),
        _ => serde_json::to_string_pretty(entries),
    }
    .expect("reports serialize");
    out.push('\n');
    out
}

pub fn to_csv(entries: &[Entry]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "group",
        "index",
        "value",
        "side",
        "method",
        "lower",
        "upper",
        "threshold",
    ])
    .expect("in-memory write");
    for entry in entries {
        let Entry::Report(r) = entry else { continue };
        for o in &r.outliers {
            w.write_record([
                r.group.clone().unwrap_or_default(),
                o.index.to_string(),
                o.value.to_string(),
                o.side.clone(),
                r.method.clone(),
                r.fences.lower.to_string(),
                r.fences.upper.to_string(),
                r.fences
                    .threshold
                    .map(|t| t.to_string())
                    .unwrap_or_default(),
            ])
            .expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

/// `%g`-style formatting with `digits` significant digits.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        format!("{}e{exp}", trim_zeros(mantissa))
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn to_table(entries: &[Entry]) -> String {
    let g = |x: f64| fmt_sig(x, 6);
    let mut out = String::new();
    for (i, entry) in entries.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let r = match entry {
            Entry::Report(r) => r,
            Entry::Failure(f) => {
                let _ = writeln!(out, "group {}: error: {}", f.group, f.error);
                continue;
            }
        };
        if let Some(group) = &r.group {
            let _ = writeln!(out, "group      {group}");
        }
        let mut params = format!("convention={}", r.params.convention);
        if let Some(k) = r.params.k {
            let _ = write!(params, " k={}", g(k));
        }
        if let Some(a) = r.params.alpha {
            let _ = write!(params, " alpha={}", g(a));
        }
        let _ = writeln!(out, "method     {} ({params}) n={}", r.method, r.n);
        let q = &r.quartiles;
        let _ = writeln!(
            out,
            "quartiles  q1={} median={} q3={} iqr={}",
            g(q.q1),
            g(q.median),
            g(q.q3),
            g(q.iqr)
        );
        let mut fences = format!("lower={} upper={}", g(r.fences.lower), g(r.fences.upper));
        if let Some(k) = r.fences.coefficient {
            let _ = write!(fences, " k={}", g(k));
        }
        if let Some(t) = r.fences.threshold {
            let _ = write!(fences, " threshold={}", g(t));
        }
        let _ = writeln!(out, "fences     {fences}");
        let _ = writeln!(
            out,
            "whiskers   low={} high={}",
            g(r.whiskers.low),
            g(r.whiskers.high)
        );
        let _ = writeln!(
            out,
            "outliers   {} (low {}, high {}){}",
            r.outliers.len(),
            r.counts.low,
            r.counts.high,
            if r.degenerate_scale {
                " [degenerate scale]"
            } else {
                ""
            }
        );
        if !r.outliers.is_empty() {
            let _ = writeln!(out, "  {:>8}  {:>12}  side", "index", "value");
            for o in &r.outliers {
                let _ = writeln!(out, "  {:>8}  {:>12}  {}", o.index, g(o.value), o.side);
            }
        }
    }
    out
}
