//! Acceptance checks. Each criterion prints one PASS/FAIL line with the
//! measured values; the process exits non-zero if any fails.

use std::process::Command;
use std::time::Instant;

use boxfence::sim::COMPARISON_SIZES;
use boxfence::{
    bh_adjust, chauvenet_k, holm_adjust, normal_cdf, normal_quantile, quartiles, run, run_grid,
    standard_methods, Convention, Method, PValueSet, Sample, Scenario, SimResult,
};
use boxfence_cli::report::{to_json, Entry};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// Root of `normal_cdf(z) = target` by bisection on [-40, 40].
fn bisect_quantile(target: f64) -> f64 {
    let (mut lo, mut hi) = (-40.0_f64, 40.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if normal_cdf(mid).unwrap() < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn criterion_1() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for n in [50usize, 50_000] {
        let oracle = bisect_quantile(1.0 - 0.25 / n as f64) / 1.35 - 0.5;
        let k: f64 = chauvenet_k(n).unwrap();
        let diff = (k - oracle).abs();
        pass &= diff <= 1e-4;
        lines.push(format!(
            "k({n}) = {k:.6}, oracle {oracle:.6}, |diff| = {diff:.1e}"
        ));
    }
    let detail = format!(
        "{}; tolerance 1e-4 (quoted constants 1.407281 and 2.47739 are not what the coefficient formula gives)",
        lines.join(", ")
    );
    outcome(pass, detail)
}

fn mean_total(result: &SimResult) -> f64 {
    result.methods[0].mean_flagged_total
}

fn criterion_2() -> Outcome {
    let mut means = Vec::new();
    for (i, n) in [100usize, 1_000, 10_000].into_iter().enumerate() {
        let sc = Scenario::null(n, 2_000, 1_000 + i as u64);
        let result = run(&sc, &[Method::Chauvenet], Convention::Hinges).unwrap();
        means.push((n, mean_total(&result)));
    }
    let in_band = means.iter().all(|&(_, m)| (0.25..=0.9).contains(&m));
    let lo = means.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
    let hi = means.iter().map(|m| m.1).fold(f64::NEG_INFINITY, f64::max);
    let spread = hi - lo;
    let shown: Vec<String> = means
        .iter()
        .map(|(n, m)| format!("n={n}: {m:.3}"))
        .collect();
    outcome(
        in_band && spread < 0.4,
        format!(
            "Chauvenet mean flagged, 2000 replicates: {}; band [0.25, 0.9]; spread {spread:.3} < 0.4",
            shown.join(", ")
        ),
    )
}

fn criterion_3() -> Outcome {
    let n = 10_000;
    let sc = Scenario::null(n, 200, 2_024);
    let result = run(
        &sc,
        &[Method::tukey(), Method::Chauvenet],
        Convention::Hinges,
    )
    .unwrap();
    let tukey = result.summary("tukey").unwrap();
    let chauvenet = result.summary("chauvenet").unwrap();
    let rate = tukey.mean_flagged_total / n as f64;
    let analytic = 2.0 * normal_cdf(-(normal_quantile(0.75).unwrap() * 4.0)).unwrap();
    let pass = (rate - 0.0070).abs() <= 0.0015
        && tukey.mean_false_flagged >= 50.0
        && chauvenet.mean_false_flagged <= 2.0;
    outcome(
        pass,
        format!(
            "n=10000, 200 replicates: Tukey rate {rate:.5} (target 0.0070 +/- 0.0015, analytic {analytic:.5}), \
             Tukey mean false {:.1} >= 50, Chauvenet mean false {:.2} <= 2",
            tukey.mean_false_flagged, chauvenet.mean_false_flagged
        ),
    )
}

fn criterion_4(grid: &[SimResult]) -> Outcome {
    let mut pass = true;
    let mut misses = Vec::new();
    let mut cells = Vec::new();
    for r in grid {
        let n = r.scenario.n;
        for m in &r.methods {
            let name = m.method.name();
            cells.push(format!(
                "{name}@{n} {:.2}/{:.2}",
                m.mean_true_flagged, m.mean_false_flagged
            ));
            if name == "tukey" {
                if n == 50_000 && m.mean_false_flagged <= 100.0 {
                    pass = false;
                    misses.push(format!(
                        "tukey@{n} false {:.1} <= 100",
                        m.mean_false_flagged
                    ));
                }
                continue;
            }
            if m.mean_true_flagged < 2.5 {
                pass = false;
                misses.push(format!("{name}@{n} true {:.2} < 2.5", m.mean_true_flagged));
            }
            if m.mean_false_flagged > 1.5 {
                pass = false;
                misses.push(format!(
                    "{name}@{n} false {:.2} > 1.5",
                    m.mean_false_flagged
                ));
            }
        }
    }
    let mut detail = format!("50 replicates, true/false per cell: {}", cells.join(", "));
    if !misses.is_empty() {
        detail.push_str(&format!("; misses: {}", misses.join(", ")));
    }
    outcome(pass, detail)
}

/// Definitional Holm: reject ranks before the first `p(i) > alpha/(m-i+1)`.
fn brute_holm(p: &[f64], alpha: f64) -> Vec<bool> {
    let m = p.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p[a].total_cmp(&p[b]));
    let mut flags = vec![false; m];
    for (i, &idx) in order.iter().enumerate() {
        if p[idx] > alpha / (m - i) as f64 {
            break;
        }
        flags[idx] = true;
    }
    flags
}

/// Definitional BH: reject ranks up to the largest `i` with
/// `p(i) <= alpha*i/m` (exactly `alpha` at `i = m`).
fn brute_bh(p: &[f64], alpha: f64) -> Vec<bool> {
    let m = p.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p[a].total_cmp(&p[b]));
    let critical = |i: usize| {
        if i == m {
            alpha
        } else {
            alpha * i as f64 / m as f64
        }
    };
    let last = (1..=m).filter(|&i| p[order[i - 1]] <= critical(i)).max();
    let mut flags = vec![false; m];
    if let Some(k) = last {
        for &idx in &order[..k] {
            flags[idx] = true;
        }
    }
    flags
}

fn random_p_vector(rng: &mut ChaCha8Rng, alpha: f64) -> Vec<f64> {
    let m = rng.random_range(1..=10);
    let mut p = Vec::with_capacity(m);
    for _ in 0..m {
        let v = match rng.random_range(0..4) {
            0 => rng.random_range(f64::MIN_POSITIVE..=1.0),
            1 => 10f64.powf(-rng.random_range(0.0..8.0)),
            // exact critical values of either procedure
            2 => {
                let i = rng.random_range(1..=m);
                if rng.random_bool(0.5) {
                    alpha / (m - i + 1) as f64
                } else {
                    alpha * i as f64 / m as f64
                }
            }
            _ => [0.001, 0.004, 0.01, 0.02, 0.03, 0.5][rng.random_range(0..6)],
        };
        p.push(v);
    }
    if m > 1 && rng.random_bool(0.3) {
        let (a, b) = (rng.random_range(0..m), rng.random_range(0..m));
        p[a] = p[b];
    }
    p
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let trials = 10_000;
    let (mut holm_mismatch, mut bh_mismatch, mut not_nested) = (0, 0, 0);
    for _ in 0..trials {
        let alpha = [0.05, 0.1, 0.01, rng.random_range(0.001..0.5)][rng.random_range(0..4)];
        let p = random_p_vector(&mut rng, alpha);
        let set = PValueSet::new(p.clone()).unwrap();
        let holm = holm_adjust(&set, alpha).unwrap().flags(&set);
        let bh = bh_adjust(&set, alpha).unwrap().flags(&set);
        holm_mismatch += usize::from(holm != brute_holm(&p, alpha));
        bh_mismatch += usize::from(bh != brute_bh(&p, alpha));
        not_nested += usize::from(holm.iter().zip(&bh).any(|(&h, &b)| h && !b));
    }
    outcome(
        holm_mismatch == 0 && bh_mismatch == 0 && not_nested == 0,
        format!(
            "{trials} vectors (m <= 10, ties and boundary values): Holm mismatches {holm_mismatch}, \
             BH mismatches {bh_mismatch}, Holm not within BH {not_nested}"
        ),
    )
}

fn median_of(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Hinges as medians of the lower and upper halves, each half including
/// the median when `n` is odd.
fn brute_hinges(sorted: &[f64]) -> (f64, f64, f64) {
    let n = sorted.len();
    let half = n.div_ceil(2);
    (
        median_of(&sorted[..half]),
        median_of(sorted),
        median_of(&sorted[n - half..]),
    )
}

fn brute_type7(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let mut worst_round_trip = 0.0_f64;
    for i in 0..100_000 {
        let p = match i % 4 {
            0 | 1 => rng.random_range(1e-10..=1.0 - 1e-10),
            2 => 10f64.powf(-rng.random_range(0.3..10.0)),
            _ => 1.0 - 10f64.powf(-rng.random_range(0.3..10.0)),
        };
        let back = normal_cdf(normal_quantile(p).unwrap()).unwrap();
        worst_round_trip = worst_round_trip.max((back - p).abs());
    }

    let mut worst_quartile = 0.0_f64;
    let mut samples = 0;
    for n in 4..=60 {
        for s in 0..1_000 {
            let values: Vec<f64> = if s % 5 == 0 {
                (0..n).map(|_| rng.random_range(0..6) as f64).collect()
            } else {
                (0..n)
                    .map(|_| rng.sample::<f64, _>(StandardNormal))
                    .collect()
            };
            let sample = Sample::new(values).unwrap();
            let sorted = sample.sorted();
            let h = quartiles(&sample, Convention::Hinges).unwrap();
            let (b1, bm, b3) = brute_hinges(&sorted);
            let t = quartiles(&sample, Convention::Type7).unwrap();
            let diffs = [
                h.q1 - b1,
                h.median - bm,
                h.q3 - b3,
                t.q1 - brute_type7(&sorted, 0.25),
                t.median - brute_type7(&sorted, 0.5),
                t.q3 - brute_type7(&sorted, 0.75),
            ];
            worst_quartile = diffs.iter().fold(worst_quartile, |w, d| w.max(d.abs()));
            samples += 1;
        }
    }
    outcome(
        worst_round_trip <= 1e-10 && worst_quartile <= 1e-12,
        format!(
            "quantile round trip over 1e5 p: max error {worst_round_trip:.2e} <= 1e-10; \
             quartiles (hinges, type 7) on {samples} samples, n in [4, 60]: max deviation {worst_quartile:.1e} <= 1e-12"
        ),
    )
}

fn criterion_7(grid: &[SimResult]) -> Outcome {
    let mut pass = true;
    let mut cells = Vec::new();
    for r in grid {
        let holm = r.summary("holm").unwrap().mean_flagged_total;
        let bh = r.summary("bh").unwrap().mean_flagged_total;
        pass &= holm <= bh;
        cells.push(format!("n={}: {holm:.2} <= {bh:.2}", r.scenario.n));
    }
    outcome(
        pass,
        format!("Holm vs BH mean flagged total: {}", cells.join(", ")),
    )
}

fn binary(args: &[&str]) -> (bool, Vec<u8>) {
    let output = Command::new(env!("CARGO_BIN_EXE_boxfence"))
        .args(args)
        .output()
        .expect("binary runs");
    (output.status.success(), output.stdout)
}

fn criterion_8() -> Outcome {
    let base = ["compare", "--seed", "7", "--replicates", "5"];
    let (ok_a, a) = binary(&base);
    let (ok_b, b) = binary(&base);
    let with_threads = |t: &str| {
        let mut args = vec!["--threads", t];
        args.extend(base);
        binary(&args)
    };
    let (ok_1, one) = with_threads("1");
    let (ok_4, four) = with_threads("4");
    let compare_ok =
        ok_a && ok_b && ok_1 && ok_4 && !a.is_empty() && a == b && a == one && a == four;

    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let mut csv = String::from("g,x\n");
    for i in 0..300 {
        let v: f64 = rng.sample(StandardNormal);
        csv.push_str(&format!(
            "{},{}\n",
            ["a", "b", "c"][i % 3],
            v * 3.7 + 1.0 / 3.0
        ));
    }
    csv.push_str("a,25.5\nb,-19.25\n");
    let path = dir.path().join("data.csv");
    std::fs::write(&path, csv).unwrap();
    let path = path.to_str().unwrap();
    let mut round_trips = 0;
    let mut stable = true;
    for method in ["tukey", "chauvenet", "holm", "bh"] {
        for grouped in [false, true] {
            let mut args = vec![
                "detect", "--input", path, "--column", "x", "--method", method,
            ];
            if grouped {
                args.extend(["--group-column", "g"]);
            }
            let (ok, out) = binary(&args);
            let text = String::from_utf8(out).unwrap();
            let again = if grouped {
                serde_json::from_str::<Vec<Entry>>(&text).map(|e| to_json(&e))
            } else {
                serde_json::from_str::<Entry>(&text).map(|e| to_json(&[e]))
            };
            stable &= ok && again.map(|t| t == text).unwrap_or(false);
            round_trips += 1;
        }
    }
    outcome(
        compare_ok && stable,
        format!(
            "compare --seed 7 --replicates 5 identical across 2 runs and --threads 1/4: {compare_ok}; \
             {round_trips} detect JSON reports round-trip byte-stably: {stable}"
        ),
    )
}

fn main() {
    let started = Instant::now();
    let grid_start = Instant::now();
    let grid = run_grid(
        &COMPARISON_SIZES,
        50,
        4,
        &standard_methods(0.05),
        Convention::Hinges,
    )
    .unwrap();
    let grid_secs = grid_start.elapsed().as_secs_f64();

    let checks: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        (
            "1 Chauvenet coefficient vs bisection oracle",
            Box::new(criterion_1),
        ),
        (
            "2 Chauvenet calibration on normal data",
            Box::new(criterion_2),
        ),
        ("3 Tukey breakdown at n = 10^4", Box::new(criterion_3)),
        (
            "4 contamination grid counts",
            Box::new(|| criterion_4(&grid)),
        ),
        ("5 Holm and BH vs brute force", Box::new(criterion_5)),
        (
            "6 quantile round trip and quartile oracles",
            Box::new(criterion_6),
        ),
        (
            "7 Holm no more liberal than BH",
            Box::new(|| criterion_7(&grid)),
        ),
        (
            "8 CLI determinism and JSON round trip",
            Box::new(criterion_8),
        ),
    ];
    println!("grid simulation (4 sizes x 4 methods x 50 replicates): {grid_secs:.1}s");
    let mut failed = 0;
    for (name, check) in &checks {
        let t = Instant::now();
        let o = check();
        failed += usize::from(!o.pass);
        println!(
            "{} criterion {name} ({:.1}s): {}",
            if o.pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            o.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        checks.len() - failed,
        started.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
