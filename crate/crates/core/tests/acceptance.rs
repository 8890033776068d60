//! Acceptance report: one PASS/FAIL line per criterion.
//!
//! Runs the property suite, then both L-shape problems against uniform
//! references at h = 1/512. The experiment part takes about fifteen minutes
//! on one core; run outputs land in `$CARGO_TARGET_TMPDIR/acceptance`.
//!
//! Tolerances below are fixed. A few criteria fail for reasons measured and
//! explained in [`EXPECTED_RED`]; the report still prints them as FAIL, and
//! the process exits non-zero if any line disagrees with that list.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use afem::adapt::AdaptiveConfig;
use afem::bench::{reference_solve, run_experiment, ExperimentConfig, ExperimentReport, ReferenceSolution, RateFit};
use afem::mesh::RefineMode;
use afem::problem::ProblemSpec;
use afem::solver::{ADAPTIVE_EPS, REFERENCE_EPS};

mod common;

const REFERENCE_DIVISIONS: usize = 512;
const TAU: f64 = 1e-3;
const RUNTIME_LIMIT: Duration = Duration::from_secs(600);

const C1_ESTIMATOR: (f64, f64) = (-0.59, -0.43);
const C1_ERROR: (f64, f64) = (-0.62, -0.46);
const C2_ESTIMATOR: (f64, f64) = (-0.50 - 0.08, -0.50 + 0.08);
const C2_ERROR: (f64, f64) = (-0.53 - 0.08, -0.53 + 0.08);
const C2_ITERATIONS: (usize, usize) = (15, 35);
const C3_ESTIMATOR: (f64, f64) = (-0.50 - 0.10, -0.50 + 0.10);
const C3_ERROR: (f64, f64) = (-0.56 - 0.10, -0.56 + 0.10);
const C4_MAX_RATIO: f64 = 1.0 / 3.0;
const C5_BAND: (f64, f64) = (0.04, 0.10);
const C8_MAX_SPREAD: f64 = 10.0;
const C9_MAX_CLOSURE: f64 = 20.0;

/// Lines that fail with the bands above, and why.
const EXPECTED_RED: &[(&str, &str)] = &[
    (
        "1b",
        "error against the h=1/512 reference flattens: that reference is itself off by about 3.5e-4 in H1^2 \
         (Richardson estimate from 1/256 vs 1/512), a third of the final adaptive error",
    ),
    ("2b", "same reference-error floor as 1b"),
    ("4a", "uniform refinement converges at about N^-0.37, the corner-singularity rate, not N^-0.09"),
    ("4b", "uniform refinement converges at about N^-0.44"),
    ("5a", "relative H1 error near 3248 dofs is about 0.8%; the absolute error is about 0.07"),
    ("5b", "relative H1 error near 3070 dofs is about 2.2%"),
];

struct Line {
    id: &'static str,
    what: String,
    pass: bool,
    detail: String,
}

fn within(x: f64, (lo, hi): (f64, f64)) -> bool {
    x >= lo && x <= hi
}

fn slope_line(id: &'static str, what: &str, fit: &Result<RateFit, String>, band: (f64, f64)) -> Line {
    match fit {
        Ok(f) => Line {
            id,
            what: what.into(),
            pass: within(f.slope, band),
            detail: format!(
                "slope {:.4}, band [{:.2}, {:.2}], dofs {}..{} ({} points)",
                f.slope, band.0, band.1, f.n_min, f.n_max, f.points
            ),
        },
        Err(e) => Line { id, what: what.into(), pass: false, detail: format!("no fit: {e}") },
    }
}

struct Reference {
    solution: ReferenceSolution,
    elapsed: Duration,
}

fn reference(example: u32) -> Reference {
    let spec = ProblemSpec::example(example).unwrap();
    let start = Instant::now();
    let solution = reference_solve(&spec, REFERENCE_DIVISIONS, REFERENCE_EPS).unwrap();
    Reference { solution, elapsed: start.elapsed() }
}

fn experiment(example: u32, theta: f64, reference: &Reference, out: &str) -> (ExperimentReport, Duration) {
    let spec = ProblemSpec::example(example).unwrap();
    let adaptive = AdaptiveConfig { theta, tau: TAU, eps_newton: ADAPTIVE_EPS, mode: RefineMode::AllEdges, max_k: 200 };
    let start = Instant::now();
    let report = run_experiment(&spec, &reference.solution, ExperimentConfig::new(example, adaptive)).unwrap();
    let elapsed = start.elapsed();
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance").join(out);
    report.write_outputs(&dir).unwrap();
    eprintln!("{out}: {} iterations in {elapsed:.1?}, outputs in {}", report.run.final_k(), dir.display());
    (report, elapsed)
}

fn property_lines() -> Vec<Line> {
    let ids = ["6.1", "6.2", "6.3", "6.4", "6.5", "6.6", "6.7", "6.8"];
    common::PROPERTY_CHECKS
        .iter()
        .zip(ids)
        .map(|((name, check), id)| {
            let outcome = catch_unwind(AssertUnwindSafe(check));
            Line {
                id,
                what: (*name).into(),
                pass: outcome.is_ok(),
                detail: if outcome.is_ok() { "holds".into() } else { "violated".into() },
            }
        })
        .collect()
}

fn experiment_lines() -> Vec<Line> {
    let ref1 = reference(1);
    let (e1, e1_time) = experiment(1, 0.1, &ref1, "example1_theta0.1");
    let (e1b, _) = experiment(1, 0.3, &ref1, "example1_theta0.3");
    let ref2 = reference(2);
    let (e2, _) = experiment(2, 0.1, &ref2, "example2_theta0.1");
    let mut lines = Vec::new();

    lines.push(slope_line("1a", "example 1, theta 0.1: estimator slope", &e1.estimator_fit, C1_ESTIMATOR));
    lines.push(slope_line("1b", "example 1, theta 0.1: H1 error slope", &e1.error_fit, C1_ERROR));
    let total = ref1.elapsed + e1_time;
    lines.push(Line {
        id: "1c",
        what: "example 1, theta 0.1: runtime".into(),
        pass: total <= RUNTIME_LIMIT,
        detail: format!("{total:.1?} (reference {:.1?}, experiment {e1_time:.1?}), limit {RUNTIME_LIMIT:?}", ref1.elapsed),
    });

    lines.push(slope_line("2a", "example 1, theta 0.3: estimator slope", &e1b.estimator_fit, C2_ESTIMATOR));
    lines.push(slope_line("2b", "example 1, theta 0.3: H1 error slope", &e1b.error_fit, C2_ERROR));
    let k = e1b.run.final_k();
    lines.push(Line {
        id: "2c",
        what: "example 1, theta 0.3: final iteration".into(),
        pass: k >= C2_ITERATIONS.0 && k <= C2_ITERATIONS.1,
        detail: format!("k = {k}, band [{}, {}]", C2_ITERATIONS.0, C2_ITERATIONS.1),
    });

    lines.push(slope_line("3a", "example 2, theta 0.1: estimator slope", &e2.estimator_fit, C3_ESTIMATOR));
    lines.push(slope_line("3b", "example 2, theta 0.1: H1 error slope", &e2.error_fit, C3_ERROR));

    for (id, name, r) in [("4a", "example 1", &e1), ("4b", "example 2", &e2)] {
        let line = match (&r.uniform_fit, &r.error_fit) {
            (Ok(u), Ok(a)) => {
                let ratio = u.slope.abs() / a.slope.abs();
                Line {
                    id,
                    what: format!("{name}: uniform vs adaptive slope"),
                    pass: ratio <= C4_MAX_RATIO,
                    detail: format!("|{:.4}| / |{:.4}| = {ratio:.3}, limit {C4_MAX_RATIO:.3}", u.slope, a.slope),
                }
            }
            _ => Line { id, what: format!("{name}: uniform vs adaptive slope"), pass: false, detail: "no fit".into() },
        };
        lines.push(line);
    }

    for (id, name, r) in [("5a", "example 1", &e1), ("5b", "example 2", &e2)] {
        let line = match r.snapshot {
            Some((dofs, rel)) => Line {
                id,
                what: format!("{name}: snapshot relative H1 error"),
                pass: within(rel, C5_BAND),
                detail: format!("{:.2}% at {dofs} dofs, band [{}%, {}%]", 100.0 * rel, 100.0 * C5_BAND.0, 100.0 * C5_BAND.1),
            },
            None => Line { id, what: format!("{name}: snapshot relative H1 error"), pass: false, detail: "no snapshot".into() },
        };
        lines.push(line);
    }

    lines.push(match e1.contraction {
        Some(c) => Line {
            id: "7",
            what: "example 1, theta 0.1: contraction of E_k + beta eta_k^2".into(),
            pass: c.beta > 0.0 && c.mu < 1.0,
            detail: format!("beta = {:e}, mu = {:.4}, limit 1", c.beta, c.mu),
        },
        None => Line { id: "7", what: "contraction".into(), pass: false, detail: "no beta on the grid".into() },
    });

    let runs = [("example 1 theta 0.1", &e1), ("example 1 theta 0.3", &e1b), ("example 2 theta 0.1", &e2)];
    let spreads: Vec<String> = runs
        .iter()
        .map(|(n, r)| format!("{n}: {}", r.effectivity_spread.map_or("n/a".into(), |s| format!("{s:.3}"))))
        .collect();
    lines.push(Line {
        id: "8",
        what: "effectivity spread from k = 5".into(),
        pass: runs.iter().all(|(_, r)| r.effectivity_spread.is_some_and(|s| s <= C8_MAX_SPREAD)),
        detail: format!("{}, limit {C8_MAX_SPREAD}", spreads.join(", ")),
    });

    let closure = runs.iter().map(|(_, r)| r.closure_max).fold(0.0, f64::max);
    lines.push(Line {
        id: "9",
        what: "closure ratio over all runs".into(),
        pass: closure <= C9_MAX_CLOSURE,
        detail: format!("max {closure:.3}, limit {C9_MAX_CLOSURE}"),
    });
    lines
}

fn main() {
    let mut lines = property_lines();
    lines.extend(experiment_lines());

    println!();
    println!("acceptance report");
    let mut mismatches = Vec::new();
    for line in &lines {
        let expected = EXPECTED_RED.iter().find(|(id, _)| *id == line.id);
        let status = if line.pass { "PASS" } else { "FAIL" };
        println!("criterion {:<4} {status}  {}: {}", line.id, line.what, line.detail);
        if let Some((_, why)) = expected {
            println!("               known: {why}");
        }
        if line.pass == expected.is_some() {
            mismatches.push(line.id);
        }
    }
    let red = lines.iter().filter(|l| !l.pass).count();
    println!("{} of {} lines pass, {red} fail", lines.len() - red, lines.len());
    if !mismatches.is_empty() {
        eprintln!("status differs from the recorded analysis for: {}", mismatches.join(", "));
        std::process::exit(1);
    }
}
