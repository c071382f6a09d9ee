//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;

use trunclife::dataio;
use trunclife::enterprise;
use trunclife::estimator::{self, FitConfig};
use trunclife::model::StudyWindow;
use trunclife::oracle::{self, registry, Check, GridSpec};
use trunclife::simulator::{self, SimConfig};

const SEED: u64 = 20240601;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
        }
    }

    fn from_checks(checks: &[Check]) -> Self {
        let failed: Vec<_> = checks.iter().filter(|c| !c.passed).collect();
        let detail = if failed.is_empty() {
            format!("{} checks", checks.len())
        } else {
            failed
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join("; ")
        };
        Self::new(failed.is_empty(), detail)
    }
}

fn table_reproduction() -> Outcome {
    let start = Instant::now();
    let rows = enterprise::reproduce(&enterprise::default_spans(), &FitConfig::default()).unwrap();
    let elapsed = start.elapsed();
    let mut misses = Vec::new();
    for r in &rows {
        let v = r.verdicts.unwrap();
        if !v.all() {
            misses.push(format!(
                "G={} theta={:.6} life={:.4} alpha={:.5} se={:.4e}",
                r.g, r.fit.theta_hat, r.fit.life_expectancy, r.fit.alpha_hat, r.fit.se
            ));
        }
    }
    let fast = elapsed < Duration::from_secs(1);
    let detail = format!(
        "{} rows, {} mismatched, {:.3}s {}",
        rows.len(),
        misses.len(),
        elapsed.as_secs_f64(),
        misses.join("; ")
    );
    Outcome::new(misses.is_empty() && fast && rows.len() == 7, detail)
}

fn sufficient_statistics() -> Outcome {
    let st = enterprise::enterprise_stats().unwrap();
    let ok = st.m == 1_028_761.0
        && (st.mean_y - 0.9952764).abs() <= 1e-7
        && (st.mean_l - 0.5456311).abs() <= 1e-7
        && (st.mean_unc - 0.0490221).abs() <= 1e-7;
    let records = dataio::enterprise_records().unwrap().len();
    Outcome::new(
        ok && records == 5,
        format!(
            "m={} mean_y={:.9} mean_l={:.9} mean_unc={:.9} records={records}",
            st.m, st.mean_y, st.mean_l, st.mean_unc
        ),
    )
}

/// Fit against a coarse-then-dense grid search on 50 simulated datasets.
fn estimator_vs_grid() -> Outcome {
    const DENSE_STEP: f64 = 1e-6;
    let windows = registry::WINDOWS;
    let mut worst_steps = 0.0_f64;
    let mut failures = Vec::new();
    for k in 0..50u64 {
        let mut rng = simulator::stream_rng(SEED, 1000 + k);
        let (s, g) = windows[k as usize % windows.len()];
        let w = StudyWindow::new(s, g).unwrap();
        let theta0 = (rng.random_range(0.05f64.ln()..2.0f64.ln())).exp();
        let n = rng.random_range(2_000..20_000u64);
        let cfg = SimConfig::new(theta0, w, n, SEED + k).unwrap();
        let sample = simulator::simulate_sample(&cfg).unwrap();
        let stats = estimator::summarize(&sample.records, &w).unwrap();
        let fit = estimator::fit_mle(&stats, &w, &FitConfig::default()).unwrap();

        let coarse = GridSpec::log(1e-3, 20.0, 4_000).unwrap();
        let c = oracle::grid_argmax(&stats, &w, &coarse).unwrap();
        let half = c * ((20.0f64 / 1e-3).ln() / 3_999.0).exp_m1() * 2.0;
        let (lo, hi) = ((c - half).max(1e-6), c + half);
        let points = ((hi - lo) / DENSE_STEP).ceil() as usize + 1;
        let dense = GridSpec::linear(lo, hi, points).unwrap();
        let d = oracle::grid_argmax(&stats, &w, &dense).unwrap();
        let steps = (fit.theta_hat - d).abs() / dense.step();
        worst_steps = worst_steps.max(steps);
        if steps > 2.0 {
            failures.push(format!("dataset {k}: fit {} grid {d}", fit.theta_hat));
        }
    }
    Outcome::new(
        failures.is_empty(),
        format!(
            "50 datasets, worst |fit - grid| = {worst_steps:.3} steps {}",
            failures.join("; ")
        ),
    )
}

fn monte_carlo_asymptotics() -> Outcome {
    let start = Instant::now();
    let w = StudyWindow::new(2.0, 10.0).unwrap();
    let reps = 500;
    let base =
        simulator::mc_study(&SimConfig::new(0.3, w, 50_000, SEED).unwrap(), reps, 0.95).unwrap();
    let big =
        simulator::mc_study(&SimConfig::new(0.3, w, 200_000, SEED).unwrap(), reps, 0.95).unwrap();
    let elapsed = start.elapsed();

    let coverage_ok = (0.93..=0.97).contains(&base.coverage);
    let bias = (base.mean_theta - 0.3).abs();
    let bias_bound = 3.0 * base.sd_theta / (reps as f64).sqrt();
    let ratio = base.sd_theta / big.sd_theta;
    let ratio_ok = (ratio / 2.0 - 1.0).abs() <= 0.2;
    let failures_ok = base.failures == 0 && big.failures == 0;
    Outcome::new(
        coverage_ok && bias < bias_bound && ratio_ok && failures_ok && elapsed < Duration::from_secs(120),
        format!(
            "coverage={:.3} bias={bias:.2e} (bound {bias_bound:.2e}) sd_ratio={ratio:.3} failures={}+{} {:.1}s",
            base.coverage,
            base.failures,
            big.failures,
            elapsed.as_secs_f64()
        ),
    )
}

fn determinism() -> Outcome {
    let w = StudyWindow::new(2.0, 10.0).unwrap();
    let cfg = SimConfig::new(0.3, w, 100_000, 7).unwrap();
    let csv = || {
        let mut buf = Vec::new();
        dataio::write_records(&simulator::simulate_sample(&cfg).unwrap().records, &mut buf)
            .unwrap();
        buf
    };
    let same_csv = csv() == csv();

    let study_cfg = SimConfig::new(0.3, w, 5_000, 7).unwrap();
    let report = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        let rep = pool.install(|| simulator::mc_study(&study_cfg, 40, 0.95).unwrap());
        (serde_json::to_string(&rep).unwrap(), rep.standardized)
    };
    let (a, b, c) = (report(1), report(4), report(4));
    let same_report = a == b && b == c;
    Outcome::new(
        same_csv && same_report,
        format!("csv identical={same_csv} report identical across 1/4 threads={same_report}"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("1 table reproduction", table_reproduction),
        ("2 sufficient statistics", sufficient_statistics),
        ("3 density normalization", || {
            Outcome::from_checks(&registry::density_mass_checks().unwrap())
        }),
        ("4 derivative oracles", || {
            Outcome::from_checks(&registry::derivative_checks().unwrap())
        }),
        ("5 information properties", || {
            Outcome::from_checks(&registry::eta_checks().unwrap())
        }),
        ("6 estimator vs grid search", estimator_vs_grid),
        ("7 monte carlo asymptotics", monte_carlo_asymptotics),
        ("8 indicator moments", || {
            Outcome::from_checks(&registry::moment_checks(SEED).unwrap())
        }),
        ("9 determinism", determinism),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let out = run();
        let verdict = if out.passed { "PASS" } else { "FAIL" };
        println!("{verdict} criterion {name}: {}", out.detail);
        failed += usize::from(!out.passed);
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
