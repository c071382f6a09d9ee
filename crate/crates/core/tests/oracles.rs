use trunclife::estimator::{self, profiled_objective, FitConfig, ObservedRecord};
use trunclife::model::{self, Cell, StudyWindow};
use trunclife::oracle::{self, GridSpec};
use trunclife::simulator::{self, SimConfig};

fn win(s: f64, g: f64) -> StudyWindow {
    StudyWindow::new(s, g).unwrap()
}

fn sample(theta0: f64, w: StudyWindow, n: u64, seed: u64) -> Vec<ObservedRecord> {
    let cfg = SimConfig::new(theta0, w, n, seed).unwrap();
    simulator::simulate_sample(&cfg).unwrap().records
}

fn weighted_mean(recs: &[ObservedRecord], f: impl Fn(&ObservedRecord) -> f64) -> f64 {
    let total: f64 = recs.iter().map(|r| r.weight).sum();
    recs.iter().map(|r| r.weight * f(r)).sum::<f64>() / total
}

#[test]
fn objective_equals_weighted_mean_of_record_criteria() {
    let w = win(2.0, 10.0);
    let mut recs = sample(0.3, w, 5_000, 11);
    for (i, r) in recs.iter_mut().enumerate() {
        r.weight = 1.0 + (i % 7) as f64 * 0.5;
    }
    let stats = estimator::summarize(&recs, &w).unwrap();
    for theta in [0.01, 0.1, 0.3, 1.0, 4.0] {
        let direct = weighted_mean(&recs, |r| model::m_value(&r.triple, theta, &w));
        let aggregated = profiled_objective(&stats, theta, &w).unwrap();
        assert!(
            (direct - aggregated).abs() <= 1e-10 * direct.abs().max(1.0),
            "theta {theta}: {direct} vs {aggregated}"
        );
    }
}

#[test]
fn cell_sum_standard_error_matches_per_record_form() {
    for (theta0, s, g, seed) in [
        (0.3, 2.0, 10.0, 3),
        (1.0, 1.0, 3.0, 4),
        (0.08, 2.0, 50.0, 5),
    ] {
        let w = win(s, g);
        let recs = sample(theta0, w, 20_000, seed);
        let stats = estimator::summarize(&recs, &w).unwrap();
        let fit = estimator::fit_mle(&stats, &w, &FitConfig::default()).unwrap();
        let th = fit.theta_hat;
        let score_sq: f64 = recs
            .iter()
            .map(|r| r.weight * model::m_d1(&r.triple, th, &w).powi(2))
            .sum();
        let curvature: f64 = recs
            .iter()
            .map(|r| r.weight * model::m_d2(&r.triple, th, &w))
            .sum();
        let direct = score_sq.sqrt() / curvature.abs();
        assert!(curvature < 0.0);
        assert!(
            (fit.se - direct).abs() <= 1e-8 * direct,
            "{} vs {direct}",
            fit.se
        );
    }
}

#[test]
fn score_vanishes_at_the_estimate() {
    let w = win(2.0, 10.0);
    let recs = sample(0.3, w, 50_000, 8);
    let stats = estimator::summarize(&recs, &w).unwrap();
    let fit = estimator::fit_mle(&stats, &w, &FitConfig::default()).unwrap();
    let score = weighted_mean(&recs, |r| model::m_d1(&r.triple, fit.theta_hat, &w));
    let curvature = weighted_mean(&recs, |r| model::m_d2(&r.triple, fit.theta_hat, &w));
    // one Newton step from the estimate moves it by less than the tolerance
    assert!((score / curvature).abs() < 1e-8, "{score} / {curvature}");
}

#[test]
fn enterprise_fit_agrees_with_grid_search() {
    let stats = trunclife::enterprise::enterprise_stats().unwrap();
    for g in [5.0, 30.0, 200.0] {
        let w = win(2.0, g);
        let fit = estimator::fit_mle(&stats, &w, &FitConfig::default()).unwrap();
        let coarse = GridSpec::linear(0.01, 2.0, 2_000).unwrap();
        let c = oracle::grid_argmax(&stats, &w, &coarse).unwrap();
        let fine = GridSpec::linear(c - coarse.step(), c + coarse.step(), 2_001).unwrap();
        let f = oracle::grid_argmax(&stats, &w, &fine).unwrap();
        assert!(
            (fit.theta_hat - f).abs() <= 2.0 * fine.step(),
            "G {g}: {} vs {f}",
            fit.theta_hat
        );
    }
}

#[test]
fn quadrature_moments_match_large_sample_means() {
    let w = win(2.0, 10.0);
    let theta0 = 0.3;
    let recs = sample(theta0, w, 400_000, 21);
    let q = oracle::quad_obs_moments(theta0, &w).unwrap();
    let m = recs.len() as f64;
    let mean_l = recs.iter().filter(|r| r.triple.l).count() as f64 / m;
    let mean_unc = recs
        .iter()
        .filter(|r| r.triple.cell() == Some(Cell::Uncensored))
        .count() as f64
        / m;
    let mean_y = recs.iter().map(|r| r.triple.y).sum::<f64>() / m;
    let sd = |p: f64| (p * (1.0 - p) / m).sqrt();
    assert!(
        (mean_l - q.e_l).abs() < 4.0 * sd(q.e_l),
        "{mean_l} vs {}",
        q.e_l
    );
    assert!(
        (mean_unc - q.e_unc).abs() < 4.0 * sd(q.e_unc),
        "{mean_unc} vs {}",
        q.e_unc
    );
    // y lies in [0, s], so its sd is at most s / 2
    assert!(
        (mean_y - q.e_y).abs() < 4.0 * (w.s() / 2.0) / m.sqrt(),
        "{mean_y} vs {}",
        q.e_y
    );
}

#[test]
fn observed_indicator_means_follow_closed_forms() {
    for (theta, s, g) in [(0.3, 2.0, 10.0), (0.05, 5.0, 100.0)] {
        let w = win(s, g);
        let a = model::alpha(theta, &w).unwrap();
        let (e_l, e_unc) = model::indicator_moments(theta, &w).unwrap();
        let q = oracle::quad_obs_moments(theta, &w).unwrap();
        // quadrature moments are conditional on observation
        assert!((q.e_l * a - e_l).abs() < 1e-9);
        assert!((q.e_unc * a - e_unc).abs() < 1e-9);
    }
}
