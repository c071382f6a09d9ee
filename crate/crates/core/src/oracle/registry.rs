//! The verification suite: every closed form paired with an independent
//! numerical route, reported one line per check.

use std::fmt;

use serde::Serialize;

use super::{
    finite_diff, grid_argmax, mc_indicator_moments, quad_alpha, quad_density_mass, GridSpec,
    QuadCriterion,
};
use crate::dataio;
use crate::error::Result;
use crate::estimator::{self, FitConfig};
use crate::model::{self, ObservedTriple, StudyWindow};

/// `(s, G)` designs used across the suite.
pub const WINDOWS: [(f64, f64); 5] = [
    (2.0, 5.0),
    (2.0, 10.0),
    (2.0, 50.0),
    (1.0, 3.0),
    (5.0, 100.0),
];

/// Rates for the density-mass grid.
pub const MASS_THETAS: [f64; 5] = [0.05, 0.3, 0.7, 2.0, 5.0];

/// Rates for the derivative grid.
pub const DERIVATIVE_THETAS: [f64; 5] = [0.05, 0.2, 0.7, 2.0, 5.0];

/// Positions of `y` inside `[0, s]`, as fractions of `s`.
pub const Y_FRACTIONS: [f64; 3] = [0.05, 0.45, 0.9];

/// First-order finite-difference tolerance (relative).
pub const FD1_RTOL: f64 = 1e-6;
/// Second-order finite-difference tolerance (relative).
pub const FD2_RTOL: f64 = 1e-5;
/// Step for second differences, relative to the shortest scale on which
/// the criterion varies.
pub const FD2_REL_STEP: f64 = 1e-4;

/// `(theta, s, G)` settings for the latent-measure moment identities.
pub const MOMENT_SETTINGS: [(f64, f64, f64); 3] =
    [(0.3, 2.0, 10.0), (1.0, 1.0, 3.0), (0.05, 5.0, 100.0)];
pub const MOMENT_DRAWS: u64 = 1_000_000;
pub const MOMENT_SIGMAS: f64 = 4.0;

/// Rates on `[0.01, 10]` for the curvature sign check.
pub fn eta_thetas() -> Vec<f64> {
    GridSpec::log(0.01, 10.0, 61)
        .expect("static grid")
        .points()
        .collect()
}

pub fn fd2_step(theta: f64) -> f64 {
    FD2_REL_STEP * theta
}

/// `K` varies on the scale `1 / (G - s)`, which can be much shorter than
/// the rate itself.
pub fn fd2_step_k(theta: f64, w: &StudyWindow) -> f64 {
    FD2_REL_STEP * theta.min(1.0 / w.pre_span())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `|observed - expected| <= tolerance`
    Absolute,
    /// `|observed - expected| <= tolerance * |expected|`
    Relative,
    /// `observed < expected`
    Below,
    /// `observed > expected`
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub observed: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub passed: bool,
}

impl Check {
    pub fn new(
        name: impl Into<String>,
        observed: f64,
        expected: f64,
        tolerance: f64,
        comparison: Comparison,
    ) -> Self {
        let diff = (observed - expected).abs();
        let passed = match comparison {
            Comparison::Absolute => diff <= tolerance,
            Comparison::Relative => diff <= tolerance * expected.abs(),
            Comparison::Below => observed < expected,
            Comparison::Above => observed > expected,
        };
        Self {
            name: name.into(),
            observed,
            expected,
            tolerance,
            comparison,
            passed,
        }
    }

    pub fn abs(name: impl Into<String>, observed: f64, expected: f64, tol: f64) -> Self {
        Self::new(name, observed, expected, tol, Comparison::Absolute)
    }

    pub fn rel(name: impl Into<String>, observed: f64, expected: f64, tol: f64) -> Self {
        Self::new(name, observed, expected, tol, Comparison::Relative)
    }

    pub fn below(name: impl Into<String>, observed: f64, bound: f64) -> Self {
        Self::new(name, observed, bound, 0.0, Comparison::Below)
    }

    pub fn above(name: impl Into<String>, observed: f64, bound: f64) -> Self {
        Self::new(name, observed, bound, 0.0, Comparison::Above)
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        let rule = match self.comparison {
            Comparison::Absolute => format!("abs_tol={:e}", self.tolerance),
            Comparison::Relative => format!("rel_tol={:e}", self.tolerance),
            Comparison::Below => "bound=upper".to_string(),
            Comparison::Above => "bound=lower".to_string(),
        };
        write!(
            f,
            "{verdict} {} observed={:.12e} expected={:.12e} {rule}",
            self.name, self.observed, self.expected
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

fn window(s: f64, g: f64) -> StudyWindow {
    StudyWindow::new(s, g).expect("static design")
}

/// Relative error against `max(|analytic|, scale)`; `scale` is the summed
/// magnitude of the terms making up the analytic value, which keeps the
/// measure meaningful where the value itself crosses zero.
pub fn scaled_rel_err(analytic: f64, numeric: f64, scale: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(scale)
}

/// Observation probability: reference value, small-rate limit and the
/// latent double integral.
pub fn alpha_checks() -> Result<Vec<Check>> {
    let mut out = vec![
        Check::abs(
            "alpha.table_value(theta=0.2818,s=2,G=5)",
            model::alpha(0.2818, &window(2.0, 5.0))?,
            0.574,
            5e-4,
        ),
        Check::abs(
            "alpha.small_rate_limit(theta=1e-9,s=2,G=10)",
            model::alpha(1e-9, &window(2.0, 10.0))?,
            0.2,
            1e-6,
        ),
    ];
    for &(theta, s, g) in &[(0.5, 2.0, 10.0), (0.1, 1.0, 3.0), (2.0, 5.0, 100.0)] {
        let w = window(s, g);
        out.push(Check::abs(
            format!("alpha.double_quadrature(theta={theta},s={s},G={g})"),
            model::alpha(theta, &w)?,
            quad_alpha(theta, &w)?,
            1e-8,
        ));
    }
    // s/G < alpha < 1 across the derivative grid
    let mut worst_margin = f64::INFINITY;
    for &(s, g) in &WINDOWS {
        let w = window(s, g);
        for &theta in &DERIVATIVE_THETAS {
            let a = model::alpha(theta, &w)?;
            worst_margin = worst_margin.min(a - s / g).min(1.0 - a);
        }
    }
    out.push(Check::above(
        "alpha.strictly_between_s_over_G_and_1",
        worst_margin,
        0.0,
    ));
    Ok(out)
}

/// Quadrature mass of the observed density over `D` on the 5 x 5 grid.
pub fn density_mass_checks() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for &(s, g) in &WINDOWS {
        let w = window(s, g);
        for &theta in &MASS_THETAS {
            out.push(Check::abs(
                format!("density.mass(theta={theta},s={s},G={g})"),
                quad_density_mass(theta, &w)?,
                1.0,
                1e-8,
            ));
        }
    }
    Ok(out)
}

/// Worst scaled relative error of each analytic derivative against central
/// differences of its parent over the derivative grid.
pub fn derivative_checks() -> Result<Vec<Check>> {
    let mut worst = [0.0_f64; 6];
    for &(s, g) in &WINDOWS {
        let w = window(s, g);
        for &theta in &DERIVATIVE_THETAS {
            let h2 = Some(fd2_step(theta));
            let alpha = |x: f64| model::alpha(x, &w).unwrap_or(f64::NAN);
            let k = |x: f64| model::k_log(x, &w).unwrap_or(f64::NAN);

            let a1 = model::alpha_d1(theta, &w)?;
            let a2 = model::alpha_d2(theta, &w)?;
            let k1 = model::k_d1(theta, &w)?;
            let k2 = model::k_d2(theta, &w)?;
            worst[0] = worst[0].max(scaled_rel_err(a1, finite_diff(alpha, theta, 1, None)?, 0.0));
            worst[1] = worst[1].max(scaled_rel_err(a2, finite_diff(alpha, theta, 2, h2)?, 0.0));
            worst[2] = worst[2].max(scaled_rel_err(k1, finite_diff(k, theta, 1, None)?, 0.0));
            worst[3] = worst[3].max(scaled_rel_err(
                k2,
                finite_diff(k, theta, 2, Some(fd2_step_k(theta, &w)))?,
                0.0,
            ));

            let a = model::alpha(theta, &w)?;
            for &frac in &Y_FRACTIONS {
                let y = frac * s;
                for (l, r) in [(false, false), (false, true), (true, false)] {
                    let t = ObservedTriple::new(y, l, r);
                    let li = l as u8 as f64;
                    let unc = (!l && !r) as u8 as f64;
                    let m = |x: f64| model::m_value(&t, x, &w);
                    let d1 = model::m_d1(&t, theta, &w);
                    let d2 = model::m_d2(&t, theta, &w);
                    let scale1 = (a1 / a).abs() + y + k1.abs() * li + unc / theta;
                    let scale2 =
                        (a2 / a).abs() + (a1 / a).powi(2) + k2.abs() * li + unc / (theta * theta);
                    worst[4] =
                        worst[4].max(scaled_rel_err(d1, finite_diff(m, theta, 1, None)?, scale1));
                    worst[5] =
                        worst[5].max(scaled_rel_err(d2, finite_diff(m, theta, 2, h2)?, scale2));
                }
            }
        }
    }
    let names = ["alpha_d1", "alpha_d2", "k_d1", "k_d2", "m_d1", "m_d2"];
    let tols = [FD1_RTOL, FD2_RTOL, FD1_RTOL, FD2_RTOL, FD1_RTOL, FD2_RTOL];
    Ok(names
        .iter()
        .zip(worst)
        .zip(tols)
        .map(|((name, err), tol)| {
            Check::abs(
                format!("derivative.{name}.max_rel_err_vs_central_difference"),
                err,
                0.0,
                tol,
            )
        })
        .collect())
}

/// Curvature of the population criterion: sign, algebraic identities and
/// the quadrature second difference at the truth.
pub fn eta_checks() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let thetas = eta_thetas();
    let mut max_eta = f64::NEG_INFINITY;
    let mut max_ratio = f64::NEG_INFINITY;
    let mut max_delta = f64::NEG_INFINITY;
    let mut max_repr_diff = 0.0_f64;
    let mut max_delta_diff = 0.0_f64;
    for &(s, g) in &WINDOWS {
        let w = window(s, g);
        for &theta in &thetas {
            let e = model::eta(theta, &w)?;
            max_eta = max_eta.max(e);
            max_ratio = max_ratio.max(model::eta_ratio_term(theta, &w)?);
            let d = model::delta(theta, &w)?;
            max_delta = max_delta.max(d);
            max_repr_diff = max_repr_diff
                .max((e - model::eta_rearranged(theta, &w)?).abs())
                .max((e - model::eta_split(theta, &w)?).abs());
            max_delta_diff = max_delta_diff.max((d - model::delta_from_h(theta, &w)?).abs());
        }
    }
    out.push(Check::below("eta.max_over_grid", max_eta, 0.0));
    out.push(Check::below("eta.delta.max_over_grid", max_delta, 0.0));
    out.push(Check::abs(
        "eta.ratio_term.max_over_grid",
        max_ratio.max(0.0),
        0.0,
        0.0,
    ));
    out.push(Check::abs(
        "eta.representations.max_abs_diff",
        max_repr_diff,
        0.0,
        1e-10,
    ));
    out.push(Check::abs(
        "eta.delta_two_forms.max_abs_diff",
        max_delta_diff,
        0.0,
        1e-10,
    ));

    for &(theta0, s, g) in &[
        (0.3, 2.0, 10.0),
        (0.7, 2.0, 10.0),
        (0.1, 2.0, 50.0),
        (1.5, 1.0, 3.0),
    ] {
        let w = window(s, g);
        let crit = QuadCriterion::new(theta0, &w)?;
        let curvature = finite_diff(
            |x| crit.eval(x).unwrap_or(f64::NAN),
            theta0,
            2,
            Some(fd2_step(theta0)),
        )?;
        out.push(Check::rel(
            format!("eta.quadrature_curvature_at_truth(theta0={theta0},s={s},G={g})"),
            curvature,
            model::eta(theta0, &w)?,
            1e-4,
        ));
        let step = theta0 * 1e-4;
        let grid = GridSpec::linear(theta0 * 0.5, theta0 * 1.5 + step / 2.0, 10_001)?;
        let argmax = super::grid_argmax_by(&grid, |x| crit.eval(x))?;
        out.push(Check::abs(
            format!("criterion.quadrature_argmax(theta0={theta0},s={s},G={g})"),
            argmax,
            theta0,
            grid.step(),
        ));
    }
    Ok(out)
}

/// `H_k` recurrences and the sign facts used for `Delta < 0`.
pub fn h_checks() -> Result<Vec<Check>> {
    let mut out = vec![Check::abs(
        "h.h1(theta=1,s=1)",
        model::h_k(1.0, 1.0, 1)?,
        (-1.0_f64).exp() / (1.0 - (-1.0_f64).exp()) - 1.0,
        1e-15,
    )];
    let mut max_h1 = f64::NEG_INFINITY;
    let mut min_shift = f64::INFINITY;
    let mut max_rec2 = 0.0_f64;
    let mut max_rec3 = 0.0_f64;
    for &s in &[0.5, 2.0, 5.0] {
        for theta in eta_thetas() {
            let h1 = model::h_k(theta, s, 1)?;
            let h2 = model::h_k(theta, s, 2)?;
            let h3 = model::h_k(theta, s, 3)?;
            max_h1 = max_h1.max(h1);
            min_shift = min_shift.min(h1 / s + 1.0);
            let p = -(-theta * s).exp_m1();
            let a = s / p;
            let b = 1.0 / theta;
            // relative to the size of the cancelling terms, (a + b)^k
            let scale = a + b;
            max_rec2 = max_rec2.max((h2 - (h1 * (a + b) + a * b * p)).abs() / scale.powi(2));
            max_rec3 = max_rec3.max((h3 - (h2 * (a + b) - a * b * h1)).abs() / scale.powi(3));
        }
    }
    out.push(Check::below("h.h1.max_over_grid", max_h1, 0.0));
    out.push(Check::above(
        "h.h1_over_s_plus_1.min_over_grid",
        min_shift,
        0.0,
    ));
    out.push(Check::abs(
        "h.h2_recurrence.max_scaled_diff",
        max_rec2,
        0.0,
        1e-12,
    ));
    out.push(Check::abs(
        "h.h3_recurrence.max_scaled_diff",
        max_rec3,
        0.0,
        1e-12,
    ));
    let (theta, s): (f64, f64) = (0.8, 2.0);
    let p = -(-theta * s).exp_m1();
    let (a, b) = (s / p, 1.0 / theta);
    out.push(Check::abs(
        "h.h2_recurrence(theta=0.8,s=2)",
        model::h_k(theta, s, 2)?,
        model::h_k(theta, s, 1)? * (a + b) + a * b * p,
        1e-12,
    ));
    Ok(out)
}

/// Latent-measure indicator moments against their closed forms, within
/// four Monte Carlo standard errors.
pub fn moment_checks(seed: u64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (i, &(theta, s, g)) in MOMENT_SETTINGS.iter().enumerate() {
        let w = window(s, g);
        let mc = mc_indicator_moments(theta, &w, MOMENT_DRAWS, seed.wrapping_add(i as u64))?;
        let (e_l, e_unc) = model::indicator_moments(theta, &w)?;
        let a = model::alpha(theta, &w)?;
        let tag = format!("theta={theta},s={s},G={g}");
        out.push(Check::abs(
            format!("moments.e_l({tag})"),
            mc.e_l,
            e_l,
            MOMENT_SIGMAS * mc.sigma(mc.e_l),
        ));
        out.push(Check::abs(
            format!("moments.e_unc({tag})"),
            mc.e_unc,
            e_unc,
            MOMENT_SIGMAS * mc.sigma(mc.e_unc),
        ));
        out.push(Check::abs(
            format!("moments.partition_alpha({tag})"),
            mc.e_l + mc.e_unc + mc.e_cens,
            a,
            MOMENT_SIGMAS * mc.sigma(mc.e_obs),
        ));
    }
    let w = window(2.0, 10.0);
    let mc = mc_indicator_moments(50.0, &w, MOMENT_DRAWS, seed.wrapping_add(99))?;
    out.push(Check::abs(
        "moments.e_unc(theta=50,s=2,G=10)",
        mc.e_unc,
        model::indicator_moments(50.0, &w)?.1,
        MOMENT_SIGMAS * mc.sigma(mc.e_unc),
    ));
    // the gap to s/G is at most 1/(G theta) = 1e-9
    out.push(Check::abs(
        "moments.e_unc_large_rate_limit(theta=1e8,s=2,G=10)",
        model::indicator_moments(1e8, &w)?.1,
        0.2,
        1e-8,
    ));
    Ok(out)
}

/// Estimator against brute-force grid search on the bundled enterprise data.
pub fn estimator_checks() -> Result<Vec<Check>> {
    let w = window(2.0, 5.0);
    let records = dataio::enterprise_records()?;
    let stats = estimator::summarize(&records, &w)?;
    let grid = GridSpec::linear(0.01, 2.0, 200_000)?;
    let grid_theta = grid_argmax(&stats, &w, &grid)?;
    let fit = estimator::fit_mle(&stats, &w, &FitConfig::default())?;
    Ok(vec![
        Check::abs(
            "estimator.grid_argmax_enterprise(G=5)",
            grid_theta,
            0.2818,
            grid.step().max(5e-5),
        ),
        Check::abs(
            "estimator.fit_vs_grid_enterprise(G=5)",
            fit.theta_hat,
            grid_theta,
            2.0 * grid.step(),
        ),
    ])
}

/// Run every registered check.
pub fn run_registry(seed: u64) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    checks.extend(alpha_checks()?);
    checks.extend(density_mass_checks()?);
    checks.extend(derivative_checks()?);
    checks.extend(eta_checks()?);
    checks.extend(h_checks()?);
    checks.extend(moment_checks(seed)?);
    checks.extend(estimator_checks()?);
    Ok(VerifyReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_semantics() {
        assert!(Check::abs("a", 1.0, 1.05, 0.1).passed);
        assert!(!Check::abs("a", 1.0, 1.2, 0.1).passed);
        assert!(Check::rel("r", 101.0, 100.0, 0.02).passed);
        assert!(Check::below("b", -1.0, 0.0).passed);
        assert!(!Check::below("b", 0.0, 0.0).passed);
        assert!(!Check::abs("nan", f64::NAN, 0.0, 1.0).passed);
        let line = Check::abs("x", 1.0, 1.0, 0.5).to_string();
        assert!(line.starts_with("PASS x observed="));
    }

    #[test]
    fn closed_form_groups_pass() {
        for group in [
            alpha_checks().unwrap(),
            density_mass_checks().unwrap(),
            derivative_checks().unwrap(),
            eta_checks().unwrap(),
            h_checks().unwrap(),
        ] {
            for c in group {
                assert!(c.passed, "{c}");
            }
        }
    }
}
