//! Profile-likelihood estimation of the exponential rate from weighted
//! observed records.
//!
//! The population size `n` is profiled out exactly (`n = m / alpha_theta`),
//! leaving a criterion that depends on the data only through the total
//! weight and three weighted means. The standard error additionally needs
//! per-cell sums of `y` and `y^2`, which [`summarize`] always carries.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::model::{self, Cell, ObservedTriple, ParamDomain, ScoreTerms, StudyWindow};
use crate::optimize::{self, Maximum};

/// An observed triple with an aggregation weight (a count, for tabulated
/// data).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservedRecord {
    pub triple: ObservedTriple,
    pub weight: f64,
}

impl ObservedRecord {
    pub fn new(y: f64, l: bool, r: bool, weight: f64) -> Self {
        Self {
            triple: ObservedTriple::new(y, l, r),
            weight,
        }
    }

    pub fn unit(y: f64, l: bool, r: bool) -> Self {
        Self::new(y, l, r, 1.0)
    }
}

/// Weighted totals of one `(l, r)` cell.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct CellSums {
    pub weight: f64,
    pub sum_y: f64,
    pub sum_y2: f64,
}

/// Reduction of a dataset: total weight `m` and the weighted means of `y`,
/// `l` and `(1-l)(1-r)`, plus per-cell sums when built from records.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SufficientStats {
    pub m: f64,
    pub mean_y: f64,
    pub mean_l: f64,
    pub mean_unc: f64,
    /// Indexed by [`Cell::index`].
    #[serde(skip)]
    pub cells: Option<[CellSums; 3]>,
}

impl SufficientStats {
    /// Statistics given directly as means. Enough for the point estimate,
    /// not for the standard error.
    pub fn from_means(m: f64, mean_y: f64, mean_l: f64, mean_unc: f64) -> Result<Self> {
        let ok = m > 0.0
            && m.is_finite()
            && mean_y.is_finite()
            && mean_y >= 0.0
            && (0.0..=1.0).contains(&mean_l)
            && (0.0..=1.0).contains(&mean_unc)
            && mean_l + mean_unc <= 1.0 + 1e-12;
        if !ok {
            return Err(Error::InvalidConfig(format!(
                "inconsistent sufficient statistics (m = {m}, mean_y = {mean_y}, mean_l = {mean_l}, mean_unc = {mean_unc})"
            )));
        }
        Ok(Self {
            m,
            mean_y,
            mean_l,
            mean_unc,
            cells: None,
        })
    }

    pub fn from_cells(cells: [CellSums; 3]) -> Result<Self> {
        let m = neumaier(cells.iter().map(|c| c.weight));
        if !(m > 0.0) {
            return Err(Error::EmptySample);
        }
        let sum_y = neumaier(cells.iter().map(|c| c.sum_y));
        Ok(Self {
            m,
            mean_y: sum_y / m,
            mean_l: cells[Cell::Truncated.index()].weight / m,
            mean_unc: cells[Cell::Uncensored.index()].weight / m,
            cells: Some(cells),
        })
    }
}

/// Compensated (Neumaier) summation.
pub(crate) fn neumaier<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Reduce records to [`SufficientStats`].
///
/// Records are validated against the support `D` of `w`; zero-weight
/// records are skipped. Contributions are sorted before the compensated
/// sums so the result does not depend on input order.
pub fn summarize(records: &[ObservedRecord], w: &StudyWindow) -> Result<SufficientStats> {
    let mut terms: Vec<(Cell, f64, f64)> = Vec::with_capacity(records.len());
    for (index, rec) in records.iter().enumerate() {
        let weight = rec.weight;
        if !(weight >= 0.0 && weight.is_finite()) {
            return Err(Error::InvalidWeight { index, weight });
        }
        if weight == 0.0 {
            continue;
        }
        let t = &rec.triple;
        let cell = match t.cell() {
            Some(c) if t.in_support(w) => c,
            _ => {
                return Err(Error::OutsideSupport {
                    index,
                    y: t.y,
                    l: t.l as u8,
                    r: t.r as u8,
                })
            }
        };
        terms.push((cell, t.y, weight));
    }
    if terms.is_empty() {
        return Err(Error::EmptySample);
    }
    terms.sort_unstable_by(|a, b| {
        a.0.cmp(&b.0)
            .then(a.1.total_cmp(&b.1))
            .then(a.2.total_cmp(&b.2))
    });

    let mut cells = [CellSums::default(); 3];
    for cell in Cell::ALL {
        let part = terms.iter().filter(|t| t.0 == cell);
        cells[cell.index()] = CellSums {
            weight: neumaier(part.clone().map(|t| t.2)),
            sum_y: neumaier(part.clone().map(|t| t.2 * t.1)),
            sum_y2: neumaier(part.map(|t| t.2 * t.1 * t.1)),
        };
    }
    SufficientStats::from_cells(cells)
}

/// Average profiled log-likelihood per observation, up to rate-free constants:
/// `-log alpha - theta mean_y + K(theta) mean_l + log(theta) mean_unc`.
pub fn profiled_objective(stats: &SufficientStats, theta: f64, w: &StudyWindow) -> Result<f64> {
    let a = model::alpha(theta, w)?;
    let k = model::k_log(theta, w)?;
    Ok(-a.ln() - theta * stats.mean_y + k * stats.mean_l + theta.ln() * stats.mean_unc)
}

/// Settings for [`fit_mle`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    pub domain: ParamDomain,
    /// Absolute tolerance on the rate.
    pub tol: f64,
    /// Coverage of the reported normal-approximation interval.
    pub level: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            domain: ParamDomain::default(),
            tol: 1e-10,
            level: 0.95,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitResult {
    pub theta_hat: f64,
    pub se: f64,
    pub alpha_hat: f64,
    pub n_hat: f64,
    pub life_expectancy: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub level: f64,
    pub m: f64,
    pub objective_at_max: f64,
    pub converged: bool,
    pub at_boundary: bool,
    pub iterations: usize,
}

/// Maximize [`profiled_objective`] over the parameter domain.
///
/// Among equal maxima the smallest rate wins.
pub fn maximize_objective(
    stats: &SufficientStats,
    w: &StudyWindow,
    cfg: &FitConfig,
) -> Result<Maximum> {
    let objective = |theta: f64| profiled_objective(stats, theta, w).unwrap_or(f64::NAN);
    optimize::maximize_log_scan(objective, cfg.domain.lower(), cfg.domain.upper(), cfg.tol)
}

/// Maximum-likelihood fit with standard error, observation probability,
/// population-size estimate and confidence interval.
pub fn fit_mle(stats: &SufficientStats, w: &StudyWindow, cfg: &FitConfig) -> Result<FitResult> {
    if !(cfg.level > 0.0 && cfg.level < 1.0) {
        return Err(Error::InvalidLevel(cfg.level));
    }
    let max = maximize_objective(stats, w, cfg)?;
    let theta_hat = max.argmax;
    let se = standard_error(stats, theta_hat, w)?;
    let alpha_hat = model::alpha(theta_hat, w)?;
    let (ci_low, ci_high) = confidence_interval(theta_hat, se, cfg.level)?;
    Ok(FitResult {
        theta_hat,
        se,
        alpha_hat,
        n_hat: stats.m / alpha_hat,
        life_expectancy: 1.0 / theta_hat,
        ci_low,
        ci_high,
        level: cfg.level,
        m: stats.m,
        objective_at_max: max.value,
        converged: max.converged,
        at_boundary: max.at_boundary,
        iterations: max.iterations,
    })
}

/// Observable standard error of the estimate,
/// `sqrt( sum_j w_j m'(x_j)^2 / (sum_j w_j m''(x_j))^2 )` at `theta_hat`.
///
/// The score is `offset(cell) - y`, so its weighted square expands into the
/// per-cell sums of `w`, `w y` and `w y^2`.
pub fn standard_error(stats: &SufficientStats, theta_hat: f64, w: &StudyWindow) -> Result<f64> {
    let cells = stats.cells.ok_or(Error::MissingCellSums)?;
    if !(theta_hat > 0.0 && theta_hat.is_finite()) {
        return Err(Error::NonPositiveRate(theta_hat));
    }
    let terms = ScoreTerms::new(theta_hat, w);
    let mut score_sq = Vec::with_capacity(3);
    let mut curvature = Vec::with_capacity(3);
    for cell in Cell::ALL {
        let c = cells[cell.index()];
        let a = terms.score_offset(cell);
        score_sq.push(a * a * c.weight - 2.0 * a * c.sum_y + c.sum_y2);
        curvature.push(terms.curvature(cell) * c.weight);
    }
    let numerator = neumaier(score_sq).max(0.0);
    let denominator = neumaier(curvature);
    if !(denominator < 0.0) {
        return Err(Error::SingularInformation { denominator });
    }
    Ok(numerator.sqrt() / denominator.abs())
}

/// Profile estimate of the latent population size, `m / alpha(theta_hat)`.
pub fn population_size_estimate(
    stats: &SufficientStats,
    theta_hat: f64,
    w: &StudyWindow,
) -> Result<f64> {
    Ok(stats.m / model::alpha(theta_hat, w)?)
}

/// Normal-approximation interval `theta_hat +- z se`, lower end clipped at 0.
pub fn confidence_interval(theta_hat: f64, se: f64, level: f64) -> Result<(f64, f64)> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidLevel(level));
    }
    if !(se > 0.0 && se.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "standard error must be positive, got {se}"
        )));
    }
    let z = normal_quantile(0.5 * (1.0 + level));
    Ok(((theta_hat - z * se).max(0.0), theta_hat + z * se))
}

pub(crate) fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn win(s: f64, g: f64) -> StudyWindow {
        StudyWindow::new(s, g).unwrap()
    }

    #[test]
    fn single_record() {
        let st = summarize(&[ObservedRecord::unit(1.0, false, false)], &win(2.0, 5.0)).unwrap();
        assert_eq!(
            (st.m, st.mean_y, st.mean_l, st.mean_unc),
            (1.0, 1.0, 0.0, 1.0)
        );
    }

    #[test]
    fn weight_two_equals_two_copies() {
        let w = win(2.0, 5.0);
        let base = [
            ObservedRecord::unit(0.3, true, false),
            ObservedRecord::unit(1.7, false, true),
        ];
        let weighted = [base[0], ObservedRecord::new(1.7, false, true, 2.0)];
        let copies = [base[0], base[1], base[1]];
        assert_eq!(
            summarize(&weighted, &w).unwrap(),
            summarize(&copies, &w).unwrap()
        );
    }

    #[test]
    fn order_independent() {
        let w = win(2.0, 10.0);
        let mut recs: Vec<_> = (0..200)
            .map(|i| {
                let y = (i as f64 * 0.618_033_988_7) % 2.0;
                ObservedRecord::new(y.min(1.99), i % 3 == 0, i % 3 == 1, 1.0 + (i % 7) as f64)
            })
            .collect();
        let a = summarize(&recs, &w).unwrap();
        recs.reverse();
        recs.swap(3, 150);
        assert_eq!(a, summarize(&recs, &w).unwrap());
    }

    #[test]
    fn summarize_errors() {
        let w = win(2.0, 10.0);
        assert!(matches!(summarize(&[], &w), Err(Error::EmptySample)));
        assert!(matches!(
            summarize(&[ObservedRecord::new(1.0, false, false, 0.0)], &w),
            Err(Error::EmptySample)
        ));
        let bad = [
            ObservedRecord::unit(1.0, false, false),
            ObservedRecord::unit(2.5, true, false),
        ];
        assert!(matches!(
            summarize(&bad, &w),
            Err(Error::OutsideSupport { index: 1, .. })
        ));
        assert!(matches!(
            summarize(&[ObservedRecord::unit(1.0, true, true)], &w),
            Err(Error::OutsideSupport { index: 0, .. })
        ));
        assert!(matches!(
            summarize(&[ObservedRecord::new(1.0, true, false, -1.0)], &w),
            Err(Error::InvalidWeight { index: 0, .. })
        ));
    }

    #[test]
    fn objective_term_dropout() {
        let w = win(2.0, 10.0);
        let st = SufficientStats::from_means(10.0, 0.8, 0.0, 0.0).unwrap();
        for theta in [0.05, 0.3, 2.0] {
            let a = model::alpha(theta, &w).unwrap();
            let expect = -a.ln() - theta * 0.8;
            assert_eq!(profiled_objective(&st, theta, &w).unwrap(), expect);
        }
    }

    #[test]
    fn standard_error_needs_cells() {
        let w = win(2.0, 10.0);
        let st = SufficientStats::from_means(10.0, 0.8, 0.3, 0.2).unwrap();
        assert!(matches!(
            standard_error(&st, 0.3, &w),
            Err(Error::MissingCellSums)
        ));
    }

    #[test]
    fn confidence_interval_arithmetic() {
        let (lo, hi) = confidence_interval(0.1849, 2.48e-4, 0.95).unwrap();
        assert!((lo - 0.18441).abs() < 5e-6, "{lo}");
        assert!((hi - 0.18539).abs() < 5e-6, "{hi}");
        let z = normal_quantile(0.975);
        assert!((z - 1.959964).abs() < 1e-6);
        assert!((hi - 0.1849 - z * 2.48e-4).abs() < 1e-15);

        let (lo, hi) = confidence_interval(0.5, 0.1, 1e-12).unwrap();
        assert!((hi - lo) < 1e-12);
        assert!(confidence_interval(0.5, 0.1, 0.0).is_err());
        assert!(confidence_interval(0.5, 0.1, 1.0).is_err());
        assert!(confidence_interval(0.5, 0.0, 0.9).is_err());
        // clipped at zero
        assert_eq!(confidence_interval(0.01, 1.0, 0.95).unwrap().0, 0.0);
    }

    #[test]
    fn population_size_limit() {
        // alpha -> 1 as the window covers nearly the whole span and the rate is large
        let w = win(9.999_999, 10.0);
        let st = SufficientStats::from_means(1000.0, 0.5, 0.0, 0.5).unwrap();
        let n = population_size_estimate(&st, 50.0, &w).unwrap();
        assert!((n - 1000.0).abs() < 1e-3, "{n}");
    }

    #[test]
    fn neumaier_recovers_small_terms() {
        let v = [1e16, 1.0, -1e16];
        assert_eq!(neumaier(v), 1.0);
    }
}
