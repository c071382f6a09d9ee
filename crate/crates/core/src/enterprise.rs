//! Reproduction of the published enterprise results for several cohort
//! spans, with the two-year 2018-2019 study.

use serde::Serialize;

use crate::dataio;
use crate::error::Result;
use crate::estimator::{self, FitConfig, FitResult, SufficientStats};
use crate::model::StudyWindow;

/// Study length of the enterprise data, in years.
pub const STUDY_YEARS: f64 = 2.0;

/// One published row: rate, life expectancy, observation probability and
/// standard error, at their published rounding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PublishedRow {
    #[serde(rename = "G")]
    pub g: f64,
    pub theta_hat: f64,
    pub life_expectancy: f64,
    pub alpha_hat: f64,
    pub se: f64,
}

const fn row(
    g: f64,
    theta_hat: f64,
    life_expectancy: f64,
    alpha_hat: f64,
    se_e4: f64,
) -> PublishedRow {
    PublishedRow {
        g,
        theta_hat,
        life_expectancy,
        alpha_hat,
        se: se_e4 * 1e-4,
    }
}

pub const PUBLISHED: [PublishedRow; 7] = [
    row(5.0, 0.2818, 3.55, 0.574, 3.03),
    row(10.0, 0.1849, 5.41, 0.329, 2.48),
    row(15.0, 0.1492, 6.70, 0.232, 2.36),
    row(30.0, 0.1111, 9.00, 0.124, 2.58),
    row(50.0, 0.0972, 10.28, 0.076, 3.13),
    row(100.0, 0.0922, 10.85, 0.038, 3.78),
    row(200.0, 0.0921, 10.86, 0.019, 3.82),
];

/// Half a unit in the last published digit of each column.
pub const THETA_TOL: f64 = 5e-5;
pub const LIFE_TOL: f64 = 5e-3;
pub const ALPHA_TOL: f64 = 5e-4;
pub const SE_TOL: f64 = 5e-7;

pub fn published(g: f64) -> Option<&'static PublishedRow> {
    PUBLISHED.iter().find(|r| r.g == g)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ColumnVerdicts {
    pub theta_hat: bool,
    pub life_expectancy: bool,
    pub alpha_hat: bool,
    pub se: bool,
}

impl ColumnVerdicts {
    pub fn all(&self) -> bool {
        self.theta_hat && self.life_expectancy && self.alpha_hat && self.se
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReproducedRow {
    #[serde(rename = "G")]
    pub g: f64,
    pub fit: FitResult,
    /// `None` when no published row exists for this span.
    pub published: Option<PublishedRow>,
    pub verdicts: Option<ColumnVerdicts>,
}

impl ReproducedRow {
    /// False only when a published row exists and some column misses it.
    pub fn passed(&self) -> bool {
        self.verdicts.is_none_or(|v| v.all())
    }
}

pub fn compare(fit: &FitResult, p: &PublishedRow) -> ColumnVerdicts {
    ColumnVerdicts {
        theta_hat: (fit.theta_hat - p.theta_hat).abs() <= THETA_TOL,
        life_expectancy: (fit.life_expectancy - p.life_expectancy).abs() <= LIFE_TOL,
        alpha_hat: (fit.alpha_hat - p.alpha_hat).abs() <= ALPHA_TOL,
        se: (fit.se - p.se).abs() <= SE_TOL,
    }
}

/// Sufficient statistics of the bundled table.
pub fn enterprise_stats() -> Result<SufficientStats> {
    let w = StudyWindow::new(STUDY_YEARS, STUDY_YEARS + 1.0)?;
    estimator::summarize(&dataio::enterprise_records()?, &w)
}

/// Fit the bundled data for each cohort span in `spans`.
pub fn reproduce(spans: &[f64], cfg: &FitConfig) -> Result<Vec<ReproducedRow>> {
    let records = dataio::enterprise_records()?;
    spans
        .iter()
        .map(|&g| {
            let w = StudyWindow::new(STUDY_YEARS, g)?;
            let stats = estimator::summarize(&records, &w)?;
            let fit = estimator::fit_mle(&stats, &w, cfg)?;
            let published = published(g).copied();
            Ok(ReproducedRow {
                g,
                fit,
                published,
                verdicts: published.map(|p| compare(&fit, &p)),
            })
        })
        .collect()
}

pub fn default_spans() -> Vec<f64> {
    PUBLISHED.iter().map(|r| r.g).collect()
}
