//! Latent-data simulation and Monte Carlo studies.
//!
//! Every random stream is a ChaCha8 generator keyed by the user seed with a
//! stream number selecting the sequence: stream 0 for a single sample,
//! stream `k + 1` for replication `k` of a study. Results therefore do not
//! depend on thread scheduling or on the platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimator::{self, FitConfig, ObservedRecord};
use crate::model::{ObservedTriple, ParamDomain, StudyWindow};

/// Latent lifespan `x` and age at study begin `t`, before truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatentUnit {
    pub x: f64,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub theta0: f64,
    pub window: StudyWindow,
    pub n: u64,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(theta0: f64, window: StudyWindow, n: u64, seed: u64) -> Result<Self> {
        if !ParamDomain::default().contains_interior(theta0) {
            return Err(Error::InvalidConfig(format!(
                "theta0 must lie inside the parameter domain, got {theta0}"
            )));
        }
        if n == 0 {
            return Err(Error::InvalidConfig(
                "latent population size must be at least 1".into(),
            ));
        }
        Ok(Self {
            theta0,
            window,
            n,
            seed,
        })
    }
}

/// Generator for stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draw one latent unit: `x` by inverse CDF, then `t` uniform on `[-s, G-s]`.
pub fn draw_unit<R: Rng + ?Sized>(rng: &mut R, theta0: f64, w: &StudyWindow) -> LatentUnit {
    let u: f64 = rng.random();
    let x = -(-u).ln_1p() / theta0;
    let v: f64 = rng.random();
    let t = -w.s() + w.g() * v;
    LatentUnit { x, t }
}

/// `cfg.n` independent latent units from stream 0 of `cfg.seed`.
pub fn draw_latent(cfg: &SimConfig) -> Vec<LatentUnit> {
    let mut rng = stream_rng(cfg.seed, 0);
    (0..cfg.n)
        .map(|_| draw_unit(&mut rng, cfg.theta0, &cfg.window))
        .collect()
}

/// Reduce a latent unit to its observable triple, or `None` when the unit
/// is truncated away.
///
/// `L = [t > 0]`, `R = [t + s < x]`; `Y` is `x - t` for units born before
/// the study, `x` for units born and dead within it, and `t + s` for units
/// born within it and alive at its end. Units with `(L, R) = (1, 1)` or
/// with `(L, R) = (1, 0)` and `Y < 0` are unobserved. The measure-zero case
/// of an uncensored unit with `Y = s` is also dropped, as it lies outside
/// the support of the density.
pub fn reduce(u: &LatentUnit, w: &StudyWindow) -> Option<ObservedTriple> {
    let s = w.s();
    let l = u.t > 0.0;
    let r = u.t + s < u.x;
    let y = if l {
        u.x - u.t
    } else if !r {
        u.x
    } else {
        u.t + s
    };
    if l && r {
        return None;
    }
    if l && y < 0.0 {
        return None;
    }
    let triple = ObservedTriple::new(y, l, r);
    triple.in_support(w).then_some(triple)
}

/// Unit-weight records for the observable units of `units`.
pub fn observe(units: &[LatentUnit], w: &StudyWindow) -> Result<Vec<ObservedRecord>> {
    let records: Vec<_> = units
        .iter()
        .filter_map(|u| reduce(u, w))
        .map(|triple| ObservedRecord {
            triple,
            weight: 1.0,
        })
        .collect();
    if records.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(records)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub records: Vec<ObservedRecord>,
    pub n_latent: u64,
    pub m_observed: u64,
}

/// Draw a latent population and keep the observable units.
pub fn simulate_sample(cfg: &SimConfig) -> Result<Sample> {
    simulate_stream(cfg, 0)
}

fn simulate_stream(cfg: &SimConfig, stream: u64) -> Result<Sample> {
    let mut rng = stream_rng(cfg.seed, stream);
    let mut records = Vec::new();
    for _ in 0..cfg.n {
        let u = draw_unit(&mut rng, cfg.theta0, &cfg.window);
        if let Some(triple) = reduce(&u, &cfg.window) {
            records.push(ObservedRecord {
                triple,
                weight: 1.0,
            });
        }
    }
    if records.is_empty() {
        return Err(Error::EmptySample);
    }
    let m_observed = records.len() as u64;
    Ok(Sample {
        records,
        n_latent: cfg.n,
        m_observed,
    })
}

/// Summary of a Monte Carlo study. Serializes to a flat JSON object; the
/// standardized estimates are kept out of the JSON and exposed separately.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyReport {
    pub theta0: f64,
    pub s: f64,
    #[serde(rename = "G")]
    pub g: f64,
    pub n: u64,
    pub seed: u64,
    pub level: f64,
    pub replications: usize,
    pub failures: usize,
    pub mean_theta: f64,
    pub sd_theta: f64,
    pub mean_se: f64,
    pub coverage: f64,
    pub mean_observed: f64,
    /// `(theta_hat - theta0) / se` per successful replication, in
    /// replication order.
    #[serde(skip)]
    pub standardized: Vec<f64>,
}

/// Replicate simulate-and-fit `replications` times. Replication `k` uses
/// stream `k + 1` of `cfg.seed`. Failed fits are counted, not fatal.
pub fn mc_study(cfg: &SimConfig, replications: usize, level: f64) -> Result<StudyReport> {
    if replications < 2 {
        return Err(Error::InvalidConfig(format!(
            "a study needs at least 2 replications, got {replications}"
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidLevel(level));
    }
    let fit_cfg = FitConfig {
        level,
        ..FitConfig::default()
    };
    let outcomes: Vec<Option<(estimator::FitResult, u64)>> = (0..replications)
        .into_par_iter()
        .map(|k| {
            let sample = simulate_stream(cfg, k as u64 + 1).ok()?;
            let stats = estimator::summarize(&sample.records, &cfg.window).ok()?;
            let fit = estimator::fit_mle(&stats, &cfg.window, &fit_cfg).ok()?;
            (fit.converged && !fit.at_boundary).then_some((fit, sample.m_observed))
        })
        .collect();

    let fits: Vec<_> = outcomes.iter().flatten().collect();
    let failures = replications - fits.len();
    let ok = fits.len() as f64;
    let (mean_theta, sd_theta, mean_se, coverage, mean_observed) = if fits.is_empty() {
        (f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN)
    } else {
        let mean_theta = estimator::neumaier(fits.iter().map(|f| f.0.theta_hat)) / ok;
        let var = if fits.len() > 1 {
            estimator::neumaier(fits.iter().map(|f| (f.0.theta_hat - mean_theta).powi(2)))
                / (ok - 1.0)
        } else {
            f64::NAN
        };
        let mean_se = estimator::neumaier(fits.iter().map(|f| f.0.se)) / ok;
        let covered = fits
            .iter()
            .filter(|f| f.0.ci_low <= cfg.theta0 && cfg.theta0 <= f.0.ci_high)
            .count();
        let mean_obs = estimator::neumaier(fits.iter().map(|f| f.1 as f64)) / ok;
        (
            mean_theta,
            var.sqrt(),
            mean_se,
            covered as f64 / ok,
            mean_obs,
        )
    };
    Ok(StudyReport {
        theta0: cfg.theta0,
        s: cfg.window.s(),
        g: cfg.window.g(),
        n: cfg.n,
        seed: cfg.seed,
        level,
        replications,
        failures,
        mean_theta,
        sd_theta,
        mean_se,
        coverage,
        mean_observed,
        standardized: fits
            .iter()
            .map(|f| (f.0.theta_hat - cfg.theta0) / f.0.se)
            .collect(),
    })
}
