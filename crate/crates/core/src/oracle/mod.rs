//! Independent numerical routes to every closed form in [`crate::model`]
//! and to the estimator: quadrature of the observed density, a quadrature
//! version of the population criterion, finite differences, brute-force
//! grid search and latent-measure Monte Carlo.
//!
//! Nothing here calls the analytic derivatives it is meant to check.

pub mod quadrature;
pub mod registry;

use crate::error::{Error, Result};
use crate::estimator::{self, SufficientStats};
use crate::model::{self, Cell, ObservedTriple, StudyWindow};
use crate::optimize::leftmost_max;
use crate::simulator::{draw_unit, stream_rng};

pub use quadrature::integrate;
pub use registry::{run_registry, Check, VerifyReport};

/// A grid of rates for brute-force search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    lo: f64,
    hi: f64,
    points: usize,
    log: bool,
}

impl GridSpec {
    pub fn linear(lo: f64, hi: f64, points: usize) -> Result<Self> {
        Self::new(lo, hi, points, false)
    }

    pub fn log(lo: f64, hi: f64, points: usize) -> Result<Self> {
        Self::new(lo, hi, points, true)
    }

    fn new(lo: f64, hi: f64, points: usize, log: bool) -> Result<Self> {
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "need 0 < lo < hi, got [{lo}, {hi}]"
            )));
        }
        if points < 3 {
            return Err(Error::InvalidGrid(format!(
                "need at least 3 points, got {points}"
            )));
        }
        Ok(Self {
            lo,
            hi,
            points,
            log,
        })
    }

    /// Spacing of a linear grid.
    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.points - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        let frac = i as f64 / (self.points - 1) as f64;
        if i == self.points - 1 {
            self.hi
        } else if self.log {
            (self.lo.ln() + frac * (self.hi.ln() - self.lo.ln())).exp()
        } else {
            self.lo + i as f64 * self.step()
        }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.points).map(|i| self.point(i))
    }

    pub fn len(&self) -> usize {
        self.points
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Grid point maximizing the profiled objective; ties go to the smallest
/// rate.
pub fn grid_argmax(stats: &SufficientStats, w: &StudyWindow, grid: &GridSpec) -> Result<f64> {
    grid_argmax_by(grid, |theta| estimator::profiled_objective(stats, theta, w))
}

/// Grid point maximizing an arbitrary criterion; ties go to the smallest
/// point.
pub fn grid_argmax_by<F>(grid: &GridSpec, mut f: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let values = grid.points().map(&mut f).collect::<Result<Vec<_>>>()?;
    Ok(grid.point(leftmost_max(&values)))
}

/// `integral_0^s f_theta(y, l, r) dy` for one cell.
pub fn quad_cell_mass(cell: Cell, theta: f64, w: &StudyWindow, a: f64, b: f64) -> Result<f64> {
    let (l, r) = cell.indicators();
    integrate(
        |y| model::obs_density(&ObservedTriple::new(y, l, r), theta, w),
        a,
        b,
        quadrature::ABS_TOL,
    )
}

/// Total mass of the observed density over `D`, by quadrature.
pub fn quad_density_mass(theta: f64, w: &StudyWindow) -> Result<f64> {
    model::alpha(theta, w)?;
    let mut total = 0.0;
    for cell in Cell::ALL {
        total += quad_cell_mass(cell, theta, w, 0.0, w.s())?;
    }
    Ok(total)
}

/// Observation probability as the latent-measure double integral of the
/// joint density of `(X, T)` over the observable region
/// `{-s <= t <= 0} u {0 < t <= x <= t + s}`.
pub fn quad_alpha(theta: f64, w: &StudyWindow) -> Result<f64> {
    model::alpha(theta, w)?;
    let s = w.s();
    let g = w.g();
    let density_t = 1.0 / g;
    // born during the study: observed whatever the lifespan
    let in_study = integrate(|_| density_t, -s, 0.0, quadrature::ABS_TOL)?;
    let mut inner_err = None;
    let before = integrate(
        |t| match integrate(
            |x| theta * (-theta * x).exp(),
            t,
            t + s,
            quadrature::ABS_TOL * 1e-2,
        ) {
            Ok(v) => v * density_t,
            Err(e) => {
                inner_err.get_or_insert(e);
                f64::NAN
            }
        },
        0.0,
        w.pre_span(),
        quadrature::ABS_TOL,
    );
    if let Some(e) = inner_err {
        return Err(e);
    }
    Ok(in_study + before?)
}

/// Moments of the observed distribution under rate `theta0`, by quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObsMoments {
    pub e_y: f64,
    pub e_l: f64,
    pub e_unc: f64,
}

pub fn quad_obs_moments(theta0: f64, w: &StudyWindow) -> Result<ObsMoments> {
    let mut e_y = 0.0;
    for cell in Cell::ALL {
        let (l, r) = cell.indicators();
        e_y += integrate(
            |y| y * model::obs_density(&ObservedTriple::new(y, l, r), theta0, w),
            0.0,
            w.s(),
            quadrature::ABS_TOL,
        )?;
    }
    Ok(ObsMoments {
        e_y,
        e_l: quad_cell_mass(Cell::Truncated, theta0, w, 0.0, w.s())?,
        e_unc: quad_cell_mass(Cell::Uncensored, theta0, w, 0.0, w.s())?,
    })
}

/// Population criterion `M(theta) = E_{theta0}[m_theta]` assembled from
/// quadrature moments of the observed distribution under `theta0`.
#[derive(Debug, Clone, Copy)]
pub struct QuadCriterion {
    alpha0: f64,
    moments: ObsMoments,
    window: StudyWindow,
}

impl QuadCriterion {
    pub fn new(theta0: f64, w: &StudyWindow) -> Result<Self> {
        Ok(Self {
            alpha0: model::alpha(theta0, w)?,
            moments: quad_obs_moments(theta0, w)?,
            window: *w,
        })
    }

    pub fn eval(&self, theta: f64) -> Result<f64> {
        let w = &self.window;
        let mo = &self.moments;
        let inner = -model::alpha(theta, w)?.ln() - theta * mo.e_y
            + model::k_log(theta, w)? * mo.e_l
            + theta.ln() * mo.e_unc;
        Ok(self.alpha0 * inner)
    }

    pub fn moments(&self) -> ObsMoments {
        self.moments
    }
}

/// `M(theta)` under true rate `theta0`, by quadrature.
pub fn quad_m(theta0: f64, theta: f64, w: &StudyWindow) -> Result<f64> {
    QuadCriterion::new(theta0, w)?.eval(theta)
}

/// Default finite-difference step: `max(1e-5, 1e-7 |x|)`.
pub fn default_step(x: f64) -> f64 {
    1e-5_f64.max(1e-7 * x.abs())
}

/// Central difference of order 1 or 2.
pub fn finite_diff<F>(mut f: F, x: f64, order: u32, step: Option<f64>) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let h = step.unwrap_or_else(|| default_step(x));
    if !(h > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "step must be positive, got {h}"
        )));
    }
    let mut eval = |p: f64| {
        let v = f(p);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteEvaluation { x: p })
        }
    };
    match order {
        1 => Ok((eval(x + h)? - eval(x - h)?) / (2.0 * h)),
        2 => Ok((eval(x + h)? - 2.0 * eval(x)? + eval(x - h)?) / (h * h)),
        k => Err(Error::InvalidOrder(k)),
    }
}

/// Monte Carlo estimates (with plug-in standard errors) of
/// `E[chi_D L]`, `E[chi_D (1-L)(1-R)]`, `E[chi_D (1-L) R]` and
/// `E[chi_D]` under the latent measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McMoments {
    pub n: u64,
    pub e_l: f64,
    pub e_unc: f64,
    pub e_cens: f64,
    pub e_obs: f64,
}

impl McMoments {
    /// Standard error of a Bernoulli mean `p` over `n` draws.
    pub fn sigma(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.n as f64).sqrt()
    }
}

pub fn mc_indicator_moments(theta: f64, w: &StudyWindow, n: u64, seed: u64) -> Result<McMoments> {
    model::alpha(theta, w)?;
    if n == 0 {
        return Err(Error::InvalidConfig("need at least one draw".into()));
    }
    let mut rng = stream_rng(seed, 0);
    let (mut c_l, mut c_unc, mut c_cens) = (0u64, 0u64, 0u64);
    for _ in 0..n {
        let u = draw_unit(&mut rng, theta, w);
        // indicators straight from the latent pair, without the reduction
        let l = u.t > 0.0;
        let r = u.t + w.s() < u.x;
        let observable = u.t <= 0.0 || (u.t <= u.x && u.x <= u.t + w.s());
        if !observable {
            continue;
        }
        match (l, r) {
            (true, _) => c_l += 1,
            (false, false) => c_unc += 1,
            (false, true) => c_cens += 1,
        }
    }
    let nf = n as f64;
    Ok(McMoments {
        n,
        e_l: c_l as f64 / nf,
        e_unc: c_unc as f64 / nf,
        e_cens: c_cens as f64 / nf,
        e_obs: (c_l + c_unc + c_cens) as f64 / nf,
    })
}
