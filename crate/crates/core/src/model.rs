//! Closed-form quantities of the exponential lifespan model under double
//! truncation with left-truncation and right-censoring indicators.
//!
//! A latent unit has lifespan `X ~ Exp(theta)` and age at study begin
//! `T ~ Unif[-s, G - s]`. The study observes the reduced triple `(y, l, r)`
//! only when it falls inside the support
//! `D = [0, s] x {(0,0), (0,1), (1,0)}`.
//!
//! Every function here is pure and cheap. Quantities of the form `1 - e^{-x}`
//! and `log(1 - e^{-x})` go through `expm1`/`ln_1p` so that very small rates
//! keep full relative precision.

use crate::error::{Error, Result};

/// Design constants of the study: `s` observed years out of a cohort span of
/// `G` years ending at study end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyWindow {
    s: f64,
    g: f64,
}

impl StudyWindow {
    pub fn new(s: f64, g: f64) -> Result<Self> {
        if s.is_finite() && g.is_finite() && 0.0 < s && s < g {
            Ok(Self { s, g })
        } else {
            Err(Error::InvalidWindow { s, g })
        }
    }

    /// Study duration in years.
    pub fn s(&self) -> f64 {
        self.s
    }

    /// Total cohort span in years.
    pub fn g(&self) -> f64 {
        self.g
    }

    /// Cohorts born before the study, `G - s`.
    pub fn pre_span(&self) -> f64 {
        self.g - self.s
    }

    /// Fraction of the population born during the study, `s / G`.
    pub fn in_study_fraction(&self) -> f64 {
        self.s / self.g
    }
}

/// Compact parameter space `[eps, 1/eps]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamDomain {
    eps: f64,
}

impl ParamDomain {
    pub const DEFAULT_EPS: f64 = 1e-6;

    pub fn new(eps: f64) -> Result<Self> {
        if eps > 0.0 && eps < 1.0 {
            Ok(Self { eps })
        } else {
            Err(Error::InvalidDomain(eps))
        }
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn lower(&self) -> f64 {
        self.eps
    }

    pub fn upper(&self) -> f64 {
        1.0 / self.eps
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.lower() <= theta && theta <= self.upper()
    }

    pub fn contains_interior(&self, theta: f64) -> bool {
        self.lower() < theta && theta < self.upper()
    }
}

impl Default for ParamDomain {
    fn default() -> Self {
        Self {
            eps: Self::DEFAULT_EPS,
        }
    }
}

/// The three observable `(l, r)` combinations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cell {
    /// `(0, 0)`: born and died during the study.
    Uncensored,
    /// `(0, 1)`: born during the study, alive at study end.
    Censored,
    /// `(1, 0)`: born before the study, died during it.
    Truncated,
}

impl Cell {
    pub const ALL: [Cell; 3] = [Cell::Uncensored, Cell::Censored, Cell::Truncated];

    pub fn from_indicators(l: bool, r: bool) -> Option<Self> {
        match (l, r) {
            (false, false) => Some(Cell::Uncensored),
            (false, true) => Some(Cell::Censored),
            (true, false) => Some(Cell::Truncated),
            (true, true) => None,
        }
    }

    pub fn indicators(self) -> (bool, bool) {
        match self {
            Cell::Uncensored => (false, false),
            Cell::Censored => (false, true),
            Cell::Truncated => (true, false),
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Value of `l`.
    pub fn l(self) -> f64 {
        if self == Cell::Truncated {
            1.0
        } else {
            0.0
        }
    }

    /// Value of `(1 - l)(1 - r)`.
    pub fn unc(self) -> f64 {
        if self == Cell::Uncensored {
            1.0
        } else {
            0.0
        }
    }
}

/// One reduced observation: duration `y` (years), left-truncation indicator
/// `l` and right-censoring indicator `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservedTriple {
    pub y: f64,
    pub l: bool,
    pub r: bool,
}

impl ObservedTriple {
    pub fn new(y: f64, l: bool, r: bool) -> Self {
        Self { y, l, r }
    }

    pub fn cell(&self) -> Option<Cell> {
        Cell::from_indicators(self.l, self.r)
    }

    /// Membership in `D`. Uncensored triples additionally need `y < s`, where
    /// the factor `theta (s - y)` of the density is positive.
    pub fn in_support(&self, w: &StudyWindow) -> bool {
        match self.cell() {
            None => false,
            Some(cell) => {
                let upper_ok = if cell == Cell::Uncensored {
                    self.y < w.s
                } else {
                    self.y <= w.s
                };
                self.y >= 0.0 && upper_ok
            }
        }
    }
}

fn check_rate(theta: f64) -> Result<()> {
    if theta > 0.0 && theta.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveRate(theta))
    }
}

/// `1 - e^{-x}` without cancellation for small `x`.
#[inline]
pub(crate) fn one_minus_exp_neg(x: f64) -> f64 {
    -(-x).exp_m1()
}

/// Observation probability `alpha_theta = P((Y, L, R) in D)`.
pub fn alpha(theta: f64, w: &StudyWindow) -> Result<f64> {
    check_rate(theta)?;
    Ok(alpha_unchecked(theta, w))
}

fn alpha_unchecked(theta: f64, w: &StudyWindow) -> f64 {
    let p = one_minus_exp_neg(theta * w.s);
    let q = one_minus_exp_neg(theta * w.pre_span());
    w.in_study_fraction() + p * q / (w.g * theta)
}

/// `N(theta) = (1 - e^{-theta s})(1 - e^{-theta (G-s)})` and its first two
/// derivatives.
fn product_terms(theta: f64, w: &StudyWindow) -> (f64, f64, f64) {
    let s = w.s;
    let u = w.pre_span();
    let es = (-theta * s).exp();
    let eu = (-theta * u).exp();
    let p = one_minus_exp_neg(theta * s);
    let q = one_minus_exp_neg(theta * u);
    let dp = s * es;
    let dq = u * eu;
    let ddp = -s * s * es;
    let ddq = -u * u * eu;
    let n0 = p * q;
    let n1 = dp * q + p * dq;
    let n2 = ddp * q + 2.0 * dp * dq + p * ddq;
    (n0, n1, n2)
}

/// First derivative of [`alpha`] with respect to `theta`.
///
/// With `N = (1 - e^{-theta s})(1 - e^{-theta (G-s)})`, `alpha = s/G + N / (G theta)`
/// so `alpha' = (N'/theta - N/theta^2) / G`.
pub fn alpha_d1(theta: f64, w: &StudyWindow) -> Result<f64> {
    check_rate(theta)?;
    Ok(alpha_d1_unchecked(theta, w))
}

fn alpha_d1_unchecked(theta: f64, w: &StudyWindow) -> f64 {
    let (n0, n1, _) = product_terms(theta, w);
    (n1 / theta - n0 / (theta * theta)) / w.g
}

/// Second derivative of [`alpha`]: `(N''/theta - 2N'/theta^2 + 2N/theta^3) / G`.
pub fn alpha_d2(theta: f64, w: &StudyWindow) -> Result<f64> {
    check_rate(theta)?;
    Ok(alpha_d2_unchecked(theta, w))
}

fn alpha_d2_unchecked(theta: f64, w: &StudyWindow) -> f64 {
    let (n0, n1, n2) = product_terms(theta, w);
    let t2 = theta * theta;
    (n2 / theta - 2.0 * n1 / t2 + 2.0 * n0 / (t2 * theta)) / w.g
}

/// `K(theta) = log(1 - e^{-theta (G-s)})`.
pub fn k_log(theta: f64, w: &StudyWindow) -> Result<f64> {
    check_rate(theta)?;
    Ok(k_log_unchecked(theta, w))
}

fn k_log_unchecked(theta: f64, w: &StudyWindow) -> f64 {
    let x = theta * w.pre_span();
    // log(1 - e^{-x}): ln_1p for large x, log(-expm1(-x)) for small x
    if x > std::f64::consts::LN_2 {
        (-(-x).exp()).ln_1p()
    } else {
        one_minus_exp_neg(x).ln()
    }
}

/// `K'(theta) = (G-s) / (e^{theta (G-s)} - 1)`.
pub fn k_d1(theta: f64, w: &StudyWindow) -> Result<f64> {
    check_rate(theta)?;
    Ok(k_d1_unchecked(theta, w))
}

fn k_d1_unchecked(theta: f64, w: &StudyWindow) -> f64 {
    let u = w.pre_span();
    u / (theta * u).exp_m1()
}

/// `K''(theta) = -(G-s)^2 / (e^{theta(G-s)} - 1) - (G-s)^2 / (e^{theta(G-s)} - 1)^2`.
pub fn k_d2(theta: f64, w: &StudyWindow) -> Result<f64> {
    check_rate(theta)?;
    Ok(k_d2_unchecked(theta, w))
}

fn k_d2_unchecked(theta: f64, w: &StudyWindow) -> f64 {
    let u = w.pre_span();
    let e = (theta * u).exp_m1();
    let u2 = u * u;
    -u2 / e - u2 / (e * e)
}

/// Density of an observed triple with respect to Lebesgue measure on `y`
/// times counting measure on `(l, r)`. Zero outside `D`.
pub fn obs_density(t: &ObservedTriple, theta: f64, w: &StudyWindow) -> f64 {
    if !(theta > 0.0 && theta.is_finite()) || !t.in_support(w) {
        return 0.0;
    }
    let cell = t.cell().expect("support implies a valid cell");
    let base = (-theta * t.y).exp() / (alpha_unchecked(theta, w) * w.g);
    match cell {
        Cell::Uncensored => base * theta * (w.s - t.y),
        Cell::Censored => base,
        Cell::Truncated => base * one_minus_exp_neg(theta * w.pre_span()),
    }
}

/// Per-observation criterion `m_theta(y, l, r)`: the log-density with the
/// rate-free part `-log G + (1-l)(1-r) log(s-y)` removed. Zero outside `D`.
pub fn m_value(t: &ObservedTriple, theta: f64, w: &StudyWindow) -> f64 {
    match t.cell() {
        Some(cell) if t.in_support(w) => m_value_cell(cell, t.y, theta, w),
        _ => 0.0,
    }
}

pub(crate) fn m_value_cell(cell: Cell, y: f64, theta: f64, w: &StudyWindow) -> f64 {
    -alpha_unchecked(theta, w).ln() - theta * y
        + k_log_unchecked(theta, w) * cell.l()
        + theta.ln() * cell.unc()
}

/// First `theta`-derivative of [`m_value`].
pub fn m_d1(t: &ObservedTriple, theta: f64, w: &StudyWindow) -> f64 {
    match t.cell() {
        Some(cell) if t.in_support(w) => ScoreTerms::new(theta, w).score(cell, t.y),
        _ => 0.0,
    }
}

/// Second `theta`-derivative of [`m_value`].
pub fn m_d2(t: &ObservedTriple, theta: f64, w: &StudyWindow) -> f64 {
    match t.cell() {
        Some(cell) if t.in_support(w) => ScoreTerms::new(theta, w).curvature(cell),
        _ => 0.0,
    }
}

/// The `theta`-dependent coefficients shared by every record's score and
/// curvature, evaluated once per `theta`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ScoreTerms {
    theta: f64,
    /// `alpha'/alpha`
    log_alpha_d1: f64,
    /// `alpha''/alpha - (alpha'/alpha)^2`
    log_alpha_d2: f64,
    k1: f64,
    k2: f64,
}

impl ScoreTerms {
    pub(crate) fn new(theta: f64, w: &StudyWindow) -> Self {
        let a = alpha_unchecked(theta, w);
        let a1 = alpha_d1_unchecked(theta, w);
        let a2 = alpha_d2_unchecked(theta, w);
        let r1 = a1 / a;
        Self {
            theta,
            log_alpha_d1: r1,
            log_alpha_d2: a2 / a - r1 * r1,
            k1: k_d1_unchecked(theta, w),
            k2: k_d2_unchecked(theta, w),
        }
    }

    /// Part of the score that does not depend on `y`: score = offset - y.
    pub(crate) fn score_offset(&self, cell: Cell) -> f64 {
        -self.log_alpha_d1 + self.k1 * cell.l() + cell.unc() / self.theta
    }

    pub(crate) fn score(&self, cell: Cell, y: f64) -> f64 {
        self.score_offset(cell) - y
    }

    pub(crate) fn curvature(&self, cell: Cell) -> f64 {
        -self.log_alpha_d2 + self.k2 * cell.l() - cell.unc() / (self.theta * self.theta)
    }
}

/// Latent-measure indicator moments
/// `(E[chi_D L], E[chi_D (1-L)(1-R)])`.
pub fn indicator_moments(theta: f64, w: &StudyWindow) -> Result<(f64, f64)> {
    check_rate(theta)?;
    let p = one_minus_exp_neg(theta * w.s);
    let q = one_minus_exp_neg(theta * w.pre_span());
    // alpha - s/G, without the subtraction
    let e_l = p * q / (w.g * theta);
    let e_unc = w.in_study_fraction() - p / (w.g * theta);
    Ok((e_l, e_unc))
}

/// Curvature of the population criterion at the truth,
/// `eta(theta | s, G) = E_theta[d^2/dtheta^2 m_theta]`, in its direct form:
///
/// `(-alpha'' + alpha'^2/alpha) + K''(alpha - s/G) - theta^{-2}(s/G - (1 - e^{-theta s})/(G theta))`.
///
/// Strictly negative for every `theta > 0` and `0 < s < G`.
pub fn eta(theta: f64, w: &StudyWindow) -> Result<f64> {
    check_rate(theta)?;
    let a = alpha_unchecked(theta, w);
    let a1 = alpha_d1_unchecked(theta, w);
    let a2 = alpha_d2_unchecked(theta, w);
    let (e_l, e_unc) = indicator_moments(theta, w)?;
    Ok((-a2 + a1 * a1 / a) + k_d2_unchecked(theta, w) * e_l - e_unc / (theta * theta))
}

/// [`eta`] with the `K''` term eliminated through the second derivative of
/// `log(alpha - s/G) = -log G - log theta + log(1 - e^{-theta s}) + K(theta)`.
pub fn eta_rearranged(theta: f64, w: &StudyWindow) -> Result<f64> {
    check_rate(theta)?;
    let s = w.s;
    let a = alpha_unchecked(theta, w);
    let a1 = alpha_d1_unchecked(theta, w);
    let a2 = alpha_d2_unchecked(theta, w);
    let (e_l, e_unc) = indicator_moments(theta, w)?;
    let p = one_minus_exp_neg(theta * s);
    let c = (-theta * s).exp();
    let t2 = theta * theta;
    let k_term = a2 - a1 * a1 / e_l - e_l / t2 + s * s * c / (p * p) * e_l;
    Ok((-a2 + a1 * a1 / a) + k_term - e_unc / t2)
}

/// [`eta`] split as a non-positive ratio term plus [`delta`]:
/// `{alpha'^2/alpha - alpha'^2/(alpha - s/G)} + Delta`.
pub fn eta_split(theta: f64, w: &StudyWindow) -> Result<f64> {
    Ok(eta_ratio_term(theta, w)? + delta(theta, w)?)
}

/// `alpha'^2/alpha - alpha'^2/(alpha - s/G)`, never positive.
pub fn eta_ratio_term(theta: f64, w: &StudyWindow) -> Result<f64> {
    check_rate(theta)?;
    let a = alpha_unchecked(theta, w);
    let a1 = alpha_d1_unchecked(theta, w);
    let (e_l, _) = indicator_moments(theta, w)?;
    Ok(a1 * a1 / a - a1 * a1 / e_l)
}

/// `Delta = s/(G theta) (1 - e^{-theta(G-s)}) H_1 - s/(G theta^2) (1 - e^{-theta s}) e^{-theta (G-s)} (H_1/s + 1)`,
/// strictly negative.
pub fn delta(theta: f64, w: &StudyWindow) -> Result<f64> {
    check_rate(theta)?;
    let s = w.s;
    let u = w.pre_span();
    let h1 = h_k(theta, s, 1)?;
    let q = one_minus_exp_neg(theta * u);
    let p = one_minus_exp_neg(theta * s);
    let first = s / (w.g * theta) * q * h1;
    let second = s / (w.g * theta * theta) * p * (-theta * u).exp() * (h1 / s + 1.0);
    Ok(first - second)
}

/// `Delta` in its unreduced form `alpha H_2 - (1 - e^{-theta s}) H_3 / G`.
pub fn delta_from_h(theta: f64, w: &StudyWindow) -> Result<f64> {
    check_rate(theta)?;
    let a = alpha_unchecked(theta, w);
    let p = one_minus_exp_neg(theta * w.s);
    Ok(a * h_k(theta, w.s, 2)? - p / w.g * h_k(theta, w.s, 3)?)
}

/// `H_k(theta) = s^k e^{-theta s} / (1 - e^{-theta s})^k - theta^{-k}` for `k = 1, 2, 3`.
pub fn h_k(theta: f64, s: f64, k: u32) -> Result<f64> {
    check_rate(theta)?;
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidConfig(format!("s must be positive, got {s}")));
    }
    if !(1..=3).contains(&k) {
        return Err(Error::InvalidOrder(k));
    }
    let a = s / one_minus_exp_neg(theta * s);
    let b = 1.0 / theta;
    let c = (-theta * s).exp();
    let k = k as i32;
    Ok(a.powi(k) * c - b.powi(k))
}
