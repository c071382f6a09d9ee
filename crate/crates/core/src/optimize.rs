//! Bounded scalar maximization: a log-spaced pre-scan to pick the bracket,
//! then Brent's golden-section / parabolic-interpolation search inside it.

use crate::error::{Error, Result};

/// Number of log-spaced points in the pre-scan.
pub const PRESCAN_POINTS: usize = 64;

const GOLDEN: f64 = 0.381_966_011_250_105_1;
const MAX_ITER: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub argmax: f64,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// The maximum sits on an endpoint of the search interval.
    pub at_boundary: bool,
}

/// Maximize `f` over `[lo, hi]` (`0 < lo < hi`).
///
/// The pre-scan evaluates `f` on [`PRESCAN_POINTS`] log-spaced points and
/// fails if any value is non-finite. The leftmost best grid point selects
/// the bracket of its two neighbours, which Brent's method then refines to
/// an absolute tolerance of `tol` (floored at the square-root of machine
/// precision relative to the iterate, below which a smooth maximum cannot be
/// located from function values).
pub fn maximize_log_scan<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<Maximum>
where
    F: FnMut(f64) -> f64,
{
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::InvalidGrid(format!("search interval [{lo}, {hi}]")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let grid = log_grid(lo, hi, PRESCAN_POINTS);
    let mut values = Vec::with_capacity(grid.len());
    for &x in &grid {
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::NonFiniteObjective { theta: x });
        }
        values.push(v);
    }
    let best = leftmost_max(&values);
    let left = grid[best.saturating_sub(1)];
    let right = grid[(best + 1).min(grid.len() - 1)];

    let inner = brent_max(&mut f, left, right, tol);

    // Brent never evaluates the bracket ends; compare against them so a
    // boundary maximum of the whole domain is reported as such.
    let mut out = inner;
    if best == 0 && values[0] >= inner.value {
        out = Maximum {
            argmax: lo,
            value: values[0],
            at_boundary: true,
            ..inner
        };
    } else if best == grid.len() - 1 && values[best] > inner.value {
        out = Maximum {
            argmax: hi,
            value: values[best],
            at_boundary: true,
            ..inner
        };
    }
    Ok(out)
}

pub(crate) fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / (points - 1) as f64;
    (0..points)
        .map(|i| match i {
            0 => lo,
            i if i == points - 1 => hi,
            i => (a + step * i as f64).exp(),
        })
        .collect()
}

/// Index of the first maximal entry.
pub(crate) fn leftmost_max(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Brent's method for a maximum on `[a, b]`.
fn brent_max<F>(f: &mut F, mut a: f64, mut b: f64, tol: f64) -> Maximum
where
    F: FnMut(f64) -> f64,
{
    let sqrt_eps = f64::EPSILON.sqrt();
    let mut x = a + GOLDEN * (b - a);
    let mut w = x;
    let mut v = x;
    // minimize the negation
    let mut fx = -f(x);
    let mut fw = fx;
    let mut fv = fx;
    let mut d = 0.0_f64;
    let mut e = 0.0_f64;

    for iter in 1..=MAX_ITER {
        let mid = 0.5 * (a + b);
        let tol1 = sqrt_eps * x.abs() + tol / 3.0;
        let tol2 = 2.0 * tol1;
        if (x - mid).abs() <= tol2 - 0.5 * (b - a) {
            return Maximum {
                argmax: x,
                value: -fx,
                iterations: iter,
                converged: true,
                at_boundary: false,
            };
        }

        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_prev = e;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if x < mid { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x < mid { b - x } else { a - x };
            d = GOLDEN * e;
        }

        let u = if d.abs() >= tol1 {
            x + d
        } else if d > 0.0 {
            x + tol1
        } else {
            x - tol1
        };
        let fu = -f(u);

        if fu <= fx {
            if u < x {
                b = x;
            } else {
                a = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }

    Maximum {
        argmax: x,
        value: -fx,
        iterations: MAX_ITER,
        converged: false,
        at_boundary: false,
    }
}
