//! Derivative-free minimization of a continuous function on a bracket:
//! golden-section search accelerated by successive parabolic interpolation
//! (Brent's `fmin`). No differentiability is assumed, so kinks such as `|x|`
//! are handled.

use crate::error::{Result, SglError};

/// `(3 − √5) / 2`, the golden-section step fraction.
const GOLDEN: f64 = 0.381_966_011_250_105_1;

pub const DEFAULT_MAX_EVALS: usize = 200;

/// Result of [`minimize_scalar`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketedMinimum {
    pub argmin: f64,
    pub value: f64,
    pub evals: usize,
    /// Set when the evaluation cap stopped the search; `argmin` is then the
    /// best point seen.
    pub hit_eval_cap: bool,
}

/// Default tolerance for a bracket: `1e-10·(1 + width)`.
pub fn default_tol(lower: f64, upper: f64) -> f64 {
    1e-10 * (1.0 + (upper - lower).abs())
}

/// Minimizes `f` on `[lower, upper]` with the default evaluation cap.
pub fn minimize_scalar<F>(f: F, lower: f64, upper: f64, tol: f64) -> Result<BracketedMinimum>
where
    F: FnMut(f64) -> f64,
{
    minimize_scalar_capped(f, lower, upper, tol, DEFAULT_MAX_EVALS)
}

pub fn minimize_scalar_capped<F>(
    mut f: F,
    lower: f64,
    upper: f64,
    tol: f64,
    max_evals: usize,
) -> Result<BracketedMinimum>
where
    F: FnMut(f64) -> f64,
{
    if !(lower.is_finite() && upper.is_finite() && lower < upper) {
        return Err(SglError::InvalidBracket { lower, upper });
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(SglError::InvalidConfig(format!("tolerance must be positive, got {tol}")));
    }
    let max_evals = max_evals.max(3);
    let evals = std::cell::Cell::new(0usize);
    let mut eval = |x: f64| -> Result<f64> {
        evals.set(evals.get() + 1);
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(SglError::NonFiniteEvaluation(x))
        }
    };

    // Relative part of the step tolerance; never below a couple of ulps so
    // that trial points stay distinct from x.
    let rel = tol.max(2.0 * f64::EPSILON);

    let (mut a, mut b) = (lower, upper);
    let mut x = a + GOLDEN * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = eval(x)?;
    let (mut fw, mut fv) = (fx, fx);
    let mut d = 0.0_f64;
    let mut e = 0.0_f64;
    let mut hit_eval_cap = false;

    loop {
        let xm = 0.5 * (a + b);
        let tol1 = rel * x.abs() + tol / 3.0;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        if evals.get() + 2 >= max_evals {
            hit_eval_cap = true;
            break;
        }

        let mut golden = true;
        if e.abs() > tol1 {
            // Fit a parabola through (v, fv), (w, fw), (x, fx).
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_prev = e;
            e = d;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = GOLDEN * e;
        }

        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = eval(u)?;

        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
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

    // Interior iterates never touch the ends; a monotone function is
    // minimized exactly at one of them.
    for end in [lower, upper] {
        let fe = eval(end)?;
        if fe < fx {
            x = end;
            fx = fe;
        }
    }

    Ok(BracketedMinimum {
        argmin: x,
        value: fx,
        evals: evals.get(),
        hit_eval_cap,
    })
}
