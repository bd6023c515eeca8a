//! Single-coordinate update inside an active group.
//!
//! With the rest of the problem fixed, coordinate `j` of group `ℓ` minimizes
//!
//! ```text
//! h(θ) = ½aθ² − zθ + λ₁w(√(θ² + c²) − c) + λ₂|θ|
//! ```
//!
//! where `a = ‖Z_j‖²`, `z = Z_jᵀr_j` (the partial residual excludes `θ_j`) and
//! `c` is the norm of the other coordinates of the block.

use ndarray::{ArrayView1, ArrayView2};

use crate::error::{Result, SglError};
use crate::model::PenaltySpec;
use crate::scalar_opt::minimize_scalar;
use crate::solver::screen::soft_threshold;

/// Sufficient statistics for one coordinate update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordinateState {
    /// `‖Z_j‖²`
    pub col_sq_norm: f64,
    /// `Z_jᵀ r_j`
    pub correlation: f64,
    /// `Σ_{k≠j} θ_k²` over the same block.
    pub others_sq_norm: f64,
    pub current: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordinateStep {
    pub value: f64,
    pub search_evals: usize,
    pub hit_eval_cap: bool,
}

impl CoordinateStep {
    fn exact(value: f64) -> Self {
        CoordinateStep {
            value,
            search_evals: 0,
            hit_eval_cap: false,
        }
    }
}

/// `h(θ)` relative to `h(0)`, written so that nothing cancels near the optimum.
fn restricted_objective(theta: f64, a: f64, z: f64, g1: f64, c: f64, l2: f64) -> f64 {
    let t2 = theta * theta;
    let group = t2 / ((t2 + c * c).sqrt() + c);
    0.5 * a * t2 - z * theta + g1 * group + l2 * theta.abs()
}

/// Root of `h'` on the smooth branch `sign(θ) = sign(z)`, as a magnitude
/// `u > 0`. `h'` is strictly increasing there, negative at 0 and nonnegative at
/// `(|z| − λ₂)/a`, so a safeguarded Newton iteration converges to full
/// precision.
fn refine_on_branch(a: f64, z_abs: f64, g1: f64, c: f64, l2: f64, start: f64) -> f64 {
    let drive = z_abs - l2;
    let slope = |u: f64| a * u - drive + g1 * u / (u * u + c * c).sqrt();
    let curvature = |u: f64| {
        let q = u * u + c * c;
        a + g1 * c * c / (q * q.sqrt())
    };
    let (mut lo, mut hi) = (0.0_f64, drive / a);
    let mut u = if start > lo && start < hi { start } else { 0.5 * (lo + hi) };
    for _ in 0..100 {
        let s = slope(u);
        if s == 0.0 {
            return u;
        }
        if s < 0.0 {
            lo = u;
        } else {
            hi = u;
        }
        let newton = u - s / curvature(u);
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - u).abs() <= 4.0 * f64::EPSILON * u.abs() || hi - lo <= 4.0 * f64::EPSILON * hi {
            return next;
        }
        u = next;
    }
    u
}

/// Exact screens first; otherwise a bracketed golden-section/parabolic search
/// on `h`, refined on the smooth branch it lands on.
pub fn update_coordinate(
    state: &CoordinateState,
    penalty: &PenaltySpec,
    w: f64,
    inner_tol: f64,
) -> Result<CoordinateStep> {
    let a = state.col_sq_norm;
    let z = state.correlation;
    let g1 = penalty.lambda1 * w;
    let l2 = penalty.lambda2;
    let c = state.others_sq_norm.max(0.0).sqrt();

    if !(a > 0.0) {
        // Constant column after centering: the penalty alone decides.
        return Ok(CoordinateStep::exact(0.0));
    }
    if l2 > 0.0 && z.abs() < l2 {
        return Ok(CoordinateStep::exact(0.0));
    }
    if c == 0.0 || g1 == 0.0 {
        // The group norm is |θ| (c = 0) or absent: plain soft threshold.
        let threshold = l2 + if c == 0.0 { g1 } else { 0.0 };
        return Ok(CoordinateStep::exact(soft_threshold(z, threshold) / a));
    }
    if z.abs() <= l2 {
        // Smooth group term has zero slope at 0.
        return Ok(CoordinateStep::exact(0.0));
    }

    let h = |t: f64| restricted_objective(t, a, z, g1, c, l2);
    let current = state.current;
    let radius = (z.abs() + l2) / a.max(f64::MIN_POSITIVE) + current.abs();
    let (lower, upper) = (current - radius, current + radius);
    let found = minimize_scalar(h, lower, upper, inner_tol * (1.0 + (upper - lower)))?;

    let sign = z.signum();
    let candidate = sign * refine_on_branch(a, z.abs(), g1, c, l2, sign * found.argmin);
    let value = if h(candidate) <= h(current) { candidate } else { current };
    Ok(CoordinateStep {
        value,
        search_evals: found.evals,
        hit_eval_cap: found.hit_eval_cap,
    })
}

/// Updates coordinate `j` of a block `Z` given the partial residual `r_j`
/// (which excludes `θ_j`'s contribution) and the current block `θ`.
pub fn coordinate_update(
    j: usize,
    block: ArrayView2<'_, f64>,
    partial_residual: ArrayView1<'_, f64>,
    theta: &[f64],
    penalty: &PenaltySpec,
    w: f64,
    inner_tol: f64,
) -> Result<f64> {
    if block.ncols() != theta.len() || j >= theta.len() || block.nrows() != partial_residual.len() {
        return Err(SglError::DimensionMismatch(format!(
            "block is {}x{}, residual has {} rows, theta has {} entries, j = {j}",
            block.nrows(),
            block.ncols(),
            partial_residual.len(),
            theta.len()
        )));
    }
    let col = block.column(j);
    let state = CoordinateState {
        col_sq_norm: col.dot(&col),
        correlation: col.dot(&partial_residual),
        others_sq_norm: theta
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != j)
            .map(|(_, t)| t * t)
            .sum(),
        current: theta[j],
    };
    Ok(update_coordinate(&state, penalty, w, inner_tol)?.value)
}
