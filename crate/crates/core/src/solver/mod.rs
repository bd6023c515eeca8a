//! Blockwise coordinate descent for the sparse group lasso.
//!
//! Each sweep visits the groups in order. A group is zeroed outright when its
//! zero test passes; otherwise its coordinates are updated one at a time
//! (exact lasso screen, then a one-dimensional search) until the block
//! settles. Orthonormal blocks can take the closed-form block solution
//! instead. With `λ₂ = 0` the zero test is the plain group-lasso norm test.

mod coordinate;
mod kkt;
mod screen;

pub use coordinate::{coordinate_update, update_coordinate, CoordinateState, CoordinateStep};
pub use kkt::{kkt_residual, KktReport};
pub use screen::{
    orthonormal_group_update, screen_group, screen_group_gl, soft_threshold, GroupScreenReport,
};

use ndarray::{Array1, Array2};

use crate::error::{Result, SglError};
use crate::linalg::{cholesky, cholesky_solve, gram, norm2, norm_inf, sum_of_squares};
use crate::model::{Coefficients, GroupedProblem, PenaltySpec};

/// Tolerance on `‖ZᵀZ − I‖∞` for a block to count as orthonormal.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// Upper bound on repeated coordinate passes within one group visit.
const MAX_BLOCK_PASSES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Converged once a full sweep moves no coefficient by more than this.
    pub outer_tol: f64,
    pub max_sweeps: usize,
    /// Relative tolerance of the one-dimensional search.
    pub inner_tol: f64,
    pub orthonormal_fast_path: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            outer_tol: 1e-7,
            max_sweeps: 10_000,
            inner_tol: 1e-10,
            orthonormal_fast_path: true,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.outer_tol > 0.0 && self.inner_tol > 0.0) {
            return Err(SglError::InvalidConfig("solver tolerances must be positive".into()));
        }
        if self.max_sweeps == 0 {
            return Err(SglError::InvalidConfig("max_sweeps must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub coefficients: Coefficients,
    pub objective: f64,
    pub sweeps: usize,
    pub converged: bool,
    pub max_coef_delta: f64,
    pub kkt: KktReport,
    /// Objective at the starting point followed by its value after every sweep.
    pub objective_trace: Vec<f64>,
    /// Unpenalized fit on a rank-deficient design; the solution is one of many.
    pub degenerate: bool,
    /// Coordinate searches that stopped on the evaluation cap.
    pub search_cap_hits: usize,
}

impl FitResult {
    /// Largest increase between consecutive entries of the objective trace
    /// (zero or negative for a monotone run).
    pub fn max_objective_increase(&self) -> f64 {
        self.objective_trace
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Per-group Gram blocks and column norms, computed once per fit.
struct BlockCache {
    grams: Vec<Array2<f64>>,
    orthonormal: Vec<bool>,
}

impl BlockCache {
    fn new(problem: &GroupedProblem) -> Self {
        let grams: Vec<Array2<f64>> = (0..problem.n_groups())
            .map(|l| gram(problem.block(l)))
            .collect();
        let orthonormal = grams
            .iter()
            .map(|g| {
                g.indexed_iter().all(|((i, j), &v)| {
                    let target = if i == j { 1.0 } else { 0.0 };
                    (v - target).abs() <= ORTHONORMAL_TOL
                })
            })
            .collect();
        BlockCache { grams, orthonormal }
    }
}

/// Exact minimizer of the block objective along the ray `t·S(a, λ₂)`, `t ≥ 0`.
///
/// Used to leave a zero block whose zero test failed: at `θ = 0` every single
/// coordinate sees the group norm as `|θ_j|` with threshold `λ₁w + λ₂`, so
/// coordinate updates alone can stall there. Along `u = S(a, λ₂)/‖S(a, λ₂)‖`
/// the slope at 0 is `λ₁w − ‖S(a, λ₂)‖ < 0` and the step is closed form.
fn ray_start(a: &[f64], gram_l: &Array2<f64>, penalty: &PenaltySpec, w: f64) -> Option<Vec<f64>> {
    let d: Vec<f64> = a.iter().map(|&v| soft_threshold(v, penalty.lambda2)).collect();
    let norm = norm2(&d);
    let drive = norm - penalty.lambda1 * w;
    if !(drive > 0.0) {
        return None;
    }
    let u: Vec<f64> = d.iter().map(|v| v / norm).collect();
    let curvature: f64 = (0..u.len())
        .map(|i| u[i] * (0..u.len()).map(|k| gram_l[[i, k]] * u[k]).sum::<f64>())
        .sum();
    if !(curvature > 0.0) {
        return None;
    }
    let t = drive / curvature;
    Some(u.into_iter().map(|v| t * v).collect())
}

/// Fits the sparse group lasso at `penalty`, starting from `warm` or zero.
pub fn fit(
    problem: &GroupedProblem,
    penalty: &PenaltySpec,
    opts: &SolverOptions,
    warm: Option<&Coefficients>,
) -> Result<FitResult> {
    penalty.validate()?;
    opts.validate()?;
    let p = problem.n_features();
    let mut beta = match warm {
        Some(w) => {
            problem.check_coefficients(w)?;
            w.clone()
        }
        None => Coefficients::zeros(p),
    };

    let cache = BlockCache::new(problem);
    let degenerate = penalty.lambda1 == 0.0
        && penalty.lambda2 == 0.0
        && cholesky(gram(problem.x()).view(), 1e-10).is_none();

    let mut residual = problem.residual(&beta)?;
    let mut objective = 0.5 * sum_of_squares(residual.view()) + problem.penalty_value(&beta, penalty)?;
    let mut trace = vec![objective];
    let mut sweeps = 0;
    let mut converged = false;
    let mut max_coef_delta = f64::INFINITY;
    let mut search_cap_hits = 0;
    let block_tol = opts.outer_tol / 10.0;

    while sweeps < opts.max_sweeps {
        sweeps += 1;
        let mut sweep_delta = 0.0_f64;
        let r = residual.as_slice_mut().expect("contiguous residual");

        for l in 0..problem.n_groups() {
            let range = problem.groups().range(l);
            let w = problem.weight(l);
            let g1 = penalty.lambda1 * w;
            let gram_l = &cache.grams[l];
            let before: Vec<f64> = beta.as_slice()[range.clone()].to_vec();

            // a = X_ℓᵀ r_ℓ with r_ℓ = r + X_ℓ β_ℓ
            let a: Vec<f64> = range
                .clone()
                .enumerate()
                .map(|(i, j)| {
                    dot(problem.column(j), r)
                        + (0..before.len()).map(|k| gram_l[[i, k]] * before[k]).sum::<f64>()
                })
                .collect();

            let is_zero = if g1 == 0.0 {
                false
            } else if penalty.lambda2 == 0.0 {
                screen_group_gl(&a, penalty.lambda1, w) || norm2(&a) <= g1
            } else {
                screen_group(&a, penalty, w)?.is_zero
            };

            let coefs = beta.as_mut_slice();
            if is_zero || (opts.orthonormal_fast_path && cache.orthonormal[l]) {
                let target = if is_zero {
                    vec![0.0; a.len()]
                } else {
                    orthonormal_group_update(&a, penalty, w)
                };
                for (k, j) in range.clone().enumerate() {
                    if coefs[j] != target[k] {
                        axpy(coefs[j] - target[k], problem.column(j), r);
                        coefs[j] = target[k];
                    }
                }
            } else {
                if before.iter().all(|&v| v == 0.0) {
                    if let Some(start) = ray_start(&a, gram_l, penalty, w) {
                        for (k, j) in range.clone().enumerate() {
                            if start[k] != 0.0 {
                                axpy(-start[k], problem.column(j), r);
                                coefs[j] = start[k];
                            }
                        }
                    }
                }
                for _ in 0..MAX_BLOCK_PASSES {
                    let mut pass_delta = 0.0_f64;
                    for (k, j) in range.clone().enumerate() {
                        let old = coefs[j];
                        let col = problem.column(j);
                        let col_sq = gram_l[[k, k]];
                        let others_sq: f64 = coefs[range.clone()]
                            .iter()
                            .enumerate()
                            .filter(|&(i, _)| i != k)
                            .map(|(_, v)| v * v)
                            .sum();
                        let state = CoordinateState {
                            col_sq_norm: col_sq,
                            correlation: dot(col, r) + col_sq * old,
                            others_sq_norm: others_sq,
                            current: old,
                        };
                        let step = update_coordinate(&state, penalty, w, opts.inner_tol)?;
                        if step.hit_eval_cap {
                            search_cap_hits += 1;
                        }
                        if step.value != old {
                            axpy(old - step.value, col, r);
                            coefs[j] = step.value;
                            pass_delta = pass_delta.max((step.value - old).abs());
                        }
                    }
                    if pass_delta <= block_tol {
                        break;
                    }
                }
            }

            let moved = coefs[range.clone()]
                .iter()
                .zip(&before)
                .fold(0.0_f64, |m, (n, o)| m.max((n - o).abs()));
            sweep_delta = sweep_delta.max(moved);
        }

        // Fresh residual each sweep keeps incremental rounding from drifting.
        residual = problem.residual(&beta)?;
        objective = 0.5 * sum_of_squares(residual.view()) + problem.penalty_value(&beta, penalty)?;
        trace.push(objective);
        max_coef_delta = sweep_delta;
        if sweep_delta <= opts.outer_tol {
            converged = true;
            break;
        }
    }

    let kkt = kkt_residual(problem, &beta, penalty)?;
    Ok(FitResult {
        coefficients: beta,
        objective,
        sweeps,
        converged,
        max_coef_delta,
        kkt,
        objective_trace: trace,
        degenerate,
        search_cap_hits,
    })
}

/// Group lasso (`λ₂ = 0`) with group level `lam`.
pub fn fit_group_lasso(
    problem: &GroupedProblem,
    lam: f64,
    opts: &SolverOptions,
    warm: Option<&Coefficients>,
) -> Result<FitResult> {
    fit(problem, &PenaltySpec::new(lam, 0.0)?, opts, warm)
}

/// For each active group of a group-lasso solution, the sup-norm gap in the
/// ridge fixed point `β_ℓ = (X_ℓᵀX_ℓ + λw/‖β_ℓ‖·I)⁻¹ X_ℓᵀ r_ℓ`. `None` for
/// zero groups, where the fixed point is undefined.
pub fn ridge_fixed_point_residuals(
    problem: &GroupedProblem,
    beta: &Coefficients,
    lam: f64,
) -> Result<Vec<Option<f64>>> {
    let residual = problem.residual(beta)?;
    let mut out = Vec::with_capacity(problem.n_groups());
    for l in 0..problem.n_groups() {
        let block_beta = beta.block(problem.groups(), l);
        let norm = norm2(block_beta);
        if norm == 0.0 {
            out.push(None);
            continue;
        }
        let x_l = problem.block(l);
        let theta = Array1::from(block_beta.to_vec());
        let r_l = &residual + &x_l.dot(&theta);
        let rhs = x_l.t().dot(&r_l);
        let mut system = gram(x_l);
        let ridge = lam * problem.weight(l) / norm;
        system.diag_mut().mapv_inplace(|d| d + ridge);
        let gap = match cholesky(system.view(), 1e-300) {
            Some(factor) => {
                let solved = cholesky_solve(&factor, rhs.view());
                norm_inf((&solved - &theta).as_slice().expect("contiguous"))
            }
            None => f64::INFINITY,
        };
        out.push(Some(gap));
    }
    Ok(out)
}
