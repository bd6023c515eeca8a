//! Reference solver by plain proximal gradient, kept deliberately separate
//! from the coordinate-descent path so that agreement between the two means
//! something. Desk-scale only.

use ndarray::Array1;

use crate::error::{Result, SglError};
use crate::linalg::{largest_gram_eigenvalue, norm2};
use crate::model::{Coefficients, GroupedProblem, PenaltySpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Fixed step; `None` uses `1/λ_max(XᵀX)` from power iteration.
    pub step: Option<f64>,
    pub max_iters: usize,
    /// Stop once one iteration lowers the objective by at most `tol·(1 + f)`.
    pub tol: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            step: None,
            max_iters: 1_000_000,
            tol: 1e-16,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub coefficients: Coefficients,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub step: f64,
}

/// Prox of `step·(λ₁w‖·‖₂ + λ₂‖·‖₁)`: soft-threshold each entry by `step·λ₂`,
/// then shrink the block norm by `step·λ₁w`.
pub fn prox_sgl(v: &[f64], step: f64, penalty: &PenaltySpec, w: f64) -> Vec<f64> {
    let t2 = step * penalty.lambda2;
    let g: Vec<f64> = v
        .iter()
        .map(|&x| x.signum() * (x.abs() - t2).max(0.0))
        .collect();
    let norm = norm2(&g);
    let t1 = step * penalty.lambda1 * w;
    if norm <= t1 || norm == 0.0 {
        return vec![0.0; v.len()];
    }
    let scale = 1.0 - t1 / norm;
    g.into_iter().map(|x| scale * x).collect()
}

pub fn fit_oracle(
    problem: &GroupedProblem,
    penalty: &PenaltySpec,
    opts: &OracleOptions,
) -> Result<OracleResult> {
    penalty.validate()?;
    let lipschitz = largest_gram_eigenvalue(problem.x(), 10_000, 1e-13);
    let step = match opts.step {
        Some(s) if s > 0.0 => s,
        Some(s) => return Err(SglError::InvalidConfig(format!("oracle step must be positive, got {s}"))),
        // A hair under 1/L so the eigenvalue estimate's error cannot break descent.
        None if lipschitz > 0.0 => 0.999 / lipschitz,
        None => 1.0,
    };

    let x = problem.x();
    let y = problem.y();
    let groups = problem.groups();
    let mut beta = Array1::<f64>::zeros(problem.n_features());
    let mut coefs = Coefficients::new(beta.clone())?;
    let mut objective = problem.objective(&coefs, penalty)?;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iters {
        iterations += 1;
        let residual = &y - &x.dot(&beta);
        let forward = &beta + &(x.t().dot(&residual) * step);
        let mut next = Array1::<f64>::zeros(beta.len());
        for (l, range) in groups.ranges().enumerate() {
            let block = prox_sgl(
                &forward.as_slice().expect("contiguous")[range.clone()],
                step,
                penalty,
                problem.weight(l),
            );
            next.slice_mut(ndarray::s![range]).assign(&Array1::from(block));
        }
        let next_coefs = Coefficients::new(next.clone())?;
        let next_objective = problem.objective(&next_coefs, penalty)?;
        let decrease = objective - next_objective;
        beta = next;
        coefs = next_coefs;
        objective = next_objective;
        if decrease <= opts.tol * (1.0 + objective.abs()) {
            converged = true;
            break;
        }
    }

    Ok(OracleResult {
        coefficients: coefs,
        objective,
        iterations,
        converged,
        step,
    })
}
