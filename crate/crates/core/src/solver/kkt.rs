//! Subgradient optimality check, independent of how `β` was produced.
//!
//! Stationarity for group `ℓ` reads `X_ℓᵀ(y − Xβ) = λ₁w s + λ₂ t` with
//! `s = β_ℓ/‖β_ℓ‖` (or `‖s‖ ≤ 1` when the block is zero) and `t_j = sign(β_j)`
//! (or `t_j ∈ [−1, 1]` at zero coordinates).

use crate::error::Result;
use crate::linalg::norm2;
use crate::model::{Coefficients, GroupedProblem, PenaltySpec};
use crate::solver::screen::soft_threshold;

#[derive(Debug, Clone, PartialEq)]
pub struct KktReport {
    /// Per group, in gradient units. Zero blocks: `(‖S(a, λ₂)‖ − λ₁w)₊`, i.e.
    /// `λ₁w(√J(t̂) − 1)₊`. Active blocks: the largest coordinate residual.
    pub group_residuals: Vec<f64>,
    /// Per coordinate of active blocks, `|stationarity residual|` with the best
    /// feasible `t_j` at zero coordinates. Zero for coordinates of zero blocks.
    pub coord_residuals: Vec<f64>,
    pub worst_violation: f64,
}

impl KktReport {
    pub fn is_optimal(&self, tol: f64) -> bool {
        self.worst_violation <= tol
    }
}

pub fn kkt_residual(
    problem: &GroupedProblem,
    beta: &Coefficients,
    penalty: &PenaltySpec,
) -> Result<KktReport> {
    let r = problem.residual(beta)?;
    let gradient = problem.x().t().dot(&r);
    let groups = problem.groups();
    let l2 = penalty.lambda2;
    let mut group_residuals = Vec::with_capacity(groups.len());
    let mut coord_residuals = vec![0.0; beta.len()];

    for (l, range) in groups.ranges().enumerate() {
        let g1 = penalty.lambda1 * problem.weight(l);
        let block = &beta.as_slice()[range.clone()];
        let a = &gradient.as_slice().expect("contiguous")[range.clone()];
        let residual = if block.iter().all(|&v| v == 0.0) {
            if g1 > 0.0 {
                let shrunk: Vec<f64> = a.iter().map(|&aj| soft_threshold(aj, l2)).collect();
                (norm2(&shrunk) - g1).max(0.0)
            } else {
                a.iter().fold(0.0_f64, |m, aj| m.max(aj.abs() - l2))
            }
        } else {
            let norm = norm2(block);
            let mut worst = 0.0_f64;
            for (k, (&bj, &aj)) in block.iter().zip(a).enumerate() {
                let res = if bj != 0.0 {
                    (aj - g1 * bj / norm - l2 * bj.signum()).abs()
                } else {
                    (aj.abs() - l2).max(0.0)
                };
                coord_residuals[range.start + k] = res;
                worst = worst.max(res);
            }
            worst
        };
        group_residuals.push(residual);
    }

    let worst_violation = group_residuals.iter().fold(0.0_f64, |m, &v| m.max(v));
    Ok(KktReport {
        group_residuals,
        coord_residuals,
        worst_violation,
    })
}
