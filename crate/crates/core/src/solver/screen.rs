//! Closed-form pieces of the block update: soft thresholding, the group zero
//! tests, and the exact block solution for orthonormal groups.

use crate::error::{Result, SglError};
use crate::linalg::norm2;
use crate::model::PenaltySpec;

/// `sign(z)·max(|z| − lam, 0)`.
#[inline]
pub fn soft_threshold(z: f64, lam: f64) -> f64 {
    debug_assert!(lam >= 0.0);
    if z > lam {
        z - lam
    } else if z < -lam {
        z + lam
    } else {
        0.0
    }
}

/// Outcome of the sparse-group zero test on one block.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupScreenReport {
    /// `X_ℓᵀ r_ℓ` for the block.
    pub a: Vec<f64>,
    /// Minimizer of `J` over the box `[−1, 1]^k`.
    pub t_hat: Vec<f64>,
    /// `J(t̂) = ‖a − λ₂t̂‖² / (λ₁w)²`.
    pub j_value: f64,
    pub is_zero: bool,
}

impl GroupScreenReport {
    /// Group-norm subgradient `s = (a − λ₂t̂)/(λ₁w)` implied by the test.
    pub fn s(&self, penalty: &PenaltySpec, w: f64) -> Vec<f64> {
        let g1 = penalty.lambda1 * w;
        self.a
            .iter()
            .zip(&self.t_hat)
            .map(|(a, t)| (a - penalty.lambda2 * t) / g1)
            .collect()
    }
}

/// The block is zero at the optimum iff some `t ∈ [−1,1]^k` makes
/// `‖a − λ₂t‖ ≤ λ₁w`. The best `t` clips `a/λ₂` into the box, which leaves
/// `a − λ₂t̂ = S(a, λ₂)`.
pub fn screen_group(a: &[f64], penalty: &PenaltySpec, w: f64) -> Result<GroupScreenReport> {
    let g1 = penalty.lambda1 * w;
    if !(g1 > 0.0) {
        return Err(SglError::InvalidPenalty(format!(
            "group screen requires lambda1 * w > 0, got {g1}"
        )));
    }
    let l2 = penalty.lambda2;
    let t_hat: Vec<f64> = if l2 > 0.0 {
        a.iter().map(|&aj| (aj / l2).clamp(-1.0, 1.0)).collect()
    } else {
        vec![0.0; a.len()]
    };
    let j_value: f64 = a
        .iter()
        .map(|&aj| {
            let s = soft_threshold(aj, l2) / g1;
            s * s
        })
        .sum();
    Ok(GroupScreenReport {
        a: a.to_vec(),
        t_hat,
        j_value,
        is_zero: j_value <= 1.0,
    })
}

/// Plain group-lasso zero test, strict: `‖a‖₂ < lam·w`.
pub fn screen_group_gl(a: &[f64], lam: f64, w: f64) -> bool {
    norm2(a) < lam * w
}

/// Exact block minimizer when `ZᵀZ = I`, given `c = Zᵀr_ℓ`:
/// `g = S(c, λ₂)` then `(1 − λ₁w/‖g‖)₊ g`.
pub fn orthonormal_group_update(c: &[f64], penalty: &PenaltySpec, w: f64) -> Vec<f64> {
    let g: Vec<f64> = c.iter().map(|&v| soft_threshold(v, penalty.lambda2)).collect();
    let norm = norm2(&g);
    let g1 = penalty.lambda1 * w;
    if norm <= g1 || norm == 0.0 {
        return vec![0.0; c.len()];
    }
    let shrink = 1.0 - g1 / norm;
    g.into_iter().map(|v| shrink * v).collect()
}
