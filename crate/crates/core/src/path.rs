//! Regularization paths over a logarithmic grid of total levels `λ`, split
//! into `λ₁ = (1 − α)λ` and `λ₂ = αλ`, fitted from `λ_max` downwards with warm
//! starts.

use crate::error::{Result, SglError};
use crate::linalg::{norm2, norm_inf};
use crate::model::{Coefficients, GroupedProblem, PenaltySpec};
use crate::solver::{fit, soft_threshold, FitResult, SolverOptions};

/// Relative width at which the `λ_max` bisection stops.
const BISECTION_REL_WIDTH: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSpec {
    pub n_points: usize,
    /// `λ_min / λ_max`.
    pub ratio_min: f64,
    /// `α` in `[0, 1]`.
    pub mixing: f64,
}

impl Default for PathSpec {
    fn default() -> Self {
        PathSpec {
            n_points: 100,
            ratio_min: 1e-3,
            mixing: 0.5,
        }
    }
}

impl PathSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_points < 2 {
            return Err(SglError::InvalidConfig("a path needs at least 2 points".into()));
        }
        if !(self.ratio_min > 0.0 && self.ratio_min < 1.0) {
            return Err(SglError::InvalidConfig(format!(
                "ratio_min must lie in (0, 1), got {}",
                self.ratio_min
            )));
        }
        if !(0.0..=1.0).contains(&self.mixing) {
            return Err(SglError::InvalidConfig(format!(
                "mixing must lie in [0, 1], got {}",
                self.mixing
            )));
        }
        Ok(())
    }

    /// Descending grid from `lambda_max` to `ratio_min·lambda_max`.
    pub fn grid(&self, lambda_max: f64) -> Vec<f64> {
        let last = (self.n_points - 1) as f64;
        (0..self.n_points)
            .map(|k| lambda_max * self.ratio_min.powf(k as f64 / last))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct PathPoint {
    pub lambda: f64,
    pub penalty: PenaltySpec,
    pub coefficients: Coefficients,
    pub objective: f64,
    pub active_groups: usize,
    pub nonzeros: usize,
    pub sweeps: usize,
    pub converged: bool,
    pub kkt_worst: f64,
    /// Largest sweep-to-sweep objective increase seen during the fit.
    pub max_objective_increase: f64,
    /// Started from the previous point's solution.
    pub warm_started: bool,
}

impl PathPoint {
    fn from_fit(problem: &GroupedProblem, lambda: f64, penalty: PenaltySpec, fit: FitResult, warm: bool) -> Self {
        PathPoint {
            lambda,
            penalty,
            active_groups: fit.coefficients.active_groups(problem.groups()),
            nonzeros: fit.coefficients.nonzero_count(),
            objective: fit.objective,
            sweeps: fit.sweeps,
            converged: fit.converged,
            kkt_worst: fit.kkt.worst_violation,
            max_objective_increase: fit.max_objective_increase(),
            coefficients: fit.coefficients,
            warm_started: warm,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PathResult {
    pub mixing: f64,
    pub lambda_max: f64,
    /// Strictly decreasing.
    pub lambdas: Vec<f64>,
    pub points: Vec<PathPoint>,
}

impl PathResult {
    pub fn all_converged(&self) -> bool {
        self.points.iter().all(|p| p.converged)
    }
}

/// True when every group passes its zero test at `β = 0` for total level `lambda`.
fn all_groups_screened(correlations: &[Vec<f64>], weights: &[f64], lambda: f64, alpha: f64) -> bool {
    let l1 = (1.0 - alpha) * lambda;
    let l2 = alpha * lambda;
    correlations.iter().zip(weights).all(|(a, &w)| {
        let shrunk: Vec<f64> = a.iter().map(|&aj| soft_threshold(aj, l2)).collect();
        norm2(&shrunk) <= l1 * w
    })
}

/// Smallest total level at which `β = 0` is optimal.
///
/// `α = 1` and `α = 0` have closed forms; in between, each group's test is
/// monotone in `λ`, so the threshold is found by bisection.
pub fn lambda_max(problem: &GroupedProblem, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(SglError::InvalidConfig(format!("mixing must lie in [0, 1], got {alpha}")));
    }
    let xty = problem.x().t().dot(&problem.y());
    let xty = xty.as_slice().expect("contiguous");
    let correlations: Vec<Vec<f64>> = problem
        .groups()
        .ranges()
        .map(|range| xty[range].to_vec())
        .collect();
    let weights = problem.weights();

    if alpha == 1.0 {
        return Ok(norm_inf(xty));
    }
    if alpha == 0.0 {
        return Ok(correlations
            .iter()
            .zip(weights)
            .map(|(a, w)| norm2(a) / w)
            .fold(0.0, f64::max));
    }
    // Group ℓ passes once λ₂ ≥ ‖a‖∞ or λ₁w ≥ ‖a‖₂.
    let mut hi = correlations
        .iter()
        .zip(weights)
        .map(|(a, &w)| (norm2(a) / ((1.0 - alpha) * w)).min(norm_inf(a) / alpha))
        .fold(0.0, f64::max);
    if hi == 0.0 {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    debug_assert!(all_groups_screened(&correlations, weights, hi, alpha));
    while hi - lo > BISECTION_REL_WIDTH * hi {
        let mid = 0.5 * (lo + hi);
        if all_groups_screened(&correlations, weights, mid, alpha) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Fits the whole path, warm-starting each point from its predecessor.
/// Non-convergence at a point is recorded on that point.
pub fn fit_path(problem: &GroupedProblem, spec: &PathSpec, opts: &SolverOptions) -> Result<PathResult> {
    spec.validate()?;
    let lam_max = lambda_max(problem, spec.mixing)?;
    if lam_max == 0.0 {
        return Err(SglError::InvalidConfig(
            "response is uncorrelated with every feature; the path is empty".into(),
        ));
    }
    let lambdas = spec.grid(lam_max);
    let mut points: Vec<PathPoint> = Vec::with_capacity(lambdas.len());
    for &lambda in &lambdas {
        let penalty = PenaltySpec::from_mixing(lambda, spec.mixing)?;
        let warm = points.last().map(|p| &p.coefficients);
        let result = fit(problem, &penalty, opts, warm)?;
        points.push(PathPoint::from_fit(problem, lambda, penalty, result, warm.is_some()));
    }
    Ok(PathResult {
        mixing: spec.mixing,
        lambda_max: lam_max,
        lambdas,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::WeightMode;
    use ndarray::{array, Array1, Array2};

    fn problem() -> GroupedProblem {
        let x = Array2::from_shape_fn((12, 6), |(i, j)| (((i * 7 + j * 13) % 17) as f64 - 8.0) / 5.0 + 0.1 * (i * j) as f64);
        let y = Array1::from_shape_fn(12, |i| ((i * 5) % 7) as f64 - 2.5);
        GroupedProblem::build(y.view(), x.view(), &[2, 3, 1], WeightMode::SqrtSize).unwrap()
    }

    #[test]
    fn zero_response_gives_zero_lambda_max() {
        let x = array![[1.0, 2.0], [3.0, 1.0], [0.0, 1.0]];
        let y = array![2.0, 2.0, 2.0];
        let p = GroupedProblem::build(y.view(), x.view(), &[2], WeightMode::Unit).unwrap();
        for alpha in [0.0, 0.5, 1.0] {
            assert_eq!(lambda_max(&p, alpha).unwrap(), 0.0);
        }
        assert!(fit_path(&p, &PathSpec::default(), &SolverOptions::default()).is_err());
    }

    #[test]
    fn lambda_max_closed_forms() {
        let p = problem();
        let xty = p.x().t().dot(&p.y());
        let lasso = xty.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        assert_eq!(lambda_max(&p, 1.0).unwrap(), lasso);
        let gl = p
            .groups()
            .ranges()
            .enumerate()
            .map(|(l, r)| xty.slice(ndarray::s![r]).mapv(|v| v * v).sum().sqrt() / p.weight(l))
            .fold(0.0, f64::max);
        assert!((lambda_max(&p, 0.0).unwrap() - gl).abs() <= 1e-14 * gl);
    }

    #[test]
    fn lambda_max_bracketed_by_fits() {
        let p = problem();
        let opts = SolverOptions::default();
        for alpha in [0.0, 0.3, 0.5, 1.0] {
            let lm = lambda_max(&p, alpha).unwrap();
            let above = fit(&p, &PenaltySpec::from_mixing(lm * (1.0 + 1e-6), alpha).unwrap(), &opts, None).unwrap();
            assert_eq!(above.coefficients.nonzero_count(), 0, "alpha {alpha}");
            let below = fit(&p, &PenaltySpec::from_mixing(lm * (1.0 - 1e-3), alpha).unwrap(), &opts, None).unwrap();
            assert!(below.coefficients.active_groups(p.groups()) >= 1, "alpha {alpha}");
        }
    }

    #[test]
    fn grid_is_log_spaced_and_decreasing() {
        let spec = PathSpec {
            n_points: 5,
            ratio_min: 1e-4,
            mixing: 0.5,
        };
        let g = spec.grid(10.0);
        assert_eq!(g[0], 10.0);
        assert!((g[4] - 1e-3).abs() < 1e-15);
        assert!((g[1] - 1.0).abs() < 1e-12);
        assert!(g.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn warm_and_cold_objectives_agree() {
        let p = problem();
        let spec = PathSpec {
            n_points: 12,
            ratio_min: 1e-2,
            mixing: 0.5,
        };
        let opts = SolverOptions::default();
        let path = fit_path(&p, &spec, &opts).unwrap();
        assert_eq!(path.points[0].nonzeros, 0);
        assert!(!path.points[0].warm_started);
        assert!(path.points[1..].iter().all(|pt| pt.warm_started));
        for pt in &path.points {
            let cold = fit(&p, &pt.penalty, &opts, None).unwrap();
            assert!((cold.objective - pt.objective).abs() <= 1e-7 * cold.objective.abs().max(1e-12));
            assert!(pt.kkt_worst <= 1e-6 * 10.0);
        }
    }

    #[test]
    fn spec_validation() {
        let bad = [
            PathSpec { n_points: 1, ..PathSpec::default() },
            PathSpec { ratio_min: 1.0, ..PathSpec::default() },
            PathSpec { mixing: -0.1, ..PathSpec::default() },
        ];
        for spec in bad {
            assert!(spec.validate().is_err());
        }
    }
}
