//! Problem representation: centered data, the group partition, penalty
//! levels and the penalized least-squares objective
//!
//! ```text
//! ½‖y − Xβ‖² + λ₁ Σ_ℓ w_ℓ‖β_ℓ‖₂ + λ₂‖β‖₁
//! ```
//!
//! The intercept is absorbed by centering `y` and every column of `X`; it is
//! reconstituted in [`GroupedProblem::predict`].

use std::ops::Range;

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, ShapeBuilder};

use crate::error::{Result, SglError};
use crate::linalg::{compensated_sum, norm2, sum_of_squares};

/// How the per-group multipliers `w_ℓ` on the group penalty are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightMode {
    #[default]
    Unit,
    /// `w_ℓ = √p_ℓ`, so larger groups pay proportionally more.
    SqrtSize,
}

/// Partition of the feature indices `0..p` into contiguous, nonempty ranges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Groups {
    bounds: Vec<usize>,
}

impl Groups {
    pub fn from_sizes(sizes: &[usize]) -> Result<Self> {
        if sizes.is_empty() {
            return Err(SglError::InvalidConfig("at least one group is required".into()));
        }
        let mut bounds = Vec::with_capacity(sizes.len() + 1);
        bounds.push(0);
        for (l, &size) in sizes.iter().enumerate() {
            if size == 0 {
                return Err(SglError::EmptyGroup(l));
            }
            bounds.push(bounds[l] + size);
        }
        Ok(Groups { bounds })
    }

    /// Number of groups `L`.
    pub fn len(&self) -> usize {
        self.bounds.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Total number of features `p`.
    pub fn n_features(&self) -> usize {
        *self.bounds.last().unwrap_or(&0)
    }

    pub fn range(&self, group: usize) -> Range<usize> {
        self.bounds[group]..self.bounds[group + 1]
    }

    pub fn size(&self, group: usize) -> usize {
        self.bounds[group + 1] - self.bounds[group]
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.bounds.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn ranges(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        self.bounds.windows(2).map(|w| w[0]..w[1])
    }

    /// Group index owning feature `j`.
    pub fn group_of(&self, j: usize) -> usize {
        debug_assert!(j < self.n_features());
        self.bounds.partition_point(|&b| b <= j) - 1
    }
}

/// The pair `(λ₁, λ₂)`: group-norm level and lasso level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltySpec {
    pub lambda1: f64,
    pub lambda2: f64,
}

impl PenaltySpec {
    pub fn new(lambda1: f64, lambda2: f64) -> Result<Self> {
        let spec = PenaltySpec { lambda1, lambda2 };
        spec.validate()?;
        Ok(spec)
    }

    /// Splits a total level into `λ₁ = (1 − α)λ`, `λ₂ = αλ`.
    pub fn from_mixing(total: f64, alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(SglError::InvalidPenalty(format!(
                "mixing must lie in [0, 1], got {alpha}"
            )));
        }
        PenaltySpec::new((1.0 - alpha) * total, alpha * total)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("lambda1", self.lambda1), ("lambda2", self.lambda2)] {
            if !v.is_finite() || v < 0.0 {
                return Err(SglError::InvalidPenalty(format!(
                    "{name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        PenaltySpec {
            lambda1: self.lambda1 * factor,
            lambda2: self.lambda2 * factor,
        }
    }
}

/// Coefficient vector of length `p`; blocks are read through a [`Groups`].
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    values: Array1<f64>,
}

impl Coefficients {
    pub fn zeros(p: usize) -> Self {
        Coefficients {
            values: Array1::zeros(p),
        }
    }

    pub fn new(values: Array1<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SglError::NonFinite("coefficients".into()));
        }
        Ok(Coefficients { values })
    }

    pub fn from_vec(values: Vec<f64>) -> Result<Self> {
        Coefficients::new(Array1::from(values))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> ArrayView1<'_, f64> {
        self.values.view()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.values
            .as_slice()
            .expect("coefficients are stored contiguously")
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        self.values
            .as_slice_mut()
            .expect("coefficients are stored contiguously")
    }

    pub fn into_inner(self) -> Array1<f64> {
        self.values
    }

    pub fn block(&self, groups: &Groups, group: usize) -> &[f64] {
        &self.as_slice()[groups.range(group)]
    }

    pub fn is_group_zero(&self, groups: &Groups, group: usize) -> bool {
        self.block(groups, group).iter().all(|&v| v == 0.0)
    }

    pub fn nonzero_count(&self) -> usize {
        self.values.iter().filter(|&&v| v != 0.0).count()
    }

    pub fn active_groups(&self, groups: &Groups) -> usize {
        (0..groups.len())
            .filter(|&l| !self.is_group_zero(groups, l))
            .count()
    }
}

/// Centered response and design with their group structure. Immutable after
/// construction.
#[derive(Debug, Clone)]
pub struct GroupedProblem {
    y: Array1<f64>,
    x: Array2<f64>,
    groups: Groups,
    weights: Vec<f64>,
    y_mean: f64,
    x_means: Array1<f64>,
}

fn centered(values: ArrayView1<'_, f64>) -> (Array1<f64>, f64) {
    let n = values.len() as f64;
    let mean = compensated_sum(values.iter().copied()) / n;
    let mut out = values.mapv(|v| v - mean);
    // A second pass removes the rounding left by the first.
    let drift = compensated_sum(out.iter().copied()) / n;
    out.mapv_inplace(|v| v - drift);
    (out, mean + drift)
}

impl GroupedProblem {
    /// Centers `raw_y` and the columns of `raw_x` and attaches the partition.
    pub fn build(
        raw_y: ArrayView1<'_, f64>,
        raw_x: ArrayView2<'_, f64>,
        group_sizes: &[usize],
        weight_mode: WeightMode,
    ) -> Result<Self> {
        let (n, p) = raw_x.dim();
        if raw_y.len() != n {
            return Err(SglError::DimensionMismatch(format!(
                "response has {} rows but the design has {n}",
                raw_y.len()
            )));
        }
        if n < 2 {
            return Err(SglError::DimensionMismatch(format!(
                "at least two observations are required, got {n}"
            )));
        }
        let groups = Groups::from_sizes(group_sizes)?;
        if groups.n_features() != p {
            return Err(SglError::DimensionMismatch(format!(
                "group sizes sum to {} but the design has {p} columns",
                groups.n_features()
            )));
        }
        if raw_y.iter().any(|v| !v.is_finite()) {
            return Err(SglError::NonFinite("response".into()));
        }
        if raw_x.iter().any(|v| !v.is_finite()) {
            return Err(SglError::NonFinite("design matrix".into()));
        }

        let (y, y_mean) = centered(raw_y);
        // Column-major so each feature column is a contiguous slice.
        let mut x = Array2::<f64>::zeros((n, p).f());
        let mut x_means = Array1::<f64>::zeros(p);
        for j in 0..p {
            let (col, mean) = centered(raw_x.column(j));
            x.column_mut(j).assign(&col);
            x_means[j] = mean;
        }
        let weights = (0..groups.len())
            .map(|l| match weight_mode {
                WeightMode::Unit => 1.0,
                WeightMode::SqrtSize => (groups.size(l) as f64).sqrt(),
            })
            .collect();
        Ok(GroupedProblem {
            y,
            x,
            groups,
            weights,
            y_mean,
            x_means,
        })
    }

    /// Replaces the group weights with arbitrary positive multipliers.
    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.groups.len() {
            return Err(SglError::DimensionMismatch(format!(
                "{} weights for {} groups",
                weights.len(),
                self.groups.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(SglError::InvalidConfig("group weights must be positive".into()));
        }
        self.weights = weights;
        Ok(self)
    }

    pub fn y(&self) -> ArrayView1<'_, f64> {
        self.y.view()
    }

    pub fn x(&self) -> ArrayView2<'_, f64> {
        self.x.view()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        self.x
            .column(j)
            .to_slice()
            .expect("design is stored column-major")
    }

    pub fn block(&self, group: usize) -> ArrayView2<'_, f64> {
        self.x.slice(s![.., self.groups.range(group)])
    }

    pub fn groups(&self) -> &Groups {
        &self.groups
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, group: usize) -> f64 {
        self.weights[group]
    }

    pub fn n_samples(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn y_mean(&self) -> f64 {
        self.y_mean
    }

    pub fn x_means(&self) -> ArrayView1<'_, f64> {
        self.x_means.view()
    }

    pub(crate) fn check_coefficients(&self, beta: &Coefficients) -> Result<()> {
        if beta.len() != self.n_features() {
            return Err(SglError::DimensionMismatch(format!(
                "{} coefficients for {} features",
                beta.len(),
                self.n_features()
            )));
        }
        Ok(())
    }

    /// `y − Xβ` on the centered data.
    pub fn residual(&self, beta: &Coefficients) -> Result<Array1<f64>> {
        self.check_coefficients(beta)?;
        Ok(&self.y - &self.x.dot(&beta.values()))
    }

    /// `λ₁ Σ w_ℓ‖β_ℓ‖₂ + λ₂‖β‖₁`.
    pub fn penalty_value(&self, beta: &Coefficients, penalty: &PenaltySpec) -> Result<f64> {
        self.check_coefficients(beta)?;
        let group_term = compensated_sum(
            self.groups
                .ranges()
                .zip(&self.weights)
                .map(|(range, w)| w * norm2(&beta.as_slice()[range])),
        );
        let l1 = compensated_sum(beta.as_slice().iter().map(|v| v.abs()));
        Ok(penalty.lambda1 * group_term + penalty.lambda2 * l1)
    }

    /// `½‖y − Xβ‖² + λ₁ Σ w_ℓ‖β_ℓ‖₂ + λ₂‖β‖₁`.
    pub fn objective(&self, beta: &Coefficients, penalty: &PenaltySpec) -> Result<f64> {
        let r = self.residual(beta)?;
        Ok(0.5 * sum_of_squares(r.view()) + self.penalty_value(beta, penalty)?)
    }

    /// Predictions on the original (uncentered) scale, intercept included.
    pub fn predict(&self, beta: &Coefficients, new_rows: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
        self.check_coefficients(beta)?;
        if new_rows.ncols() != self.n_features() {
            return Err(SglError::DimensionMismatch(format!(
                "new rows have {} columns, expected {}",
                new_rows.ncols(),
                self.n_features()
            )));
        }
        let centered = &new_rows - &self.x_means;
        Ok(centered.dot(&beta.values()) + self.y_mean)
    }
}
