//! Synthetic block-correlated regression data and support-recovery counts.
//!
//! Within a block, features are equicorrelated standard Gaussians built from
//! a shared factor, `√ρ·f + √(1−ρ)·e`; blocks are independent. The true
//! coefficients are `±magnitude` on the leading positions of each block.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Result, SglError};
use crate::model::{Coefficients, GroupedProblem, Groups, WeightMode};

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub block_sizes: Vec<usize>,
    /// Nonzeros per block; missing trailing entries count as zero.
    pub nonzero_counts: Vec<usize>,
    pub coef_magnitude: f64,
    pub rho: f64,
    pub noise_sd: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    /// 200 observations, ten blocks of ten, nonzeros (10, 8, 6, 4, 2) in the
    /// first five blocks, within-block correlation 0.2, noise sd 4.
    fn default() -> Self {
        SimConfig {
            n: 200,
            block_sizes: vec![10; 10],
            nonzero_counts: vec![10, 8, 6, 4, 2],
            coef_magnitude: 1.0,
            rho: 0.2,
            noise_sd: 4.0,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn with_seed(seed: u64) -> Self {
        SimConfig {
            seed,
            ..SimConfig::default()
        }
    }

    /// The six-entry count list `(10, 8, 6, 4, 2, 1)`, which places one extra
    /// nonzero in the sixth block.
    pub fn six_count_variant(seed: u64) -> Self {
        SimConfig {
            nonzero_counts: vec![10, 8, 6, 4, 2, 1],
            seed,
            ..SimConfig::default()
        }
    }

    pub fn n_features(&self) -> usize {
        self.block_sizes.iter().sum()
    }

    pub fn count(&self, block: usize) -> usize {
        self.nonzero_counts.get(block).copied().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(SglError::InvalidConfig("n must be at least 2".into()));
        }
        if self.block_sizes.is_empty() || self.block_sizes.contains(&0) {
            return Err(SglError::InvalidConfig("block sizes must be positive".into()));
        }
        if self.nonzero_counts.len() > self.block_sizes.len() {
            return Err(SglError::InvalidConfig(format!(
                "{} nonzero counts for {} blocks",
                self.nonzero_counts.len(),
                self.block_sizes.len()
            )));
        }
        for (l, (&count, &size)) in self.nonzero_counts.iter().zip(&self.block_sizes).enumerate() {
            if count > size {
                return Err(SglError::InvalidConfig(format!(
                    "block {l} has {size} features but {count} nonzeros"
                )));
            }
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(SglError::InvalidConfig(format!("rho must lie in [0, 1), got {}", self.rho)));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(SglError::InvalidConfig("noise_sd must be nonnegative".into()));
        }
        if !self.coef_magnitude.is_finite() {
            return Err(SglError::InvalidConfig("coef_magnitude must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SimDataset {
    pub x: Array2<f64>,
    pub y: Array1<f64>,
    pub beta_true: Array1<f64>,
    pub config: SimConfig,
}

impl SimDataset {
    pub fn groups(&self) -> Groups {
        Groups::from_sizes(&self.config.block_sizes).expect("validated config")
    }

    pub fn to_problem(&self, weight_mode: WeightMode) -> Result<GroupedProblem> {
        GroupedProblem::build(self.y.view(), self.x.view(), &self.config.block_sizes, weight_mode)
    }
}

pub fn generate(config: &SimConfig) -> Result<SimDataset> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let p = config.n_features();
    let groups = Groups::from_sizes(&config.block_sizes)?;

    let mut beta_true = Array1::<f64>::zeros(p);
    for (l, range) in groups.ranges().enumerate() {
        for j in range.start..range.start + config.count(l) {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            beta_true[j] = sign * config.coef_magnitude;
        }
    }

    let shared = config.rho.sqrt();
    let own = (1.0 - config.rho).sqrt();
    let mut x = Array2::<f64>::zeros((config.n, p));
    for i in 0..config.n {
        for range in groups.ranges() {
            let factor: f64 = rng.sample(StandardNormal);
            for j in range {
                let e: f64 = rng.sample(StandardNormal);
                x[[i, j]] = shared * factor + own * e;
            }
        }
    }

    let mut y = x.dot(&beta_true);
    for v in y.iter_mut() {
        let e: f64 = rng.sample(StandardNormal);
        *v += config.noise_sd * e;
    }

    Ok(SimDataset {
        x,
        y,
        beta_true,
        config: config.clone(),
    })
}

/// Groups whose zero/nonzero status differs between truth and estimate: a
/// truly active group estimated as all zero, or the reverse.
pub fn group_misclassification(groups: &Groups, beta_true: &[f64], beta_est: &[f64]) -> Result<usize> {
    if beta_true.len() != groups.n_features() || beta_est.len() != groups.n_features() {
        return Err(SglError::DimensionMismatch(format!(
            "partition covers {} features, got {} true and {} estimated coefficients",
            groups.n_features(),
            beta_true.len(),
            beta_est.len()
        )));
    }
    Ok(groups
        .ranges()
        .filter(|range| {
            let truly = beta_true[range.clone()].iter().any(|&v| v != 0.0);
            let est = beta_est[range.clone()].iter().any(|&v| v != 0.0);
            truly != est
        })
        .count())
}

/// Coordinates whose zero/nonzero status differs.
pub fn coef_misclassification(beta_true: &[f64], beta_est: &[f64]) -> Result<usize> {
    if beta_true.len() != beta_est.len() {
        return Err(SglError::DimensionMismatch(format!(
            "{} true vs {} estimated coefficients",
            beta_true.len(),
            beta_est.len()
        )));
    }
    Ok(beta_true
        .iter()
        .zip(beta_est)
        .filter(|(t, e)| (**t != 0.0) != (**e != 0.0))
        .count())
}

/// Both counts for a fitted coefficient vector.
pub fn misclassification(groups: &Groups, beta_true: &[f64], estimate: &Coefficients) -> Result<(usize, usize)> {
    Ok((
        group_misclassification(groups, beta_true, estimate.as_slice())?,
        coef_misclassification(beta_true, estimate.as_slice())?,
    ))
}
