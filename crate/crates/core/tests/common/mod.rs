//! Shared fixtures and independent reference computations for the
//! integration tests. Nothing here calls into the solver.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sgl_core::{GroupedProblem, WeightMode};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Array2<f64> {
    Array2::from_shape_fn((n, p), |_| rng.sample(StandardNormal))
}

/// Gaussian design, sparse truth on the first coordinate of every other
/// group, unit noise.
pub fn random_problem(seed: u64, n: usize, sizes: &[usize], mode: WeightMode) -> GroupedProblem {
    let mut rng = rng(seed);
    let p: usize = sizes.iter().sum();
    let x = gaussian_matrix(&mut rng, n, p);
    let mut beta = Array1::<f64>::zeros(p);
    let mut start = 0;
    for (l, &s) in sizes.iter().enumerate() {
        if l % 2 == 0 {
            for j in start..start + s.div_ceil(2) {
                beta[j] = rng.random_range(-2.0..2.0);
            }
        }
        start += s;
    }
    let noise = Array1::from_shape_fn(n, |_| rng.sample::<f64, _>(StandardNormal));
    let y = x.dot(&beta) + noise;
    GroupedProblem::build(y.view(), x.view(), sizes, mode).unwrap()
}

pub fn to_dmatrix(x: ndarray::ArrayView2<'_, f64>) -> DMatrix<f64> {
    DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| x[[i, j]])
}

/// Ordinary least squares through nalgebra's SVD.
pub fn least_squares(x: ndarray::ArrayView2<'_, f64>, y: ndarray::ArrayView1<'_, f64>) -> Vec<f64> {
    let xm = to_dmatrix(x);
    let yv = DVector::from_iterator(y.len(), y.iter().copied());
    let svd = xm.svd(true, true);
    svd.solve(&yv, 1e-12).unwrap().iter().copied().collect()
}

/// Textbook cyclic lasso coordinate descent for `½‖y − Xβ‖² + Σ λ_j|β_j|`,
/// run to a very tight tolerance.
pub fn lasso_cd(x: ndarray::ArrayView2<'_, f64>, y: ndarray::ArrayView1<'_, f64>, lambdas: &[f64]) -> Vec<f64> {
    let p = x.ncols();
    let mut beta = vec![0.0; p];
    let mut r = y.to_owned();
    let norms: Vec<f64> = (0..p).map(|j| x.column(j).dot(&x.column(j))).collect();
    for _ in 0..100_000 {
        let mut delta: f64 = 0.0;
        for j in 0..p {
            let col = x.column(j);
            let z = col.dot(&r) + norms[j] * beta[j];
            let new = z.signum() * (z.abs() - lambdas[j]).max(0.0) / norms[j];
            if new != beta[j] {
                r.scaled_add(beta[j] - new, &col);
                delta = delta.max((new - beta[j]).abs());
                beta[j] = new;
            }
        }
        if delta < 1e-15 {
            break;
        }
    }
    beta
}

/// Matrix with orthonormal columns, each orthogonal to the ones vector, so
/// centering leaves it unchanged.
pub fn centered_orthonormal(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Array2<f64> {
    let mut raw = to_dmatrix(gaussian_matrix(rng, n, k).view());
    for mut col in raw.column_iter_mut() {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
    }
    let q = raw.qr().q();
    Array2::from_shape_fn((n, k), |(i, j)| q[(i, j)])
}
