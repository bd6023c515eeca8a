//! Small dense helpers. Everything here works on tiny Gram blocks or on
//! single columns, so plain loops are enough.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

/// Neumaier-compensated sum. Objective values are compared across sweeps
/// at an absolute slack far below the naive summation error for N ~ 10^2.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

pub fn sum_of_squares(v: ArrayView1<'_, f64>) -> f64 {
    compensated_sum(v.iter().map(|x| x * x))
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m: f64, x| m.max(x.abs()))
}

/// Lower Cholesky factor of a symmetric matrix, or `None` when a pivot falls
/// below `rel_tol` times the largest diagonal entry.
pub fn cholesky(a: ArrayView2<'_, f64>, rel_tol: f64) -> Option<Array2<f64>> {
    let n = a.nrows();
    let scale = (0..n).fold(0.0_f64, |m, i| m.max(a[[i, i]].abs()));
    let floor = rel_tol * scale.max(f64::MIN_POSITIVE);
    let mut l = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let mut d = a[[j, j]];
        for k in 0..j {
            d -= l[[j, k]] * l[[j, k]];
        }
        if d <= floor || !d.is_finite() {
            return None;
        }
        let d = d.sqrt();
        l[[j, j]] = d;
        for i in (j + 1)..n {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = s / d;
        }
    }
    Some(l)
}

/// Solves `L Lᵀ x = b` given the lower factor.
pub fn cholesky_solve(l: &Array2<f64>, b: ArrayView1<'_, f64>) -> Array1<f64> {
    let n = l.nrows();
    let mut z = b.to_owned();
    for i in 0..n {
        let mut s = z[i];
        for k in 0..i {
            s -= l[[i, k]] * z[k];
        }
        z[i] = s / l[[i, i]];
    }
    for i in (0..n).rev() {
        let mut s = z[i];
        for k in (i + 1)..n {
            s -= l[[k, i]] * z[k];
        }
        z[i] = s / l[[i, i]];
    }
    z
}

pub fn gram(x: ArrayView2<'_, f64>) -> Array2<f64> {
    x.t().dot(&x)
}

/// Largest eigenvalue of `XᵀX` by power iteration on `v ↦ Xᵀ(Xv)`.
pub fn largest_gram_eigenvalue(x: ArrayView2<'_, f64>, max_iters: usize, rel_tol: f64) -> f64 {
    let p = x.ncols();
    if p == 0 || x.nrows() == 0 {
        return 0.0;
    }
    // Deterministic start with no zero components, so it is never orthogonal
    // to the leading eigenvector by construction of the input.
    let mut v = Array1::from_shape_fn(p, |j| 1.0 + 0.1 * ((j * 7919) % 13) as f64);
    let n0 = v.dot(&v).sqrt();
    v /= n0;
    let mut estimate = 0.0;
    for _ in 0..max_iters {
        let xv = x.dot(&v);
        let w = x.t().dot(&xv);
        let next = v.dot(&w);
        let wn = w.dot(&w).sqrt();
        if wn == 0.0 {
            return 0.0;
        }
        v = w / wn;
        let done = (next - estimate).abs() <= rel_tol * next.abs();
        estimate = next;
        if done {
            break;
        }
    }
    estimate
}
