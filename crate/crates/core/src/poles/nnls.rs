//! Lawson-Hanson active-set nonnegative least squares.

use nalgebra::{DMatrix, DVector};

/// Minimizes `||a x - b||_2` subject to `x >= 0`.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = a.ncols();
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let scale = a.norm() * b.norm();
    let tol = 10.0 * f64::EPSILON * (n.max(a.nrows()) as f64) * scale.max(f64::MIN_POSITIVE);
    let max_outer = 3 * n + 10;

    for _ in 0..max_outer {
        let w = a.transpose() * (b - a * &x);
        let candidate = (0..n)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = candidate else { break };
        passive[j] = true;

        loop {
            let idx: Vec<usize> = (0..n).filter(|&k| passive[k]).collect();
            let z_p = solve_subset(a, b, &idx);
            if z_p.iter().all(|&v| v > 0.0) {
                for (k, &i) in idx.iter().enumerate() {
                    x[i] = z_p[k];
                }
                break;
            }
            // Step toward z until the first passive coordinate hits zero.
            let mut alpha = 1.0;
            let mut blocking = None;
            for (k, &i) in idx.iter().enumerate() {
                if z_p[k] <= 0.0 {
                    let d = x[i] - z_p[k];
                    let step = if d > 0.0 { x[i] / d } else { 0.0 };
                    if step < alpha {
                        alpha = step;
                        blocking = Some(i);
                    }
                }
            }
            for (k, &i) in idx.iter().enumerate() {
                x[i] += alpha * (z_p[k] - x[i]);
                if Some(i) == blocking || x[i] <= 0.0 {
                    x[i] = 0.0;
                    passive[i] = false;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    x
}

fn solve_subset(a: &DMatrix<f64>, b: &DVector<f64>, idx: &[usize]) -> Vec<f64> {
    let sub = DMatrix::from_fn(a.nrows(), idx.len(), |i, k| a[(i, idx[k])]);
    let svd = sub.svd(true, true);
    let eps = f64::EPSILON * svd.singular_values.max() * (a.nrows().max(idx.len()) as f64);
    let z = svd.solve(b, eps).expect("u and v were computed");
    z.iter().copied().collect()
}
