use crate::error::{Error, Result};

/// Diagonal ridge added to the normal equations.
pub const RIDGE: f64 = 1e-8;

/// `y = w . x + bias`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearModel {
    pub fn predict(&self, row: &[f64]) -> f64 {
        self.weights.iter().zip(row).map(|(w, x)| w * x).sum::<f64>() + self.bias
    }
}

/// Solve `A x = b` for symmetric positive definite `A` (row-major `n x n`).
pub fn cholesky_solve(a: &[f64], b: &[f64], n: usize) -> Result<Vec<f64>> {
    if a.len() != n * n || b.len() != n {
        return Err(Error::shape("cholesky_solve", format!("{} entries, rhs {}, n {n}", a.len(), b.len())));
    }
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i * n + k] * l[j * n + k]).sum();
            if i == j {
                let d = a[i * n + i] - s;
                if !(d > 0.0) {
                    return Err(Error::invalid("normal equations are not positive definite"));
                }
                l[i * n + i] = d.sqrt();
            } else {
                l[i * n + j] = (a[i * n + j] - s) / l[j * n + j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[i * n + k] * y[k]).sum();
        y[i] = (b[i] - s) / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| l[k * n + i] * x[k]).sum();
        x[i] = (y[i] - s) / l[i * n + i];
    }
    Ok(x)
}

/// Least squares with an intercept via `(X^T X + ridge I) w = X^T y` on
/// centred columns.
pub fn fit_linear(rows: &[Vec<f64>], targets: &[f64], ridge: f64) -> Result<LinearModel> {
    if rows.len() < 2 {
        return Err(Error::invalid(format!("linear fit needs >= 2 rows, got {}", rows.len())));
    }
    if rows.len() != targets.len() {
        return Err(Error::shape("fit_linear", format!("{} rows, {} targets", rows.len(), targets.len())));
    }
    let d = rows[0].len();
    if rows.iter().any(|r| r.len() != d) {
        return Err(Error::shape("fit_linear", "ragged rows"));
    }
    // centring removes the intercept from the solve and improves conditioning
    let m = rows.len() as f64;
    let x_mean: Vec<f64> = (0..d).map(|k| rows.iter().map(|r| r[k]).sum::<f64>() / m).collect();
    let y_mean = targets.iter().sum::<f64>() / m;
    let mut xtx = vec![0.0; d * d];
    let mut xty = vec![0.0; d];
    for (row, &y) in rows.iter().zip(targets) {
        let yc = y - y_mean;
        for i in 0..d {
            let xi = row[i] - x_mean[i];
            xty[i] += xi * yc;
            for j in 0..d {
                xtx[i * d + j] += xi * (row[j] - x_mean[j]);
            }
        }
    }
    for i in 0..d {
        xtx[i * d + i] += ridge;
    }
    let weights = cholesky_solve(&xtx, &xty, d)?;
    let bias = y_mean - weights.iter().zip(&x_mean).map(|(w, x)| w * x).sum::<f64>();
    Ok(LinearModel { weights, bias })
}
