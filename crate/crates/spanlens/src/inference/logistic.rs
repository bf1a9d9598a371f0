//! Ridge-stabilized logistic regression fitted by iteratively reweighted
//! least squares (Newton steps on the penalized log-likelihood).
//!
//! The objective is sum_i [y_i log p_i + (1-y_i) log(1-p_i)] minus
//! (lambda/2) * ||beta||^2 over the non-intercept terms. Column 0 of the
//! design is the intercept and is never penalized.

use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 100;
const CONVERGENCE_TOL: f64 = 1e-8;

/// Fit result with convergence diagnostics.
#[derive(Debug, Clone)]
pub struct LogisticFit {
    pub coefficients: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// log(1 + e^x) without overflow.
#[inline]
fn ln_1p_exp(x: f64) -> f64 {
    if x > 35.0 {
        x
    } else if x < -35.0 {
        0.0
    } else {
        x.exp().ln_1p()
    }
}

fn penalized_ll(rows: &[&[f64]], y: &[f64], beta: &[f64], lambda: f64) -> f64 {
    let mut ll = 0.0;
    for (row, &yi) in rows.iter().zip(y) {
        let eta: f64 = row.iter().zip(beta).map(|(x, b)| x * b).sum();
        // y*eta - log(1 + e^eta)
        ll += yi * eta - ln_1p_exp(eta);
    }
    let penalty: f64 = beta[1..].iter().map(|b| b * b).sum();
    ll - 0.5 * lambda * penalty
}

/// Solve A x = b for symmetric positive-definite A (row-major p x p) by
/// Cholesky decomposition. A is clobbered. Fails on a non-positive pivot,
/// which signals a rank-deficient (collinear) design.
fn cholesky_solve(a: &mut [f64], p: usize, b: &[f64]) -> Result<Vec<f64>> {
    let max_diag = (0..p).map(|i| a[i * p + i].abs()).fold(0.0f64, f64::max);
    let tol = 1e-12 * max_diag.max(1.0);
    // in-place lower Cholesky
    for j in 0..p {
        let mut d = a[j * p + j];
        for k in 0..j {
            d -= a[j * p + k] * a[j * p + k];
        }
        if d <= tol {
            return Err(Error::RankDeficient { col: j });
        }
        let d = d.sqrt();
        a[j * p + j] = d;
        for i in (j + 1)..p {
            let mut v = a[i * p + j];
            for k in 0..j {
                v -= a[i * p + k] * a[j * p + k];
            }
            a[i * p + j] = v / d;
        }
    }
    // forward substitution L z = b
    let mut z = vec![0.0; p];
    for i in 0..p {
        let mut v = b[i];
        for k in 0..i {
            v -= a[i * p + k] * z[k];
        }
        z[i] = v / a[i * p + i];
    }
    // back substitution L^T x = z
    let mut x = vec![0.0; p];
    for i in (0..p).rev() {
        let mut v = z[i];
        for k in (i + 1)..p {
            v -= a[k * p + i] * x[k];
        }
        x[i] = v / a[i * p + i];
    }
    Ok(x)
}

/// Fit by IRLS. `rows` are design rows (column 0 must be the intercept),
/// `y` binary outcomes as 0.0/1.0, `lambda >= 0` the ridge strength on
/// non-intercept terms. Deterministic. A rank-deficient system (possible
/// when lambda = 0 and columns are collinear) is an error; hitting the
/// iteration cap returns a flagged, unconverged fit.
pub fn fit_logistic(rows: &[&[f64]], y: &[f64], lambda: f64) -> Result<LogisticFit> {
    let n = rows.len();
    if n == 0 || y.len() != n {
        return Err(Error::InvalidConfig(
            "design and outcome sizes must match and be non-empty".into(),
        ));
    }
    let p = rows[0].len();
    if p == 0 || rows.iter().any(|r| r.len() != p) {
        return Err(Error::InvalidConfig("ragged design matrix".into()));
    }
    if lambda < 0.0 {
        return Err(Error::InvalidConfig("ridge lambda must be >= 0".into()));
    }

    let mut beta = vec![0.0; p];
    let mut ll = penalized_ll(rows, y, &beta, lambda);
    let mut iterations = 0;
    let mut converged = false;

    while iterations < MAX_ITERATIONS {
        iterations += 1;

        // gradient g = X^T (y - p) - lambda * beta (non-intercept)
        // hessian  H = X^T W X + lambda I (non-intercept diag), W = p(1-p)
        let mut grad = vec![0.0; p];
        let mut hess = vec![0.0; p * p];
        for (row, &yi) in rows.iter().zip(y) {
            let eta: f64 = row.iter().zip(&beta).map(|(x, b)| x * b).sum();
            let mu = sigmoid(eta);
            let w = mu * (1.0 - mu);
            let resid = yi - mu;
            for j in 0..p {
                grad[j] += row[j] * resid;
                let wxj = w * row[j];
                for k in j..p {
                    hess[j * p + k] += wxj * row[k];
                }
            }
        }
        for j in 1..p {
            grad[j] -= lambda * beta[j];
            hess[j * p + j] += lambda;
        }
        // mirror the upper triangle
        for j in 0..p {
            for k in (j + 1)..p {
                hess[k * p + j] = hess[j * p + k];
            }
        }

        let delta = cholesky_solve(&mut hess, p, &grad)?;

        // step halving keeps the penalized likelihood non-decreasing
        let mut step = 1.0;
        let mut candidate: Vec<f64>;
        let mut new_ll;
        loop {
            candidate = beta
                .iter()
                .zip(&delta)
                .map(|(b, d)| b + step * d)
                .collect();
            new_ll = penalized_ll(rows, y, &candidate, lambda);
            if new_ll >= ll - 1e-12 || step < 1e-10 {
                break;
            }
            step *= 0.5;
        }

        let max_change = beta
            .iter()
            .zip(&candidate)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        beta = candidate;
        ll = new_ll;
        if max_change < CONVERGENCE_TOL {
            converged = true;
            break;
        }
    }

    Ok(LogisticFit {
        coefficients: beta,
        iterations,
        converged,
    })
}

/// Max-norm of the penalized score vector at `beta`; near zero at an optimum.
pub fn penalized_score_norm(rows: &[&[f64]], y: &[f64], beta: &[f64], lambda: f64) -> f64 {
    let p = beta.len();
    let mut grad = vec![0.0; p];
    for (row, &yi) in rows.iter().zip(y) {
        let eta: f64 = row.iter().zip(beta).map(|(x, b)| x * b).sum();
        let resid = yi - sigmoid(eta);
        for j in 0..p {
            grad[j] += row[j] * resid;
        }
    }
    for j in 1..p {
        grad[j] -= lambda * beta[j];
    }
    grad.iter().map(|g| g.abs()).fold(0.0, f64::max)
}
