//! Ridge least squares by normal equations, solved with a symmetric
//! positive-definite factorization. The intercept is never penalized.

use alloc::vec;
use alloc::vec::Vec;

/// Pivots at or below this (relative to the largest diagonal) are treated as
/// zero.
pub const PIVOT_TOLERANCE: f64 = 1e-12;

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum RidgeError {
    #[error("empty design matrix")]
    EmptyDesign,
    #[error("design rows must share one width")]
    RaggedDesign,
    #[error("targets length {targets} does not match {rows} rows")]
    TargetMismatch { rows: usize, targets: usize },
    #[error("non-finite entry in design or targets")]
    NonFinite,
    #[error("ridge penalty must be non-negative and finite")]
    BadRidge,
    #[error("singular normal equations (collinear features); try ridge > 0")]
    SingularDesign,
}

/// Fitted linear predictor `y = w . x + b`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub ridge: f64,
}

impl LinearModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.weights.len());
        self.bias + self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
    }

    /// Ridge objective: residual sum of squares plus `ridge * |w|^2`.
    pub fn objective(&self, x: &[Vec<f64>], y: &[f64]) -> f64 {
        let rss: f64 = x
            .iter()
            .zip(y)
            .map(|(row, t)| {
                let e = self.predict(row) - t;
                e * e
            })
            .sum();
        rss + self.ridge * self.weights.iter().map(|w| w * w).sum::<f64>()
    }
}

/// Minimizes `sum (y_i - w.x_i - b)^2 + ridge |w|^2` via the normal
/// equations. Collinear features at `ridge = 0` give [`RidgeError::SingularDesign`].
pub fn ridge_fit(x: &[Vec<f64>], y: &[f64], ridge: f64) -> Result<LinearModel, RidgeError> {
    let (gram, rhs, d) = normal_equations(x, y, ridge)?;
    let (solution, _) = solve_spd(&gram, &rhs, d + 1, false)?;
    Ok(LinearModel { weights: solution[..d].to_vec(), bias: solution[d], ridge })
}

/// Like [`ridge_fit`] but pins parameters with (near-)zero pivots to zero
/// instead of failing, returning how many were pinned. The normal equations
/// are always consistent, so the pinned solution still satisfies them.
pub fn ridge_fit_pinned(
    x: &[Vec<f64>],
    y: &[f64],
    ridge: f64,
) -> Result<(LinearModel, usize), RidgeError> {
    let (gram, rhs, d) = normal_equations(x, y, ridge)?;
    let (solution, pinned) = solve_spd(&gram, &rhs, d + 1, true)?;
    let model = LinearModel { weights: solution[..d].to_vec(), bias: solution[d], ridge };
    Ok((model, pinned))
}

fn normal_equations(
    x: &[Vec<f64>],
    y: &[f64],
    ridge: f64,
) -> Result<(Vec<f64>, Vec<f64>, usize), RidgeError> {
    let n = x.len();
    if n == 0 {
        return Err(RidgeError::EmptyDesign);
    }
    let d = x[0].len();
    if d == 0 {
        return Err(RidgeError::EmptyDesign);
    }
    if x.iter().any(|row| row.len() != d) {
        return Err(RidgeError::RaggedDesign);
    }
    if y.len() != n {
        return Err(RidgeError::TargetMismatch { rows: n, targets: y.len() });
    }
    if !(ridge.is_finite() && ridge >= 0.0) {
        return Err(RidgeError::BadRidge);
    }
    if x.iter().flatten().chain(y).any(|v| !v.is_finite()) {
        return Err(RidgeError::NonFinite);
    }

    // Augmented design [X 1]; gram is (d+1) x (d+1), row-major.
    let m = d + 1;
    let mut gram = vec![0.0f64; m * m];
    let mut rhs = vec![0.0f64; m];
    for (row, &target) in x.iter().zip(y) {
        for i in 0..d {
            for j in i..d {
                gram[i * m + j] += row[i] * row[j];
            }
            gram[i * m + d] += row[i];
            rhs[i] += row[i] * target;
        }
        gram[d * m + d] += 1.0;
        rhs[d] += target;
    }
    for i in 0..d {
        gram[i * m + i] += ridge;
    }
    // Mirror the upper triangle.
    for i in 0..m {
        for j in 0..i {
            gram[i * m + j] = gram[j * m + i];
        }
    }
    Ok((gram, rhs, d))
}

/// Symmetric Gaussian elimination for a positive semi-definite system.
/// With `pin` false, a pivot at or below tolerance is an error; with `pin`
/// true the corresponding variable is fixed at zero (exact for PSD systems,
/// whose zero-pivot rows are themselves zero). Returns the solution and the
/// number of pinned variables.
fn solve_spd(
    gram: &[f64],
    rhs: &[f64],
    m: usize,
    pin: bool,
) -> Result<(Vec<f64>, usize), RidgeError> {
    let mut a = gram.to_vec();
    let mut b = rhs.to_vec();
    let tol = pivot_floor(gram, m);
    let mut skipped = vec![false; m];
    let mut pinned = 0;

    for k in 0..m {
        let pivot = a[k * m + k];
        if pivot <= tol {
            if !pin {
                return Err(RidgeError::SingularDesign);
            }
            skipped[k] = true;
            pinned += 1;
            continue;
        }
        for i in (k + 1)..m {
            let factor = a[i * m + k] / pivot;
            if factor == 0.0 {
                continue;
            }
            for j in k..m {
                a[i * m + j] -= factor * a[k * m + j];
            }
            b[i] -= factor * b[k];
        }
    }

    // Sub-diagonal residue survives only in skipped columns, whose variables
    // are zero, so back-substitution over the upper triangle stays valid.
    let mut solution = vec![0.0f64; m];
    for k in (0..m).rev() {
        if skipped[k] {
            continue;
        }
        let mut acc = b[k];
        for j in (k + 1)..m {
            acc -= a[k * m + j] * solution[j];
        }
        solution[k] = acc / a[k * m + k];
    }
    Ok((solution, pinned))
}

fn pivot_floor(gram: &[f64], m: usize) -> f64 {
    let mut max_diag = 0.0f64;
    for i in 0..m {
        max_diag = max_diag.max(libm::fabs(gram[i * m + i]));
    }
    PIVOT_TOLERANCE * max_diag.max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn exact_line_is_recovered() {
        let x = vec![vec![1.0], vec![2.0], vec![3.0]];
        let y = vec![2.0, 4.0, 6.0];
        let model = ridge_fit(&x, &y, 0.0).unwrap();
        assert!((model.weights[0] - 2.0).abs() < 1e-9);
        assert!(model.bias.abs() < 1e-9);
    }

    #[test]
    fn constant_targets_go_to_the_intercept() {
        let x = vec![vec![1.0], vec![2.0], vec![3.0]];
        let y = vec![5.0, 5.0, 5.0];
        let model = ridge_fit(&x, &y, 0.0).unwrap();
        assert!(model.weights[0].abs() < 1e-9);
        assert!((model.bias - 5.0).abs() < 1e-9);
    }

    #[test]
    fn gradient_vanishes_at_the_solution() {
        // Optimality-condition oracle on a random 50 x 4 problem: the
        // objective gradient at the solution must be numerically zero.
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let x: Vec<Vec<f64>> =
            (0..50).map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let y: Vec<f64> = (0..50).map(|_| rng.random_range(-1.0..1.0)).collect();
        for ridge in [0.0, 0.01, 1.0] {
            let model = ridge_fit(&x, &y, ridge).unwrap();
            let mut grad_w = [0.0; 4];
            let mut grad_b = 0.0;
            for (row, &t) in x.iter().zip(&y) {
                let e = model.predict(row) - t;
                for (g, v) in grad_w.iter_mut().zip(row) {
                    *g += 2.0 * e * v;
                }
                grad_b += 2.0 * e;
            }
            for (g, w) in grad_w.iter_mut().zip(&model.weights) {
                *g += 2.0 * ridge * w;
            }
            let norm = grad_w.iter().map(|g| g * g).sum::<f64>() + grad_b * grad_b;
            assert!(norm.sqrt() < 1e-8, "ridge {ridge}: |grad| = {}", norm.sqrt());
        }
    }

    #[test]
    fn collinear_features_need_ridge() {
        let x = vec![vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]];
        let y = vec![1.0, 2.0, 3.0];
        assert!(matches!(ridge_fit(&x, &y, 0.0), Err(RidgeError::SingularDesign)));
        assert!(ridge_fit(&x, &y, 1e-4).is_ok());
    }

    #[test]
    fn pinned_solve_interpolates_single_sample() {
        let x = vec![vec![2.0]];
        let y = vec![3.0];
        assert!(matches!(ridge_fit(&x, &y, 0.0), Err(RidgeError::SingularDesign)));
        let (model, pinned) = ridge_fit_pinned(&x, &y, 0.0).unwrap();
        assert!(pinned >= 1);
        assert!((model.predict(&[2.0]) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn weight_norm_shrinks_with_ridge() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let x: Vec<Vec<f64>> =
            (0..30).map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let y: Vec<f64> = x.iter().map(|r| 2.0 * r[0] - r[1] + 0.5 * r[2]).collect();
        let mut last = f64::INFINITY;
        for ridge in [0.0, 1e-4, 1e-2, 1.0, 10.0] {
            let model = ridge_fit(&x, &y, ridge).unwrap();
            let norm = model.weights.iter().map(|w| w * w).sum::<f64>().sqrt();
            assert!(norm <= last + 1e-12, "norm grew at ridge {ridge}");
            last = norm;
        }
    }

    #[test]
    fn huge_ridge_converges_to_pool_mean() {
        let x = vec![vec![1.0], vec![2.0], vec![3.0], vec![10.0]];
        let y = vec![4.0, 6.0, 2.0, 8.0];
        let model = ridge_fit(&x, &y, 1e8).unwrap();
        let mean = 5.0;
        for row in &x {
            assert!((model.predict(row) - mean).abs() < 1e-3);
        }
    }
}
