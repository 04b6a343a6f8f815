use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

/// `det(λI − A)` and its derivative, the sum of the principal 2×2 minors.
fn char_poly(a: &Matrix3<f64>, lambda: f64) -> (f64, f64) {
    let b = Matrix3::identity() * lambda - a;
    let m01 = b[(0, 0)] * b[(1, 1)] - b[(0, 1)] * b[(1, 0)];
    let m02 = b[(0, 0)] * b[(2, 2)] - b[(0, 2)] * b[(2, 0)];
    let m12 = b[(1, 1)] * b[(2, 2)] - b[(1, 2)] * b[(2, 1)];
    let det = b[(0, 0)] * m12 - b[(0, 1)] * (b[(1, 0)] * b[(2, 2)] - b[(1, 2)] * b[(2, 0)])
        + b[(0, 2)] * (b[(1, 0)] * b[(2, 1)] - b[(1, 1)] * b[(2, 0)]);
    (det, m01 + m02 + m12)
}

/// Perron root of a nonnegative 3×3 matrix.
///
/// Newton's method on `det(λI − A)` started from the smaller of the largest
/// row and column sums. Above the Perron root the characteristic polynomial
/// is increasing and convex, so the iterates decrease monotonically onto it
/// and the loop stops once a step no longer makes progress.
pub fn spectral_radius(a: &Matrix3<f64>) -> Result<f64> {
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("rate matrix has non-finite entries"));
    }
    if a.iter().any(|&v| v < 0.0) {
        return Err(Error::invalid("rate matrix has a negative entry"));
    }
    let row_max = a.row_iter().map(|r| r.sum()).fold(0.0, f64::max);
    let col_max = a.column_iter().map(|c| c.sum()).fold(0.0, f64::max);
    let mut lambda = row_max.min(col_max);
    if lambda == 0.0 {
        return Ok(0.0);
    }
    for _ in 0..500 {
        let (g, dg) = char_poly(a, lambda);
        if !(g > 0.0) || !(dg > 0.0) {
            break;
        }
        let next = lambda - g / dg;
        if !(next < lambda) {
            break;
        }
        lambda = next.max(0.0);
    }
    Ok(lambda)
}

/// Power iteration on `A + shift·I`, minus the shift. The shift makes
/// irreducible nonnegative matrices primitive so the iteration converges.
pub fn power_iteration_radius(a: &Matrix3<f64>, shift: f64, iterations: usize) -> f64 {
    let m = a + Matrix3::identity() * shift;
    let mut v = Vector3::repeat(1.0);
    let mut estimate = 0.0;
    for _ in 0..iterations {
        let w = m * v;
        let norm = w.amax();
        if norm == 0.0 {
            return 0.0;
        }
        estimate = norm / v.amax();
        v = w / norm;
    }
    estimate - shift
}
