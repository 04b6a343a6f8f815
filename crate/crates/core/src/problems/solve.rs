use std::fs;
use std::path::Path;

use nalgebra::DVector;

use super::GradientOracle;
use crate::error::{Error, Result};

pub const DEFAULT_GD_CAP: u64 = 100_000_000;

/// Centralized gradient descent with step `1/L` from the origin, stopped as
/// soon as `‖∇f(x)‖₂ ≤ tol`.
pub fn centralized_optimum<O: GradientOracle + ?Sized>(
    oracle: &O,
    tol: f64,
    max_iterations: u64,
) -> Result<DVector<f64>> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let step = 1.0 / oracle.lipschitz();
    let mut x = DVector::zeros(oracle.dim());
    for _ in 0..max_iterations {
        let g = oracle.global_gradient(x.as_slice());
        let norm = g.norm();
        if norm <= tol {
            return Ok(x);
        }
        if !norm.is_finite() {
            break;
        }
        x.axpy(-step, &g, 1.0);
    }
    let grad_norm = oracle.global_gradient(x.as_slice()).norm();
    if grad_norm <= tol {
        return Ok(x);
    }
    Err(Error::NotConverged {
        tol,
        iterations: max_iterations,
        grad_norm,
    })
}

/// Writes one value per line with 17 significant digits.
pub fn write_vector(path: &Path, x: &DVector<f64>) -> Result<()> {
    let mut text = String::with_capacity(x.len() * 24);
    for v in x.iter() {
        text.push_str(&format!("{v:.16e}\n"));
    }
    crate::harness::write_atomic(path, text.as_bytes())
}

pub fn read_vector(path: &Path) -> Result<DVector<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let values = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim().parse::<f64>().map_err(|_| Error::Parse {
                line: i + 1,
                message: format!("not a number: `{}`", l.trim()),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DVector::from_vec(values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::QuadraticProblem;
    use nalgebra::DMatrix;

    fn scalar(q: f64, v: f64) -> QuadraticProblem {
        QuadraticProblem::new(
            vec![DMatrix::from_element(1, 1, q)],
            vec![DVector::from_element(1, v)],
        )
        .unwrap()
    }

    #[test]
    fn scalar_descent() {
        let p = scalar(2.0, -4.0);
        let x = centralized_optimum(&p, 1e-12, 1000).unwrap();
        assert!((x[0] - 2.0).abs() <= 1e-12);
    }

    #[test]
    fn optimal_start_returns_immediately() {
        let p = scalar(2.0, 0.0);
        let x = centralized_optimum(&p, 1e-12, 0).unwrap();
        assert_eq!(x[0], 0.0);
    }

    #[test]
    fn cap_is_reported() {
        let p = QuadraticProblem::new(
            vec![DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1e6]))],
            vec![DVector::from_vec(vec![1.0, 1.0])],
        )
        .unwrap();
        match centralized_optimum(&p, 1e-12, 10) {
            Err(Error::NotConverged { iterations, .. }) => assert_eq!(iterations, 10),
            other => panic!("expected non-convergence, got {other:?}"),
        }
        assert!(centralized_optimum(&p, 0.0, 10).is_err());
    }

    #[test]
    fn vector_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("xstar.txt");
        let x = DVector::from_vec(vec![0.1, -2.5e-300, 1.0 / 3.0]);
        write_vector(&path, &x).unwrap();
        assert_eq!(read_vector(&path).unwrap(), x);
    }
}
