//! Problem classes and their per-node gradient oracles.

mod libsvm;
mod logistic;
mod quadratic;
mod solve;

pub use libsvm::{parse_libsvm, partition, read_libsvm_file, Dataset, DatasetPartition};
pub use logistic::LogisticProblem;
pub use quadratic::{generate_quadratic, QuadraticProblem, QuadraticSpec};
pub use solve::{centralized_optimum, read_vector, write_vector, DEFAULT_GD_CAP};

use nalgebra::{DMatrix, DVector};

/// Per-node first-order oracle for `f(x) = (1/n) Σ f_i(x)`.
///
/// Implementations are read-only after construction, so one oracle can be
/// shared by concurrently running simulations.
pub trait GradientOracle: Send + Sync {
    fn nodes(&self) -> usize;

    fn dim(&self) -> usize;

    /// Writes `∇f_i(x)` into `out`.
    fn local_gradient_into(&self, node: usize, x: &[f64], out: &mut [f64]);

    fn local_value(&self, node: usize, x: &[f64]) -> f64;

    /// Largest per-node gradient Lipschitz constant.
    fn lipschitz(&self) -> f64;

    /// Strong convexity constant of the global objective.
    fn strong_convexity(&self) -> f64;

    fn local_gradient(&self, node: usize, x: &[f64]) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim());
        self.local_gradient_into(node, x, out.as_mut_slice());
        out
    }

    fn global_value(&self, x: &[f64]) -> f64 {
        let n = self.nodes();
        (0..n).map(|i| self.local_value(i, x)).sum::<f64>() / n as f64
    }

    fn global_gradient(&self, x: &[f64]) -> DVector<f64> {
        let n = self.nodes();
        let mut acc = DVector::zeros(self.dim());
        let mut buf = vec![0.0; self.dim()];
        for i in 0..n {
            self.local_gradient_into(i, x, &mut buf);
            for (a, b) in acc.iter_mut().zip(&buf) {
                *a += b;
            }
        }
        acc / n as f64
    }

    /// Row `i` of `out` becomes `∇f_i(row i of x)`.
    fn stacked_gradients(&self, x: &DMatrix<f64>, out: &mut DMatrix<f64>) {
        let d = self.dim();
        let mut xi = vec![0.0; d];
        let mut gi = vec![0.0; d];
        for i in 0..self.nodes() {
            for (j, v) in xi.iter_mut().enumerate() {
                *v = x[(i, j)];
            }
            self.local_gradient_into(i, &xi, &mut gi);
            for (j, v) in gi.iter().enumerate() {
                out[(i, j)] = *v;
            }
        }
    }
}
