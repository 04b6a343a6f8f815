use nalgebra::{DMatrix, DVector, RowDVector};

use crate::error::{Error, Result};
use crate::problems::GradientOracle;

/// Stacked per-node iterates: row `i` of `x`, `y` and `g` belongs to node `i`.
///
/// `g` always caches `∇f_i` at row `i` of `x`.
#[derive(Clone, Debug)]
pub struct StackedState {
    pub x: DMatrix<f64>,
    pub y: DMatrix<f64>,
    pub g: DMatrix<f64>,
    pub k: u64,
    /// Synchronous gradient rounds, counting the one made at initialisation.
    pub grad_evals: u64,
    pub comm_rounds: u64,
    pub(crate) scratch: Scratch,
}

#[derive(Clone, Debug)]
pub(crate) struct Scratch {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
}

impl Scratch {
    fn new(n: usize, d: usize) -> Self {
        Scratch {
            a: DMatrix::zeros(n, d),
            b: DMatrix::zeros(n, d),
            c: DMatrix::zeros(n, d),
        }
    }
}

/// Column means of a stacked matrix.
pub(crate) fn row_mean(m: &DMatrix<f64>) -> RowDVector<f64> {
    m.row_mean()
}

/// `‖M − 1 m̄ᵀ‖_F`.
pub(crate) fn consensus_error(m: &DMatrix<f64>) -> f64 {
    let mean = row_mean(m);
    let mut acc = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let d = m[(i, j)] - mean[j];
            acc += d * d;
        }
    }
    acc.sqrt()
}

impl StackedState {
    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn d(&self) -> usize {
        self.x.ncols()
    }

    pub fn x_bar(&self) -> DVector<f64> {
        row_mean(&self.x).transpose()
    }

    pub fn y_bar(&self) -> DVector<f64> {
        row_mean(&self.y).transpose()
    }

    /// `g_k = (1/n) Σ ∇f_i(x_{i,k})`, read from the gradient cache.
    pub fn g_bar(&self) -> DVector<f64> {
        row_mean(&self.g).transpose()
    }

    pub fn opt_error(&self, x_star: &DVector<f64>) -> f64 {
        (self.x_bar() - x_star).norm()
    }

    pub fn cons_error_x(&self) -> f64 {
        consensus_error(&self.x)
    }

    pub fn cons_error_y(&self) -> f64 {
        consensus_error(&self.y)
    }
}

/// Initial state from stacked starting points; `y_0 = ∇f(x_0)`.
pub fn init_state<O: GradientOracle + ?Sized>(oracle: &O, x0: &DMatrix<f64>) -> Result<StackedState> {
    let (n, d) = (oracle.nodes(), oracle.dim());
    if x0.nrows() != n || x0.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: format!("{n}x{d}"),
            got: format!("{}x{}", x0.nrows(), x0.ncols()),
        });
    }
    let mut g = DMatrix::zeros(n, d);
    oracle.stacked_gradients(x0, &mut g);
    Ok(StackedState {
        x: x0.clone(),
        y: g.clone(),
        g,
        k: 0,
        grad_evals: 1,
        comm_rounds: 0,
        scratch: Scratch::new(n, d),
    })
}

/// Every node starts from the same point `x0`.
pub fn init_state_shared<O: GradientOracle + ?Sized>(oracle: &O, x0: &DVector<f64>) -> Result<StackedState> {
    let n = oracle.nodes();
    if x0.len() != oracle.dim() {
        return Err(Error::DimensionMismatch {
            expected: format!("{}", oracle.dim()),
            got: format!("{}", x0.len()),
        });
    }
    let stacked = DMatrix::from_fn(n, x0.len(), |_, j| x0[j]);
    init_state(oracle, &stacked)
}
