use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use super::topology::Topology;
use crate::error::{Error, Result};

const TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightScheme {
    /// `w_ij = 1 / (1 + max(deg_i, deg_j))` on edges, remainder on the diagonal.
    Metropolis,
    /// `W = 1 1ᵀ / n`; only valid on the complete graph.
    EqualComplete,
}

impl fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightScheme::Metropolis => "metropolis",
            WeightScheme::EqualComplete => "equal_complete",
        })
    }
}

impl FromStr for WeightScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "metropolis" => Ok(WeightScheme::Metropolis),
            "equal_complete" | "equal" => Ok(WeightScheme::EqualComplete),
            other => Err(Error::Unknown {
                what: "weight scheme",
                name: other.to_string(),
            }),
        }
    }
}

/// Symmetric doubly-stochastic weight matrix together with its connectivity
/// parameter `beta = ‖W − 11ᵀ/n‖₂`.
#[derive(Clone, Debug)]
pub struct MixingMatrix {
    w: DMatrix<f64>,
    beta: f64,
    identity: bool,
}

impl MixingMatrix {
    pub fn from_topology(topology: &Topology, scheme: WeightScheme) -> Result<Self> {
        if !topology.is_connected() {
            return Err(Error::invalid("mixing matrix requires a connected topology"));
        }
        let n = topology.n();
        let w = match scheme {
            WeightScheme::EqualComplete => {
                if !topology.is_complete() {
                    return Err(Error::invalid(
                        "equal_complete weights are only defined on the complete graph",
                    ));
                }
                DMatrix::from_element(n, n, 1.0 / n as f64)
            }
            WeightScheme::Metropolis => {
                let deg = topology.degrees();
                let mut w = DMatrix::zeros(n, n);
                for (i, j) in topology.edges() {
                    let wij = 1.0 / (1.0 + deg[i].max(deg[j]) as f64);
                    w[(i, j)] = wij;
                    w[(j, i)] = wij;
                }
                for i in 0..n {
                    let off: f64 = (0..n).filter(|&j| j != i).map(|j| w[(i, j)]).sum();
                    w[(i, i)] = 1.0 - off;
                }
                w
            }
        };
        Self::new(w, topology)
    }

    /// Validates `w` against every communication-matrix requirement and the
    /// sparsity pattern of `topology`.
    pub fn new(w: DMatrix<f64>, topology: &Topology) -> Result<Self> {
        let n = topology.n();
        if w.nrows() != n || w.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: format!("{n}x{n}"),
                got: format!("{}x{}", w.nrows(), w.ncols()),
            });
        }
        validate(&w)?;
        for i in 0..n {
            for j in 0..n {
                if i != j && w[(i, j)] != 0.0 && !topology.has_edge(i, j) {
                    return Err(Error::InvalidMixingMatrix(format!(
                        "nonzero weight at ({i},{j}) but no such edge"
                    )));
                }
            }
        }
        let beta = beta_of(&w)?;
        let identity = is_identity(&w);
        Ok(MixingMatrix { w, beta, identity })
    }

    pub fn identity(n: usize) -> Self {
        let w = DMatrix::identity(n, n);
        // ‖I − 11ᵀ/n‖₂ is 1 unless n = 1.
        let beta = if n == 1 { 0.0 } else { 1.0 };
        MixingMatrix {
            w,
            beta,
            identity: true,
        }
    }

    pub fn n(&self) -> usize {
        self.w.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn is_identity(&self) -> bool {
        self.identity
    }

    /// Explicit matrix power `W^k`.
    pub fn power(&self, k: u32) -> DMatrix<f64> {
        let n = self.n();
        let mut out = DMatrix::identity(n, n);
        for _ in 0..k {
            out = &self.w * out;
        }
        out
    }

    /// Replaces `x` with `W^reps x`, using `scratch` (same shape as `x`) as
    /// the product buffer.
    pub(crate) fn mix_in_place(&self, x: &mut DMatrix<f64>, reps: u32, scratch: &mut DMatrix<f64>) {
        if self.identity {
            return;
        }
        for _ in 0..reps {
            scratch.gemm(1.0, &self.w, x, 0.0);
            std::mem::swap(x, scratch);
        }
    }
}

fn is_identity(w: &DMatrix<f64>) -> bool {
    let n = w.nrows();
    (0..n).all(|i| (0..n).all(|j| w[(i, j)] == if i == j { 1.0 } else { 0.0 }))
}

fn validate(w: &DMatrix<f64>) -> Result<()> {
    let n = w.nrows();
    for i in 0..n {
        if !(w[(i, i)] > 0.0) {
            return Err(Error::InvalidMixingMatrix(format!("diagonal entry {i} is not positive")));
        }
        for j in 0..n {
            let v = w[(i, j)];
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidMixingMatrix(format!("entry ({i},{j}) = {v} is negative")));
            }
            if (v - w[(j, i)]).abs() > TOL {
                return Err(Error::InvalidMixingMatrix(format!("not symmetric at ({i},{j})")));
            }
        }
        let row: f64 = w.row(i).iter().sum();
        let col: f64 = w.column(i).iter().sum();
        if (row - 1.0).abs() > TOL || (col - 1.0).abs() > TOL {
            return Err(Error::InvalidMixingMatrix(format!(
                "row/column {i} sums to {row}/{col}, not 1"
            )));
        }
    }
    Ok(())
}

/// Largest singular value of `W − 11ᵀ/n`.
pub fn beta_of(w: &DMatrix<f64>) -> Result<f64> {
    let n = w.nrows();
    if n != w.ncols() {
        return Err(Error::DimensionMismatch {
            expected: "square matrix".into(),
            got: format!("{}x{}", w.nrows(), w.ncols()),
        });
    }
    if n == 0 {
        return Err(Error::invalid("empty matrix"));
    }
    let centered = w.map(|v| v - 1.0 / n as f64);
    let sv = centered.singular_values();
    Ok(sv.iter().cloned().fold(0.0, f64::max))
}

/// Returns `W^reps X`, computed as `reps` successive neighbour-averaging
/// rounds.
pub fn consensus_apply(w: &MixingMatrix, x: &DMatrix<f64>, reps: u32) -> Result<DMatrix<f64>> {
    if x.nrows() != w.n() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} rows", w.n()),
            got: format!("{} rows", x.nrows()),
        });
    }
    let mut out = x.clone();
    let mut scratch = x.clone();
    w.mix_in_place(&mut out, reps, &mut scratch);
    Ok(out)
}
