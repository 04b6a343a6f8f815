use std::ops::Range;

use nalgebra::{DMatrix, SymmetricEigen};

use super::libsvm::{partition, Dataset};
use super::GradientOracle;
use crate::error::Result;

/// ℓ2-regularised binary logistic regression with the data split across
/// nodes in contiguous blocks:
///
/// `f_i(x) = (1/n_i) Σ_s log(1 + exp(−b_s a_sᵀx)) + (1/n_i) ‖x‖²`.
#[derive(Clone, Debug)]
pub struct LogisticProblem {
    data: Dataset,
    blocks: Vec<Range<usize>>,
    lipschitz: f64,
    mu: f64,
}

/// `log(1 + exp(z))` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl LogisticProblem {
    pub fn new(data: Dataset, nodes: usize) -> Result<Self> {
        let blocks = partition(data.len(), nodes)?.ranges().to_vec();
        let d = data.dim();
        let mut lipschitz: f64 = 0.0;
        let mut mu = 0.0;
        for block in &blocks {
            let ni = block.len() as f64;
            let mut gram = DMatrix::<f64>::zeros(d, d);
            for s in block.clone() {
                let (idx, val) = data.row(s);
                for (&a, &va) in idx.iter().zip(val) {
                    for (&b, &vb) in idx.iter().zip(val) {
                        gram[(a as usize, b as usize)] += va * vb;
                    }
                }
            }
            let top = if d == 0 {
                0.0
            } else {
                SymmetricEigen::new(gram).eigenvalues.max()
            };
            lipschitz = lipschitz.max(top / (4.0 * ni) + 2.0 / ni);
            mu += 2.0 / ni;
        }
        mu /= blocks.len() as f64;
        Ok(LogisticProblem {
            data,
            blocks,
            lipschitz,
            mu,
        })
    }

    pub fn dataset(&self) -> &Dataset {
        &self.data
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.len()).collect()
    }

    fn margin(&self, s: usize, x: &[f64]) -> f64 {
        let (idx, val) = self.data.row(s);
        idx.iter().zip(val).map(|(&j, &v)| v * x[j as usize]).sum()
    }
}

impl GradientOracle for LogisticProblem {
    fn nodes(&self) -> usize {
        self.blocks.len()
    }

    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn local_gradient_into(&self, node: usize, x: &[f64], out: &mut [f64]) {
        let block = &self.blocks[node];
        let inv = 1.0 / block.len() as f64;
        out.iter_mut().for_each(|o| *o = 0.0);
        for s in block.clone() {
            let b = self.data.label(s);
            let coef = -b * sigmoid(-b * self.margin(s, x));
            let (idx, val) = self.data.row(s);
            for (&j, &v) in idx.iter().zip(val) {
                out[j as usize] += coef * v;
            }
        }
        for (o, xj) in out.iter_mut().zip(x) {
            *o = *o * inv + 2.0 * inv * xj;
        }
    }

    fn local_value(&self, node: usize, x: &[f64]) -> f64 {
        let block = &self.blocks[node];
        let inv = 1.0 / block.len() as f64;
        let loss: f64 = block
            .clone()
            .map(|s| softplus(-self.data.label(s) * self.margin(s, x)))
            .sum();
        let sq: f64 = x.iter().map(|v| v * v).sum();
        inv * loss + inv * sq
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    fn strong_convexity(&self) -> f64 {
        self.mu
    }
}
