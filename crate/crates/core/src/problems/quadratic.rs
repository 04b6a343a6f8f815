use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::GradientOracle;
use crate::error::{Error, Result};

/// `f(x) = (1/n) Σ ½ xᵀQ_i x + v_iᵀx` with every `Q_i` symmetric positive
/// definite.
#[derive(Clone, Debug)]
pub struct QuadraticProblem {
    q: Vec<DMatrix<f64>>,
    v: Vec<DVector<f64>>,
    lipschitz: f64,
    mu: f64,
    kappa_target: f64,
    kappa_achieved: f64,
}

/// Parameters of a generated quadratic instance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadraticSpec {
    pub n: usize,
    pub d: usize,
    pub kappa: f64,
    pub seed: u64,
    /// Spread of the per-node curvature factors, in decades: each factor is
    /// drawn from `10^U[-h, h]` before normalisation. Zero gives identical
    /// `Q_i`.
    pub heterogeneity: f64,
}

impl QuadraticSpec {
    pub const DEFAULT_HETEROGENEITY: f64 = 0.5;

    pub fn new(n: usize, d: usize, kappa: f64, seed: u64) -> Self {
        QuadraticSpec {
            n,
            d,
            kappa,
            seed,
            heterogeneity: Self::DEFAULT_HETEROGENEITY,
        }
    }
}

/// Generates a diagonal quadratic instance whose averaged Hessian has
/// condition number `kappa`.
///
/// The averaged spectrum `s` is log-uniform on `[1, kappa]` with both
/// endpoints present. Node `i` gets `Q_i = diag(s ⊙ r_i)` where the factors
/// `r_ij > 0` are normalised so that `(1/n) Σ_i r_ij = 1`; hence
/// `(1/n) Σ Q_i = diag(s)`. Linear terms are standard normal.
pub fn generate_quadratic(spec: QuadraticSpec) -> Result<QuadraticProblem> {
    let QuadraticSpec {
        n,
        d,
        kappa,
        seed,
        heterogeneity,
    } = spec;
    if n == 0 || d == 0 {
        return Err(Error::invalid("n and d must be positive"));
    }
    if !(kappa >= 1.0) || !kappa.is_finite() {
        return Err(Error::invalid(format!("kappa must be >= 1, got {kappa}")));
    }
    if !(heterogeneity >= 0.0) {
        return Err(Error::invalid("heterogeneity must be nonnegative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let top = kappa.log10();
    let mut spectrum: Vec<f64> = (0..d)
        .map(|_| 10f64.powf(rng.random_range(0.0..=top)))
        .collect();
    spectrum[0] = 1.0;
    if d > 1 {
        spectrum[1] = kappa;
    }

    let mut factors = vec![vec![1.0; d]; n];
    if heterogeneity > 0.0 {
        for row in factors.iter_mut() {
            for f in row.iter_mut() {
                *f = 10f64.powf(rng.random_range(-heterogeneity..=heterogeneity));
            }
        }
        for j in 0..d {
            let mean = factors.iter().map(|r| r[j]).sum::<f64>() / n as f64;
            for row in factors.iter_mut() {
                row[j] /= mean;
            }
        }
    }

    let q = factors
        .iter()
        .map(|r| DMatrix::from_diagonal(&DVector::from_iterator(d, (0..d).map(|j| spectrum[j] * r[j]))))
        .collect();
    let v = (0..n)
        .map(|_| DVector::from_iterator(d, (0..d).map(|_| rng.sample::<f64, _>(StandardNormal))))
        .collect();
    let mut problem = QuadraticProblem::new(q, v)?;
    problem.kappa_target = kappa;
    Ok(problem)
}

impl QuadraticProblem {
    pub fn new(q: Vec<DMatrix<f64>>, v: Vec<DVector<f64>>) -> Result<Self> {
        if q.is_empty() || q.len() != v.len() {
            return Err(Error::invalid("need one (Q_i, v_i) pair per node"));
        }
        let d = v[0].len();
        let mut lipschitz: f64 = 0.0;
        for (i, (qi, vi)) in q.iter().zip(&v).enumerate() {
            if qi.nrows() != d || qi.ncols() != d || vi.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: format!("{d}x{d} and {d}"),
                    got: format!("{}x{} and {} at node {i}", qi.nrows(), qi.ncols(), vi.len()),
                });
            }
            if (qi - qi.transpose()).amax() > 1e-12 * qi.amax().max(1.0) {
                return Err(Error::invalid(format!("Q_{i} is not symmetric")));
            }
            let eig = SymmetricEigen::new(qi.clone()).eigenvalues;
            if eig.min() <= 0.0 {
                return Err(Error::invalid(format!("Q_{i} is not positive definite")));
            }
            lipschitz = lipschitz.max(eig.max());
        }
        let mean = mean_hessian(&q);
        let eig = SymmetricEigen::new(mean).eigenvalues;
        let (mu, top) = (eig.min(), eig.max());
        Ok(QuadraticProblem {
            q,
            v,
            lipschitz,
            mu,
            kappa_target: top / mu,
            kappa_achieved: top / mu,
        })
    }

    pub fn hessian(&self, node: usize) -> &DMatrix<f64> {
        &self.q[node]
    }

    pub fn linear(&self, node: usize) -> &DVector<f64> {
        &self.v[node]
    }

    pub fn kappa_target(&self) -> f64 {
        self.kappa_target
    }

    /// `λ_max / λ_min` of the averaged Hessian.
    pub fn kappa_achieved(&self) -> f64 {
        self.kappa_achieved
    }

    /// Minimiser of the averaged objective by a direct solve of
    /// `((1/n) Σ Q_i) x = −(1/n) Σ v_i`.
    pub fn optimum(&self) -> Result<DVector<f64>> {
        let n = self.q.len() as f64;
        let mean = mean_hessian(&self.q);
        let rhs = -self.v.iter().fold(DVector::zeros(self.dim()), |acc, v| acc + v) / n;
        let chol = mean.cholesky().ok_or(Error::Singular)?;
        Ok(chol.solve(&rhs))
    }
}

fn mean_hessian(q: &[DMatrix<f64>]) -> DMatrix<f64> {
    let d = q[0].nrows();
    q.iter().fold(DMatrix::zeros(d, d), |acc, m| acc + m) / q.len() as f64
}

impl GradientOracle for QuadraticProblem {
    fn nodes(&self) -> usize {
        self.q.len()
    }

    fn dim(&self) -> usize {
        self.v[0].len()
    }

    fn local_gradient_into(&self, node: usize, x: &[f64], out: &mut [f64]) {
        let q = &self.q[node];
        let v = &self.v[node];
        let d = v.len();
        for (r, o) in out.iter_mut().enumerate().take(d) {
            let mut acc = v[r];
            for (c, xc) in x.iter().enumerate() {
                acc += q[(r, c)] * xc;
            }
            *o = acc;
        }
    }

    fn local_value(&self, node: usize, x: &[f64]) -> f64 {
        let q = &self.q[node];
        let v = &self.v[node];
        let d = v.len();
        let mut val = 0.0;
        for r in 0..d {
            let mut qx = 0.0;
            for c in 0..d {
                qx += q[(r, c)] * x[c];
            }
            val += 0.5 * x[r] * qx + v[r] * x[r];
        }
        val
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    fn strong_convexity(&self) -> f64 {
        self.mu
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn scalar(q: f64, v: f64) -> QuadraticProblem {
        QuadraticProblem::new(
            vec![DMatrix::from_element(1, 1, q)],
            vec![DVector::from_element(1, v)],
        )
        .unwrap()
    }

    #[test]
    fn trivial_instance() {
        let p = generate_quadratic(QuadraticSpec::new(1, 1, 1.0, 7)).unwrap();
        assert_eq!(p.hessian(0)[(0, 0)], 1.0);
        assert_eq!(p.lipschitz(), 1.0);
        assert_eq!(p.strong_convexity(), 1.0);
    }

    #[test]
    fn scalar_gradient_and_optimum() {
        let p = scalar(2.0, -4.0);
        assert_eq!(p.local_gradient(0, &[0.0])[0], -4.0);
        assert_abs_diff_eq!(p.optimum().unwrap()[0], 2.0, epsilon = 1e-15);

        let two = QuadraticProblem::new(
            vec![DMatrix::from_element(1, 1, 1.0), DMatrix::from_element(1, 1, 3.0)],
            vec![DVector::from_element(1, 1.0), DVector::from_element(1, -1.0)],
        )
        .unwrap();
        assert_abs_diff_eq!(two.optimum().unwrap()[0], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn generated_condition_number() {
        let p = generate_quadratic(QuadraticSpec::new(16, 10, 1e4, 3)).unwrap();
        let k = p.kappa_achieved();
        assert!((1e4 * (1.0 - 1e-12)..=1.1e4).contains(&k), "kappa {k}");
        assert!(p.strong_convexity() <= p.lipschitz());
        let xs = p.optimum().unwrap();
        assert!(p.global_gradient(xs.as_slice()).norm() <= 1e-10);
    }

    #[test]
    fn generation_is_reproducible() {
        let spec = QuadraticSpec::new(4, 3, 100.0, 11);
        let a = generate_quadratic(spec).unwrap();
        let b = generate_quadratic(spec).unwrap();
        for i in 0..4 {
            assert_eq!(a.hessian(i), b.hessian(i));
            assert_eq!(a.linear(i), b.linear(i));
        }
        let c = generate_quadratic(QuadraticSpec { seed: 12, ..spec }).unwrap();
        assert_ne!(a.linear(0), c.linear(0));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(generate_quadratic(QuadraticSpec::new(2, 2, 0.5, 0)).is_err());
        assert!(generate_quadratic(QuadraticSpec::new(0, 2, 2.0, 0)).is_err());
        let indefinite = QuadraticProblem::new(
            vec![DMatrix::from_element(1, 1, -1.0)],
            vec![DVector::from_element(1, 0.0)],
        );
        assert!(indefinite.is_err());
    }
}
