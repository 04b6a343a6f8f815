use crate::error::{Error, Result};
use crate::network::Variant;

/// Inputs of the general rate matrix. `betas[i]` is the connectivity of
/// communication matrix `W_{i+1}`; an identity slot has `β = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateParams {
    pub mu: f64,
    pub l: f64,
    pub n: usize,
    pub betas: [f64; 4],
    /// `‖Z₁^{n_c} − I‖₂`; at most 2.
    pub norm_z1_minus_i: f64,
    pub p: f64,
    pub n_c: u32,
    pub alpha: f64,
}

impl RateParams {
    pub fn kappa(&self) -> f64 {
        self.l / self.mu
    }

    /// `β_i^{n_c}` for slot `i` in `1..=4`.
    pub fn beta_pow(&self, i: usize) -> f64 {
        self.betas[i - 1].powi(self.n_c as i32)
    }

    /// `η_i = p β_i^{n_c} + 1 − p`.
    pub fn eta(&self, i: usize) -> f64 {
        self.p * self.beta_pow(i) + (1.0 - self.p)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.mu, self.l, self.p, self.alpha, self.norm_z1_minus_i]
            .iter()
            .chain(&self.betas)
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid("rate parameters must be finite"));
        }
        if !(self.mu > 0.0) || self.mu > self.l {
            return Err(Error::invalid(format!("need 0 < mu <= L, got mu={} L={}", self.mu, self.l)));
        }
        if self.n == 0 || self.n_c == 0 {
            return Err(Error::invalid("n and n_c must be positive"));
        }
        if self.betas.iter().any(|b| !(0.0..=1.0).contains(b)) {
            return Err(Error::invalid(format!("beta values must lie in [0, 1], got {:?}", self.betas)));
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(Error::invalid(format!("p must lie in (0, 1], got {}", self.p)));
        }
        if !(self.alpha >= 0.0) || !(0.0..=2.0).contains(&self.norm_z1_minus_i) {
            return Err(Error::invalid("alpha must be nonnegative and ‖Z1 − I‖ in [0, 2]"));
        }
        Ok(())
    }
}

/// Inputs of the per-method matrices: a single network parameter `β`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MethodParams {
    pub mu: f64,
    pub l: f64,
    pub n: usize,
    pub beta: f64,
    pub p: f64,
    pub n_c: u32,
    pub alpha: f64,
}

impl MethodParams {
    pub fn kappa(&self) -> f64 {
        self.l / self.mu
    }

    pub fn beta_pow(&self) -> f64 {
        self.beta.powi(self.n_c as i32)
    }

    pub fn eta(&self) -> f64 {
        self.p * self.beta_pow() + (1.0 - self.p)
    }

    /// The general parameters with identity slots at `β = 1` and the
    /// `‖Z₁^{n_c} − I‖₂ ≤ 2` bound.
    pub fn general(&self, method: Variant) -> RateParams {
        let (b, one) = (self.beta, 1.0);
        let betas = match method {
            Variant::One => [b, one, b, one],
            Variant::Two => [b, b, b, one],
            Variant::Three => [b, b, b, b],
        };
        RateParams {
            mu: self.mu,
            l: self.l,
            n: self.n,
            betas,
            norm_z1_minus_i: 2.0,
            p: self.p,
            n_c: self.n_c,
            alpha: self.alpha,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.general(Variant::Three).validate()
    }
}
