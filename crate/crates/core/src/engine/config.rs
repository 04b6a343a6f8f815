use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::network::Variant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Rgta(Variant),
    /// Tracking update with caller-supplied `(W1, W2, W3, W4)`.
    Custom,
    Gd,
    FedAvg,
    Scaffold,
    Scaffnew,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Rgta(v) => v.name(),
            Method::Custom => "custom",
            Method::Gd => "GD",
            Method::FedAvg => "FedAvg",
            Method::Scaffold => "Scaffold",
            Method::Scaffnew => "Scaffnew",
        }
    }

    pub fn is_tracking(self) -> bool {
        matches!(self, Method::Rgta(_) | Method::Custom)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "custom" => Ok(Method::Custom),
            "gd" => Ok(Method::Gd),
            "fedavg" => Ok(Method::FedAvg),
            "scaffold" => Ok(Method::Scaffold),
            "scaffnew" => Ok(Method::Scaffnew),
            _ => s.parse::<Variant>().map(Method::Rgta),
        }
    }
}

/// Stopping budgets; a run ends as soon as any one is reached.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budgets {
    pub max_grad_evals: u64,
    pub max_comm_rounds: u64,
    pub max_iterations: u64,
}

impl Budgets {
    pub fn gradients(max_grad_evals: u64) -> Self {
        Budgets {
            max_grad_evals,
            max_comm_rounds: u64::MAX,
            max_iterations: u64::MAX,
        }
    }

    pub fn iterations(max_iterations: u64) -> Self {
        Budgets {
            max_grad_evals: u64::MAX,
            max_comm_rounds: u64::MAX,
            max_iterations,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub method: Method,
    pub alpha: f64,
    /// Global step for Scaffold, mixing step for Scaffnew. Defaults to 1.
    pub secondary_alpha: Option<f64>,
    pub n_c: u32,
    pub p: f64,
    pub seed: u64,
    pub budgets: Budgets,
    /// Local steps per round for FedAvg and Scaffold.
    pub local_steps: u32,
    /// Stop at the first non-finite iterate instead of running out the
    /// budget. Tuning sets this; plain runs keep every iteration.
    pub halt_on_divergence: bool,
}

impl RunConfig {
    pub fn new(method: Method, alpha: f64, n_c: u32, p: f64, seed: u64, budgets: Budgets) -> Self {
        RunConfig {
            method,
            alpha,
            secondary_alpha: None,
            n_c,
            p,
            seed,
            budgets,
            local_steps: 1,
            halt_on_divergence: false,
        }
    }

    pub fn secondary(&self) -> f64 {
        self.secondary_alpha.unwrap_or(1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::invalid(format!("step size must be positive, got {}", self.alpha)));
        }
        if let Some(s) = self.secondary_alpha {
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::invalid(format!("secondary step must be positive, got {s}")));
            }
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(Error::invalid(format!("p must lie in (0, 1], got {}", self.p)));
        }
        if self.n_c == 0 {
            return Err(Error::invalid("n_c must be at least 1"));
        }
        if self.local_steps == 0 {
            return Err(Error::invalid("local_steps must be at least 1"));
        }
        let b = self.budgets;
        if b.max_grad_evals == 0 || b.max_comm_rounds == 0 || b.max_iterations == 0 {
            return Err(Error::invalid("budgets must be positive"));
        }
        Ok(())
    }
}
