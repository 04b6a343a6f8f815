use super::params::{MethodParams, RateParams};
use crate::error::{Error, Result};
use crate::network::Variant;

fn require_open_p(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("this bound needs 0 < p < 1, got {p}")))
    }
}

fn require_small_step(alpha: f64, l: f64) -> Result<()> {
    if alpha * l <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("this bound needs alpha <= 1/L, got alpha*L = {}", alpha * l)))
    }
}

/// `p·c/(2κ·d·(L+μ)) · [√(1 + 4e(κ+1)·r²) − 1]`, the shape shared by the
/// third terms of the step conditions.
fn third_term(scale: f64, denom: f64, kappa: f64, l: f64, mu: f64, inner: f64) -> f64 {
    scale / (2.0 * kappa * denom * (l + mu)) * ((1.0 + inner).sqrt() - 1.0)
}

/// Sufficient step size for a spectral radius below one, for general
/// communication matrices. Zero when `β₁` or `β₃` is one. `alpha` in
/// `params` is ignored.
pub fn step_bound_general(params: &RateParams) -> Result<f64> {
    params.validate()?;
    require_open_p(params.p)?;
    let (mu, l, p, kappa) = (params.mu, params.l, params.p, params.kappa());
    let (e1, e2, e3, e4) = (params.eta(1), params.eta(2), params.eta(3), params.eta(4));
    let c = e4 * (1.0 - e1) + 2.0 * e2 * p * params.beta_pow(4);
    let inner = 4.0 * (1.0 - e1) * (1.0 - e3) * e2 * e4 * (kappa + 1.0) / (c * c);
    let t3 = third_term(c, e2 * e4, kappa, l, mu, inner);
    Ok((1.0 / l).min((1.0 - e3) / (l * e4)).min(t3))
}

/// Per-method closed forms of the step condition. `alpha` is ignored.
pub fn step_bound_method(method: Variant, params: &MethodParams) -> Result<f64> {
    params.validate()?;
    require_open_p(params.p)?;
    let (mu, l, p, kappa) = (params.mu, params.l, params.p, params.kappa());
    let eta = params.eta();
    let bn = params.beta_pow();
    let sq = |x: f64| x * x;
    Ok(match method {
        Variant::One => {
            let inner = 4.0 * (kappa + 1.0) * sq((1.0 - bn) / (3.0 - bn));
            ((1.0 - eta) / l).min(third_term(p * (3.0 - bn), 1.0, kappa, l, mu, inner))
        }
        Variant::Two => {
            let c = 2.0 * eta + 1.0 - bn;
            let inner = 4.0 * eta * (kappa + 1.0) * sq((1.0 - bn) / c);
            ((1.0 - eta) / l).min(third_term(p * c, eta, kappa, l, mu, inner))
        }
        Variant::Three => {
            let inner = 4.0 * (kappa + 1.0) * sq((1.0 - bn) / (1.0 + bn));
            (1.0 / l)
                .min((1.0 - eta) / (l * eta))
                .min(third_term(p * (1.0 + bn), eta, kappa, l, mu, inner))
        }
    })
}

/// Closed-form upper bound `λ_u` on the spectral radius of the general
/// matrix.
pub fn rate_upper_bound(params: &RateParams) -> Result<f64> {
    params.validate()?;
    require_open_p(params.p)?;
    require_small_step(params.alpha, params.l)?;
    let (mu, l, p, alpha, kappa) = (params.mu, params.l, params.p, params.alpha, params.kappa());
    let (e1, e2, e3, e4) = (params.eta(1), params.eta(2), params.eta(3), params.eta(4));
    let al = alpha * l;
    let disc = (e1 - e3 - al * e4).powi(2) + 4.0 * e2 * e4 * al * al + 8.0 * p * al * e2 * params.beta_pow(4);
    let lambda_hat = (e1 + e3 + al * e4 + disc.sqrt()) / 2.0;
    Ok((1.0 - alpha * mu / 2.0).max(lambda_hat + (2.0 * al * kappa * e2 * e4).sqrt()))
}

/// Per-method rate bounds. Valid for `0 < p ≤ 1`; at `p = 1` these are the
/// full-communication bounds with `η = β^{n_c}`.
pub fn rate_bound_method(method: Variant, params: &MethodParams) -> Result<f64> {
    params.validate()?;
    require_small_step(params.alpha, params.l)?;
    let (mu, alpha, kappa) = (params.mu, params.alpha, params.kappa());
    let eta = params.eta();
    let ral = (alpha * params.l).sqrt();
    let second = match method {
        Variant::One => eta + ral * (2.5 + (2.0 * kappa).sqrt()),
        Variant::Two => eta + ral * (2.5 + (2.0 * kappa * eta).sqrt()),
        Variant::Three => eta * (1.0 + ral * (2.5 + (2.0 * kappa).sqrt())),
    };
    Ok((1.0 - alpha * mu / 2.0).max(second))
}
