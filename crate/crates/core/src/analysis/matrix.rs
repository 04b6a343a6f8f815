use nalgebra::Matrix3;

use super::params::{MethodParams, RateParams};
use crate::error::Result;
use crate::network::Variant;

/// Nonnegative 3×3 matrix bounding the expected error vector
/// `(‖x̄ − x*‖, ‖x − x̄‖, ‖y − ȳ‖)` from one iteration to the next.
#[derive(Clone, Debug, PartialEq)]
pub struct RateMatrix {
    pub a: Matrix3<f64>,
    pub params: RateParams,
    pub method: Option<Variant>,
}

impl RateMatrix {
    /// Whether `α ≤ 1/L`, the range in which the matrix is a valid bound.
    pub fn alpha_admissible(&self) -> bool {
        self.params.alpha * self.params.l <= 1.0
    }

    pub fn spectral_radius(&self) -> Result<f64> {
        super::spectral::spectral_radius(&self.a)
    }
}

pub fn build_a_general(params: &RateParams) -> Result<RateMatrix> {
    params.validate()?;
    let RateParams {
        mu, l, alpha, p, ..
    } = *params;
    let rn = (params.n as f64).sqrt();
    let (e1, e2, e3, e4) = (params.eta(1), params.eta(2), params.eta(3), params.eta(4));
    let a = Matrix3::new(
        1.0 - alpha * mu,
        alpha * l / rn,
        0.0,
        0.0,
        e1,
        alpha * e2,
        rn * e4 * alpha * l * l,
        p * params.beta_pow(4) * l * params.norm_z1_minus_i + e4 * alpha * l * l,
        e3 + e4 * alpha * l,
    );
    Ok(RateMatrix {
        a,
        params: *params,
        method: None,
    })
}

/// The per-method matrices, written out directly.
pub fn build_a_method(method: Variant, params: &MethodParams) -> Result<RateMatrix> {
    params.validate()?;
    let MethodParams {
        mu, l, alpha, p, ..
    } = *params;
    let rn = (params.n as f64).sqrt();
    let eta = params.eta();
    let bn = params.beta_pow();
    let row1 = [1.0 - alpha * mu, alpha * l / rn, 0.0];
    let (row2, row3) = match method {
        Variant::One => (
            [0.0, eta, alpha],
            [rn * alpha * l * l, l * (2.0 * p + alpha * l), eta + alpha * l],
        ),
        Variant::Two => (
            [0.0, eta, alpha * eta],
            [rn * alpha * l * l, l * (2.0 * p + alpha * l), eta + alpha * l],
        ),
        Variant::Three => (
            [0.0, eta, alpha * eta],
            [
                eta * rn * alpha * l * l,
                l * (2.0 * bn * p + eta * alpha * l),
                eta * (1.0 + alpha * l),
            ],
        ),
    };
    let a = Matrix3::from_rows(&[row1.into(), row2.into(), row3.into()]);
    Ok(RateMatrix {
        a,
        params: params.general(method),
        method: Some(method),
    })
}
