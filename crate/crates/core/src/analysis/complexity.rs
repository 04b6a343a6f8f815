use std::fmt::Write as _;

use rayon::prelude::*;

use super::matrix::build_a_method;
use super::params::MethodParams;
use crate::error::{Error, Result};
use crate::network::Variant;

pub const SWEEP_HEADER: &str = "method,beta,p,n_c,alpha_star,rho,comp,comm,epsilon";

/// Problem and network constants shared by every cell of a sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constants {
    pub mu: f64,
    pub l: f64,
    pub n: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepCell {
    pub method: Variant,
    pub beta: f64,
    pub p: f64,
    pub n_c: u32,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexityPoint {
    pub method: Variant,
    pub beta: f64,
    pub p: f64,
    pub n_c: u32,
    pub alpha_star: f64,
    pub rho: f64,
    /// Gradient steps to reach `ε`; infinite when `ρ ≥ 1`.
    pub comp: f64,
    /// Expected communication rounds, `p · n_c · comp`.
    pub comm: f64,
    pub epsilon: f64,
}

impl ComplexityPoint {
    pub fn feasible(&self) -> bool {
        self.rho < 1.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SweepAxis {
    /// Vary `n_c` at fixed `p`.
    Nc { p: f64, values: Vec<u32> },
    /// Vary `p` at fixed `n_c`.
    P { n_c: u32, values: Vec<f64> },
}

impl SweepAxis {
    fn cells(&self, method: Variant, beta: f64) -> Vec<SweepCell> {
        match self {
            SweepAxis::Nc { p, values } => values
                .iter()
                .map(|&n_c| SweepCell { method, beta, p: *p, n_c })
                .collect(),
            SweepAxis::P { n_c, values } => values
                .iter()
                .map(|&p| SweepCell { method, beta, p, n_c: *n_c })
                .collect(),
        }
    }

    fn is_empty(&self) -> bool {
        match self {
            SweepAxis::Nc { values, .. } => values.is_empty(),
            SweepAxis::P { values, .. } => values.is_empty(),
        }
    }
}

/// `{2⁻ˢ/L : s = 0..20}`, largest first.
pub fn default_alpha_grid(l: f64) -> Vec<f64> {
    (0..=20).map(|s| (-(s as f64)).exp2() / l).collect()
}

/// Ten geometric points spanning `[α/2, 2α]`, clipped to `1/L`.
pub fn refine_around(alpha: f64, l: f64) -> Vec<f64> {
    (0..10)
        .map(|j| (alpha * (-1.0 + 2.0 * j as f64 / 9.0).exp2()).min(1.0 / l))
        .collect()
}

fn validate(consts: &Constants, epsilon: f64, grid: &[f64]) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if grid.is_empty() {
        return Err(Error::invalid("step-size grid is empty"));
    }
    if let Some(a) = grid.iter().find(|&&a| !(a > 0.0) || a * consts.l > 1.0) {
        return Err(Error::invalid(format!("grid step {a} is outside (0, 1/L]")));
    }
    Ok(())
}

/// Smallest spectral radius over `grid`; ties go to the smaller step.
fn best_on_grid(consts: &Constants, cell: SweepCell, grid: &[f64]) -> Result<(f64, f64)> {
    let mut best = (f64::INFINITY, f64::INFINITY);
    for &alpha in grid {
        let params = MethodParams {
            mu: consts.mu,
            l: consts.l,
            n: consts.n,
            beta: cell.beta,
            p: cell.p,
            n_c: cell.n_c,
            alpha,
        };
        let rho = build_a_method(cell.method, &params)?.spectral_radius()?;
        if rho < best.1 || (rho == best.1 && alpha < best.0) {
            best = (alpha, rho);
        }
    }
    Ok(best)
}

fn point(cell: SweepCell, alpha_star: f64, rho: f64, epsilon: f64) -> ComplexityPoint {
    let comp = if rho < 1.0 {
        (1.0 / epsilon).ln() / (1.0 - rho)
    } else {
        f64::INFINITY
    };
    ComplexityPoint {
        method: cell.method,
        beta: cell.beta,
        p: cell.p,
        n_c: cell.n_c,
        alpha_star,
        rho,
        comp,
        comm: cell.p * cell.n_c as f64 * comp,
        epsilon,
    }
}

fn union_grid(mut grid: Vec<f64>) -> Vec<f64> {
    grid.sort_by(|a, b| b.total_cmp(a));
    grid.dedup();
    grid
}

/// Tunes `α` on `grid` plus one refinement around the grid minimizer and
/// returns the resulting complexities.
pub fn complexity_point(consts: &Constants, cell: SweepCell, epsilon: f64, grid: &[f64]) -> Result<ComplexityPoint> {
    validate(consts, epsilon, grid)?;
    let (coarse, _) = best_on_grid(consts, cell, grid)?;
    let mut full = grid.to_vec();
    full.extend(refine_around(coarse, consts.l));
    let (alpha, rho) = best_on_grid(consts, cell, &union_grid(full))?;
    Ok(point(cell, alpha, rho, epsilon))
}

/// Every `(method, β, axis value)` cell, tuned on one shared grid: `grid`
/// together with the refinement points of every cell. Sharing the grid keeps
/// the comparisons between cells exact.
pub fn sweep(
    consts: &Constants,
    methods: &[Variant],
    betas: &[f64],
    axis: &SweepAxis,
    epsilon: f64,
    grid: &[f64],
) -> Result<Vec<ComplexityPoint>> {
    validate(consts, epsilon, grid)?;
    if methods.is_empty() || betas.is_empty() || axis.is_empty() {
        return Err(Error::invalid("sweep grids must be nonempty"));
    }
    let cells: Vec<SweepCell> = methods
        .iter()
        .flat_map(|&m| betas.iter().flat_map(move |&b| axis.cells(m, b)))
        .collect();
    let coarse: Vec<f64> = cells
        .par_iter()
        .map(|&c| best_on_grid(consts, c, grid).map(|(a, _)| a))
        .collect::<Result<_>>()?;
    let mut full = grid.to_vec();
    for a in coarse {
        full.extend(refine_around(a, consts.l));
    }
    let shared = union_grid(full);
    cells
        .par_iter()
        .map(|&c| best_on_grid(consts, c, &shared).map(|(a, rho)| point(c, a, rho, epsilon)))
        .collect()
}

pub fn sweep_csv(points: &[ComplexityPoint]) -> String {
    let mut out = String::with_capacity(128 * (points.len() + 1));
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            p.method, p.beta, p.p, p.n_c, p.alpha_star, p.rho, p.comp, p.comm, p.epsilon
        );
    }
    out
}
