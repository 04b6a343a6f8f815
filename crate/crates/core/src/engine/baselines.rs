use nalgebra::{DMatrix, RowDVector};

use super::coins::CoinStream;
use super::config::{Method, RunConfig};
use super::state::{row_mean, StackedState};
use crate::error::{Error, Result};
use crate::network::MixingMatrix;
use crate::problems::GradientOracle;

fn set_rows(m: &mut DMatrix<f64>, row: &RowDVector<f64>) {
    for mut r in m.row_iter_mut() {
        r.copy_from(row);
    }
}

/// Centralized gradient descent on the node average: every node moves by the
/// mean of the cached gradients. Costs one gradient round and one all-reduce.
pub fn gd_step<O: GradientOracle + ?Sized>(state: &mut StackedState, oracle: &O, alpha: f64) {
    let step = row_mean(&state.g) * alpha;
    let xbar = row_mean(&state.x) - step;
    set_rows(&mut state.x, &xbar);
    oracle.stacked_gradients(&state.x, &mut state.g);
    state.y.copy_from(&state.g);
    state.grad_evals += 1;
    state.comm_rounds += 1;
    state.k += 1;
}

/// `local_steps` gradient steps at every node followed by an exact average.
pub fn fedavg_round<O: GradientOracle + ?Sized>(
    state: &mut StackedState,
    oracle: &O,
    alpha: f64,
    local_steps: u32,
) {
    let d = state.d();
    let mut xi = vec![0.0; d];
    let mut gi = vec![0.0; d];
    for i in 0..state.n() {
        for j in 0..d {
            xi[j] = state.x[(i, j)];
            gi[j] = state.g[(i, j)];
        }
        for s in 0..local_steps {
            if s > 0 {
                oracle.local_gradient_into(i, &xi, &mut gi);
            }
            for j in 0..d {
                xi[j] -= alpha * gi[j];
            }
        }
        for (j, v) in xi.iter().enumerate() {
            state.x[(i, j)] = *v;
        }
    }
    let xbar = row_mean(&state.x);
    set_rows(&mut state.x, &xbar);
    oracle.stacked_gradients(&state.x, &mut state.g);
    state.y.copy_from(&state.g);
    state.grad_evals += local_steps as u64;
    state.comm_rounds += 1;
    state.k += 1;
}

/// Full-participation Scaffold round. Row `i` of `Y` is the node control
/// `c_i`; the server control is their mean.
///
/// Local model: `y ← y − α_l (∇f_i(y) − c_i + c)` for `local_steps` steps
/// from the server model; then `c_i ← c_i − c + (x̄ − y)/(K α_l)` and
/// `x̄ ← x̄ + α_g · mean(y − x̄)`.
pub fn scaffold_round<O: GradientOracle + ?Sized>(
    state: &mut StackedState,
    oracle: &O,
    alpha_local: f64,
    alpha_global: f64,
    local_steps: u32,
) {
    let (n, d) = (state.n(), state.d());
    let xbar = row_mean(&state.x);
    let c = row_mean(&state.y);
    let scale = 1.0 / (local_steps as f64 * alpha_local);
    let mut delta = RowDVector::zeros(d);
    let mut yi = vec![0.0; d];
    let mut gi = vec![0.0; d];
    for i in 0..n {
        for j in 0..d {
            yi[j] = xbar[j];
            gi[j] = state.g[(i, j)];
        }
        for s in 0..local_steps {
            if s > 0 || state.x.row(i) != xbar {
                oracle.local_gradient_into(i, &yi, &mut gi);
            }
            for j in 0..d {
                yi[j] -= alpha_local * (gi[j] - state.y[(i, j)] + c[j]);
            }
        }
        for j in 0..d {
            state.y[(i, j)] += -c[j] + (xbar[j] - yi[j]) * scale;
            delta[j] += (yi[j] - xbar[j]) / n as f64;
        }
    }
    let next = xbar + delta * alpha_global;
    set_rows(&mut state.x, &next);
    oracle.stacked_gradients(&state.x, &mut state.g);
    state.grad_evals += local_steps as u64;
    state.comm_rounds += 1;
    state.k += 1;
}

/// Decentralized Scaffnew. Row `i` of `Y` holds the control `h_i`.
///
/// `X̂ = X − γ(G − H)`; on a communicating iteration
/// `X⁺ = (1 − ζ)X̂ + ζ W X̂` and `H ← H + (p/γ)(X⁺ − X̂)`, otherwise
/// `X⁺ = X̂`. With `W = 11ᵀ/n` and `ζ = 1` this is the federated method.
pub fn scaffnew_step<O: GradientOracle + ?Sized>(
    state: &mut StackedState,
    oracle: &O,
    w: &MixingMatrix,
    gamma: f64,
    zeta: f64,
    p: f64,
    theta: bool,
) -> bool {
    let StackedState {
        x,
        y: h,
        g,
        scratch,
        comm_rounds,
        ..
    } = &mut *state;
    // X̂
    scratch.a.copy_from(&*g);
    scratch.a -= &*h;
    x.zip_apply(&scratch.a, |xi, d| *xi -= gamma * d);
    if theta {
        scratch.a.copy_from(x);
        w.mix_in_place(&mut scratch.a, 1, &mut scratch.b);
        // scratch.a ← X⁺ − X̂ = ζ (W X̂ − X̂)
        scratch.a -= &*x;
        scratch.a *= zeta;
        *x += &scratch.a;
        h.zip_apply(&scratch.a, |hi, d| *hi += p / gamma * d);
        *comm_rounds += 1;
    }
    oracle.stacked_gradients(x, g);
    state.grad_evals += 1;
    state.k += 1;
    theta
}

/// Rejects baselines whose server average is not realizable on `w`.
pub(crate) fn check_topology(method: Method, w: &MixingMatrix) -> Result<()> {
    if matches!(method, Method::FedAvg | Method::Scaffold) {
        let m = w.matrix();
        let n = m.nrows();
        let complete = (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)] > 0.0));
        if !complete {
            return Err(Error::invalid(format!(
                "{} needs a complete network (exact averaging)",
                method.name()
            )));
        }
    }
    Ok(())
}

/// One iteration (or round) of a baseline method. Returns whether the
/// iteration communicated.
pub fn baseline_step<O: GradientOracle + ?Sized>(
    state: &mut StackedState,
    oracle: &O,
    config: &RunConfig,
    w: &MixingMatrix,
    coins: &mut CoinStream,
) -> Result<bool> {
    match config.method {
        Method::Gd => {
            gd_step(state, oracle, config.alpha);
            Ok(true)
        }
        Method::FedAvg => {
            fedavg_round(state, oracle, config.alpha, config.local_steps);
            Ok(true)
        }
        Method::Scaffold => {
            scaffold_round(state, oracle, config.alpha, config.secondary(), config.local_steps);
            Ok(true)
        }
        Method::Scaffnew => {
            let theta = coins.coin(state.k, config.p);
            Ok(scaffnew_step(state, oracle, w, config.alpha, config.secondary(), config.p, theta))
        }
        m => Err(Error::invalid(format!("{} is not a baseline method", m.name()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::state::init_state_shared;
    use crate::network::{Topology, TopologyKind, WeightScheme};
    use crate::problems::{generate_quadratic, QuadraticProblem, QuadraticSpec};
    use nalgebra::DVector;

    fn complete(n: usize) -> MixingMatrix {
        let t = Topology::build(TopologyKind::Complete, n).unwrap();
        MixingMatrix::from_topology(&t, WeightScheme::EqualComplete).unwrap()
    }

    fn problem() -> QuadraticProblem {
        generate_quadratic(QuadraticSpec::new(4, 3, 10.0, 9)).unwrap()
    }

    #[test]
    fn scalar_gd() {
        let p = QuadraticProblem::new(
            vec![DMatrix::from_element(1, 1, 2.0)],
            vec![DVector::from_element(1, -4.0)],
        )
        .unwrap();
        let mut s = init_state_shared(&p, &DVector::zeros(1)).unwrap();
        gd_step(&mut s, &p, 0.25);
        assert_eq!(s.x[(0, 0)], 1.0);
    }

    #[test]
    fn fedavg_one_local_step_is_gd() {
        let p = problem();
        let x0 = DVector::zeros(3);
        let mut a = init_state_shared(&p, &x0).unwrap();
        let mut b = a.clone();
        for _ in 0..10 {
            gd_step(&mut a, &p, 0.05);
            fedavg_round(&mut b, &p, 0.05, 1);
        }
        assert!((a.x.clone() - b.x.clone()).abs().max() < 1e-14);
    }

    #[test]
    fn scaffold_first_round_matches_fedavg() {
        let p = problem();
        let mut a = init_state_shared(&p, &DVector::zeros(3)).unwrap();
        a.y.fill(0.0);
        let mut b = a.clone();
        scaffold_round(&mut a, &p, 0.05, 1.0, 1);
        fedavg_round(&mut b, &p, 0.05, 1);
        assert!((a.x.clone() - b.x.clone()).abs().max() < 1e-14);
    }

    #[test]
    fn scaffold_controls_stay_centred_and_converge() {
        let p = problem();
        let xs = p.optimum().unwrap();
        let mut s = init_state_shared(&p, &DVector::zeros(3)).unwrap();
        s.y.fill(0.0);
        for _ in 0..400 {
            scaffold_round(&mut s, &p, 0.02, 1.0, 5);
        }
        assert!(row_mean(&s.y).norm() < 1e-10);
        assert!((s.x_bar() - xs).norm() < 1e-8);
    }

    #[test]
    fn scaffnew_federated_case_converges() {
        let p = problem();
        let xs = p.optimum().unwrap();
        let w = complete(4);
        let mut s = init_state_shared(&p, &DVector::zeros(3)).unwrap();
        s.y.fill(0.0);
        let mut coins = CoinStream::new(1);
        for _ in 0..3000 {
            let theta = coins.coin(s.k, 0.3);
            scaffnew_step(&mut s, &p, &w, 0.02, 1.0, 0.3, theta);
        }
        assert!(row_mean(&s.y).norm() < 1e-10);
        let err = (s.x_bar() - xs).norm();
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn server_methods_need_complete_graph() {
        let t = Topology::build(TopologyKind::Star, 4).unwrap();
        let w = MixingMatrix::from_topology(&t, WeightScheme::Metropolis).unwrap();
        assert!(check_topology(Method::FedAvg, &w).is_err());
        assert!(check_topology(Method::Scaffold, &w).is_err());
        assert!(check_topology(Method::Scaffnew, &w).is_ok());
        assert!(check_topology(Method::Scaffold, &complete(4)).is_ok());
    }
}
