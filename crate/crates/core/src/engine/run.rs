use nalgebra::DVector;

use super::baselines::{baseline_step, check_topology};
use super::coins::CoinStream;
use super::config::{Method, RunConfig};
use super::state::{init_state_shared, StackedState};
use super::step::rgta_step;
use super::trace::{MetricsTrace, Record};
use crate::error::{Error, Result};
use crate::network::{CommunicationSet, SetTag};
use crate::problems::GradientOracle;

/// Runs `config` from the zero initial point until a budget is exhausted.
///
/// Baselines read their mixing matrix from slot 1 of `comm`.
pub fn run<O: GradientOracle + ?Sized>(
    oracle: &O,
    config: &RunConfig,
    comm: &CommunicationSet,
    x_star: &DVector<f64>,
) -> Result<MetricsTrace> {
    let mut state = init_state_shared(oracle, &DVector::zeros(oracle.dim()))?;
    if matches!(config.method, Method::Scaffold | Method::Scaffnew) {
        // Control variates start at zero.
        state.y.fill(0.0);
    }
    run_from_state(oracle, config, comm, x_star, &mut state)
}

fn check(config: &RunConfig, comm: &CommunicationSet, oracle_nodes: usize) -> Result<()> {
    config.validate()?;
    if comm.n() != oracle_nodes {
        return Err(Error::DimensionMismatch {
            expected: format!("{oracle_nodes} nodes"),
            got: format!("{} nodes in communication set", comm.n()),
        });
    }
    match (config.method, comm.tag()) {
        (Method::Rgta(v), SetTag::Rgta(t)) if v == t => {}
        (Method::Custom, SetTag::Custom) => {}
        (m, _) if m.is_tracking() => {
            return Err(Error::invalid(format!(
                "communication set does not match method {}",
                m.name()
            )))
        }
        (m, _) => check_topology(m, comm.matrix(1))?,
    }
    if config.method.is_tracking() && comm.n_c() != config.n_c {
        return Err(Error::invalid(format!(
            "communication set has n_c = {}, config has {}",
            comm.n_c(),
            config.n_c
        )));
    }
    Ok(())
}

/// Continues `state` under `config`, recording the current state first.
pub fn run_from_state<O: GradientOracle + ?Sized>(
    oracle: &O,
    config: &RunConfig,
    comm: &CommunicationSet,
    x_star: &DVector<f64>,
    state: &mut StackedState,
) -> Result<MetricsTrace> {
    check(config, comm, oracle.nodes())?;
    if x_star.len() != oracle.dim() {
        return Err(Error::DimensionMismatch {
            expected: format!("{}", oracle.dim()),
            got: format!("{}", x_star.len()),
        });
    }
    let mut coins = CoinStream::new(config.seed);
    let mut trace = MetricsTrace::default();
    trace.push(Record::of(state, x_star, false));
    let b = config.budgets;
    while state.grad_evals < b.max_grad_evals && state.comm_rounds < b.max_comm_rounds && state.k < b.max_iterations {
        let theta = if config.method.is_tracking() {
            rgta_step(state, oracle, comm, config.alpha, &mut coins, config.p)
        } else {
            baseline_step(state, oracle, config, comm.matrix(1), &mut coins)?
        };
        trace.push(Record::of(state, x_star, theta));
        if trace.diverged && config.halt_on_divergence {
            break;
        }
    }
    Ok(trace)
}
