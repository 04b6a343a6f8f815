//! Iteration loops for the randomized tracking framework and the baselines
//! it is compared against.

mod baselines;
mod coins;
mod config;
mod run;
mod state;
mod step;
mod trace;

pub use baselines::{baseline_step, fedavg_round, gd_step, scaffnew_step, scaffold_round};
pub use coins::CoinStream;
pub use config::{Budgets, Method, RunConfig};
pub use run::{run, run_from_state};
pub use state::{init_state, init_state_shared, StackedState};
pub use step::{rgta_step, rgta_step_with};
pub use trace::{MetricsTrace, Record, TRACE_HEADER};
