use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::DVector;
use rayon::prelude::*;

use super::config::{ExperimentConfig, ProblemConfig};
use super::io::{fnv1a, write_atomic, FNV_OFFSET};
use crate::engine::{run, Method, MetricsTrace, RunConfig};
use crate::error::{Error, Result};
use crate::network::{CommunicationSet, MixingMatrix, Topology};
use crate::problems::{
    centralized_optimum, generate_quadratic, read_libsvm_file, read_vector, write_vector, GradientOracle,
    LogisticProblem, DEFAULT_GD_CAP,
};

/// A loaded problem, its reference optimum and the network.
pub struct Prepared {
    pub oracle: Box<dyn GradientOracle>,
    pub x_star: DVector<f64>,
    pub mixing: MixingMatrix,
    /// Ordered `key = value` lines for the manifest.
    pub manifest: Vec<(String, String)>,
}

impl Prepared {
    pub fn manifest_text(&self) -> String {
        self.manifest.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn comm_set(&self, method: Method, n_c: u32) -> Result<CommunicationSet> {
        match method {
            Method::Rgta(v) => CommunicationSet::for_variant(v, &self.mixing, n_c),
            Method::Custom => Err(Error::invalid("custom communication sets cannot be configured from a file")),
            _ => CommunicationSet::custom(std::array::from_fn(|_| self.mixing.clone()), 1),
        }
    }
}

fn problem_key(cfg: &ExperimentConfig) -> Result<u64> {
    let desc = match &cfg.problem {
        ProblemConfig::Quadratic(q) => format!(
            "quadratic n={} d={} kappa={} seed={} h={} tol={}",
            q.n, q.d, q.kappa, q.seed, q.heterogeneity, cfg.solver_tol
        ),
        ProblemConfig::Logistic { nodes, dim, .. } => {
            format!("logistic n={nodes} d={dim:?} tol={}", cfg.solver_tol)
        }
    };
    let mut h = fnv1a(desc.as_bytes(), FNV_OFFSET);
    if let ProblemConfig::Logistic { path, .. } = &cfg.problem {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        h = fnv1a(&bytes, h);
    }
    Ok(h)
}

/// Builds the problem and network, resolving `x*` through a cache in
/// `<out_dir>/cache` keyed by a hash of the problem definition.
pub fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    let n = cfg.problem.nodes();
    let topology = Topology::build(cfg.network, n)?;
    let mixing = MixingMatrix::from_topology(&topology, cfg.scheme)?;
    let mut manifest = Vec::new();
    let mut put = |k: &str, v: String| manifest.push((k.to_string(), v));

    let key = problem_key(cfg)?;
    let cache = cfg.out_dir.join("cache").join(format!("xstar_{key:016x}.txt"));
    let (oracle, exact): (Box<dyn GradientOracle>, Option<DVector<f64>>) = match &cfg.problem {
        ProblemConfig::Quadratic(spec) => {
            let q = generate_quadratic(*spec)?;
            put("problem", "quadratic".into());
            put("kappa_target", format!("{}", q.kappa_target()));
            put("kappa_achieved", format!("{:.16e}", q.kappa_achieved()));
            let xs = if cache.exists() { None } else { Some(q.optimum()?) };
            (Box::new(q), xs)
        }
        ProblemConfig::Logistic { path, nodes, dim } => {
            let data = read_libsvm_file(path, *dim)?;
            put("problem", "logistic".into());
            put("dataset", path.display().to_string());
            put("rows", data.len().to_string());
            let lp = LogisticProblem::new(data, *nodes)?;
            put("kappa_achieved", format!("{:.16e}", lp.lipschitz() / lp.strong_convexity()));
            (Box::new(lp), None)
        }
    };
    let x_star = if cache.exists() {
        read_vector(&cache)?
    } else {
        let xs = match exact {
            Some(x) => x,
            None => centralized_optimum(oracle.as_ref(), cfg.solver_tol, DEFAULT_GD_CAP)?,
        };
        write_vector(&cache, &xs)?;
        xs
    };
    if x_star.len() != oracle.dim() {
        return Err(Error::DimensionMismatch {
            expected: format!("cached optimum of length {}", oracle.dim()),
            got: format!("{}", x_star.len()),
        });
    }
    put("nodes", n.to_string());
    put("dim", oracle.dim().to_string());
    put("L", format!("{:.16e}", oracle.lipschitz()));
    put("mu", format!("{:.16e}", oracle.strong_convexity()));
    put("network", cfg.network.to_string());
    put("scheme", cfg.scheme.to_string());
    put("beta", format!("{:.16e}", mixing.beta()));
    put("x_star_grad_norm", format!("{:.16e}", oracle.global_gradient(x_star.as_slice()).norm()));
    put("x_star_cache", cache.display().to_string());
    Ok(Prepared {
        oracle,
        x_star,
        mixing,
        manifest,
    })
}

/// One `(method, n_c, p)` combination.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub method: Method,
    pub n_c: u32,
    pub p: f64,
}

impl Cell {
    pub fn file_stem(&self, seed: u64) -> String {
        format!("{}_{}_{}_{}", self.method, self.n_c, self.p, seed)
    }
}

/// Grid cells in config order. Methods that ignore `n_c` or `p` get one
/// cell per value they actually use.
pub fn cells(cfg: &ExperimentConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    for &method in &cfg.methods {
        let ncs: &[u32] = if method.is_tracking() { &cfg.n_c } else { &[1] };
        let ps: &[f64] = match method {
            Method::Rgta(_) | Method::Custom | Method::Scaffnew => &cfg.p,
            _ => &[1.0],
        };
        for &n_c in ncs {
            for &p in ps {
                out.push(Cell { method, n_c, p });
            }
        }
    }
    out
}

impl Cell {
    /// Whether the trajectory depends on the seed at all. Tracking methods at
    /// `p = 1` and the server baselines never consult the coin stream.
    pub fn is_random(&self) -> bool {
        match self.method {
            Method::Rgta(_) | Method::Custom | Method::Scaffnew => self.p < 1.0,
            _ => false,
        }
    }
}

/// Runs `f` once per seed, or once in total when the cell is deterministic.
fn per_seed<T: Clone + Send>(
    cell: Cell,
    seeds: &[u64],
    f: impl Fn(u64) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    if cell.is_random() {
        seeds.par_iter().map(|&s| f(s)).collect()
    } else {
        let one = f(seeds[0])?;
        Ok(vec![one; seeds.len()])
    }
}

fn run_config(cfg: &ExperimentConfig, cell: Cell, alpha: f64, seed: u64) -> RunConfig {
    let mut rc = RunConfig::new(cell.method, alpha, cell.n_c, cell.p, seed, cfg.budgets);
    rc.secondary_alpha = cfg.secondary_alpha;
    rc.local_steps = cfg.local_steps;
    rc
}

pub fn run_cell(prep: &Prepared, cfg: &ExperimentConfig, cell: Cell, alpha: f64, seed: u64) -> Result<MetricsTrace> {
    let comm = prep.comm_set(cell.method, cell.n_c)?;
    run(prep.oracle.as_ref(), &run_config(cfg, cell, alpha, seed), &comm, &prep.x_star)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TunedResult {
    pub cell: Cell,
    /// `None` when every step size diverged.
    pub alpha: Option<f64>,
    /// Mean final optimization error at the selected step.
    pub score: f64,
    /// Traces at the selected step, one per seed.
    pub traces: Vec<MetricsTrace>,
}

fn diverged(trace: &MetricsTrace) -> bool {
    let (Some(first), Some(last)) = (trace.initial(), trace.last()) else {
        return true;
    };
    trace.diverged || !last.opt_error.is_finite() || last.opt_error > first.opt_error
}

/// Tries every `α = 2^-t` and keeps the one with the smallest mean final
/// error over seeds at the gradient budget. A step is discarded when any seed
/// diverges; ties go to the larger step.
pub fn tune_cell(prep: &Prepared, cfg: &ExperimentConfig, cell: Cell) -> Result<TunedResult> {
    let alphas: Vec<f64> = (cfg.tune_t.0..=cfg.tune_t.1).map(|t| (-(t as f64)).exp2()).collect();
    let comm = prep.comm_set(cell.method, cell.n_c)?;
    let scored: Vec<Option<(f64, Vec<MetricsTrace>)>> = alphas
        .par_iter()
        .map(|&alpha| -> Result<_> {
            let traces = per_seed(cell, &cfg.seeds, |seed| {
                let mut rc = run_config(cfg, cell, alpha, seed);
                rc.halt_on_divergence = true;
                run(prep.oracle.as_ref(), &rc, &comm, &prep.x_star)
            })?;
            if traces.iter().any(diverged) {
                return Ok(None);
            }
            let score = traces.iter().map(|t| t.last().map_or(f64::INFINITY, |r| r.opt_error)).sum::<f64>()
                / traces.len() as f64;
            Ok(Some((score, traces)))
        })
        .collect::<Result<_>>()?;
    // Alphas run from large to small, so a strict comparison keeps the larger
    // step on ties.
    let mut best: Option<(f64, f64, Vec<MetricsTrace>)> = None;
    for (alpha, entry) in alphas.iter().zip(scored) {
        if let Some((score, traces)) = entry {
            if best.as_ref().is_none_or(|b| score < b.1) {
                best = Some((*alpha, score, traces));
            }
        }
    }
    Ok(match best {
        Some((alpha, score, traces)) => TunedResult {
            cell,
            alpha: Some(alpha),
            score,
            traces,
        },
        None => TunedResult {
            cell,
            alpha: None,
            score: f64::INFINITY,
            traces: Vec::new(),
        },
    })
}

pub const TUNED_HEADER: &str = "method,n_c,p,alpha,score";

pub fn tuned_csv(results: &[TunedResult]) -> String {
    let mut s = String::from(TUNED_HEADER);
    s.push('\n');
    for r in results {
        match r.alpha {
            Some(a) => {
                let _ = writeln!(s, "{},{},{},{:.16e},{:.16e}", r.cell.method, r.cell.n_c, r.cell.p, a, r.score);
            }
            None => {
                let _ = writeln!(s, "{},{},{},infeasible,inf", r.cell.method, r.cell.n_c, r.cell.p);
            }
        }
    }
    s
}

/// Output of `run`: trace files, the manifest and the resolved steps.
pub struct RunOutput {
    pub files: Vec<PathBuf>,
    pub steps: Vec<(Cell, Option<f64>)>,
}

fn write_manifest(prep: &Prepared, cfg: &ExperimentConfig) -> Result<PathBuf> {
    let path = cfg.out_dir.join("manifest.txt");
    write_atomic(&path, prep.manifest_text().as_bytes())?;
    Ok(path)
}

/// Runs every cell and seed and writes `<method>_<nc>_<p>_<seed>.csv`. Without
/// a fixed `alpha` each cell is tuned first.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let prep = prepare(cfg)?;
    let mut files = vec![write_manifest(&prep, cfg)?];
    let mut steps = Vec::new();
    for cell in cells(cfg) {
        let (alpha, traces) = match cfg.alpha {
            Some(a) => {
                let traces = per_seed(cell, &cfg.seeds, |seed| run_cell(&prep, cfg, cell, a, seed))?;
                (Some(a), traces)
            }
            None => {
                let t = tune_cell(&prep, cfg, cell)?;
                (t.alpha, t.traces)
            }
        };
        steps.push((cell, alpha));
        for (seed, trace) in cfg.seeds.iter().zip(&traces) {
            let path = cfg.out_dir.join(format!("{}.csv", cell.file_stem(*seed)));
            trace.write_csv(&path)?;
            files.push(path);
        }
    }
    Ok(RunOutput { files, steps })
}

/// Tunes every cell, writes `tuned.csv` and the traces at the chosen steps.
pub fn tune_experiment(cfg: &ExperimentConfig) -> Result<Vec<TunedResult>> {
    let prep = prepare(cfg)?;
    write_manifest(&prep, cfg)?;
    let results = cells(cfg)
        .into_iter()
        .map(|c| tune_cell(&prep, cfg, c))
        .collect::<Result<Vec<_>>>()?;
    for r in &results {
        for (seed, trace) in cfg.seeds.iter().zip(&r.traces) {
            trace.write_csv(&cfg.out_dir.join(format!("{}.csv", r.cell.file_stem(*seed))))?;
        }
    }
    write_atomic(&cfg.out_dir.join("tuned.csv"), tuned_csv(&results).as_bytes())?;
    Ok(results)
}

/// Cost of one trace to reach `ε`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Reach {
    pub grads: u64,
    pub comms: u64,
    /// `ε` was never reached; counts are the budget actually spent.
    pub censored: bool,
}

pub fn reach(trace: &MetricsTrace, epsilon: f64, relative: bool) -> Option<Reach> {
    let initial = trace.initial()?.opt_error;
    let target = if relative { epsilon * initial } else { epsilon };
    Some(match trace.first_reaching(target) {
        Some(r) => Reach {
            grads: r.grad_evals,
            comms: r.comm_rounds,
            censored: false,
        },
        None => {
            let last = trace.last()?;
            Reach {
                grads: last.grad_evals,
                comms: last.comm_rounds,
                censored: true,
            }
        }
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub method: String,
    pub n_c: u32,
    pub p: String,
    pub seeds: usize,
    pub censored: usize,
    pub grads_mean: f64,
    pub grads_se: f64,
    pub comms_mean: f64,
    pub comms_se: f64,
}

pub const SUMMARY_HEADER: &str = "method,n_c,p,epsilon,seeds,censored,grads_mean,grads_se,comms_mean,comms_se";

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Splits `<method>_<nc>_<p>_<seed>` into its parts.
fn parse_stem(stem: &str) -> Option<(String, u32, String, u64)> {
    let mut parts = stem.rsplitn(4, '_');
    let seed = parts.next()?.parse().ok()?;
    let p = parts.next()?.to_string();
    let n_c = parts.next()?.parse().ok()?;
    let method = parts.next()?.to_string();
    p.parse::<f64>().ok()?;
    Some((method, n_c, p, seed))
}

/// Groups the trace files of `dir` by `(method, n_c, p)` and summarizes the
/// cost of reaching `ε` across seeds.
pub fn aggregate_dir(dir: &Path, epsilon: f64, relative: bool) -> Result<Vec<Summary>> {
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    entries.sort();
    let mut groups: std::collections::BTreeMap<(String, u32, String), Vec<Reach>> = Default::default();
    for path in entries {
        let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else {
            continue;
        };
        let Some((method, n_c, p, _seed)) = parse_stem(stem) else {
            continue;
        };
        let trace = MetricsTrace::read_csv(&path).map_err(|e| match e {
            Error::Parse { line, message } => Error::Config(format!("{}:{line}: {message}", path.display())),
            other => other,
        })?;
        if let Some(r) = reach(&trace, epsilon, relative) {
            groups.entry((method, n_c, p)).or_default().push(r);
        }
    }
    Ok(groups
        .into_iter()
        .map(|((method, n_c, p), reaches)| {
            let g: Vec<f64> = reaches.iter().map(|r| r.grads as f64).collect();
            let c: Vec<f64> = reaches.iter().map(|r| r.comms as f64).collect();
            let (grads_mean, grads_se) = mean_se(&g);
            let (comms_mean, comms_se) = mean_se(&c);
            Summary {
                method,
                n_c,
                p,
                seeds: reaches.len(),
                censored: reaches.iter().filter(|r| r.censored).count(),
                grads_mean,
                grads_se,
                comms_mean,
                comms_se,
            }
        })
        .collect())
}

pub fn summary_csv(rows: &[Summary], epsilon: f64) -> String {
    let mut s = String::from(SUMMARY_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{:e},{},{},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.method, r.n_c, r.p, epsilon, r.seeds, r.censored, r.grads_mean, r.grads_se, r.comms_mean, r.comms_se
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Record;

    fn trace(errs: &[f64], thetas: &[bool]) -> MetricsTrace {
        let mut t = MetricsTrace::default();
        let mut comm = 0;
        for (k, (&e, &th)) in errs.iter().zip(thetas).enumerate() {
            if k > 0 && th {
                comm += 1;
            }
            t.push(Record {
                k: k as u64,
                grad_evals: k as u64 + 1,
                comm_rounds: comm,
                opt_error: e,
                cons_error_x: 0.0,
                cons_error_y: 0.0,
                theta: th,
            });
        }
        t
    }

    #[test]
    fn reach_counts_from_initial_gradient() {
        let mut errs = vec![1.0; 101];
        errs.push(0.01);
        let t = trace(&errs, &[true; 102]);
        let r = reach(&t, 0.05, false).unwrap();
        assert_eq!((r.grads, r.comms, r.censored), (102, 101, false));
        let never = reach(&trace(&[1.0, 0.9], &[false, true]), 0.1, true).unwrap();
        assert!(never.censored);
        assert_eq!(never.grads, 2);
    }

    #[test]
    fn stems() {
        assert_eq!(parse_stem("RGTA-3_10_0.5_4"), Some(("RGTA-3".into(), 10, "0.5".into(), 4)));
        assert_eq!(parse_stem("manifest"), None);
        assert_eq!(parse_stem("tuned"), None);
    }

    #[test]
    fn standard_error() {
        let (m, se) = mean_se(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((se - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_se(&[4.0]), (4.0, 0.0));
    }
}
