use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::engine::{Budgets, Method};
use crate::error::{Error, Result};
use crate::network::{TopologyKind, WeightScheme};
use crate::problems::QuadraticSpec;

#[derive(Clone, Debug, PartialEq)]
pub enum ProblemConfig {
    Quadratic(QuadraticSpec),
    Logistic {
        path: PathBuf,
        nodes: usize,
        /// Declared feature dimension; defaults to the largest index seen.
        dim: Option<usize>,
    },
}

impl ProblemConfig {
    pub fn nodes(&self) -> usize {
        match self {
            ProblemConfig::Quadratic(s) => s.n,
            ProblemConfig::Logistic { nodes, .. } => *nodes,
        }
    }

    fn default_grad_budget(&self) -> u64 {
        match self {
            ProblemConfig::Quadratic(_) => 100_000,
            ProblemConfig::Logistic { .. } => 10_000,
        }
    }
}

/// Everything one `run` or `tune` invocation needs. See the README for the
/// file format.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    /// Gradient-norm tolerance for the reference optimum.
    pub solver_tol: f64,
    pub network: TopologyKind,
    pub scheme: WeightScheme,
    pub methods: Vec<Method>,
    pub n_c: Vec<u32>,
    pub p: Vec<f64>,
    /// Fixed step size; when absent `run` tunes first.
    pub alpha: Option<f64>,
    pub secondary_alpha: Option<f64>,
    pub local_steps: u32,
    /// Tuning grid `{2^-t : t_min ≤ t ≤ t_max}`.
    pub tune_t: (u32, u32),
    pub budgets: Budgets,
    pub seeds: Vec<u64>,
    pub epsilon: f64,
    /// Whether `epsilon` is relative to the initial optimization error.
    pub epsilon_relative: bool,
    pub out_dir: PathBuf,
}

type Section = BTreeMap<String, (String, usize)>;

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn parse_sections(text: &str) -> Result<BTreeMap<String, Section>> {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = name.trim().to_ascii_lowercase();
            if sections.contains_key(&name) {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("section [{name}] repeated"),
                });
            }
            sections.insert(name.clone(), Section::new());
            current = Some(name);
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected `key = value`, found `{line}`"),
            });
        };
        let Some(section) = current.as_ref() else {
            return Err(Error::Parse {
                line: line_no,
                message: "key outside of any section".into(),
            });
        };
        let key = key.trim().to_ascii_lowercase();
        let entry = sections.get_mut(section).expect("section exists");
        if entry
            .insert(key.clone(), (value.trim().to_string(), line_no))
            .is_some()
        {
            return Err(Error::Parse {
                line: line_no,
                message: format!("key `{key}` repeated in [{section}]"),
            });
        }
    }
    Ok(sections)
}

/// Typed access to one section; every key must be consumed.
struct Reader<'a> {
    name: &'a str,
    section: Section,
}

impl<'a> Reader<'a> {
    fn new(sections: &mut BTreeMap<String, Section>, name: &'a str) -> Self {
        Reader {
            name,
            section: sections.remove(name).unwrap_or_default(),
        }
    }

    fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.section.remove(key) {
            None => Ok(None),
            Some((v, line)) => v.parse().map(Some).map_err(|_| Error::Parse {
                line,
                message: format!("bad value `{v}` for [{}] {key}", self.name),
            }),
        }
    }

    fn require<T: FromStr>(&mut self, key: &str) -> Result<T> {
        self.take(key)?
            .ok_or_else(|| config_err(format!("missing [{}] {key}", self.name)))
    }

    fn list<T: FromStr>(&mut self, key: &str) -> Result<Option<Vec<T>>> {
        match self.section.remove(key) {
            None => Ok(None),
            Some((v, line)) => v
                .split(',')
                .map(|s| s.trim())
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse().map_err(|_| Error::Parse {
                        line,
                        message: format!("bad list item `{s}` for [{}] {key}", self.name),
                    })
                })
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }

    fn finish(self) -> Result<()> {
        match self.section.into_iter().next() {
            None => Ok(()),
            Some((k, (_, line))) => Err(Error::Parse {
                line,
                message: format!("unknown key `{k}` in [{}]", self.name),
            }),
        }
    }
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut sections = parse_sections(text)?;

        let mut r = Reader::new(&mut sections, "problem");
        let kind: String = r.require("kind")?;
        let nodes: usize = r.require("nodes")?;
        let problem = match kind.to_ascii_lowercase().as_str() {
            "quadratic" => {
                let mut spec = QuadraticSpec::new(nodes, r.require("dim")?, r.require("kappa")?, r.require("seed")?);
                if let Some(h) = r.take("heterogeneity")? {
                    spec.heterogeneity = h;
                }
                ProblemConfig::Quadratic(spec)
            }
            "logistic" => ProblemConfig::Logistic {
                path: PathBuf::from(r.require::<String>("path")?),
                nodes,
                dim: r.take("dim")?,
            },
            other => {
                return Err(Error::Unknown {
                    what: "problem kind",
                    name: other.to_string(),
                })
            }
        };
        let solver_tol = r.take("solver_tol")?.unwrap_or(1e-12);
        r.finish()?;

        let mut r = Reader::new(&mut sections, "network");
        let network = r.require("kind")?;
        let scheme = r.take("scheme")?.unwrap_or(WeightScheme::Metropolis);
        r.finish()?;

        let mut r = Reader::new(&mut sections, "methods");
        let methods = r.list("methods")?.ok_or_else(|| config_err("missing [methods] methods"))?;
        let n_c = r.list("n_c")?.unwrap_or_else(|| vec![1]);
        let p = r.list("p")?.unwrap_or_else(|| vec![1.0]);
        let alpha = r.take("alpha")?;
        let secondary_alpha = r.take("secondary_alpha")?;
        let local_steps = r.take("local_steps")?.unwrap_or(1);
        let tune_t = (r.take("tune_t_min")?.unwrap_or(0), r.take("tune_t_max")?.unwrap_or(20));
        r.finish()?;

        let mut r = Reader::new(&mut sections, "budgets");
        let budgets = Budgets {
            max_grad_evals: r.take("grad_evals")?.unwrap_or(problem.default_grad_budget()),
            max_comm_rounds: r.take("comm_rounds")?.unwrap_or(u64::MAX),
            max_iterations: r.take("iterations")?.unwrap_or(u64::MAX),
        };
        r.finish()?;

        let mut r = Reader::new(&mut sections, "output");
        let seeds = r.list("seeds")?.unwrap_or_else(|| vec![0]);
        let epsilon = r.take("epsilon")?.unwrap_or(1e-4);
        let epsilon_relative = r.take("epsilon_relative")?.unwrap_or(true);
        let out_dir = PathBuf::from(r.take::<String>("out_dir")?.unwrap_or_else(|| "out".into()));
        r.finish()?;

        if let Some(name) = sections.keys().next() {
            return Err(config_err(format!("unknown section [{name}]")));
        }
        let cfg = ExperimentConfig {
            problem,
            solver_tol,
            network,
            scheme,
            methods,
            n_c,
            p,
            alpha,
            secondary_alpha,
            local_steps,
            tune_t,
            budgets,
            seeds,
            epsilon,
            epsilon_relative,
            out_dir,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() || self.n_c.is_empty() || self.p.is_empty() || self.seeds.is_empty() {
            return Err(config_err("method, n_c, p and seed lists must be nonempty"));
        }
        if self.n_c.contains(&0) {
            return Err(config_err("n_c values must be positive"));
        }
        if self.p.iter().any(|&p| !(p > 0.0 && p <= 1.0)) {
            return Err(config_err("p values must lie in (0, 1]"));
        }
        if self.tune_t.0 > self.tune_t.1 || self.tune_t.1 > 1000 {
            return Err(config_err("tuning exponents must satisfy t_min <= t_max <= 1000"));
        }
        if !(self.epsilon > 0.0) || !(self.solver_tol > 0.0) {
            return Err(config_err("epsilon and solver_tol must be positive"));
        }
        if self.local_steps == 0 {
            return Err(config_err("local_steps must be positive"));
        }
        let b = self.budgets;
        if b.max_grad_evals == 0 || b.max_comm_rounds == 0 || b.max_iterations == 0 {
            return Err(config_err("budgets must be positive"));
        }
        if let ProblemConfig::Quadratic(s) = &self.problem {
            if s.n == 0 || s.d == 0 || !(s.kappa >= 1.0) {
                return Err(config_err("quadratic needs nodes, dim >= 1 and kappa >= 1"));
            }
        }
        Ok(())
    }

    /// Canonical text form; `parse` of the output reproduces `self`.
    pub fn to_ini_string(&self) -> String {
        let mut s = String::new();
        s.push_str("[problem]\n");
        match &self.problem {
            ProblemConfig::Quadratic(q) => {
                let _ = writeln!(s, "kind = quadratic");
                let _ = writeln!(s, "nodes = {}", q.n);
                let _ = writeln!(s, "dim = {}", q.d);
                let _ = writeln!(s, "kappa = {}", q.kappa);
                let _ = writeln!(s, "seed = {}", q.seed);
                let _ = writeln!(s, "heterogeneity = {}", q.heterogeneity);
            }
            ProblemConfig::Logistic { path, nodes, dim } => {
                let _ = writeln!(s, "kind = logistic");
                let _ = writeln!(s, "nodes = {nodes}");
                let _ = writeln!(s, "path = {}", path.display());
                if let Some(d) = dim {
                    let _ = writeln!(s, "dim = {d}");
                }
            }
        }
        let _ = writeln!(s, "solver_tol = {}", self.solver_tol);
        let _ = writeln!(s, "\n[network]\nkind = {}\nscheme = {}", self.network, self.scheme);
        let _ = writeln!(s, "\n[methods]\nmethods = {}", join(&self.methods));
        let _ = writeln!(s, "n_c = {}", join(&self.n_c));
        let _ = writeln!(s, "p = {}", join(&self.p));
        if let Some(a) = self.alpha {
            let _ = writeln!(s, "alpha = {a}");
        }
        if let Some(a) = self.secondary_alpha {
            let _ = writeln!(s, "secondary_alpha = {a}");
        }
        let _ = writeln!(s, "local_steps = {}", self.local_steps);
        let _ = writeln!(s, "tune_t_min = {}\ntune_t_max = {}", self.tune_t.0, self.tune_t.1);
        let _ = writeln!(s, "\n[budgets]\ngrad_evals = {}", self.budgets.max_grad_evals);
        if self.budgets.max_comm_rounds != u64::MAX {
            let _ = writeln!(s, "comm_rounds = {}", self.budgets.max_comm_rounds);
        }
        if self.budgets.max_iterations != u64::MAX {
            let _ = writeln!(s, "iterations = {}", self.budgets.max_iterations);
        }
        let _ = writeln!(s, "\n[output]\nseeds = {}", join(&self.seeds));
        let _ = writeln!(s, "epsilon = {}", self.epsilon);
        let _ = writeln!(s, "epsilon_relative = {}", self.epsilon_relative);
        let _ = writeln!(s, "out_dir = {}", self.out_dir.display());
        s
    }
}
