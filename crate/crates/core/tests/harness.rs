use std::path::Path;
use std::process::Command;

use nalgebra::{DMatrix, DVector};

use rgta::engine::{Budgets, Method, MetricsTrace};
use rgta::harness::{aggregate_dir, tune_cell, Cell, ExperimentConfig, Prepared, ProblemConfig};
use rgta::network::{MixingMatrix, TopologyKind, Variant, WeightScheme};
use rgta::problems::{QuadraticProblem, QuadraticSpec};

fn rgta_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rgta"))
}

fn scalar(q: f64) -> Prepared {
    let problem = QuadraticProblem::new(vec![DMatrix::from_element(1, 1, q)], vec![DVector::from_element(1, -4.0)]).unwrap();
    let x_star = problem.optimum().unwrap();
    Prepared {
        oracle: Box::new(problem),
        x_star,
        mixing: MixingMatrix::identity(1),
        manifest: Vec::new(),
    }
}

fn config(out: &Path) -> ExperimentConfig {
    let text = format!(
        "[problem]\nkind = quadratic\nnodes = 6\ndim = 3\nkappa = 50\nseed = 5\n\n\
         [network]\nkind = line\n\n\
         [methods]\nmethods = RGTA-3, RGTA-1, GD\nn_c = 1, 3\np = 0.4, 1\nalpha = 0.0078125\n\n\
         [budgets]\ngrad_evals = 3000\n\n\
         [output]\nseeds = 1, 2\nepsilon = 1e-3\nout_dir = {}\n",
        out.display()
    );
    ExperimentConfig::parse(&text).unwrap()
}

fn cell(method: Method) -> Cell {
    Cell { method, n_c: 1, p: 1.0 }
}

#[test]
fn tuning_picks_fastest_stable_step_on_scalar_problem() {
    let prep = scalar(2.0);
    let mut cfg = config(Path::new("unused"));
    cfg.alpha = None;
    cfg.seeds = vec![0];
    cfg.budgets = Budgets::gradients(50);
    let r = tune_cell(&prep, &cfg, cell(Method::Rgta(Variant::Three))).unwrap();
    assert_eq!(r.alpha, Some(0.5));
    assert_eq!(r.traces.len(), 1);

    cfg.tune_t = (3, 3);
    let r = tune_cell(&prep, &cfg, cell(Method::Rgta(Variant::Three))).unwrap();
    assert_eq!(r.alpha, Some(0.125));
}

#[test]
fn tuning_marks_cell_infeasible_when_every_step_diverges() {
    // L = 8: α = 1 and 1/2 expand the error by 7 and 3.
    let prep = scalar(8.0);
    let mut cfg = config(Path::new("unused"));
    cfg.tune_t = (0, 1);
    cfg.budgets = Budgets::gradients(30);
    let r = tune_cell(&prep, &cfg, cell(Method::Gd)).unwrap();
    assert_eq!(r.alpha, None);
    assert!(r.traces.is_empty());
}

#[test]
fn config_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path());
    let path = dir.path().join("exp.ini");
    std::fs::write(&path, cfg.to_ini_string()).unwrap();
    let loaded = ExperimentConfig::load(&path).unwrap();
    assert_eq!(loaded, cfg);
    assert_eq!(loaded.network, TopologyKind::Line);
    assert_eq!(loaded.scheme, WeightScheme::Metropolis);
    assert_eq!(loaded.problem, ProblemConfig::Quadratic(QuadraticSpec::new(6, 3, 50.0, 5)));
}

#[test]
fn run_then_aggregate_through_the_binary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg_path = dir.path().join("exp.ini");
    std::fs::write(&cfg_path, config(&out).to_ini_string()).unwrap();

    let status = rgta_bin().args(["run", "--config"]).arg(&cfg_path).output().unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));

    // Two tracking methods over 2 n_c × 2 p cells, GD once, two seeds each.
    let traces: Vec<_> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    assert_eq!(traces.len(), 2 * (2 * 4 + 1));
    assert!(out.join("RGTA-3_3_0.4_2.csv").exists());
    assert!(out.join("GD_1_1_1.csv").exists());
    let manifest = std::fs::read_to_string(out.join("manifest.txt")).unwrap();
    for key in ["beta", "kappa_achieved", "L", "mu"] {
        assert!(manifest.lines().any(|l| l.starts_with(&format!("{key} ="))), "{key} missing:\n{manifest}");
    }

    for p in &traces {
        let t = MetricsTrace::read_csv(p).unwrap();
        t.validate().unwrap();
        let name = p.file_stem().unwrap().to_str().unwrap();
        let n_c: u64 = name.split('_').nth(1).unwrap().parse().unwrap();
        if name.starts_with("RGTA") {
            assert_eq!(t.last().unwrap().comm_rounds, n_c * t.theta_count(), "{name}");
        }
    }

    let summary_path = dir.path().join("summary.csv");
    let agg = rgta_bin()
        .args(["aggregate", "--eps", "1e-3", "--dir"])
        .arg(&out)
        .arg("--out")
        .arg(&summary_path)
        .output()
        .unwrap();
    assert!(agg.status.success(), "{}", String::from_utf8_lossy(&agg.stderr));
    let text = std::fs::read_to_string(&summary_path).unwrap();
    assert_eq!(text.lines().count(), 1 + 9);
    let rows = aggregate_dir(&out, 1e-3, true).unwrap();
    assert!(rows.iter().all(|r| r.seeds == 2));
}

#[test]
fn analyze_writes_one_csv_per_beta() {
    let dir = tempfile::tempdir().unwrap();
    let out = rgta_bin()
        .args(["analyze", "--mu", "10", "--L", "1e5", "--beta", "0.6,0.8,0.9", "--sweep", "nc", "--eps"])
        .arg("0.3678794411714423")
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for b in ["0.6", "0.8", "0.9"] {
        let text = std::fs::read_to_string(dir.path().join(format!("sweep_nc_beta{b}.csv"))).unwrap();
        assert_eq!(text.lines().count(), 1 + 50 * 3);
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| rgta_bin().args(args).output().unwrap().status.code();
    assert_eq!(code(&["analyze", "--mu", "10", "--L", "1e5", "--beta", "", "--sweep", "nc"]), Some(2));
    assert_eq!(code(&["analyze", "--mu", "10", "--L", "1e5", "--beta", "0.5", "--sweep", "diagonal"]), Some(2));
    assert_eq!(code(&["analyze", "--mu", "1e6", "--L", "1e5", "--beta", "0.5", "--sweep", "nc"]), Some(2));
    assert_eq!(code(&["frobnicate"]), Some(2));
    let missing = dir.path().join("nope.ini");
    assert_eq!(code(&["run", "--config", missing.to_str().unwrap()]), Some(1));
    let bad = dir.path().join("bad.ini");
    let text = config(dir.path()).to_ini_string().replacen("[network]", "shape = round\n\n[network]", 1);
    let line = text.lines().position(|l| l.starts_with("shape")).unwrap() + 1;
    std::fs::write(&bad, &text).unwrap();
    let err = rgta_bin().args(["tune", "--config", bad.to_str().unwrap()]).output().unwrap();
    assert_eq!(err.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&err.stderr);
    assert!(stderr.contains(&format!("line {line}")) && stderr.contains("shape"), "{stderr}");
}
