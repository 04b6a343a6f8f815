use std::path::PathBuf;

use super::io::write_atomic;
use crate::analysis::{default_alpha_grid, sweep, sweep_csv, ComplexityPoint, Constants, SweepAxis};
use crate::error::{Error, Result};
use crate::network::Variant;

/// `p` values used when none are given: 0.01 then every tenth up to one.
pub fn default_p_grid() -> Vec<f64> {
    let mut g = vec![0.01];
    g.extend((1..=10).map(|i| i as f64 / 10.0));
    g
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalyzeRequest {
    pub consts: Constants,
    pub betas: Vec<f64>,
    pub methods: Vec<Variant>,
    pub axis: SweepAxis,
    pub epsilon: f64,
    pub out_dir: PathBuf,
}

impl AnalyzeRequest {
    pub fn validate(&self) -> Result<()> {
        if self.betas.is_empty() {
            return Err(Error::invalid("at least one beta is required"));
        }
        if self.betas.iter().any(|b| !(0.0..=1.0).contains(b)) {
            return Err(Error::invalid("beta values must lie in [0, 1]"));
        }
        if self.methods.is_empty() {
            return Err(Error::invalid("at least one method is required"));
        }
        Ok(())
    }

    fn axis_name(&self) -> &'static str {
        match self.axis {
            SweepAxis::Nc { .. } => "nc",
            SweepAxis::P { .. } => "p",
        }
    }
}

/// Runs the sweep and writes one CSV per `β`. Returns the points in sweep
/// order together with the written paths.
pub fn analyze(req: &AnalyzeRequest) -> Result<(Vec<ComplexityPoint>, Vec<PathBuf>)> {
    req.validate()?;
    let grid = default_alpha_grid(req.consts.l);
    let points = sweep(&req.consts, &req.methods, &req.betas, &req.axis, req.epsilon, &grid)?;
    let mut files = Vec::new();
    for &beta in &req.betas {
        let rows: Vec<ComplexityPoint> = points.iter().filter(|p| p.beta == beta).copied().collect();
        let path = req.out_dir.join(format!("sweep_{}_beta{}.csv", req.axis_name(), beta));
        write_atomic(&path, sweep_csv(&rows).as_bytes())?;
        files.push(path);
    }
    Ok((points, files))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_one_file_per_beta() {
        let dir = tempfile::tempdir().unwrap();
        let req = AnalyzeRequest {
            consts: Constants {
                mu: 10.0,
                l: 1e5,
                n: 16,
            },
            betas: vec![0.6, 0.9],
            methods: Variant::ALL.to_vec(),
            axis: SweepAxis::Nc {
                p: 1.0,
                values: (1..=4).collect(),
            },
            epsilon: (-1f64).exp(),
            out_dir: dir.path().to_path_buf(),
        };
        let (points, files) = analyze(&req).unwrap();
        assert_eq!(points.len(), 24);
        assert_eq!(files.len(), 2);
        let text = std::fs::read_to_string(&files[0]).unwrap();
        assert_eq!(text.lines().count(), 13);
        assert!(files[1].ends_with("sweep_nc_beta0.9.csv"));
        let empty = AnalyzeRequest { betas: vec![], ..req };
        assert!(analyze(&empty).is_err());
    }

    #[test]
    fn p_grid() {
        let g = default_p_grid();
        assert_eq!(g.len(), 11);
        assert_eq!((g[0], g[10]), (0.01, 1.0));
    }
}
