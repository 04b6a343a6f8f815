use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DVector;

use super::state::StackedState;
use crate::error::{Error, Result};

pub const TRACE_HEADER: &str = "k,grad_evals,comm_rounds,opt_error,cons_error_x,cons_error_y,theta";

/// Metrics after iteration `k`. `theta` is the coin that produced this state;
/// the initial record has `theta = false`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Record {
    pub k: u64,
    pub grad_evals: u64,
    pub comm_rounds: u64,
    pub opt_error: f64,
    pub cons_error_x: f64,
    pub cons_error_y: f64,
    pub theta: bool,
}

impl Record {
    pub fn of(state: &StackedState, x_star: &DVector<f64>, theta: bool) -> Self {
        Record {
            k: state.k,
            grad_evals: state.grad_evals,
            comm_rounds: state.comm_rounds,
            opt_error: state.opt_error(x_star),
            cons_error_x: state.cons_error_x(),
            cons_error_y: state.cons_error_y(),
            theta,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.opt_error.is_finite() && self.cons_error_x.is_finite() && self.cons_error_y.is_finite()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetricsTrace {
    pub records: Vec<Record>,
    /// Set once any recorded metric is non-finite.
    pub diverged: bool,
}

fn parse_field<T: std::str::FromStr>(line: usize, name: &str, s: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("bad {name} `{s}`"),
    })
}

impl MetricsTrace {
    pub fn push(&mut self, record: Record) {
        if !record.is_finite() {
            self.diverged = true;
        }
        self.records.push(record);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn initial(&self) -> Option<&Record> {
        self.records.first()
    }

    pub fn last(&self) -> Option<&Record> {
        self.records.last()
    }

    /// First record with `opt_error ≤ eps`.
    pub fn first_reaching(&self, eps: f64) -> Option<&Record> {
        self.records.iter().find(|r| r.opt_error <= eps)
    }

    /// Last record with `grad_evals ≤ budget`.
    pub fn at_grad_budget(&self, budget: u64) -> Option<&Record> {
        self.records.iter().take_while(|r| r.grad_evals <= budget).last()
    }

    pub fn theta_count(&self) -> u64 {
        self.records.iter().skip(1).filter(|r| r.theta).count() as u64
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.records.len() + 1));
        out.push_str(TRACE_HEADER);
        out.push('\n');
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{:.16e},{:.16e},{:.16e},{}",
                r.k, r.grad_evals, r.comm_rounds, r.opt_error, r.cons_error_x, r.cons_error_y, r.theta as u8
            );
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        crate::harness::write_atomic(path, self.to_csv().as_bytes())
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == TRACE_HEADER => {}
            _ => {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("expected header `{TRACE_HEADER}`"),
                })
            }
        }
        let mut trace = MetricsTrace::default();
        for (i, line) in lines {
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 7 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected 7 fields, found {}", f.len()),
                });
            }
            let theta = match f[6].trim() {
                "0" => false,
                "1" => true,
                other => {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("bad theta `{other}`"),
                    })
                }
            };
            trace.push(Record {
                k: parse_field(line_no, "k", f[0])?,
                grad_evals: parse_field(line_no, "grad_evals", f[1])?,
                comm_rounds: parse_field(line_no, "comm_rounds", f[2])?,
                opt_error: parse_field(line_no, "opt_error", f[3])?,
                cons_error_x: parse_field(line_no, "cons_error_x", f[4])?,
                cons_error_y: parse_field(line_no, "cons_error_y", f[5])?,
                theta,
            });
        }
        trace.validate()?;
        Ok(trace)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(&text)
    }

    /// Counters must never decrease.
    pub fn validate(&self) -> Result<()> {
        for (i, w) in self.records.windows(2).enumerate() {
            if w[1].grad_evals < w[0].grad_evals || w[1].comm_rounds < w[0].comm_rounds || w[1].k <= w[0].k {
                return Err(Error::Parse {
                    line: i + 3,
                    message: "counters decrease".into(),
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(k: u64, err: f64, theta: bool) -> Record {
        Record {
            k,
            grad_evals: k + 1,
            comm_rounds: k,
            opt_error: err,
            cons_error_x: 0.1,
            cons_error_y: 1.0 / 3.0,
            theta,
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let mut t = MetricsTrace::default();
        t.push(rec(0, std::f64::consts::PI, false));
        t.push(rec(1, 1e-300, true));
        t.push(rec(2, f64::INFINITY, true));
        let text = t.to_csv();
        assert!(text.starts_with(TRACE_HEADER));
        let back = MetricsTrace::parse_csv(&text).unwrap();
        assert_eq!(back, t);
        assert!(back.diverged);
        assert_eq!(back.theta_count(), 2);
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(MetricsTrace::parse_csv("k,x\n").is_err());
        let bad = format!("{TRACE_HEADER}\n0,1,0,1,1,1,2\n");
        assert!(matches!(MetricsTrace::parse_csv(&bad), Err(Error::Parse { line: 2, .. })));
        let dec = format!("{TRACE_HEADER}\n0,2,0,1,1,1,0\n1,1,0,1,1,1,0\n");
        assert!(MetricsTrace::parse_csv(&dec).is_err());
    }

    #[test]
    fn lookups() {
        let mut t = MetricsTrace::default();
        for k in 0..5 {
            t.push(rec(k, 1.0 / (k + 1) as f64, k % 2 == 1));
        }
        assert_eq!(t.first_reaching(0.3).unwrap().k, 3);
        assert!(t.first_reaching(0.01).is_none());
        assert_eq!(t.at_grad_budget(3).unwrap().k, 2);
    }
}
