//! LIBSVM / SVMlight text format.
//!
//! ```text
//! +1 3:1 11:1
//! -1 1:0.5 4:2
//! ```
//!
//! Feature indices are 1-based and strictly increasing within a line. Labels
//! are binary: `+1`/`1` map to `+1`, `-1`/`0` map to `-1`. Blank lines are
//! skipped; comments are not part of the accepted grammar.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::ops::Range;
use std::path::Path;

use crate::error::{Error, Result};

/// Labelled rows with sparse features stored in compressed-row form.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    labels: Vec<f64>,
    indptr: Vec<usize>,
    /// Zero-based feature columns.
    indices: Vec<u32>,
    values: Vec<f64>,
    dim: usize,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn label(&self, row: usize) -> f64 {
        self.labels[row]
    }

    /// Zero-based column indices and values of one row.
    pub fn row(&self, row: usize) -> (&[u32], &[f64]) {
        let r = self.indptr[row]..self.indptr[row + 1];
        (&self.indices[r.clone()], &self.values[r])
    }

    pub fn dense_row(&self, row: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        let (idx, val) = self.row(row);
        for (&j, &v) in idx.iter().zip(val) {
            out[j as usize] = v;
        }
        out
    }

    /// Builds a dataset from dense rows; zeros are dropped.
    pub fn from_dense(labels: Vec<f64>, rows: &[Vec<f64>]) -> Result<Self> {
        if labels.len() != rows.len() {
            return Err(Error::invalid("label count differs from row count"));
        }
        let dim = rows.first().map_or(0, Vec::len);
        let mut ds = Dataset {
            labels: Vec::with_capacity(rows.len()),
            indptr: vec![0],
            indices: Vec::new(),
            values: Vec::new(),
            dim,
        };
        for (label, row) in labels.into_iter().zip(rows) {
            if label != 1.0 && label != -1.0 {
                return Err(Error::invalid(format!("label {label} is not ±1")));
            }
            if row.len() != dim {
                return Err(Error::invalid("ragged rows"));
            }
            ds.labels.push(label);
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    ds.indices.push(j as u32);
                    ds.values.push(v);
                }
            }
            ds.indptr.push(ds.indices.len());
        }
        Ok(ds)
    }
}

fn parse_label(tok: &str, line: usize) -> Result<f64> {
    let v: f64 = tok.parse().map_err(|_| Error::Parse {
        line,
        message: format!("bad label `{tok}`"),
    })?;
    if v == 1.0 {
        Ok(1.0)
    } else if v == -1.0 || v == 0.0 {
        Ok(-1.0)
    } else {
        Err(Error::Parse {
            line,
            message: format!("label `{tok}` is not binary"),
        })
    }
}

/// Parses a LIBSVM stream. The feature dimension is `declared_dim` when given
/// (it must cover every index seen), otherwise the largest index present.
pub fn parse_libsvm<R: BufRead>(reader: R, declared_dim: Option<usize>) -> Result<Dataset> {
    let mut ds = Dataset {
        labels: Vec::new(),
        indptr: vec![0],
        indices: Vec::new(),
        values: Vec::new(),
        dim: 0,
    };
    let mut max_index = 0usize;
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        let mut tokens = line.split_ascii_whitespace();
        let Some(label) = tokens.next() else {
            continue;
        };
        ds.labels.push(parse_label(label, lineno)?);
        let mut last = 0usize;
        for tok in tokens {
            let malformed = || Error::Parse {
                line: lineno,
                message: format!("malformed feature `{tok}`"),
            };
            let (idx, val) = tok.split_once(':').ok_or_else(malformed)?;
            let idx: usize = idx.parse().map_err(|_| malformed())?;
            let val: f64 = val.parse().map_err(|_| malformed())?;
            if idx < 1 {
                return Err(Error::Parse {
                    line: lineno,
                    message: "feature index must be >= 1".into(),
                });
            }
            if idx <= last {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("feature index {idx} does not increase (previous {last})"),
                });
            }
            if !val.is_finite() {
                return Err(malformed());
            }
            last = idx;
            ds.indices.push((idx - 1) as u32);
            ds.values.push(val);
        }
        max_index = max_index.max(last);
        ds.indptr.push(ds.indices.len());
    }
    ds.dim = match declared_dim {
        Some(d) if d < max_index => {
            return Err(Error::invalid(format!(
                "declared dimension {d} is smaller than the largest feature index {max_index}"
            )))
        }
        Some(d) => d,
        None => max_index,
    };
    Ok(ds)
}

pub fn read_libsvm_file(path: &Path, declared_dim: Option<usize>) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_libsvm(BufReader::new(file), declared_dim)
}

/// Contiguous per-node row ranges in file order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetPartition {
    ranges: Vec<Range<usize>>,
}

impl DatasetPartition {
    pub fn ranges(&self) -> &[Range<usize>] {
        &self.ranges
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.ranges.iter().map(|r| r.len()).collect()
    }
}

/// Splits `rows` into `n` contiguous blocks; the first `rows % n` blocks get
/// one extra row.
pub fn partition(rows: usize, n: usize) -> Result<DatasetPartition> {
    if n == 0 {
        return Err(Error::invalid("node count must be positive"));
    }
    if n > rows {
        return Err(Error::invalid(format!("cannot split {rows} rows across {n} nodes")));
    }
    let (base, extra) = (rows / n, rows % n);
    let mut start = 0;
    let ranges = (0..n)
        .map(|i| {
            let len = base + usize::from(i < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect();
    Ok(DatasetPartition { ranges })
}
