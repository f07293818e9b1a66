//! LIBSVM sparse text format: `<label> <index>:<value> ...` with 1-based
//! indices. Unspecified features are zero.
//!
//! Parsing keeps raw numeric labels ([`SparseDataset`]); conversion to a
//! [`LabeledDataset`] maps labels in a caller-supplied positive set to `+1`
//! and everything else to `-1`.

use std::io::{BufRead, Write};

use ndarray::Array2;

use super::LabeledDataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SparseRow {
    pub label: f64,
    /// `(index, value)` with 1-based indices, in file order.
    pub entries: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseDataset {
    pub rows: Vec<SparseRow>,
}

impl SparseDataset {
    /// Largest feature index present, 0 when there are no entries.
    pub fn max_index(&self) -> usize {
        self.rows.iter().flat_map(|r| r.entries.iter().map(|e| e.0)).max().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Dense `(features, raw labels)`. `dim` overrides the inferred width;
    /// an entry beyond it is an error.
    pub fn to_dense(&self, dim: Option<usize>) -> Result<(Array2<f64>, Vec<f64>)> {
        let max = self.max_index();
        let d = match dim {
            Some(d) if max > d => return Err(Error::DimensionMismatch { expected: d, got: max }),
            Some(d) => d,
            None => max,
        };
        let mut x = Array2::zeros((self.rows.len(), d));
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in &row.entries {
                x[[i, j - 1]] = v;
            }
        }
        Ok((x, self.rows.iter().map(|r| r.label).collect()))
    }

    /// Sparse view of a dense dataset; zeros are omitted.
    pub fn from_labeled(ds: &LabeledDataset) -> Self {
        let rows = ds
            .features()
            .rows()
            .into_iter()
            .zip(ds.labels())
            .map(|(row, &y)| SparseRow {
                label: f64::from(y),
                entries: row.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, &v)| (j + 1, v)).collect(),
            })
            .collect();
        Self { rows }
    }
}

/// How raw labels map onto `+1` / `-1`, plus an optional width override.
#[derive(Debug, Clone, PartialEq)]
pub struct LibsvmOptions {
    pub positive_labels: Vec<f64>,
    pub dim: Option<usize>,
}

impl Default for LibsvmOptions {
    fn default() -> Self {
        Self { positive_labels: vec![1.0], dim: None }
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_line(text: &str, lineno: usize) -> Result<Option<SparseRow>> {
    let mut tokens = text.split_whitespace();
    let Some(label_tok) = tokens.next() else {
        return Ok(None);
    };
    let label: f64 = label_tok
        .parse()
        .map_err(|_| parse_err(lineno, format!("malformed label '{label_tok}'")))?;
    if !label.is_finite() {
        return Err(parse_err(lineno, format!("non-finite label '{label_tok}'")));
    }
    let mut entries = Vec::new();
    for tok in tokens {
        let (idx, val) = tok
            .split_once(':')
            .ok_or_else(|| parse_err(lineno, format!("malformed token '{tok}' (expected index:value)")))?;
        let idx: i64 = idx.parse().map_err(|_| parse_err(lineno, format!("malformed index in '{tok}'")))?;
        if idx <= 0 {
            return Err(parse_err(lineno, format!("index must be >= 1, got {idx}")));
        }
        let val: f64 = val.parse().map_err(|_| parse_err(lineno, format!("malformed value in '{tok}'")))?;
        if !val.is_finite() {
            return Err(parse_err(lineno, format!("non-finite value in '{tok}'")));
        }
        entries.push((idx as usize, val));
    }
    let mut seen: Vec<usize> = entries.iter().map(|e| e.0).collect();
    seen.sort_unstable();
    if let Some(w) = seen.windows(2).find(|w| w[0] == w[1]) {
        return Err(parse_err(lineno, format!("duplicate index {}", w[0])));
    }
    Ok(Some(SparseRow { label, entries }))
}

/// Parses LIBSVM text. Blank lines are skipped; errors carry the 1-based
/// line number.
pub fn parse_sparse<R: BufRead>(reader: R) -> Result<SparseDataset> {
    let mut rows = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if let Some(row) = parse_line(&line, i + 1)? {
            rows.push(row);
        }
    }
    Ok(SparseDataset { rows })
}

/// Parses LIBSVM text into a dense labeled dataset.
pub fn parse_libsvm<R: BufRead>(reader: R, opts: &LibsvmOptions, name: impl Into<String>) -> Result<LabeledDataset> {
    let sparse = parse_sparse(reader)?;
    let (x, raw) = sparse.to_dense(opts.dim)?;
    let labels = raw.iter().map(|l| if opts.positive_labels.contains(l) { 1 } else { -1 }).collect();
    LabeledDataset::new(x, labels, name)
}

fn write_label<W: Write>(w: &mut W, label: f64) -> std::io::Result<()> {
    if label == 1.0 {
        write!(w, "+1")
    } else {
        write!(w, "{label}")
    }
}

pub fn write_sparse<W: Write>(ds: &SparseDataset, mut w: W) -> Result<()> {
    for row in &ds.rows {
        write_label(&mut w, row.label)?;
        for (j, v) in &row.entries {
            write!(w, " {j}:{v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn write_libsvm<W: Write>(ds: &LabeledDataset, w: W) -> Result<()> {
    write_sparse(&SparseDataset::from_labeled(ds), w)
}
