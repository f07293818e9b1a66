use std::io::{BufRead, Write};

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::kernel::check_finite;

/// Dense features with `+1` / `-1` labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: Array2<f64>,
    labels: Vec<i8>,
    name: String,
}

impl LabeledDataset {
    pub fn new(features: Array2<f64>, labels: Vec<i8>, name: impl Into<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Empty("labeled dataset"));
        }
        if features.nrows() != labels.len() {
            return Err(Error::DimensionMismatch { expected: labels.len(), got: features.nrows() });
        }
        if let Some(bad) = labels.iter().find(|&&y| y != 1 && y != -1) {
            return Err(Error::InvalidParameter(format!("labels must be +1 or -1, got {bad}")));
        }
        let features = features.as_standard_layout().into_owned();
        check_finite(features.as_slice().unwrap(), "features")?;
        Ok(Self { features, labels, name: name.into() })
    }

    pub fn features(&self) -> ArrayView2<'_, f64> {
        self.features.view()
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn n_positive(&self) -> usize {
        self.labels.iter().filter(|&&y| y == 1).count()
    }

    /// Empirical fraction of `+1` labels.
    pub fn positive_fraction(&self) -> f64 {
        self.n_positive() as f64 / self.len() as f64
    }

    /// Rows with the given label, in order.
    pub fn rows_with_label(&self, label: i8) -> Array2<f64> {
        let idx: Vec<usize> = (0..self.len()).filter(|&i| self.labels[i] == label).collect();
        self.select(&idx)
    }

    pub(crate) fn select(&self, idx: &[usize]) -> Array2<f64> {
        self.features.select(ndarray::Axis(0), idx)
    }

    /// Dense CSV dump with header `label,f1,...,fd`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "label")?;
        for j in 1..=self.dim() {
            write!(w, ",f{j}")?;
        }
        writeln!(w)?;
        for (row, y) in self.features.rows().into_iter().zip(&self.labels) {
            write!(w, "{y}")?;
            for v in row {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Reads the format written by [`write_csv`](Self::write_csv).
    pub fn read_csv<R: BufRead>(r: R, name: impl Into<String>) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let header = match lines.next() {
            Some((_, line)) => line?,
            None => return Err(Error::Parse { line: 1, message: "missing header".into() }),
        };
        let cols: Vec<&str> = header.trim().split(',').collect();
        if cols.first() != Some(&"label") {
            return Err(Error::Parse { line: 1, message: "header must start with 'label'".into() });
        }
        let d = cols.len() - 1;
        let mut labels = Vec::new();
        let mut flat = Vec::new();
        for (i, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let lineno = i + 1;
            let fields: Vec<&str> = line.trim().split(',').collect();
            if fields.len() != d + 1 {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("expected {} fields, found {}", d + 1, fields.len()),
                });
            }
            let y: i8 = fields[0]
                .parse()
                .map_err(|_| Error::Parse { line: lineno, message: format!("bad label '{}'", fields[0]) })?;
            labels.push(y);
            for f in &fields[1..] {
                let v: f64 = f
                    .parse()
                    .map_err(|_| Error::Parse { line: lineno, message: format!("bad value '{f}'") })?;
                flat.push(v);
            }
        }
        let features = Array2::from_shape_vec((labels.len(), d), flat).expect("row lengths checked");
        Self::new(features, labels, name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn rejects_bad_labels_and_values() {
        assert!(LabeledDataset::new(array![[1.0]], vec![0], "x").is_err());
        assert!(LabeledDataset::new(array![[f64::INFINITY]], vec![1], "x").is_err());
        assert!(LabeledDataset::new(array![[1.0], [2.0]], vec![1], "x").is_err());
        assert!(LabeledDataset::new(Array2::zeros((0, 1)), vec![], "x").is_err());
    }

    #[test]
    fn csv_round_trip() {
        let ds = LabeledDataset::new(array![[0.5, -1.25], [0.0, 3.0]], vec![1, -1], "t").unwrap();
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("label,f1,f2\n1,0.5,-1.25\n"));
        let back = LabeledDataset::read_csv(buf.as_slice(), "t").unwrap();
        assert_eq!(back, ds);
    }
}
