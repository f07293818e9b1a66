//! File formats: PU training files, test files, saved models, and atomic
//! output.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};
use wmmd_pu::baselines::{CellResult, RbfExpansionModel, TadjModel};
use wmmd_pu::data::libsvm::{parse_sparse, SparseDataset};
use wmmd_pu::model_select::{apply_split, split_indices, GridRow, PriorSource};
use wmmd_pu::{KernelSpec, PuDataset};

/// Writes `path` through a temporary file in the same directory, so the
/// target either receives the complete output or is left untouched.
pub fn write_atomic<F>(path: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("cannot write to {}", dir.display()))?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        fill(&mut w)?;
        w.flush().with_context(|| format!("writing {}", path.display()))?;
    }
    tmp.persist(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(())
}

pub fn read_sparse(path: &Path) -> Result<SparseDataset> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    parse_sparse(BufReader::new(f)).with_context(|| format!("in {}", path.display()))
}

/// Splits a PU training file into positives (label +1) and unlabeled points
/// (label 0).
pub fn read_pu_file(path: &Path, dim: Option<usize>, pi_plus: Option<f64>) -> Result<PuDataset> {
    let sparse = read_sparse(path)?;
    if sparse.is_empty() {
        bail!("{} contains no rows", path.display());
    }
    let (x, labels) = sparse.to_dense(dim).with_context(|| format!("in {}", path.display()))?;
    let mut pos = Vec::new();
    let mut unl = Vec::new();
    for (i, &y) in labels.iter().enumerate() {
        if y == 1.0 {
            pos.push(i);
        } else if y == 0.0 {
            unl.push(i);
        } else {
            bail!(
                "{}: row {} has label {y}; training files use +1 for positives and 0 for unlabeled points",
                path.display(),
                i + 1
            );
        }
    }
    if pos.is_empty() || unl.is_empty() {
        bail!(
            "{} needs both positives (+1) and unlabeled rows (0); found {} and {}",
            path.display(),
            pos.len(),
            unl.len()
        );
    }
    Ok(PuDataset::new(x.select(Axis(0), &pos), x.select(Axis(0), &unl), pi_plus)?)
}

/// Where a WMMD model keeps its samples.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Samples {
    Embedded { positives: Array2<f64>, unlabeled: Array2<f64> },
    /// Re-derived from the training file with the recorded split.
    TrainingFile { path: PathBuf, split_seed: u64, split_fraction: f64, full: bool },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WmmdFile {
    pub kernel: KernelSpec,
    pub dim: usize,
    pub threshold_prior: f64,
    pub prior_source: PriorSource,
    pub samples: Samples,
    pub selection: Vec<GridRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExpansionFile {
    pub pi_plus: f64,
    pub prior_source: PriorSource,
    pub model: RbfExpansionModel,
    pub selection: Vec<CellResult>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum ModelFile {
    Wmmd(WmmdFile),
    Log(ExpansionFile),
    Dh(ExpansionFile),
    Tadj { model: TadjModel },
}

impl ModelFile {
    pub fn dim(&self) -> usize {
        match self {
            ModelFile::Wmmd(m) => m.dim,
            ModelFile::Log(m) | ModelFile::Dh(m) => m.model.dim(),
            ModelFile::Tadj { model } => model.classifier.dim(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
        serde_json::from_reader(BufReader::new(f)).with_context(|| format!("{} is not a model file", path.display()))
    }
}

impl WmmdFile {
    /// The `(positives, unlabeled)` samples the model scores against.
    pub fn samples(&self) -> Result<(Array2<f64>, Array2<f64>)> {
        match &self.samples {
            Samples::Embedded { positives, unlabeled } => Ok((positives.clone(), unlabeled.clone())),
            Samples::TrainingFile { path, split_seed, split_fraction, full } => {
                let data = read_pu_file(path, Some(self.dim), None)?;
                if *full {
                    let (p, u, _) = data.into_parts();
                    return Ok((p, u));
                }
                let idx = split_indices(data.n_positive(), data.n_unlabeled(), *split_fraction, *split_seed)?;
                let (train, _) = apply_split(&data, &idx)?;
                let (p, u, _) = train.into_parts();
                Ok((p, u))
            }
        }
    }
}
