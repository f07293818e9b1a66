//! Holdout splitting, grid search over the kernel parameter by the PU
//! validation risk, and density-based class-prior estimation.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::RngStream;
use crate::error::{Error, Result};
use crate::kernel::{KernelFamily, KernelSpec};
use crate::par::{self, Execution};
use crate::wmmd::{check_prior, PuDataset, WmmdModel};

pub const DEFAULT_GAMMA_GRID: [f64; 5] = [1.0, 0.4, 0.2, 0.1, 0.05];
pub const DEFAULT_SPLIT_FRACTION: f64 = 0.8;
pub const DEFAULT_ETA: f64 = 0.1;
/// Prior estimates are clipped to `[PRIOR_CLIP, 1 - PRIOR_CLIP]`.
pub const PRIOR_CLIP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    pub gamma_grid: Vec<f64>,
    pub split_fraction: f64,
    pub eta: f64,
    pub seed: u64,
    /// Refit the selected model on train + validation. Off by default.
    pub refit_full: bool,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            gamma_grid: DEFAULT_GAMMA_GRID.to_vec(),
            split_fraction: DEFAULT_SPLIT_FRACTION,
            eta: DEFAULT_ETA,
            seed: 0,
            refit_full: false,
            execution: Execution::default(),
        }
    }
}

impl SelectionConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.gamma_grid.is_empty() {
            return Err(Error::InvalidParameter("gamma grid is empty".into()));
        }
        if let Some(g) = self.gamma_grid.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
            return Err(Error::InvalidParameter(format!("gamma grid entries must be positive, got {g}")));
        }
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return Err(Error::InvalidParameter(format!("split fraction must lie in (0, 1), got {}", self.split_fraction)));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::InvalidParameter(format!("eta must lie in (0, 1), got {}", self.eta)));
        }
        Ok(())
    }
}

/// Train / validation sizes for `n` items: `floor(n * fraction)` to train,
/// with at least one item on each side.
pub fn split_sizes(n: usize, fraction: f64) -> (usize, usize) {
    let train = ((n as f64 * fraction).floor() as usize).clamp(1, n - 1);
    (train, n - train)
}

/// Index partition produced by [`pu_split`], relative to the input rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train_positives: Vec<usize>,
    pub valid_positives: Vec<usize>,
    pub train_unlabeled: Vec<usize>,
    pub valid_unlabeled: Vec<usize>,
}

pub fn split_indices(n_p: usize, n_u: usize, fraction: f64, seed: u64) -> Result<SplitIndices> {
    if n_p < 2 || n_u < 2 {
        return Err(Error::InsufficientSamples(format!(
            "need at least 2 positives and 2 unlabeled to split, got {n_p} and {n_u}"
        )));
    }
    let mut rng = RngStream::new(seed, 0).rng();
    let mut p: Vec<usize> = (0..n_p).collect();
    let mut u: Vec<usize> = (0..n_u).collect();
    p.shuffle(&mut rng);
    u.shuffle(&mut rng);
    let (tp, _) = split_sizes(n_p, fraction);
    let (tu, _) = split_sizes(n_u, fraction);
    let valid_positives = p.split_off(tp);
    let valid_unlabeled = u.split_off(tu);
    Ok(SplitIndices { train_positives: p, valid_positives, train_unlabeled: u, valid_unlabeled })
}

/// Random holdout split, applied separately to positives and unlabeled.
pub fn pu_split(data: &PuDataset, cfg: &SelectionConfig) -> Result<(PuDataset, PuDataset)> {
    cfg.validate()?;
    let idx = split_indices(data.n_positive(), data.n_unlabeled(), cfg.split_fraction, cfg.seed)?;
    apply_split(data, &idx)
}

pub fn apply_split(data: &PuDataset, idx: &SplitIndices) -> Result<(PuDataset, PuDataset)> {
    let ax = ndarray::Axis(0);
    let train = PuDataset::new(
        data.positives().select(ax, &idx.train_positives),
        data.unlabeled().select(ax, &idx.train_unlabeled),
        data.pi_plus(),
    )?;
    let valid = PuDataset::new(
        data.positives().select(ax, &idx.valid_positives),
        data.unlabeled().select(ax, &idx.valid_unlabeled),
        data.pi_plus(),
    )?;
    Ok((train, valid))
}

/// `-pi + 2 pi (fraction of positives not +1) + (fraction of unlabeled not -1)`.
pub fn risk_from_predictions(pos_preds: &[i8], unl_preds: &[i8], pi_plus: f64) -> f64 {
    let miss_p = pos_preds.iter().filter(|&&y| y != 1).count() as f64 / pos_preds.len() as f64;
    let miss_u = unl_preds.iter().filter(|&&y| y != -1).count() as f64 / unl_preds.len() as f64;
    -pi_plus + 2.0 * pi_plus * miss_p + miss_u
}

/// PU estimate of the misclassification rate of `model` on a held-out split.
pub fn validation_risk(model: &WmmdModel, valid: &PuDataset, pi_plus: f64) -> Result<f64> {
    check_prior(pi_plus)?;
    let pos = model.classify_batch(valid.positives())?;
    let unl = model.classify_batch(valid.unlabeled())?;
    Ok(risk_from_predictions(&pos, &unl, pi_plus))
}

/// Density-based prior estimate from inverse scores `1/score` of held-out
/// positives: the `(k+1)`-th smallest with `k = floor(eta * m)`, clipped
/// into `(0, 1)`.
pub fn estimate_prior_from_inverse_scores(inverse_scores: &[f64], eta: f64) -> Result<f64> {
    if inverse_scores.is_empty() {
        return Err(Error::Empty("validation positives"));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidParameter(format!("eta must lie in (0, 1), got {eta}")));
    }
    let mut s = inverse_scores.to_vec();
    s.sort_by(f64::total_cmp);
    let k = (eta * s.len() as f64).floor() as usize;
    Ok(s[k.min(s.len() - 1)].clamp(PRIOR_CLIP, 1.0 - PRIOR_CLIP))
}

pub fn estimate_prior(model: &WmmdModel, valid_positives: ndarray::ArrayView2<'_, f64>, eta: f64) -> Result<f64> {
    if valid_positives.nrows() == 0 {
        return Err(Error::Empty("validation positives"));
    }
    let inv: Vec<f64> = model.score_batch(valid_positives)?.iter().map(|s| 1.0 / s).collect();
    estimate_prior_from_inverse_scores(&inv, eta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PriorSource {
    Known,
    DensityBased,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub gamma: f64,
    pub risk: f64,
    /// Prior used for the cutoff and the risk of this candidate.
    pub pi_plus: f64,
}

#[derive(Debug, Clone)]
pub struct Selection {
    pub model: WmmdModel,
    pub table: Vec<GridRow>,
    pub prior_source: PriorSource,
    pub train: PuDataset,
    pub valid: PuDataset,
}

impl Selection {
    pub fn gamma(&self) -> f64 {
        self.model.kernel().gamma()
    }

    pub fn pi_hat(&self) -> Option<f64> {
        match self.prior_source {
            PriorSource::Known => None,
            PriorSource::DensityBased => Some(self.model.threshold_prior()),
        }
    }
}

/// Index of the smallest risk; equal risks resolve to the larger gamma.
fn argmin(table: &[GridRow]) -> usize {
    let mut best = 0;
    for (i, row) in table.iter().enumerate().skip(1) {
        let b = &table[best];
        if row.risk < b.risk || (row.risk == b.risk && row.gamma > b.gamma) {
            best = i;
        }
    }
    best
}

/// Prior estimate from the validation positives, using the narrowest kernel
/// on the grid. Wider kernels smooth the density ratio towards 1 and bias
/// the estimate upwards.
pub fn estimate_prior_on_grid(
    train: &PuDataset,
    valid: &PuDataset,
    cfg: &SelectionConfig,
    family: KernelFamily,
) -> Result<f64> {
    let gamma = cfg.gamma_grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scorer = WmmdModel::new(KernelSpec::new(family, gamma)?, train, 0.5)?;
    estimate_prior(&scorer, valid.positives(), cfg.eta)
}

/// Fits one candidate per gamma on the training split and keeps the one with
/// the lowest validation risk.
///
/// Without a known prior (`data.pi_plus()` unset) the prior is first
/// estimated by [`estimate_prior_on_grid`] and then used as if known.
pub fn grid_search(data: &PuDataset, cfg: &SelectionConfig, family: KernelFamily) -> Result<Selection> {
    cfg.validate()?;
    let (train, valid) = pu_split(data, cfg)?;
    let (pi, prior_source) = match data.pi_plus() {
        Some(p) => (p, PriorSource::Known),
        None => (estimate_prior_on_grid(&train, &valid, cfg, family)?, PriorSource::DensityBased),
    };
    let rows = par::try_map_range(cfg.execution, cfg.gamma_grid.len(), |i| -> Result<GridRow> {
        let gamma = cfg.gamma_grid[i];
        let model = WmmdModel::new(KernelSpec::new(family, gamma)?, &train, pi)?;
        let pos = model.classify_batch_with(valid.positives(), Execution::Sequential)?;
        let unl = model.classify_batch_with(valid.unlabeled(), Execution::Sequential)?;
        Ok(GridRow { gamma, risk: risk_from_predictions(&pos, &unl, pi), pi_plus: pi })
    })?;
    let best = rows[argmin(&rows)];
    let spec = KernelSpec::new(family, best.gamma)?;
    let fit_on = if cfg.refit_full { data } else { &train };
    let model = WmmdModel::new(spec, fit_on, pi)?;
    Ok(Selection { model, table: rows, prior_source, train, valid })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synthetic::Generator;
    use ndarray::{array, Array2};

    fn dataset(n_p: usize, n_u: usize, pi: Option<f64>, seed: u64) -> PuDataset {
        let mut rng = RngStream::new(seed, 0).rng();
        let p = Generator::Gaussian.sample_class(n_p, 1, &mut rng);
        let u = Generator::Gaussian.sample(n_u, 0.5, &mut rng).unwrap();
        PuDataset::new(p, u.features().to_owned(), pi).unwrap()
    }

    #[test]
    fn split_sizes_follow_floor_and_minimum() {
        assert_eq!(split_sizes(10, 0.8), (8, 2));
        assert_eq!(split_sizes(100, 0.8), (80, 20));
        assert_eq!(split_sizes(2, 0.8), (1, 1));
        assert_eq!(split_sizes(3, 0.1), (1, 2));
    }

    #[test]
    fn split_is_deterministic_and_partitions() {
        let data = dataset(10, 100, Some(0.5), 1);
        let cfg = SelectionConfig::default().with_seed(42);
        let (t, v) = pu_split(&data, &cfg).unwrap();
        assert_eq!((t.n_positive(), t.n_unlabeled()), (8, 80));
        assert_eq!((v.n_positive(), v.n_unlabeled()), (2, 20));
        let a = split_indices(10, 100, 0.8, 42).unwrap();
        let b = split_indices(10, 100, 0.8, 42).unwrap();
        assert_eq!(a, b);
        let mut all = a.train_positives.clone();
        all.extend(&a.valid_positives);
        all.sort();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        assert!(split_indices(1, 10, 0.8, 0).is_err());
    }

    #[test]
    fn risk_arithmetic() {
        assert_eq!(risk_from_predictions(&[1, 1], &[-1, -1, -1], 0.5), -0.5);
        assert_eq!(risk_from_predictions(&[-1, -1], &[1, 1], 0.5), 1.5);
        assert_eq!(risk_from_predictions(&[1, -1], &[-1, -1], 0.5), 0.0);
    }

    #[test]
    fn prior_from_order_statistic() {
        let inv: Vec<f64> = (2..=11).map(|i| i as f64 / 10.0).rev().collect();
        assert_eq!(estimate_prior_from_inverse_scores(&inv, 0.1).unwrap(), 0.3);
        assert_eq!(estimate_prior_from_inverse_scores(&[1.0, 2.0, 5.0], 0.1).unwrap(), 1.0 - PRIOR_CLIP);
        assert_eq!(estimate_prior_from_inverse_scores(&[0.42], 0.1).unwrap(), 0.42);
        assert_eq!(estimate_prior_from_inverse_scores(&[0.0], 0.1).unwrap(), PRIOR_CLIP);
        assert!(estimate_prior_from_inverse_scores(&[], 0.1).is_err());
    }

    #[test]
    fn prior_is_supremum_of_constraint_set() {
        // brute force: largest candidate t (from a fine grid) with F(t) <= eta
        let inv = [0.35, 0.9, 0.12, 0.5, 0.77, 0.61, 0.2, 0.44, 0.3, 0.83, 0.28, 0.66];
        let eta = 0.2;
        let est = estimate_prior_from_inverse_scores(&inv, eta).unwrap();
        let frac = |t: f64| inv.iter().filter(|&&s| s <= t).count() as f64 / inv.len() as f64;
        let sup = (1..100_000).map(|i| i as f64 / 100_000.0).filter(|&t| frac(t) <= eta).fold(0.0, f64::max);
        assert!((sup - est).abs() <= 2e-5, "{sup} vs {est}");
        assert!(frac(est) > eta);
    }

    #[test]
    fn prior_invariant_to_common_rescaling() {
        let means_p = [0.2, 0.05, 0.4, 0.33, 0.1];
        let means_u = [0.3, 0.2, 0.25, 0.5, 0.4];
        let inv = |c: f64| -> Vec<f64> { means_u.iter().zip(&means_p).map(|(u, p)| (c * u) / (c * p)).collect() };
        let base = estimate_prior_from_inverse_scores(&inv(1.0), 0.1).unwrap();
        for c in [1e-3, 0.5, 7.0] {
            assert!((estimate_prior_from_inverse_scores(&inv(c), 0.1).unwrap() - base).abs() < 1e-12);
        }
    }

    #[test]
    fn singleton_grid_returns_its_gamma() {
        let data = dataset(20, 60, Some(0.5), 2);
        let cfg = SelectionConfig { gamma_grid: vec![0.37], ..SelectionConfig::default() };
        let s = grid_search(&data, &cfg, KernelFamily::Gaussian).unwrap();
        assert_eq!(s.gamma(), 0.37);
        assert_eq!(s.table.len(), 1);
    }

    #[test]
    fn tie_prefers_larger_gamma() {
        let rows = [
            GridRow { gamma: 0.1, risk: 0.2, pi_plus: 0.5 },
            GridRow { gamma: 1.0, risk: 0.2, pi_plus: 0.5 },
            GridRow { gamma: 0.4, risk: 0.3, pi_plus: 0.5 },
        ];
        assert_eq!(argmin(&rows), 1);
        let mut rev = rows;
        rev.reverse();
        assert_eq!(rev[argmin(&rev)].gamma, 1.0);
    }

    #[test]
    fn grid_search_argmin_and_membership() {
        let data = dataset(100, 400, Some(0.5), 3);
        let cfg = SelectionConfig::default().with_seed(5);
        let s = grid_search(&data, &cfg, KernelFamily::Gaussian).unwrap();
        assert!(cfg.gamma_grid.contains(&s.gamma()));
        assert_eq!(s.table.len(), cfg.gamma_grid.len());
        let best = validation_risk(&s.model, &s.valid, 0.5).unwrap();
        for row in &s.table {
            let m = WmmdModel::new(KernelSpec::gaussian(row.gamma).unwrap(), &s.train, 0.5).unwrap();
            let r = validation_risk(&m, &s.valid, 0.5).unwrap();
            assert_eq!(r, row.risk);
            assert!(best <= r);
        }
        // better than predicting everything negative, whose risk is pi
        assert!(best < 0.5, "risk {best}");
    }

    #[test]
    fn grid_search_sequential_matches_parallel() {
        let data = dataset(30, 90, None, 4);
        let seq = SelectionConfig { execution: Execution::Sequential, ..SelectionConfig::default() };
        let par = SelectionConfig { execution: Execution::Parallel, ..SelectionConfig::default() };
        let a = grid_search(&data, &seq, KernelFamily::Inverse).unwrap();
        let b = grid_search(&data, &par, KernelFamily::Inverse).unwrap();
        assert_eq!(a.table, b.table);
        assert_eq!(a.model, b.model);
        assert_eq!(a.prior_source, PriorSource::DensityBased);
        let pi = a.pi_hat().unwrap();
        assert!(pi > 0.0 && pi < 1.0);
        let narrow = WmmdModel::new(KernelSpec::inverse(1.0).unwrap(), &a.train, 0.5).unwrap();
        assert_eq!(pi, estimate_prior(&narrow, a.valid.positives(), 0.1).unwrap());
        assert!(a.table.iter().all(|r| r.pi_plus == pi));
    }

    #[test]
    fn refit_full_uses_all_rows() {
        let data = dataset(20, 50, Some(0.4), 6);
        let cfg = SelectionConfig { refit_full: true, ..SelectionConfig::default() };
        let s = grid_search(&data, &cfg, KernelFamily::Gaussian).unwrap();
        assert_eq!(s.model.positives().nrows(), 20);
        assert_eq!(s.model.unlabeled().nrows(), 50);
    }

    #[test]
    fn prior_needs_validation_positives() {
        let data = PuDataset::new(array![[0.0]], array![[1.0]], None).unwrap();
        let m = WmmdModel::new(KernelSpec::gaussian(1.0).unwrap(), &data, 0.5).unwrap();
        assert!(estimate_prior(&m, Array2::zeros((0, 1)).view(), 0.1).is_err());
    }
}
