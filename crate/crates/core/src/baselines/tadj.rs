//! Selected-completely-at-random adjustment: train a probabilistic classifier
//! to separate labeled positives from unlabeled points, estimate the labeling
//! frequency `c` on held-out positives, and rescale the classifier output by
//! `1 / c`.

use ndarray::{concatenate, Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::RngStream;
use crate::error::{Error, Result};
use crate::model_select::{pu_split, SelectionConfig, DEFAULT_SPLIT_FRACTION};
use crate::par::{self, Execution};
use crate::wmmd::PuDataset;

const MIN_LABEL_FREQUENCY: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TadjConfig {
    /// Inverse regularization strengths tried by cross-validation.
    pub c_grid: Vec<f64>,
    pub folds: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub tolerance: f64,
    pub split_fraction: f64,
    pub seed: u64,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for TadjConfig {
    fn default() -> Self {
        Self {
            c_grid: vec![0.01, 0.1, 1.0, 10.0, 100.0],
            folds: 5,
            epochs: 500,
            learning_rate: 0.1,
            tolerance: 1e-8,
            split_fraction: DEFAULT_SPLIT_FRACTION,
            seed: 0,
            execution: Execution::default(),
        }
    }
}

/// L2-regularized logistic regression with an unpenalized bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `-ln sigmoid(z)` without overflow.
fn neg_log_sigmoid(z: f64) -> f64 {
    if z > 0.0 {
        (-z).exp().ln_1p()
    } else {
        -z + z.exp().ln_1p()
    }
}

impl LogisticModel {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    fn logit(&self, x: ArrayView1<'_, f64>) -> f64 {
        x.iter().zip(&self.weights).map(|(a, w)| a * w).sum::<f64>() + self.bias
    }

    pub fn probability(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(sigmoid(self.logit(ArrayView1::from(x))))
    }

    /// Mean negative log-likelihood of 0/1 targets.
    pub fn log_loss(&self, x: ArrayView2<'_, f64>, y: &[f64]) -> f64 {
        let total: f64 = x
            .rows()
            .into_iter()
            .zip(y)
            .map(|(row, &t)| {
                let z = self.logit(row);
                t * neg_log_sigmoid(z) + (1.0 - t) * neg_log_sigmoid(-z)
            })
            .sum();
        total / y.len() as f64
    }
}

/// Minimizes `mean log-loss + |w|^2 / (2 C n)` by full-batch gradient descent,
/// stopping early once the objective changes by less than `tolerance`.
pub fn fit_logistic(x: ArrayView2<'_, f64>, y: &[f64], c: f64, cfg: &TadjConfig) -> Result<LogisticModel> {
    if x.nrows() == 0 || x.nrows() != y.len() {
        return Err(Error::InvalidParameter(format!("{} rows but {} targets", x.nrows(), y.len())));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!("C must be positive, got {c}")));
    }
    let x = x.as_standard_layout();
    let d = x.ncols();
    let rows = x.as_slice().unwrap();
    let n = y.len() as f64;
    let penalty = 1.0 / (c * n);
    let mut w = vec![0.0; d];
    let mut bias = 0.0;
    let mut grad = vec![0.0; d];
    let mut prev = f64::INFINITY;
    for epoch in 1..=cfg.epochs {
        // one pass: objective at the current iterate and its gradient
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut grad_b = 0.0;
        let mut loss = 0.0;
        for (row, &t) in rows.chunks_exact(d).zip(y) {
            let z = row.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + bias;
            let e = (-z.abs()).exp();
            let p = if z >= 0.0 { 1.0 / (1.0 + e) } else { e / (1.0 + e) };
            // -ln sigmoid(+-z) = max(0, -+z) + ln(1 + e^{-|z|})
            let soft = e.ln_1p();
            loss += t * ((-z).max(0.0) + soft) + (1.0 - t) * (z.max(0.0) + soft);
            let r = p - t;
            grad_b += r;
            for (g, a) in grad.iter_mut().zip(row) {
                *g += r * a;
            }
        }
        let norm: f64 = w.iter().map(|v| v * v).sum();
        let objective = loss / n + 0.5 * penalty * norm;
        if !objective.is_finite() || !grad_b.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Diverged { epoch });
        }
        if (prev - objective).abs() < cfg.tolerance {
            break;
        }
        prev = objective;
        for (wi, gi) in w.iter_mut().zip(&grad) {
            *wi -= cfg.learning_rate * (gi / n + penalty * *wi);
        }
        bias -= cfg.learning_rate * grad_b / n;
    }
    Ok(LogisticModel { weights: w, bias })
}

/// A labeled-vs-unlabeled classifier rescaled by the label frequency `c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TadjModel {
    pub classifier: LogisticModel,
    /// Estimated `P(labeled | positive)`.
    pub c: f64,
    /// Inverse regularization strength chosen by cross-validation.
    pub c_reg: f64,
}

impl TadjModel {
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        Ok(self.classifier.probability(x)? / self.c)
    }

    pub fn score_batch(&self, points: ArrayView2<'_, f64>, exec: Execution) -> Result<Vec<f64>> {
        let pts = points.as_standard_layout();
        par::try_map_range(exec, pts.nrows(), |i| self.score(pts.row(i).as_slice().unwrap()))
    }

    pub fn label_for(score: f64) -> i8 {
        if score > 0.5 {
            1
        } else {
            -1
        }
    }
}

fn cv_log_loss(x: ArrayView2<'_, f64>, y: &[f64], c: f64, cfg: &TadjConfig) -> Result<f64> {
    let n = y.len();
    let folds = cfg.folds.clamp(2, n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut RngStream::new(cfg.seed, 1).rng());
    let mut total = 0.0;
    for f in 0..folds {
        let (held, kept): (Vec<usize>, Vec<usize>) = (0..n).partition(|i| i % folds == f);
        let held: Vec<usize> = held.into_iter().map(|i| order[i]).collect();
        let kept: Vec<usize> = kept.into_iter().map(|i| order[i]).collect();
        let pick = |idx: &[usize]| idx.iter().map(|&i| y[i]).collect::<Vec<f64>>();
        let model = fit_logistic(x.select(Axis(0), &kept).view(), &pick(&kept), c, cfg)?;
        total += model.log_loss(x.select(Axis(0), &held).view(), &pick(&held)) * held.len() as f64;
    }
    Ok(total / n as f64)
}

pub fn fit_tadj(data: &PuDataset, cfg: &TadjConfig) -> Result<TadjModel> {
    if cfg.c_grid.is_empty() || cfg.folds < 2 {
        return Err(Error::InvalidParameter("tADJ needs a non-empty C grid and at least 2 folds".into()));
    }
    let split_cfg = SelectionConfig {
        split_fraction: cfg.split_fraction,
        seed: cfg.seed,
        ..SelectionConfig::default()
    };
    let (train, valid) = pu_split(data, &split_cfg)?;
    let x: Array2<f64> = concatenate(Axis(0), &[train.positives(), train.unlabeled()]).unwrap();
    let y: Vec<f64> = std::iter::repeat_n(1.0, train.n_positive())
        .chain(std::iter::repeat_n(0.0, train.n_unlabeled()))
        .collect();

    let losses = par::try_map_range(cfg.execution, cfg.c_grid.len(), |i| cv_log_loss(x.view(), &y, cfg.c_grid[i], cfg))?;
    let best = (0..losses.len()).min_by(|&a, &b| losses[a].total_cmp(&losses[b]).then(a.cmp(&b))).unwrap();
    let c_reg = cfg.c_grid[best];
    let classifier = fit_logistic(x.view(), &y, c_reg, cfg)?;

    let probs: Vec<f64> = valid
        .positives()
        .rows()
        .into_iter()
        .map(|r| classifier.probability(r.as_slice().unwrap()))
        .collect::<Result<_>>()?;
    let c = (probs.iter().sum::<f64>() / probs.len() as f64).max(MIN_LABEL_FREQUENCY);
    Ok(TadjModel { classifier, c, c_reg })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synthetic::Generator;

    #[test]
    fn rescaled_score_at_boundary() {
        // g = 0.7 and c = 0.7 gives s = 1.0, which is well above 1/2.
        let m = TadjModel {
            classifier: LogisticModel { weights: vec![0.0], bias: (0.7f64 / 0.3).ln() },
            c: 0.7,
            c_reg: 1.0,
        };
        let s = m.score(&[3.0]).unwrap();
        assert!((s - 1.0).abs() < 1e-12);
        assert_eq!(TadjModel::label_for(s), 1);
        assert_eq!(TadjModel::label_for(0.5), -1);
    }

    #[test]
    fn score_ranking_unaffected_by_c() {
        let clf = LogisticModel { weights: vec![1.5, -0.5], bias: 0.2 };
        let a = TadjModel { classifier: clf.clone(), c: 0.3, c_reg: 1.0 };
        let b = TadjModel { classifier: clf, c: 0.9, c_reg: 1.0 };
        let pts = Array2::from_shape_fn((20, 2), |(i, j)| ((i * 7 + j * 3) % 11) as f64 - 5.0);
        let sa = a.score_batch(pts.view(), Execution::Sequential).unwrap();
        let sb = b.score_batch(pts.view(), Execution::Sequential).unwrap();
        for i in 0..20 {
            for j in 0..20 {
                assert_eq!(sa[i] < sa[j], sb[i] < sb[j]);
            }
        }
    }

    #[test]
    fn logistic_fit_separates_shifted_classes() {
        let mut rng = RngStream::new(5, 0).rng();
        let pos = Generator::Gaussian.sample_class(100, 1, &mut rng);
        let neg = Generator::Gaussian.sample_class(100, -1, &mut rng);
        let x = concatenate(Axis(0), &[pos.view(), neg.view()]).unwrap();
        let y: Vec<f64> = (0..200).map(|i| if i < 100 { 1.0 } else { 0.0 }).collect();
        let m = fit_logistic(x.view(), &y, 10.0, &TadjConfig::default()).unwrap();
        assert!(m.weights.iter().all(|w| *w > 0.0));
        assert!(m.log_loss(x.view(), &y) < std::f64::consts::LN_2);
    }

    #[test]
    fn logistic_objective_decreases_with_regularization_tradeoff() {
        let x = Array2::from_shape_vec((4, 1), vec![-2.0, -1.0, 1.0, 2.0]).unwrap();
        let y = [0.0, 0.0, 1.0, 1.0];
        let weak = fit_logistic(x.view(), &y, 100.0, &TadjConfig::default()).unwrap();
        let strong = fit_logistic(x.view(), &y, 0.01, &TadjConfig::default()).unwrap();
        assert!(weak.weights[0] > strong.weights[0]);
    }

    #[test]
    fn fit_tadj_end_to_end() {
        let mut rng = RngStream::new(8, 0).rng();
        let p = Generator::Gaussian.sample_class(60, 1, &mut rng);
        let u = Generator::Gaussian.sample(200, 0.5, &mut rng).unwrap();
        let data = PuDataset::new(p, u.features().to_owned(), None).unwrap();
        let m = fit_tadj(&data, &TadjConfig::default()).unwrap();
        assert!(m.c > 0.0 && m.c <= 1.0);
        assert!(TadjConfig::default().c_grid.contains(&m.c_reg));
        assert!(m.score(&[1.0, 1.0]).unwrap() > m.score(&[-1.0, -1.0]).unwrap());
    }
}
