//! PU risk minimization over Gaussian kernel expansions
//! `g(x) = sum_i alpha_i exp(-gamma |x - c_i|^2) + b`, with the centers at
//! the training points. The empirical risk with a linear-odd loss `l` is
//!
//! ```text
//! J(alpha, b) = -pi mean_p(alpha'phi(x) + b) + mean_u l(-alpha'phi(x) - b) + lambda/2 |alpha|^2
//! ```
//!
//! which is convex. It is minimized by full-batch gradient descent with early
//! stopping on the same functional evaluated on a holdout split.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::PuLoss;
use crate::error::{Error, Result};
use crate::kernel::{sq_dist, KernelSpec};
use crate::model_select::{pu_split, SelectionConfig, DEFAULT_GAMMA_GRID, DEFAULT_SPLIT_FRACTION};
use crate::par::{self, Execution};
use crate::wmmd::{check_prior, PuDataset};

/// Largest `n_p + n_u` for which the full Gram matrix is materialized.
pub const MAX_EXPANSION_SIZE: usize = 5000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSchedule {
    pub learning_rate: f64,
    pub epochs: usize,
    pub patience: usize,
    pub lambda_grid: Vec<f64>,
    pub gamma_grid: Vec<f64>,
    pub split_fraction: f64,
    pub seed: u64,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for TrainSchedule {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            epochs: 100,
            patience: 10,
            lambda_grid: DEFAULT_GAMMA_GRID.to_vec(),
            gamma_grid: DEFAULT_GAMMA_GRID.to_vec(),
            split_fraction: DEFAULT_SPLIT_FRACTION,
            seed: 0,
            execution: Execution::default(),
        }
    }
}

impl TrainSchedule {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.learning_rate) || self.epochs == 0 || self.patience == 0 {
            return Err(Error::InvalidParameter("learning rate, epochs and patience must be positive".into()));
        }
        if self.lambda_grid.is_empty() || self.gamma_grid.is_empty() {
            return Err(Error::InvalidParameter("lambda and gamma grids must be non-empty".into()));
        }
        if !self.lambda_grid.iter().chain(&self.gamma_grid).all(|&v| positive(v)) {
            return Err(Error::InvalidParameter("grid entries must be positive".into()));
        }
        Ok(())
    }
}

/// A fitted kernel expansion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbfExpansionModel {
    pub centers: Array2<f64>,
    pub alpha: Vec<f64>,
    pub b: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub loss: PuLoss,
}

impl RbfExpansionModel {
    pub fn dim(&self) -> usize {
        self.centers.ncols()
    }

    pub fn decision(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        let k = KernelSpec::gaussian(self.gamma)?;
        let s: f64 = self
            .centers
            .rows()
            .into_iter()
            .zip(&self.alpha)
            .map(|(c, a)| a * k.from_sq_dist(sq_dist(x, c.as_slice().unwrap())))
            .sum();
        Ok(s + self.b)
    }

    pub fn decision_batch(&self, points: ArrayView2<'_, f64>, exec: Execution) -> Result<Vec<f64>> {
        if points.nrows() > 0 && points.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: points.ncols() });
        }
        let pts = points.as_standard_layout();
        par::try_map_range(exec, pts.nrows(), |i| self.decision(pts.row(i).as_slice().unwrap()))
    }

    pub fn label_for(score: f64) -> i8 {
        if score > 0.0 {
            1
        } else {
            -1
        }
    }
}

/// Feature map `phi_j(x_i) = exp(-gamma |x_i - c_j|^2)` as an `n x N` matrix.
pub fn design_matrix(gamma: f64, points: ArrayView2<'_, f64>, centers: ArrayView2<'_, f64>, exec: Execution) -> Array2<f64> {
    let k = KernelSpec::gaussian(gamma).expect("grid validated");
    let pts = points.as_standard_layout();
    let cts = centers.as_standard_layout();
    let rows = par::map_range(exec, pts.nrows(), |i| {
        let x = pts.row(i);
        let x = x.as_slice().unwrap();
        cts.rows().into_iter().map(|c| k.from_sq_dist(sq_dist(x, c.as_slice().unwrap()))).collect::<Vec<f64>>()
    });
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Array2::from_shape_vec((pts.nrows(), cts.nrows()), flat).unwrap()
}

/// The PU risk functional on fixed design matrices.
#[derive(Debug, Clone, Copy)]
pub struct PuObjective<'a> {
    pub phi_p: ArrayView2<'a, f64>,
    pub phi_u: ArrayView2<'a, f64>,
    pub pi_plus: f64,
    pub lambda: f64,
    pub loss: PuLoss,
}

impl PuObjective<'_> {
    pub fn value(&self, alpha: ArrayView1<'_, f64>, b: f64) -> f64 {
        let gp = self.phi_p.dot(&alpha);
        let gu = self.phi_u.dot(&alpha);
        let lin = -self.pi_plus * gp.mean().unwrap() - self.pi_plus * b;
        let risk = gu.iter().map(|g| self.loss.value(-g - b)).sum::<f64>() / gu.len() as f64;
        lin + risk + 0.5 * self.lambda * alpha.dot(&alpha)
    }

    pub fn gradient(&self, alpha: ArrayView1<'_, f64>, b: f64) -> (Array1<f64>, f64) {
        let n_u = self.phi_u.nrows() as f64;
        let gu = self.phi_u.dot(&alpha);
        let dl: Array1<f64> = gu.mapv(|g| self.loss.derivative(-g - b));
        let mean_p = self.phi_p.mean_axis(Axis(0)).unwrap();
        let grad_alpha = &mean_p * (-self.pi_plus) - &(self.phi_u.t().dot(&dl) / n_u) + &alpha * self.lambda;
        let grad_b = -self.pi_plus - dl.sum() / n_u;
        (grad_alpha, grad_b)
    }
}

/// Summary of one `(lambda, gamma)` grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub lambda: f64,
    pub gamma: f64,
    pub valid_risk: f64,
    pub best_epoch: usize,
}

#[derive(Debug, Clone)]
pub struct LogDhFit {
    pub model: RbfExpansionModel,
    pub table: Vec<CellResult>,
}

struct Trained {
    cell: CellResult,
    alpha: Array1<f64>,
    b: f64,
}

fn descend(train: &PuObjective<'_>, valid: &PuObjective<'_>, sched: &TrainSchedule) -> Result<Trained> {
    let n = train.phi_p.ncols();
    let mut alpha = Array1::<f64>::zeros(n);
    let mut b = 0.0;
    let start = train.value(alpha.view(), b);
    let mut best = Trained {
        cell: CellResult { lambda: train.lambda, gamma: f64::NAN, valid_risk: valid.value(alpha.view(), b), best_epoch: 0 },
        alpha: alpha.clone(),
        b,
    };
    let mut stale = 0;
    for epoch in 1..=sched.epochs {
        let (ga, gb) = train.gradient(alpha.view(), b);
        if !gb.is_finite() || ga.iter().any(|g| !g.is_finite()) {
            return Err(Error::Diverged { epoch });
        }
        alpha.scaled_add(-sched.learning_rate, &ga);
        b -= sched.learning_rate * gb;
        let jv = valid.value(alpha.view(), b);
        // only iterates that did not climb above the starting training risk qualify
        if jv < best.cell.valid_risk && train.value(alpha.view(), b) <= start {
            best.cell.valid_risk = jv;
            best.cell.best_epoch = epoch;
            best.alpha.assign(&alpha);
            best.b = b;
            stale = 0;
        } else {
            stale += 1;
            if stale >= sched.patience {
                break;
            }
        }
    }
    Ok(best)
}

/// Grid-searches `(lambda, gamma)` by holdout risk and returns the weights at
/// the best validation epoch of the winning cell.
pub fn fit_log_dh(data: &PuDataset, loss: PuLoss, sched: &TrainSchedule) -> Result<LogDhFit> {
    sched.validate()?;
    let n_total = data.n_positive() + data.n_unlabeled();
    if n_total > MAX_EXPANSION_SIZE {
        return Err(Error::ScaleCap(format!(
            "kernel expansion needs an {n_total}x{n_total} Gram matrix; n_p + n_u is capped at {MAX_EXPANSION_SIZE}"
        )));
    }
    let pi = data
        .pi_plus()
        .ok_or_else(|| Error::InvalidParameter("LOG/DH need a class prior".into()))?;
    check_prior(pi)?;
    let split_cfg = SelectionConfig {
        split_fraction: sched.split_fraction,
        seed: sched.seed,
        ..SelectionConfig::default()
    };
    let (train, valid) = pu_split(data, &split_cfg)?;
    let centers = ndarray::concatenate(Axis(0), &[train.positives(), train.unlabeled()]).unwrap();
    let exec = sched.execution;

    let mut results: Vec<Trained> = Vec::with_capacity(sched.gamma_grid.len() * sched.lambda_grid.len());
    for &gamma in &sched.gamma_grid {
        let tp = design_matrix(gamma, train.positives(), centers.view(), exec);
        let tu = design_matrix(gamma, train.unlabeled(), centers.view(), exec);
        let vp = design_matrix(gamma, valid.positives(), centers.view(), exec);
        let vu = design_matrix(gamma, valid.unlabeled(), centers.view(), exec);
        let cells = par::try_map_range(exec, sched.lambda_grid.len(), |i| {
            let lambda = sched.lambda_grid[i];
            let t = PuObjective { phi_p: tp.view(), phi_u: tu.view(), pi_plus: pi, lambda, loss };
            let v = PuObjective { phi_p: vp.view(), phi_u: vu.view(), ..t };
            let mut r = descend(&t, &v, sched)?;
            r.cell.gamma = gamma;
            Ok::<_, Error>(r)
        })?;
        results.extend(cells);
    }
    let best = results
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.cell.valid_risk.total_cmp(&b.1.cell.valid_risk).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .unwrap();
    let table = results.iter().map(|r| r.cell).collect();
    let win = &results[best];
    let model = RbfExpansionModel {
        centers,
        alpha: win.alpha.to_vec(),
        b: win.b,
        gamma: win.cell.gamma,
        lambda: win.cell.lambda,
        loss,
    };
    Ok(LogDhFit { model, table })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{synthetic::Generator, RngStream};
    use rand::Rng;

    fn toy(n_p: usize, n_u: usize, seed: u64) -> PuDataset {
        let mut rng = RngStream::new(seed, 0).rng();
        let p = Generator::Gaussian.sample_class(n_p, 1, &mut rng);
        let u = Generator::Gaussian.sample(n_u, 0.5, &mut rng).unwrap();
        PuDataset::new(p, u.features().to_owned(), Some(0.5)).unwrap()
    }

    fn random_objective_parts(seed: u64) -> (Array2<f64>, Array2<f64>, Array1<f64>, f64, f64, f64) {
        let mut rng = RngStream::new(seed, 9).rng();
        let n_c = rng.random_range(2..8);
        let phi_p = Array2::from_shape_fn((rng.random_range(1..6), n_c), |_| rng.random::<f64>());
        let phi_u = Array2::from_shape_fn((rng.random_range(1..9), n_c), |_| rng.random::<f64>());
        let alpha = Array1::from_shape_fn(n_c, |_| rng.random_range(-2.0..2.0));
        (phi_p, phi_u, alpha, rng.random_range(-1.0..1.0), rng.random_range(0.05..0.95), rng.random_range(0.01..1.0))
    }

    #[test]
    fn zero_weights_give_log_two() {
        let phi = Array2::from_elem((3, 4), 0.5);
        let obj = PuObjective { phi_p: phi.view(), phi_u: phi.view(), pi_plus: 0.3, lambda: 0.2, loss: PuLoss::Logistic };
        let v = obj.value(Array1::zeros(4).view(), 0.0);
        assert!((v - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn gradient_matches_central_differences() {
        for seed in 0..20 {
            for loss in [PuLoss::Logistic, PuLoss::DoubleHinge] {
                let (p, u, alpha, b, pi, lambda) = random_objective_parts(seed);
                let obj = PuObjective { phi_p: p.view(), phi_u: u.view(), pi_plus: pi, lambda, loss };
                let (ga, gb) = obj.gradient(alpha.view(), b);
                let h = 1e-5;
                let mut fd = Vec::new();
                for j in 0..alpha.len() {
                    let mut a1 = alpha.clone();
                    let mut a2 = alpha.clone();
                    a1[j] += h;
                    a2[j] -= h;
                    fd.push((obj.value(a1.view(), b) - obj.value(a2.view(), b)) / (2.0 * h));
                }
                fd.push((obj.value(alpha.view(), b + h) - obj.value(alpha.view(), b - h)) / (2.0 * h));
                let an: Vec<f64> = ga.iter().copied().chain([gb]).collect();
                let scale = an.iter().chain(&fd).fold(0.0f64, |m, v| m.max(v.abs()));
                for (x, y) in an.iter().zip(&fd) {
                    assert!((x - y).abs() <= 1e-5 * scale, "{loss} seed {seed}: {x} vs {y}");
                }
            }
        }
    }

    #[test]
    fn small_step_descends() {
        let (p, u, _, _, pi, lambda) = random_objective_parts(3);
        let obj = PuObjective { phi_p: p.view(), phi_u: u.view(), pi_plus: pi, lambda, loss: PuLoss::Logistic };
        let zero = Array1::zeros(p.ncols());
        let (ga, gb) = obj.gradient(zero.view(), 0.0);
        let eps = 1e-3;
        let stepped = &zero - &(&ga * eps);
        assert!(obj.value(stepped.view(), -eps * gb) < obj.value(zero.view(), 0.0));
    }

    #[test]
    fn fit_improves_on_initialization() {
        let data = toy(30, 90, 1);
        let sched = TrainSchedule { lambda_grid: vec![0.1, 1.0], gamma_grid: vec![0.4, 1.0], ..TrainSchedule::default() };
        for loss in [PuLoss::Logistic, PuLoss::DoubleHinge] {
            let fit = fit_log_dh(&data, loss, &sched).unwrap();
            assert_eq!(fit.table.len(), 4);
            let best = fit.table.iter().map(|c| c.valid_risk).fold(f64::INFINITY, f64::min);
            assert_eq!(best, fit.table.iter().find(|c| c.gamma == fit.model.gamma && c.lambda == fit.model.lambda).unwrap().valid_risk);
            assert_eq!(fit.model.alpha.len(), fit.model.centers.nrows());
            let g = fit.model.decision(&[1.0, 1.0]).unwrap();
            assert!(g.is_finite());
        }
    }

    #[test]
    fn scale_cap_enforced() {
        let data = PuDataset::new(Array2::zeros((10, 1)), Array2::zeros((4995, 1)), Some(0.5)).unwrap();
        assert!(matches!(fit_log_dh(&data, PuLoss::DoubleHinge, &TrainSchedule::default()), Err(Error::ScaleCap(_))));
    }

    #[test]
    fn requires_prior() {
        let data = toy(10, 20, 2).with_pi_plus(None).unwrap();
        assert!(fit_log_dh(&data, PuLoss::Logistic, &TrainSchedule::default()).is_err());
    }
}
