use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::metrics::{accuracy, auc};
use crate::baselines::{fit_log_dh, fit_tadj, PuLoss, RbfExpansionModel, TadjConfig, TadjModel, TrainSchedule};
use crate::data::synthetic::Generator;
use crate::data::{make_pu, Composition, LabeledDataset, RngStream};
use crate::error::{Error, Result};
use crate::kernel::KernelFamily;
use crate::model_select::{grid_search, SelectionConfig, DEFAULT_ETA, DEFAULT_GAMMA_GRID};
use crate::par::{self, Execution};
use crate::wmmd::{check_prior, PuDataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Wmmd,
    Log,
    Dh,
    Tadj,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Wmmd, Method::Log, Method::Dh, Method::Tadj];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Wmmd => "wmmd",
            Method::Log => "log",
            Method::Dh => "dh",
            Method::Tadj => "tadj",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "wmmd" => Ok(Method::Wmmd),
            "log" => Ok(Method::Log),
            "dh" => Ok(Method::Dh),
            "tadj" => Ok(Method::Tadj),
            other => Err(Error::InvalidParameter(format!("unknown method '{other}' (expected wmmd, log, dh or tadj)"))),
        }
    }
}

/// Where each replication's data comes from.
#[derive(Debug, Clone)]
pub enum DataSource {
    /// Positives from the positive class-conditional, unlabeled and test
    /// points from the mixture.
    Synthetic(Generator),
    /// Resampled without replacement from a labeled dataset.
    Labeled(Arc<LabeledDataset>),
}

#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub source: DataSource,
    pub n_p: usize,
    pub n_u: usize,
    pub n_te: usize,
    pub pi_plus: f64,
    /// When false the prior is estimated by the density-based method.
    pub prior_known: bool,
    pub method: Method,
    pub kernel: KernelFamily,
    pub reps: usize,
    pub seed: u64,
    pub gamma_grid: Vec<f64>,
    pub lambda_grid: Vec<f64>,
    pub eta: f64,
    pub composition: Composition,
    pub execution: Execution,
}

impl ExperimentPlan {
    /// A plan on the synthetic Gaussian pair with the default grids.
    pub fn gaussian(n_p: usize, n_u: usize, pi_plus: f64, method: Method) -> Self {
        Self {
            source: DataSource::Synthetic(Generator::Gaussian),
            n_p,
            n_u,
            n_te: 1000,
            pi_plus,
            prior_known: true,
            method,
            kernel: KernelFamily::Gaussian,
            reps: 100,
            seed: 0,
            gamma_grid: DEFAULT_GAMMA_GRID.to_vec(),
            lambda_grid: DEFAULT_GAMMA_GRID.to_vec(),
            eta: DEFAULT_ETA,
            composition: Composition::Fixed,
            execution: Execution::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_prior(self.pi_plus)?;
        if self.reps == 0 {
            return Err(Error::InvalidParameter("reps must be at least 1".into()));
        }
        if self.n_p < 2 || self.n_u < 2 || self.n_te < 2 {
            return Err(Error::InvalidParameter("n_p, n_u and n_te must each be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepResult {
    pub rep: u64,
    pub accuracy: f64,
    pub auc: f64,
    pub train_seconds: f64,
    /// Kernel width of the fitted model; `None` for tADJ.
    pub selected_gamma: Option<f64>,
    pub pi_hat: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub stderr: f64,
}

impl MetricSummary {
    /// Mean and `sample_std / sqrt(n)`; the standard error of a single value is 0.
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        if values.len() < 2 {
            return Self { mean, stderr: 0.0 };
        }
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Self { mean, stderr: (var / n).sqrt() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub accuracy: MetricSummary,
    pub auc: MetricSummary,
    pub train_seconds: MetricSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub method: Method,
    pub seed: u64,
    pub per_rep: Vec<RepResult>,
    pub summary: Summary,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl ExperimentReport {
    pub fn from_reps(method: Method, seed: u64, per_rep: Vec<RepResult>) -> Result<Self> {
        if per_rep.is_empty() {
            return Err(Error::Empty("replication list"));
        }
        let col = |f: fn(&RepResult) -> f64| per_rep.iter().map(f).collect::<Vec<_>>();
        let summary = Summary {
            accuracy: MetricSummary::of(&col(|r| r.accuracy)),
            auc: MetricSummary::of(&col(|r| r.auc)),
            train_seconds: MetricSummary::of(&col(|r| r.train_seconds)),
        };
        Ok(Self { method, seed, per_rep, summary })
    }

    /// CSV with header `row,accuracy,auc,train_seconds,selected_gamma,pi_hat`:
    /// one row per replication (`row` = replication index), then `mean` and
    /// `stderr` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "row,accuracy,auc,train_seconds,selected_gamma,pi_hat")?;
        for r in &self.per_rep {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                r.rep,
                r.accuracy,
                r.auc,
                r.train_seconds,
                opt(r.selected_gamma),
                opt(r.pi_hat)
            )?;
        }
        let s = &self.summary;
        writeln!(w, "mean,{},{},{},,", s.accuracy.mean, s.auc.mean, s.train_seconds.mean)?;
        writeln!(w, "stderr,{},{},{},,", s.accuracy.stderr, s.auc.stderr, s.train_seconds.stderr)?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

struct RepData {
    train: PuDataset,
    test: LabeledDataset,
    split_seed: u64,
}

fn draw(plan: &ExperimentPlan, stream: RngStream) -> Result<RepData> {
    let mut rng = stream.rng();
    let prior = plan.prior_known.then_some(plan.pi_plus);
    let (train, test) = match &plan.source {
        DataSource::Synthetic(g) => {
            let pos = g.sample_class(plan.n_p, 1, &mut rng);
            let unl = g.sample(plan.n_u, plan.pi_plus, &mut rng)?;
            let test = g.sample(plan.n_te, plan.pi_plus, &mut rng)?;
            (PuDataset::new(pos, unl.features().to_owned(), prior)?, test)
        }
        DataSource::Labeled(data) => {
            let s = make_pu(data, plan.n_p, plan.n_u, plan.n_te, Some(plan.pi_plus), plan.composition, &mut rng)?;
            let test = s.test.expect("n_te validated positive");
            (s.train.with_pi_plus(prior)?, test)
        }
    };
    let split_seed = stream.child(1).rng().random::<u64>();
    Ok(RepData { train, test, split_seed })
}

/// Trained predictor: test scores and labels.
type Fitted = (Vec<f64>, Vec<i8>, Option<f64>, Option<f64>);

fn selection_config(plan: &ExperimentPlan, split_seed: u64) -> SelectionConfig {
    SelectionConfig {
        gamma_grid: plan.gamma_grid.clone(),
        eta: plan.eta,
        seed: split_seed,
        execution: Execution::Sequential,
        ..SelectionConfig::default()
    }
}

fn fit_and_score(plan: &ExperimentPlan, d: &RepData, timer: &mut f64) -> Result<Fitted> {
    let test = d.test.features();
    let cfg = selection_config(plan, d.split_seed);
    match plan.method {
        Method::Wmmd => {
            let t0 = Instant::now();
            let sel = grid_search(&d.train, &cfg, plan.kernel)?;
            *timer = t0.elapsed().as_secs_f64();
            let scores = sel.model.score_batch_with(test, Execution::Sequential)?;
            let pred = scores.iter().map(|&s| sel.model.label_for(s)).collect();
            Ok((scores, pred, Some(sel.gamma()), sel.pi_hat()))
        }
        Method::Log | Method::Dh => {
            let loss = if plan.method == Method::Log { PuLoss::Logistic } else { PuLoss::DoubleHinge };
            let t0 = Instant::now();
            let (train, pi_hat) = match d.train.pi_plus() {
                Some(_) => (d.train.clone(), None),
                None => {
                    let est = grid_search(&d.train, &cfg, KernelFamily::Gaussian)?.model.threshold_prior();
                    (d.train.clone().with_pi_plus(Some(est))?, Some(est))
                }
            };
            let sched = TrainSchedule {
                gamma_grid: plan.gamma_grid.clone(),
                lambda_grid: plan.lambda_grid.clone(),
                seed: d.split_seed,
                execution: Execution::Sequential,
                ..TrainSchedule::default()
            };
            let fit = fit_log_dh(&train, loss, &sched)?;
            *timer = t0.elapsed().as_secs_f64();
            let scores = fit.model.decision_batch(test, Execution::Sequential)?;
            let pred = scores.iter().map(|&s| RbfExpansionModel::label_for(s)).collect();
            Ok((scores, pred, Some(fit.model.gamma), pi_hat))
        }
        Method::Tadj => {
            let tcfg = TadjConfig { seed: d.split_seed, execution: Execution::Sequential, ..TadjConfig::default() };
            let t0 = Instant::now();
            let model = fit_tadj(&d.train, &tcfg)?;
            *timer = t0.elapsed().as_secs_f64();
            let scores = model.score_batch(test, Execution::Sequential)?;
            let pred = scores.iter().map(|&s| TadjModel::label_for(s)).collect();
            Ok((scores, pred, None, None))
        }
    }
}

fn run_rep(plan: &ExperimentPlan, rep: u64) -> Result<RepResult> {
    let data = draw(plan, RngStream::new(plan.seed, rep))?;
    let mut train_seconds = 0.0;
    let (scores, pred, selected_gamma, pi_hat) = fit_and_score(plan, &data, &mut train_seconds)?;
    Ok(RepResult {
        rep,
        accuracy: accuracy(&pred, data.test.labels())?,
        auc: auc(&scores, data.test.labels())?,
        train_seconds,
        selected_gamma,
        pi_hat,
    })
}

/// Runs `plan.reps` independent replications (in parallel under
/// [`Execution::Parallel`]). Replication `r` draws from stream `r` of
/// `plan.seed`, so results do not depend on scheduling. The first failing
/// replication aborts the run.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentReport> {
    plan.validate()?;
    let reps = par::try_map_range(plan.execution, plan.reps, |r| {
        run_rep(plan, r as u64).map_err(|e| Error::Replication { rep: r as u64, seed: plan.seed, source: Box::new(e) })
    })?;
    ExperimentReport::from_reps(plan.method, plan.seed, reps)
}
