use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use ndarray::ArrayView2;
use serde_json::json;
use wmmd_pu::baselines::{
    fit_log_dh, fit_tadj, PuLoss, RbfExpansionModel, TadjConfig, TadjModel, TrainSchedule, MAX_EXPANSION_SIZE,
};
use wmmd_pu::bench_tables::{sweep, table2_protocol, write_sweep_csv, SweepAxis, SweepSpec};
use wmmd_pu::data::libsvm::{parse_libsvm, write_sparse, LibsvmOptions, SparseDataset, SparseRow};
use wmmd_pu::data::synthetic::Generator;
use wmmd_pu::data::RngStream;
use wmmd_pu::eval::{run_experiment, welch_t, DataSource, ExperimentPlan, ExperimentReport, Method};
use wmmd_pu::model_select::{grid_search, PriorSource, SelectionConfig};
use wmmd_pu::{Error, Execution, KernelFamily, PuDataset, WmmdModel};

use crate::cli::{
    AxisArg, BenchArgs, EstimatePriorArgs, GenerateArgs, KernelArg, Kind, MethodArg, PredictArgs, SelectionArgs,
    TrainArgs,
};
use crate::files::{read_pu_file, read_sparse, write_atomic, ExpansionFile, ModelFile, Samples, WmmdFile};

impl From<Kind> for Generator {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Gaussian => Generator::Gaussian,
            Kind::TwoMoons => Generator::TwoMoons,
        }
    }
}

impl From<KernelArg> for KernelFamily {
    fn from(k: KernelArg) -> Self {
        match k {
            KernelArg::Gaussian => KernelFamily::Gaussian,
            KernelArg::Inverse => KernelFamily::Inverse,
        }
    }
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Wmmd => Method::Wmmd,
            MethodArg::Log => Method::Log,
            MethodArg::Dh => Method::Dh,
            MethodArg::Tadj => Method::Tadj,
        }
    }
}

fn sparse_rows(x: ArrayView2<'_, f64>, label: f64) -> Vec<SparseRow> {
    x.rows()
        .into_iter()
        .map(|row| SparseRow {
            label,
            entries: row.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, &v)| (j + 1, v)).collect(),
        })
        .collect()
}

pub fn generate(args: &GenerateArgs) -> Result<()> {
    let gen = Generator::from(args.kind);
    let mut rng = RngStream::new(args.seed, 0).rng();
    let n = args.n as usize;
    let ds = match args.n_p {
        Some(n_p) => {
            let pos = gen.sample_class(n_p, 1, &mut rng);
            let unl = gen.sample(n, args.pi_plus, &mut rng)?;
            let mut rows = sparse_rows(pos.view(), 1.0);
            rows.extend(sparse_rows(unl.features(), 0.0));
            SparseDataset { rows }
        }
        None => SparseDataset::from_labeled(&gen.sample(n, args.pi_plus, &mut rng)?),
    };
    write_atomic(&args.out, |w| Ok(write_sparse(&ds, w)?))
}

fn selection_config(s: &SelectionArgs, refit_full: bool) -> SelectionConfig {
    SelectionConfig {
        gamma_grid: s.gamma_grid.clone(),
        split_fraction: s.split_fraction,
        eta: s.eta,
        seed: s.seed,
        refit_full,
        execution: Execution::Parallel,
    }
}

fn prior_label(source: PriorSource) -> &'static str {
    match source {
        PriorSource::Known => "known",
        PriorSource::DensityBased => "density-based",
    }
}

pub fn train(args: &TrainArgs) -> Result<()> {
    let needs_prior = args.method != MethodArg::Tadj;
    if needs_prior && args.pi_plus.is_none() && !args.estimate_prior {
        bail!("--method {:?} needs --pi-plus or --estimate-prior", args.method);
    }
    let data = read_pu_file(&args.train, None, args.pi_plus)?;
    let cfg = selection_config(&args.selection, args.refit_full);
    let family = KernelFamily::from(args.selection.kernel);

    let model = match args.method {
        MethodArg::Wmmd => {
            let sel = grid_search(&data, &cfg, family)?;
            eprintln!("gamma,validation_risk,pi_plus");
            for row in &sel.table {
                eprintln!("{},{},{}", row.gamma, row.risk, row.pi_plus);
            }
            eprintln!(
                "selected gamma {} (prior {} = {})",
                sel.gamma(),
                prior_label(sel.prior_source),
                sel.model.threshold_prior()
            );
            let samples = if args.reference_train_file {
                let path = std::fs::canonicalize(&args.train)
                    .with_context(|| format!("cannot resolve {}", args.train.display()))?;
                Samples::TrainingFile {
                    path,
                    split_seed: cfg.seed,
                    split_fraction: cfg.split_fraction,
                    full: cfg.refit_full,
                }
            } else {
                Samples::Embedded {
                    positives: sel.model.positives().to_owned(),
                    unlabeled: sel.model.unlabeled().to_owned(),
                }
            };
            ModelFile::Wmmd(WmmdFile {
                kernel: sel.model.kernel(),
                dim: data.dim(),
                threshold_prior: sel.model.threshold_prior(),
                prior_source: sel.prior_source,
                samples,
                selection: sel.table,
            })
        }
        MethodArg::Log | MethodArg::Dh => {
            let n = data.n_positive() + data.n_unlabeled();
            if n > MAX_EXPANSION_SIZE {
                return Err(Error::ScaleCap(format!(
                    "LOG/DH materialize an n x n Gram matrix; n_p + n_u = {n} exceeds the cap of {MAX_EXPANSION_SIZE}"
                ))
                .into());
            }
            let (data, source) = if args.estimate_prior {
                let est = grid_search(&data, &cfg, KernelFamily::Gaussian)?.model.threshold_prior();
                eprintln!("density-based prior estimate {est}");
                (data.with_pi_plus(Some(est))?, PriorSource::DensityBased)
            } else {
                (data, PriorSource::Known)
            };
            let loss = if args.method == MethodArg::Log { PuLoss::Logistic } else { PuLoss::DoubleHinge };
            let sched = TrainSchedule {
                learning_rate: args.learning_rate,
                epochs: args.epochs,
                patience: args.patience,
                lambda_grid: args.lambda_grid.clone(),
                gamma_grid: args.selection.gamma_grid.clone(),
                split_fraction: args.selection.split_fraction,
                seed: args.selection.seed,
                execution: Execution::Parallel,
            };
            let fit = fit_log_dh(&data, loss, &sched)?;
            eprintln!("lambda,gamma,validation_risk,best_epoch");
            for c in &fit.table {
                eprintln!("{},{},{},{}", c.lambda, c.gamma, c.valid_risk, c.best_epoch);
            }
            let file = ExpansionFile {
                pi_plus: data.pi_plus().expect("set above"),
                prior_source: source,
                model: fit.model,
                selection: fit.table,
            };
            if args.method == MethodArg::Log {
                ModelFile::Log(file)
            } else {
                ModelFile::Dh(file)
            }
        }
        MethodArg::Tadj => {
            if args.pi_plus.is_some() || args.estimate_prior {
                log::warn!("tADJ does not use the class prior; ignoring it");
            }
            let tcfg = TadjConfig {
                split_fraction: args.selection.split_fraction,
                seed: args.selection.seed,
                execution: Execution::Parallel,
                ..TadjConfig::default()
            };
            let model = fit_tadj(&data, &tcfg)?;
            eprintln!("selected C {} (label frequency c = {})", model.c_reg, model.c);
            ModelFile::Tadj { model }
        }
    };
    write_atomic(&args.model_out, |w| {
        serde_json::to_writer_pretty(&mut *w, &model)?;
        writeln!(w)?;
        Ok(())
    })
}

pub fn predict(args: &PredictArgs) -> Result<()> {
    let model = ModelFile::load(&args.model)?;
    let dim = model.dim();
    let sparse = read_sparse(&args.test)?;
    let (x, _) = sparse.to_dense(Some(dim)).map_err(|e| match e {
        Error::DimensionMismatch { expected, got } => anyhow!(
            "dimension mismatch: the model has {expected} features but {} uses feature index {got}",
            args.test.display()
        ),
        other => other.into(),
    })?;
    let exec = Execution::Parallel;
    let (scores, labels): (Vec<f64>, Vec<i8>) = match &model {
        ModelFile::Wmmd(m) => {
            let (p, u) = m.samples()?;
            let data = PuDataset::new(p, u, None)?;
            let wm = WmmdModel::new(m.kernel, &data, m.threshold_prior)?;
            let s = wm.score_batch_with(x.view(), exec)?;
            let l = s.iter().map(|&v| wm.label_for(v)).collect();
            (s, l)
        }
        ModelFile::Log(m) | ModelFile::Dh(m) => {
            let s = m.model.decision_batch(x.view(), exec)?;
            let l = s.iter().map(|&v| RbfExpansionModel::label_for(v)).collect();
            (s, l)
        }
        ModelFile::Tadj { model } => {
            let s = model.score_batch(x.view(), exec)?;
            let l = s.iter().map(|&v| TadjModel::label_for(v)).collect();
            (s, l)
        }
    };
    write_atomic(&args.out, |w| {
        writeln!(w, "score,prediction")?;
        for (s, l) in scores.iter().zip(&labels) {
            writeln!(w, "{s},{l}")?;
        }
        Ok(())
    })
}

pub fn estimate_prior(args: &EstimatePriorArgs) -> Result<()> {
    let data = read_pu_file(&args.train, None, None)?;
    let cfg = selection_config(&args.selection, false);
    let sel = grid_search(&data, &cfg, args.selection.kernel.into())?;
    let gamma = cfg.gamma_grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let out = json!({
        "pi_hat": sel.pi_hat(),
        "provenance": prior_label(sel.prior_source),
        "estimation_gamma": gamma,
        "eta": cfg.eta,
    });
    println!("{out}");
    if let Some(path) = &args.out {
        write_atomic(path, |w| {
            serde_json::to_writer_pretty(&mut *w, &out)?;
            writeln!(w)?;
            Ok(())
        })?;
    }
    Ok(())
}

fn base_plan(args: &BenchArgs) -> Result<ExperimentPlan> {
    let source = match &args.dataset {
        Some(path) => {
            let f = std::fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
            let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            let data = parse_libsvm(std::io::BufReader::new(f), &LibsvmOptions::default(), name)
                .with_context(|| format!("in {}", path.display()))?;
            DataSource::Labeled(Arc::new(data))
        }
        None => DataSource::Synthetic(args.generator.into()),
    };
    let (n_p, n_u, n_te, pi_plus) = match &args.protocol {
        Some(name) => {
            let p = table2_protocol(name)?;
            (p.n_p, p.n_u, p.n_te, p.pi_plus)
        }
        None => (args.n_p, args.n_u, args.n_te, args.pi_plus),
    };
    Ok(ExperimentPlan {
        source,
        n_te,
        prior_known: !args.estimate_prior,
        kernel: args.kernel.into(),
        reps: args.reps,
        seed: args.seed,
        gamma_grid: args.gamma_grid.clone(),
        lambda_grid: args.lambda_grid.clone(),
        eta: args.eta,
        ..ExperimentPlan::gaussian(n_p, n_u, pi_plus, Method::Wmmd)
    })
}

fn print_summary(reports: &[ExperimentReport]) {
    let first: Vec<f64> = reports[0].per_rep.iter().map(|r| r.accuracy).collect();
    eprintln!("method   accuracy          auc               train_seconds  t(acc vs {})", reports[0].method);
    for r in reports {
        let s = &r.summary;
        let acc: Vec<f64> = r.per_rep.iter().map(|x| x.accuracy).collect();
        let t = welch_t(&acc, &first).map(|t| format!("{t:.2}")).unwrap_or_else(|| "-".into());
        eprintln!(
            "{:<8} {:.4} +- {:.4}  {:.4} +- {:.4}  {:.4}         {t}",
            r.method.to_string(),
            s.accuracy.mean,
            s.accuracy.stderr,
            s.auc.mean,
            s.auc.stderr,
            s.train_seconds.mean
        );
    }
}

pub fn bench(args: &BenchArgs) -> Result<()> {
    let plan = base_plan(args)?;
    let methods: Vec<Method> = args.methods.iter().map(|&m| m.into()).collect();
    if let Some(axis) = args.sweep {
        let axis = match axis {
            AxisArg::NU => SweepAxis::UnlabeledSize,
            AxisArg::PiPlus => SweepAxis::PiPlus,
        };
        let grid = args.grid.clone().unwrap_or_else(|| axis.default_grid());
        let spec = SweepSpec::new(axis, grid, plan)?;
        let rows = sweep(&spec, &methods)?;
        return write_atomic(&args.out, |w| Ok(write_sweep_csv(&rows, w)?));
    }
    let reports = methods
        .iter()
        .map(|&method| run_experiment(&ExperimentPlan { method, ..plan.clone() }))
        .collect::<wmmd_pu::Result<Vec<_>>>()?;
    print_summary(&reports);
    write_atomic(&args.out, |w| {
        writeln!(w, "method,row,accuracy,auc,train_seconds,selected_gamma,pi_hat")?;
        for r in &reports {
            let mut buf = Vec::new();
            r.write_csv(&mut buf)?;
            for line in String::from_utf8(buf)?.lines().skip(1) {
                writeln!(w, "{},{line}", r.method)?;
            }
        }
        Ok(())
    })?;
    if let Some(path) = &args.json_out {
        write_atomic(path, |w| {
            serde_json::to_writer_pretty(&mut *w, &reports)?;
            writeln!(w)?;
            Ok(())
        })?;
    }
    Ok(())
}
