use wmmd_pu::bench_tables::{read_sweep_csv, sweep, write_sweep_csv, SweepAxis, SweepSpec};
use wmmd_pu::eval::{run_experiment, ExperimentPlan, ExperimentReport, Method};
use wmmd_pu::Execution;

fn small(method: Method) -> ExperimentPlan {
    let mut plan = ExperimentPlan::gaussian(40, 120, 0.5, method);
    plan.reps = 4;
    plan.n_te = 200;
    plan.seed = 9;
    plan
}

type Bits = (u64, u64, u64, Option<u64>, Option<u64>);

fn comparable(r: &ExperimentReport) -> Vec<Bits> {
    r.per_rep
        .iter()
        .map(|x| {
            (x.rep, x.accuracy.to_bits(), x.auc.to_bits(), x.selected_gamma.map(f64::to_bits), x.pi_hat.map(f64::to_bits))
        })
        .collect()
}

#[test]
fn experiments_are_reproducible_across_execution_modes() {
    for method in Method::ALL {
        let mut plan = small(method);
        plan.execution = Execution::Sequential;
        let seq = run_experiment(&plan).unwrap();
        plan.execution = Execution::Parallel;
        let par = run_experiment(&plan).unwrap();
        assert_eq!(comparable(&seq), comparable(&par), "{method}");
        assert_eq!(comparable(&seq), comparable(&run_experiment(&plan).unwrap()));
    }
}

#[test]
fn summary_matches_per_rep_values() {
    let report = run_experiment(&small(Method::Wmmd)).unwrap();
    let acc: Vec<f64> = report.per_rep.iter().map(|r| r.accuracy).collect();
    let n = acc.len() as f64;
    let mean = acc.iter().sum::<f64>() / n;
    let var = acc.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!((report.summary.accuracy.mean - mean).abs() < 1e-12);
    assert!((report.summary.accuracy.stderr - (var / n).sqrt()).abs() < 1e-12);
    assert_eq!(report.per_rep.iter().map(|r| r.rep).collect::<Vec<_>>(), vec![0, 1, 2, 3]);
}

#[test]
fn different_seeds_differ() {
    let a = run_experiment(&small(Method::Wmmd)).unwrap();
    let mut plan = small(Method::Wmmd);
    plan.seed = 10;
    let b = run_experiment(&plan).unwrap();
    assert_ne!(comparable(&a), comparable(&b));
}

#[test]
fn unknown_prior_reports_estimates() {
    let mut plan = small(Method::Wmmd);
    plan.prior_known = false;
    let report = run_experiment(&plan).unwrap();
    for r in &report.per_rep {
        let pi = r.pi_hat.expect("estimated prior is reported");
        assert!(pi > 0.0 && pi < 1.0);
    }
    let known = run_experiment(&small(Method::Tadj)).unwrap();
    assert!(known.per_rep.iter().all(|r| r.selected_gamma.is_none()));
}

#[test]
fn sweep_csv_round_trip() {
    let spec = SweepSpec::new(SweepAxis::PiPlus, vec![0.3, 0.7], small(Method::Wmmd)).unwrap();
    let rows = sweep(&spec, &[Method::Wmmd]).unwrap();
    assert_eq!(rows.len(), 2 * 2);
    assert!(rows.iter().all(|r| r.bayes_accuracy.is_some()));
    let mut buf = Vec::new();
    write_sweep_csv(&rows, &mut buf).unwrap();
    let back = read_sweep_csv(buf.as_slice()).unwrap();
    assert_eq!(back, rows);
}
