//! Parameter sweeps over the synthetic plans and the resampling protocol of
//! the benchmark datasets, emitting long-format CSV.
//!
//! Sweep CSV columns: `axis_value,method,metric,mean,stderr,bayes_accuracy`.
//! `metric` is `accuracy` or `auc`; `bayes_accuracy` is the analytic Bayes
//! accuracy at that grid point for the Gaussian generator and empty
//! otherwise.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::data::synthetic::Generator;
use crate::error::{Error, Result};
use crate::eval::{bayes_accuracy_gaussian, run_experiment, DataSource, ExperimentPlan, Method};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    UnlabeledSize,
    PiPlus,
}

impl SweepAxis {
    /// Unlabeled sizes 40 to 500 by 20, or priors 0.05 to 0.95 by 0.05.
    pub fn default_grid(self) -> Vec<f64> {
        match self {
            SweepAxis::UnlabeledSize => (0..24).map(|i| 40.0 + 20.0 * i as f64).collect(),
            SweepAxis::PiPlus => (1..=19).map(|i| i as f64 / 20.0).collect(),
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::UnlabeledSize => "n_u",
            SweepAxis::PiPlus => "pi_plus",
        })
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "n_u" | "nu" => Ok(SweepAxis::UnlabeledSize),
            "pi_plus" | "pi" => Ok(SweepAxis::PiPlus),
            other => Err(Error::InvalidParameter(format!("unknown sweep axis '{other}' (expected n_u or pi_plus)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    axis: SweepAxis,
    grid: Vec<f64>,
    fixed: ExperimentPlan,
}

impl SweepSpec {
    pub fn new(axis: SweepAxis, grid: Vec<f64>, fixed: ExperimentPlan) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::Empty("sweep grid"));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("sweep grid must be strictly increasing".into()));
        }
        let ok = |v: f64| match axis {
            SweepAxis::UnlabeledSize => v >= 2.0 && v.fract() == 0.0,
            SweepAxis::PiPlus => v > 0.0 && v < 1.0,
        };
        if let Some(v) = grid.iter().find(|v| !ok(**v)) {
            return Err(Error::InvalidParameter(format!("{v} is not a valid {axis} value")));
        }
        Ok(Self { axis, grid, fixed })
    }

    pub fn axis(&self) -> SweepAxis {
        self.axis
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    fn plan_at(&self, value: f64, method: Method) -> ExperimentPlan {
        let mut plan = ExperimentPlan { method, ..self.fixed.clone() };
        match self.axis {
            SweepAxis::UnlabeledSize => plan.n_u = value as usize,
            SweepAxis::PiPlus => plan.pi_plus = value,
        }
        plan
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis_value: f64,
    pub method: Method,
    pub metric: String,
    pub mean: f64,
    pub stderr: f64,
    pub bayes_accuracy: Option<f64>,
}

/// Runs one experiment per (grid point, method) and returns rows sorted by
/// `(axis_value, method, metric)`.
pub fn sweep(spec: &SweepSpec, methods: &[Method]) -> Result<Vec<SweepRow>> {
    if methods.is_empty() {
        return Err(Error::Empty("method list"));
    }
    let gaussian = matches!(spec.fixed.source, DataSource::Synthetic(Generator::Gaussian));
    let cells: Vec<(f64, Method)> = spec.grid.iter().flat_map(|&v| methods.iter().map(move |&m| (v, m))).collect();
    let reports = par::try_map_range(spec.fixed.execution, cells.len(), |i| {
        let (v, m) = cells[i];
        run_experiment(&spec.plan_at(v, m))
    })?;
    let mut rows = Vec::with_capacity(cells.len() * 2);
    for ((v, m), report) in cells.iter().zip(reports) {
        let plan = spec.plan_at(*v, *m);
        let bayes = if gaussian { Some(bayes_accuracy_gaussian(plan.pi_plus)?) } else { None };
        for (metric, s) in [("accuracy", report.summary.accuracy), ("auc", report.summary.auc)] {
            rows.push(SweepRow {
                axis_value: *v,
                method: *m,
                metric: metric.into(),
                mean: s.mean,
                stderr: s.stderr,
                bayes_accuracy: bayes,
            });
        }
    }
    rows.sort_by(|a, b| {
        a.axis_value
            .total_cmp(&b.axis_value)
            .then_with(|| a.method.to_string().cmp(&b.method.to_string()))
            .then_with(|| a.metric.cmp(&b.metric))
    });
    Ok(rows)
}

pub const SWEEP_HEADER: &str = "axis_value,method,metric,mean,stderr,bayes_accuracy";

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut w: W) -> Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for r in rows {
        let bayes = r.bayes_accuracy.map(|b| b.to_string()).unwrap_or_default();
        writeln!(w, "{},{},{},{},{},{}", r.axis_value, r.method, r.metric, r.mean, r.stderr, bayes)?;
    }
    Ok(())
}

pub fn read_sweep_csv<R: BufRead>(r: R) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if i == 0 {
            if line.trim() != SWEEP_HEADER {
                return Err(Error::Parse { line: 1, message: format!("expected header '{SWEEP_HEADER}'") });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(Error::Parse { line: lineno, message: format!("expected 6 fields, found {}", f.len()) });
        }
        let num = |s: &str| {
            s.parse::<f64>().map_err(|_| Error::Parse { line: lineno, message: format!("'{s}' is not a number") })
        };
        rows.push(SweepRow {
            axis_value: num(f[0])?,
            method: f[1].parse().map_err(|e: Error| Error::Parse { line: lineno, message: e.to_string() })?,
            metric: f[2].to_string(),
            mean: num(f[3])?,
            stderr: num(f[4])?,
            bayes_accuracy: if f[5].is_empty() { None } else { Some(num(f[5])?) },
        });
    }
    Ok(rows)
}

/// Sizes of one benchmark resampling: positives, unlabeled, test, and the
/// class prior of the unlabeled and test sets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetProtocol {
    pub n_p: usize,
    pub n_u: usize,
    pub n_te: usize,
    pub pi_plus: f64,
}

const PROTOCOLS: [(&str, DatasetProtocol); 11] = [
    ("heart_scale", DatasetProtocol { n_p: 10, n_u: 60, n_te: 60, pi_plus: 0.62 }),
    ("sonar_scale", DatasetProtocol { n_p: 10, n_u: 100, n_te: 100, pi_plus: 0.47 }),
    ("australian_scale", DatasetProtocol { n_p: 20, n_u: 220, n_te: 220, pi_plus: 0.51 }),
    ("australian_scale2", DatasetProtocol { n_p: 10, n_u: 130, n_te: 130, pi_plus: 0.15 }),
    ("breast-cancer_scale", DatasetProtocol { n_p: 20, n_u: 340, n_te: 340, pi_plus: 0.35 }),
    ("breast-cancer_scale2", DatasetProtocol { n_p: 40, n_u: 340, n_te: 340, pi_plus: 0.65 }),
    ("diabetes_scale", DatasetProtocol { n_p: 50, n_u: 380, n_te: 370, pi_plus: 0.65 }),
    ("skin_nonskin", DatasetProtocol { n_p: 1000, n_u: 100_000, n_te: 100_000, pi_plus: 0.79 }),
    ("skin_nonskin2", DatasetProtocol { n_p: 1000, n_u: 100_000, n_te: 100_000, pi_plus: 0.21 }),
    ("epsilon_normalized", DatasetProtocol { n_p: 1000, n_u: 400_000, n_te: 100_000, pi_plus: 0.50 }),
    ("HIGGS", DatasetProtocol { n_p: 1000, n_u: 1_000_000, n_te: 100_000, pi_plus: 0.50 }),
];

/// Dataset names with a known protocol.
pub fn protocol_names() -> impl Iterator<Item = &'static str> {
    PROTOCOLS.iter().map(|(n, _)| *n)
}

/// Resampling sizes for a named benchmark dataset.
pub fn table2_protocol(name: &str) -> Result<DatasetProtocol> {
    PROTOCOLS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, p)| *p)
        .ok_or_else(|| Error::InvalidParameter(format!("no protocol for dataset '{name}'")))
}
