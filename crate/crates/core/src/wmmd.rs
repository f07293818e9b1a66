//! The weighted-MMD classifier.
//!
//! Given positives `X_p` and unlabeled `X_u`, the score of a point is the
//! ratio of its kernel means,
//!
//! ```text
//! score(z) = mean_p k(z, .) / mean_u k(z, .)
//! ```
//!
//! and the classifier predicts `+1` iff `score(z) > 1 / (2 pi_plus)`. The
//! score never reads the class prior; only the cutoff does.
//!
//! This module also evaluates the closed-form WMMD value between two empirical
//! measures, the normalized witness function, and the empirical hinge risk,
//! which together tie the classifier back to hinge-risk minimization.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::kernel::{check_finite, compensated_sum, sq_dist, KernelFamily, KernelSpec};
use crate::par::{self, Execution};

/// Positive and unlabeled samples sharing a feature dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct PuDataset {
    positives: Array2<f64>,
    unlabeled: Array2<f64>,
    pi_plus: Option<f64>,
}

impl PuDataset {
    pub fn new(positives: Array2<f64>, unlabeled: Array2<f64>, pi_plus: Option<f64>) -> Result<Self> {
        if positives.nrows() == 0 {
            return Err(Error::Empty("positive sample"));
        }
        if unlabeled.nrows() == 0 {
            return Err(Error::Empty("unlabeled sample"));
        }
        if positives.ncols() == 0 {
            return Err(Error::InvalidParameter("feature dimension must be at least 1".into()));
        }
        if positives.ncols() != unlabeled.ncols() {
            return Err(Error::DimensionMismatch { expected: positives.ncols(), got: unlabeled.ncols() });
        }
        if let Some(p) = pi_plus {
            check_prior(p)?;
        }
        let positives = positives.as_standard_layout().into_owned();
        let unlabeled = unlabeled.as_standard_layout().into_owned();
        check_finite(positives.as_slice().unwrap(), "positive sample")?;
        check_finite(unlabeled.as_slice().unwrap(), "unlabeled sample")?;
        Ok(Self { positives, unlabeled, pi_plus })
    }

    pub fn positives(&self) -> ArrayView2<'_, f64> {
        self.positives.view()
    }

    pub fn unlabeled(&self) -> ArrayView2<'_, f64> {
        self.unlabeled.view()
    }

    pub fn pi_plus(&self) -> Option<f64> {
        self.pi_plus
    }

    pub fn with_pi_plus(mut self, pi_plus: Option<f64>) -> Result<Self> {
        if let Some(p) = pi_plus {
            check_prior(p)?;
        }
        self.pi_plus = pi_plus;
        Ok(self)
    }

    pub fn n_positive(&self) -> usize {
        self.positives.nrows()
    }

    pub fn n_unlabeled(&self) -> usize {
        self.unlabeled.nrows()
    }

    pub fn dim(&self) -> usize {
        self.positives.ncols()
    }

    pub fn into_parts(self) -> (Array2<f64>, Array2<f64>, Option<f64>) {
        (self.positives, self.unlabeled, self.pi_plus)
    }
}

pub(crate) fn check_prior(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("class prior must lie in (0, 1), got {p}")))
    }
}

/// A fitted WMMD scorer. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct WmmdModel {
    kernel: KernelSpec,
    positives: Array2<f64>,
    unlabeled: Array2<f64>,
    threshold_prior: f64,
}

impl WmmdModel {
    pub fn new(kernel: KernelSpec, data: &PuDataset, threshold_prior: f64) -> Result<Self> {
        check_prior(threshold_prior)?;
        Ok(Self {
            kernel,
            positives: data.positives.clone(),
            unlabeled: data.unlabeled.clone(),
            threshold_prior,
        })
    }

    /// Same scorer with a different decision cutoff.
    pub fn with_threshold_prior(&self, threshold_prior: f64) -> Result<Self> {
        check_prior(threshold_prior)?;
        Ok(Self { threshold_prior, ..self.clone() })
    }

    pub fn kernel(&self) -> KernelSpec {
        self.kernel
    }

    pub fn threshold_prior(&self) -> f64 {
        self.threshold_prior
    }

    /// The score cutoff `1 / (2 pi)`.
    pub fn threshold(&self) -> f64 {
        1.0 / (2.0 * self.threshold_prior)
    }

    pub fn dim(&self) -> usize {
        self.positives.ncols()
    }

    pub fn positives(&self) -> ArrayView2<'_, f64> {
        self.positives.view()
    }

    pub fn unlabeled(&self) -> ArrayView2<'_, f64> {
        self.unlabeled.view()
    }

    /// The WMMD score of `z`.
    pub fn score(&self, z: &[f64]) -> Result<f64> {
        if z.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: z.len() });
        }
        check_finite(z, "query point")?;
        Ok(self.score_unchecked(z))
    }

    fn score_unchecked(&self, z: &[f64]) -> f64 {
        let d = self.dim();
        let p = self.kernel.mean_unchecked(z, self.positives.as_slice().unwrap(), d);
        let u = self.kernel.mean_unchecked(z, self.unlabeled.as_slice().unwrap(), d);
        match self.kernel.family() {
            KernelFamily::Gaussian => (p.log_value - u.log_value).exp(),
            KernelFamily::Inverse => p.value / u.value,
        }
    }

    /// `+1` iff the score strictly exceeds the cutoff; ties go to `-1`.
    pub fn classify(&self, z: &[f64]) -> Result<i8> {
        Ok(self.label_for(self.score(z)?))
    }

    pub fn label_for(&self, score: f64) -> i8 {
        if score > self.threshold() {
            1
        } else {
            -1
        }
    }

    /// Scores every row of `points`.
    pub fn score_batch(&self, points: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
        self.score_batch_with(points, Execution::default())
    }

    pub fn score_batch_with(&self, points: ArrayView2<'_, f64>, exec: Execution) -> Result<Vec<f64>> {
        let (n, d) = points.dim();
        if n == 0 {
            return Ok(Vec::new());
        }
        if d != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: d });
        }
        let points = points.as_standard_layout();
        let flat = points.as_slice().unwrap();
        check_finite(flat, "query points")?;
        Ok(par::map_range(exec, n, |i| self.score_unchecked(&flat[i * d..(i + 1) * d])))
    }

    pub fn classify_batch(&self, points: ArrayView2<'_, f64>) -> Result<Vec<i8>> {
        self.classify_batch_with(points, Execution::default())
    }

    pub fn classify_batch_with(&self, points: ArrayView2<'_, f64>, exec: Execution) -> Result<Vec<i8>> {
        Ok(self.score_batch_with(points, exec)?.into_iter().map(|s| self.label_for(s)).collect())
    }
}

/// Mean of the cross Gram matrix `k(a_i, b_j)` over all pairs.
pub fn gram_mean(spec: &KernelSpec, a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>, exec: Execution) -> Result<f64> {
    if a.nrows() == 0 || b.nrows() == 0 {
        return Err(Error::Empty("Gram sample"));
    }
    if a.ncols() != b.ncols() {
        return Err(Error::DimensionMismatch { expected: a.ncols(), got: b.ncols() });
    }
    let d = a.ncols();
    let a = a.as_standard_layout();
    let b = b.as_standard_layout();
    let (fa, fb) = (a.as_slice().unwrap(), b.as_slice().unwrap());
    check_finite(fa, "Gram sample")?;
    check_finite(fb, "Gram sample")?;
    let row_sums = par::map_range(exec, a.nrows(), |i| {
        let x = &fa[i * d..(i + 1) * d];
        compensated_sum(fb.chunks_exact(d).map(|y| spec.from_sq_dist(sq_dist(x, y))))
    });
    Ok(compensated_sum(row_sums) / (a.nrows() as f64 * b.nrows() as f64))
}

/// Closed-form WMMD between the empirical measures on `p` and `q`:
/// `r * sqrt(E_pp k + w^2 E_qq k - 2 w E_pq k)`.
pub fn wmmd_value(p: ArrayView2<'_, f64>, q: ArrayView2<'_, f64>, w: f64, r: f64, spec: &KernelSpec) -> Result<f64> {
    wmmd_value_with(p, q, w, r, spec, Execution::default())
}

pub fn wmmd_value_with(
    p: ArrayView2<'_, f64>,
    q: ArrayView2<'_, f64>,
    w: f64,
    r: f64,
    spec: &KernelSpec,
    exec: Execution,
) -> Result<f64> {
    if !(w >= 0.0 && w.is_finite()) {
        return Err(Error::InvalidParameter(format!("weight must be non-negative, got {w}")));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {r}")));
    }
    let pp = gram_mean(spec, p, p, exec)?;
    let qq = gram_mean(spec, q, q, exec)?;
    let pq = gram_mean(spec, p, q, exec)?;
    let sq = pp + w * w * qq - 2.0 * w * pq;
    if sq < 0.0 {
        let scale = pp + w * w * qq;
        if -sq > 1e-12 * scale {
            log::warn!("WMMD squared norm {sq:e} is negative beyond rounding (scale {scale:e}); clamping to 0");
        }
        return Ok(0.0);
    }
    Ok(r * sq.sqrt())
}

/// Empirical WMMD value together with the normalized witness evaluated at
/// `eval_points`.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessValues {
    pub value: f64,
    pub g_hat: Vec<f64>,
}

/// Empirical WMMD between unlabeled and positives with weight `w`, and the
/// optimizer `g(z) = r (mean_u k(z,.) - w mean_p k(z,.)) / N`, with `N` the
/// RKHS norm of the un-normalized witness.
pub fn empirical_witness(
    data: &PuDataset,
    w: f64,
    r: f64,
    spec: &KernelSpec,
    eval_points: ArrayView2<'_, f64>,
) -> Result<WitnessValues> {
    empirical_witness_with(data, w, r, spec, eval_points, Execution::default())
}

pub fn empirical_witness_with(
    data: &PuDataset,
    w: f64,
    r: f64,
    spec: &KernelSpec,
    eval_points: ArrayView2<'_, f64>,
    exec: Execution,
) -> Result<WitnessValues> {
    let value = wmmd_value_with(data.unlabeled(), data.positives(), w, r, spec, exec)?;
    if value == 0.0 {
        return Err(Error::DegenerateWitness);
    }
    let norm = value / r;
    let d = data.dim();
    if eval_points.nrows() > 0 && eval_points.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, got: eval_points.ncols() });
    }
    let pts = eval_points.as_standard_layout();
    let flat = pts.as_slice().unwrap();
    check_finite(flat, "evaluation points")?;
    let (fp, fu) = (data.positives.as_slice().unwrap(), data.unlabeled.as_slice().unwrap());
    let g_hat = par::map_range(exec, eval_points.nrows(), |j| {
        let z = &flat[j * d..(j + 1) * d];
        let mu = spec.mean_unchecked(z, fu, d).value;
        let mp = spec.mean_unchecked(z, fp, d).value;
        r * (mu - w * mp) / norm
    });
    Ok(WitnessValues { value, g_hat })
}

const SUP_NORM_SLACK: f64 = 1e-9;

/// Empirical hinge risk `1 + mean(f_u) - 2 pi mean(f_p)`, valid for
/// functions bounded by one in sup norm.
pub fn empirical_hinge_risk(f_pos: &[f64], f_unl: &[f64], pi_plus: f64) -> Result<f64> {
    check_prior(pi_plus)?;
    if f_pos.is_empty() {
        return Err(Error::Empty("positive function values"));
    }
    if f_unl.is_empty() {
        return Err(Error::Empty("unlabeled function values"));
    }
    // negated so NaN is rejected too
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if let Some(&bad) = f_pos.iter().chain(f_unl).find(|v| !(v.abs() <= 1.0 + SUP_NORM_SLACK)) {
        return Err(Error::OutsideSupNormBall { value: bad });
    }
    let mean = |v: &[f64]| compensated_sum(v.iter().copied()) / v.len() as f64;
    Ok(1.0 + mean(f_unl) - 2.0 * pi_plus * mean(f_pos))
}
