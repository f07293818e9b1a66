use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::wmmd::check_prior;

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { expected: a, got: b });
    }
    if a == 0 {
        return Err(Error::Empty("prediction vector"));
    }
    Ok(())
}

/// Fraction of positions where `pred` and `truth` agree.
pub fn accuracy(pred: &[i8], truth: &[i8]) -> Result<f64> {
    check_lengths(truth.len(), pred.len())?;
    let hits = pred.iter().zip(truth).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / pred.len() as f64)
}

/// Area under the ROC curve as the Mann-Whitney statistic, with half credit
/// for tied (positive, negative) pairs.
///
/// Pair counts are accumulated in integer half-units, so the result is the
/// same double as the mean over all pairs computed directly.
pub fn auc(scores: &[f64], truth: &[i8]) -> Result<f64> {
    check_lengths(truth.len(), scores.len())?;
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::NonFinite("scores"));
    }
    let n_pos = truth.iter().filter(|&&y| y == 1).count() as u128;
    let n_neg = truth.len() as u128 - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::InvalidParameter("AUC needs both classes in the truth vector".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap_or(Ordering::Equal));

    let mut half_units: u128 = 0;
    let mut neg_below: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        let (mut p, mut n) = (0u128, 0u128);
        while i < order.len() && scores[order[i]] == s {
            if truth[order[i]] == 1 {
                p += 1;
            } else {
                n += 1;
            }
            i += 1;
        }
        half_units += 2 * p * neg_below + p * n;
        neg_below += n;
    }
    Ok(half_units as f64 / (2 * n_pos * n_neg) as f64)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Bayes accuracy of the synthetic Gaussian pair, whose class means are at
/// distance 2. The log-likelihood ratio along the mean difference is `2u`
/// with `u ~ N(+-1, 1)`, thresholded at `t = ln(pi_minus / pi_plus)`.
pub fn bayes_accuracy_gaussian(pi_plus: f64) -> Result<f64> {
    check_prior(pi_plus)?;
    let pi_minus = 1.0 - pi_plus;
    let t = (pi_minus / pi_plus).ln();
    Ok(pi_plus * normal_cdf(1.0 - t / 2.0) + pi_minus * normal_cdf(1.0 + t / 2.0))
}

/// Welch's two-sample t statistic, `None` if either sample has fewer than
/// two values or both variances vanish.
pub fn welch_t(a: &[f64], b: &[f64]) -> Option<f64> {
    fn moments(x: &[f64]) -> (f64, f64) {
        let n = x.len() as f64;
        let m = x.iter().sum::<f64>() / n;
        let v = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, v / n)
    }
    if a.len() < 2 || b.len() < 2 {
        return None;
    }
    let (ma, va) = moments(a);
    let (mb, vb) = moments(b);
    let se = (va + vb).sqrt();
    (se > 0.0).then(|| (ma - mb) / se)
}
