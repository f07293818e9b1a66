//! Kernel evaluation primitives.
//!
//! Two radial families are supported, both parameterized by `gamma > 0` and
//! both satisfying `k(x, x) = 1`:
//!
//! * Gaussian: `k(x, y) = exp(-gamma * |x - y|^2)`
//! * Inverse:  `k(x, y) = gamma / (gamma + |x - y|^2)`
//!
//! Aggregate sums over a sample come back as a [`MeanKernel`], which carries
//! the log of the mean next to its linear value. For the Gaussian family the
//! log is computed by a log-sum-exp reduction, so it stays finite when every
//! individual term underflows. A bandwidth `h` converts to this
//! parameterization as `gamma = 1 / (2 h^2)`.

use std::fmt;
use std::str::FromStr;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    Gaussian,
    Inverse,
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelFamily::Gaussian => f.write_str("gaussian"),
            KernelFamily::Inverse => f.write_str("inverse"),
        }
    }
}

impl FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "rbf" => Ok(KernelFamily::Gaussian),
            "inverse" => Ok(KernelFamily::Inverse),
            other => Err(Error::InvalidParameter(format!("unknown kernel family '{other}'"))),
        }
    }
}

/// Kernel family plus its `gamma` parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    family: KernelFamily,
    gamma: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidParameter(format!("gamma must be positive and finite, got {gamma}")));
        }
        Ok(Self { family, gamma })
    }

    pub fn gaussian(gamma: f64) -> Result<Self> {
        Self::new(KernelFamily::Gaussian, gamma)
    }

    pub fn inverse(gamma: f64) -> Result<Self> {
        Self::new(KernelFamily::Inverse, gamma)
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Kernel value as a function of the squared distance.
    #[inline]
    pub fn from_sq_dist(&self, sq: f64) -> f64 {
        match self.family {
            KernelFamily::Gaussian => (-self.gamma * sq).exp(),
            KernelFamily::Inverse => self.gamma / (self.gamma + sq),
        }
    }

    /// `k(x, y)`, checked.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
        }
        check_finite(x, "kernel argument")?;
        check_finite(y, "kernel argument")?;
        Ok(self.from_sq_dist(sq_dist(x, y)))
    }

    /// Mean of `k(z, x_i)` over the rows of `xs`.
    pub fn mean(&self, z: &[f64], xs: ArrayView2<'_, f64>) -> Result<MeanKernel> {
        let (n, d) = xs.dim();
        if n == 0 {
            return Err(Error::Empty("kernel sample"));
        }
        if d != z.len() {
            return Err(Error::DimensionMismatch { expected: d, got: z.len() });
        }
        check_finite(z, "kernel argument")?;
        let xs = xs.as_standard_layout();
        let flat = xs.as_slice().expect("standard layout");
        check_finite(flat, "kernel sample")?;
        Ok(self.mean_unchecked(z, flat, d))
    }

    /// Mean over the rows of a row-major `flat` buffer with `d` columns.
    /// Inputs are assumed finite and non-empty.
    pub(crate) fn mean_unchecked(&self, z: &[f64], flat: &[f64], d: usize) -> MeanKernel {
        let n = flat.len() / d;
        match self.family {
            KernelFamily::Gaussian => {
                // log-sum-exp over the exponents -gamma * |z - x_i|^2
                let mut max = f64::NEG_INFINITY;
                let mut exps = Vec::with_capacity(n);
                for row in flat.chunks_exact(d) {
                    let e = -self.gamma * sq_dist(z, row);
                    if e > max {
                        max = e;
                    }
                    exps.push(e);
                }
                let shifted = compensated_sum(exps.iter().map(|e| (e - max).exp()));
                let log_value = max + shifted.ln() - (n as f64).ln();
                MeanKernel { value: log_value.exp(), log_value }
            }
            KernelFamily::Inverse => {
                let sum = compensated_sum(flat.chunks_exact(d).map(|row| self.from_sq_dist(sq_dist(z, row))));
                let value = sum / n as f64;
                MeanKernel { value, log_value: value.ln() }
            }
        }
    }
}

/// A kernel mean on both the linear and the log scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanKernel {
    /// `(1/n) sum_i k(z, x_i)`; may underflow to zero.
    pub value: f64,
    /// `ln` of the mean, finite whenever the exponents are.
    pub log_value: f64,
}

/// Squared Euclidean distance. Lengths must match.
#[inline]
pub fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Neumaier summation. Accurate to a few ulps regardless of term order.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    sum + comp
}

pub(crate) fn check_finite(v: &[f64], what: &'static str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn self_similarity_is_one() {
        let x = [3.7, -2.0];
        assert_eq!(KernelSpec::gaussian(1.0).unwrap().eval(&x, &x).unwrap(), 1.0);
        assert_eq!(KernelSpec::inverse(0.3).unwrap().eval(&x, &x).unwrap(), 1.0);
    }

    #[test]
    fn direct_values() {
        let g = KernelSpec::gaussian(1.0).unwrap();
        assert_relative_eq!(g.eval(&[0.0, 0.0], &[1.0, 0.0]).unwrap(), 0.367_879_441_171_442_3, epsilon = 1e-15);
        let inv = KernelSpec::inverse(2.0).unwrap();
        assert_relative_eq!(inv.eval(&[0.0], &[1.0]).unwrap(), 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        let g = KernelSpec::gaussian(1.0).unwrap();
        assert!(matches!(g.eval(&[0.0], &[0.0, 1.0]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(g.eval(&[f64::NAN], &[0.0]), Err(Error::NonFinite(_))));
        assert!(KernelSpec::gaussian(0.0).is_err());
        assert!(KernelSpec::inverse(-1.0).is_err());
        assert!(KernelSpec::gaussian(f64::INFINITY).is_err());
    }

    #[test]
    fn mean_of_single_identical_point() {
        let g = KernelSpec::gaussian(0.7).unwrap();
        let m = g.mean(&[1.0, 2.0], array![[1.0, 2.0]].view()).unwrap();
        assert_eq!(m.value, 1.0);
        assert_eq!(m.log_value, 0.0);
    }

    #[test]
    fn mean_two_term_sum() {
        let g = KernelSpec::gaussian(1.0).unwrap();
        let m = g.mean(&[0.0], array![[0.0], [2.0]].view()).unwrap();
        let expected = (1.0 + (-4.0f64).exp()) / 2.0;
        assert_relative_eq!(m.value, expected, max_relative = 1e-15);
        assert_relative_eq!(expected, 0.509_157_81, epsilon = 1e-8);
    }

    #[test]
    fn mean_far_from_data_keeps_log_scale() {
        let g = KernelSpec::gaussian(1.0).unwrap();
        let m = g.mean(&[1e6], array![[0.0]].view()).unwrap();
        assert_eq!(m.value, 0.0);
        assert_eq!(m.log_value, -1e12);
    }

    #[test]
    fn mean_rejects_empty_and_mismatch() {
        let g = KernelSpec::gaussian(1.0).unwrap();
        let empty = ndarray::Array2::<f64>::zeros((0, 2));
        assert!(matches!(g.mean(&[0.0, 0.0], empty.view()), Err(Error::Empty(_))));
        assert!(matches!(g.mean(&[0.0], array![[0.0, 1.0]].view()), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn family_parses() {
        assert_eq!("Gaussian".parse::<KernelFamily>().unwrap(), KernelFamily::Gaussian);
        assert_eq!("inverse".parse::<KernelFamily>().unwrap(), KernelFamily::Inverse);
        assert!("laplace".parse::<KernelFamily>().is_err());
    }

    fn family() -> impl Strategy<Value = KernelFamily> {
        prop_oneof![Just(KernelFamily::Gaussian), Just(KernelFamily::Inverse)]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn symmetric_and_bounded(
            fam in family(),
            gamma in 1e-3f64..10.0,
            x in prop::collection::vec(-5.0f64..5.0, 3),
            y in prop::collection::vec(-5.0f64..5.0, 3),
        ) {
            let k = KernelSpec::new(fam, gamma).unwrap();
            let a = k.eval(&x, &y).unwrap();
            let b = k.eval(&y, &x).unwrap();
            prop_assert_eq!(a.to_bits(), b.to_bits());
            prop_assert!(a <= 1.0);
            // strictly positive unless the Gaussian term underflows
            if fam == KernelFamily::Inverse || gamma * sq_dist(&x, &y) < 700.0 {
                prop_assert!(a > 0.0);
            }
        }
    }

    proptest! {
        #[test]
        fn mean_matches_naive_sum(
            fam in family(),
            gamma in 1e-2f64..2.0,
            rows in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 2), 1..40),
            z in prop::collection::vec(-3.0f64..3.0, 2),
        ) {
            let k = KernelSpec::new(fam, gamma).unwrap();
            let n = rows.len();
            let flat: Vec<f64> = rows.iter().flatten().copied().collect();
            let xs = ndarray::Array2::from_shape_vec((n, 2), flat).unwrap();
            let naive: f64 = rows.iter().map(|r| k.eval(&z, r).unwrap()).sum::<f64>() / n as f64;
            let m = k.mean(&z, xs.view()).unwrap();
            prop_assert!(((m.value - naive) / naive).abs() < 1e-12);

            let mut rev = rows.clone();
            rev.reverse();
            let flat_rev: Vec<f64> = rev.iter().flatten().copied().collect();
            let xs_rev = ndarray::Array2::from_shape_vec((n, 2), flat_rev).unwrap();
            let m_rev = k.mean(&z, xs_rev.view()).unwrap();
            prop_assert!((m.value - m_rev.value).abs() <= 1e-15);
        }
    }
}
