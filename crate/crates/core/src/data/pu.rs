use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use super::LabeledDataset;
use crate::error::{Error, Result};
use crate::wmmd::{check_prior, PuDataset};

/// How many hidden positives go into the unlabeled and test sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Composition {
    /// `floor(n * pi)` positives, the rest negatives.
    #[default]
    Fixed,
    /// `Binomial(n, pi)` positives.
    Binomial,
}

impl Composition {
    fn positives<R: Rng + ?Sized>(self, n: usize, pi: f64, rng: &mut R) -> usize {
        match self {
            Composition::Fixed => (n as f64 * pi).floor() as usize,
            Composition::Binomial => Binomial::new(n as u64, pi).expect("pi checked").sample(rng) as usize,
        }
    }
}

/// Output of [`make_pu`]. Row indices refer to the source dataset.
#[derive(Debug, Clone)]
pub struct PuSample {
    pub train: PuDataset,
    /// `None` when `n_te == 0`.
    pub test: Option<LabeledDataset>,
    pub positive_rows: Vec<usize>,
    pub unlabeled_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
}

/// Resamples a labeled dataset into disjoint positive, unlabeled and test
/// sets. The unlabeled and test sets follow `target_pi` (or the dataset's
/// own positive fraction when absent).
pub fn make_pu<R: Rng + ?Sized>(
    data: &LabeledDataset,
    n_p: usize,
    n_u: usize,
    n_te: usize,
    target_pi: Option<f64>,
    composition: Composition,
    rng: &mut R,
) -> Result<PuSample> {
    if n_p == 0 || n_u == 0 {
        return Err(Error::InvalidParameter("n_p and n_u must be at least 1".into()));
    }
    let pi = match target_pi {
        Some(p) => {
            check_prior(p)?;
            p
        }
        None => data.positive_fraction(),
    };
    let mut pos: Vec<usize> = (0..data.len()).filter(|&i| data.labels()[i] == 1).collect();
    let mut neg: Vec<usize> = (0..data.len()).filter(|&i| data.labels()[i] == -1).collect();
    pos.shuffle(rng);
    neg.shuffle(rng);

    let u_pos = composition.positives(n_u, pi, rng);
    let te_pos = composition.positives(n_te, pi, rng);
    let need_pos = n_p + u_pos + te_pos;
    let need_neg = (n_u - u_pos) + (n_te - te_pos);
    if pos.len() < need_pos {
        return Err(Error::InsufficientSamples(format!(
            "positive class has {} rows, {need_pos} requested",
            pos.len()
        )));
    }
    if neg.len() < need_neg {
        return Err(Error::InsufficientSamples(format!(
            "negative class has {} rows, {need_neg} requested",
            neg.len()
        )));
    }

    let positive_rows = pos[..n_p].to_vec();
    let mut unlabeled_rows: Vec<usize> = pos[n_p..n_p + u_pos].iter().chain(&neg[..n_u - u_pos]).copied().collect();
    let mut test_rows: Vec<usize> =
        pos[n_p + u_pos..need_pos].iter().chain(&neg[n_u - u_pos..need_neg]).copied().collect();
    unlabeled_rows.shuffle(rng);
    test_rows.shuffle(rng);

    let train = PuDataset::new(data.select(&positive_rows), data.select(&unlabeled_rows), Some(pi))?;
    let test_labels: Vec<i8> = test_rows.iter().map(|&i| data.labels()[i]).collect();
    let test = if test_rows.is_empty() {
        None
    } else {
        Some(LabeledDataset::new(data.select(&test_rows), test_labels, data.name())?)
    };
    Ok(PuSample { train, test, positive_rows, unlabeled_rows, test_rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::RngStream;
    use ndarray::Array2;
    use std::collections::HashSet;

    fn source(n_pos: usize, n_neg: usize) -> LabeledDataset {
        let n = n_pos + n_neg;
        let x = Array2::from_shape_fn((n, 3), |(i, j)| (i * 3 + j) as f64);
        let labels = (0..n).map(|i| if i < n_pos { 1 } else { -1 }).collect();
        LabeledDataset::new(x, labels, "src").unwrap()
    }

    #[test]
    fn heart_scale_sizes() {
        let ds = source(120, 150);
        let s = make_pu(&ds, 10, 60, 60, Some(0.62), Composition::Fixed, &mut RngStream::new(1, 0).rng()).unwrap();
        assert_eq!(s.train.n_positive(), 10);
        assert_eq!(s.train.n_unlabeled(), 60);
        assert_eq!(s.test.as_ref().unwrap().len(), 60);
        assert_eq!(s.train.pi_plus(), Some(0.62));
    }

    #[test]
    fn fixed_composition_and_disjointness() {
        let ds = source(200, 200);
        let s = make_pu(&ds, 20, 100, 50, Some(0.5), Composition::Fixed, &mut RngStream::new(2, 0).rng()).unwrap();
        let hidden_pos = s.unlabeled_rows.iter().filter(|&&i| ds.labels()[i] == 1).count();
        assert_eq!(hidden_pos, 50);
        assert_eq!(s.test.as_ref().unwrap().n_positive(), 25);
        let all: Vec<usize> = s.positive_rows.iter().chain(&s.unlabeled_rows).chain(&s.test_rows).copied().collect();
        let set: HashSet<_> = all.iter().collect();
        assert_eq!(set.len(), all.len());
        assert!(s.positive_rows.iter().all(|&i| ds.labels()[i] == 1));
    }

    #[test]
    fn floor_rounding_for_hidden_positives() {
        let ds = source(100, 100);
        let s = make_pu(&ds, 5, 7, 3, Some(0.5), Composition::Fixed, &mut RngStream::new(4, 0).rng()).unwrap();
        let hidden_pos = s.unlabeled_rows.iter().filter(|&&i| ds.labels()[i] == 1).count();
        assert_eq!(hidden_pos, 3);
        assert_eq!(s.test.as_ref().unwrap().n_positive(), 1);
    }

    #[test]
    fn insufficient_class_is_named() {
        let ds = source(10, 100);
        let err = make_pu(&ds, 8, 20, 0, Some(0.5), Composition::Fixed, &mut RngStream::new(0, 0).rng()).unwrap_err();
        assert!(err.to_string().contains("positive"), "{err}");
        let ds = source(100, 5);
        let err = make_pu(&ds, 8, 20, 0, Some(0.5), Composition::Fixed, &mut RngStream::new(0, 0).rng()).unwrap_err();
        assert!(err.to_string().contains("negative"), "{err}");
    }

    #[test]
    fn binomial_composition_is_reproducible() {
        let ds = source(300, 300);
        let a = make_pu(&ds, 10, 100, 100, Some(0.3), Composition::Binomial, &mut RngStream::new(9, 1).rng()).unwrap();
        let b = make_pu(&ds, 10, 100, 100, Some(0.3), Composition::Binomial, &mut RngStream::new(9, 1).rng()).unwrap();
        assert_eq!(a.unlabeled_rows, b.unlabeled_rows);
        assert_eq!(a.test_rows, b.test_rows);
    }

    #[test]
    fn defaults_to_empirical_prior() {
        let ds = source(100, 300);
        let s = make_pu(&ds, 10, 40, 0, None, Composition::Fixed, &mut RngStream::new(0, 0).rng()).unwrap();
        assert_eq!(s.train.pi_plus(), Some(0.25));
    }
}
