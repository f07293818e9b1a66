//! Synthetic generators.
//!
//! * Gaussian pair: `X | Y=y ~ N(y * (1,1)/sqrt(2), I_2)`, `Y = 2 Bern(pi) - 1`.
//! * Two moons: `X | Y=y, U ~ N(c_y(U), 0.4^2 I_2)` with
//!   `c_y(u) = (2(1+y) - 4y cos(pi u), (1+y) - 4y sin(pi u))`, `U ~ U(0,1)`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;

use super::LabeledDataset;
use crate::error::{Error, Result};
use crate::wmmd::check_prior;

pub const MOON_NOISE_STD: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    Gaussian,
    TwoMoons,
}

impl Generator {
    pub fn sample<R: Rng + ?Sized>(self, n: usize, pi_plus: f64, rng: &mut R) -> Result<LabeledDataset> {
        match self {
            Generator::Gaussian => gen_gaussian_pair(n, pi_plus, rng),
            Generator::TwoMoons => gen_two_moons(n, pi_plus, rng),
        }
    }

    /// `n` draws from the class-conditional distribution of label `y`.
    pub fn sample_class<R: Rng + ?Sized>(self, n: usize, y: i8, rng: &mut R) -> Array2<f64> {
        let mut out = Array2::zeros((n, 2));
        for mut row in out.rows_mut() {
            let x = match self {
                Generator::Gaussian => gaussian_point(y, rng),
                Generator::TwoMoons => moon_point(y, rng),
            };
            row[0] = x[0];
            row[1] = x[1];
        }
        out
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidParameter("sample size must be at least 1".into()))
    } else {
        Ok(())
    }
}

fn draw_label<R: Rng + ?Sized>(pi_plus: f64, rng: &mut R) -> i8 {
    if rng.random::<f64>() < pi_plus {
        1
    } else {
        -1
    }
}

fn gaussian_point<R: Rng + ?Sized>(y: i8, rng: &mut R) -> [f64; 2] {
    let m = f64::from(y) * FRAC_1_SQRT_2;
    let a: f64 = rng.sample(StandardNormal);
    let b: f64 = rng.sample(StandardNormal);
    [m + a, m + b]
}

/// Noise-free moon center for label `y` at position `u` in [0, 1].
pub fn moon_center(y: i8, u: f64) -> [f64; 2] {
    let y = f64::from(y);
    [2.0 * (1.0 + y) - 4.0 * y * (PI * u).cos(), (1.0 + y) - 4.0 * y * (PI * u).sin()]
}

fn moon_point<R: Rng + ?Sized>(y: i8, rng: &mut R) -> [f64; 2] {
    let u: f64 = rng.random();
    let c = moon_center(y, u);
    let a: f64 = rng.sample(StandardNormal);
    let b: f64 = rng.sample(StandardNormal);
    [c[0] + MOON_NOISE_STD * a, c[1] + MOON_NOISE_STD * b]
}

fn generate<R, F>(n: usize, pi_plus: f64, rng: &mut R, name: &str, point: F) -> Result<LabeledDataset>
where
    R: Rng + ?Sized,
    F: Fn(i8, &mut R) -> [f64; 2],
{
    check_n(n)?;
    check_prior(pi_plus)?;
    let mut flat = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let y = draw_label(pi_plus, rng);
        flat.extend_from_slice(&point(y, rng));
        labels.push(y);
    }
    LabeledDataset::new(Array2::from_shape_vec((n, 2), flat).unwrap(), labels, name)
}

pub fn gen_gaussian_pair<R: Rng + ?Sized>(n: usize, pi_plus: f64, rng: &mut R) -> Result<LabeledDataset> {
    generate(n, pi_plus, rng, "gaussian", |y, r| gaussian_point(y, r))
}

pub fn gen_two_moons<R: Rng + ?Sized>(n: usize, pi_plus: f64, rng: &mut R) -> Result<LabeledDataset> {
    generate(n, pi_plus, rng, "two_moons", |y, r| moon_point(y, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::RngStream;

    #[test]
    fn gaussian_class_moments() {
        let n = 20_000;
        let mut rng = RngStream::new(11, 0).rng();
        let ds = gen_gaussian_pair(n, 0.5, &mut rng).unwrap();
        for (label, sign) in [(1i8, 1.0), (-1, -1.0)] {
            let x = ds.rows_with_label(label);
            let m = x.nrows() as f64;
            for j in 0..2 {
                let col = x.column(j);
                let mean = col.sum() / m;
                let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
                assert!((mean - sign * FRAC_1_SQRT_2).abs() < 4.0 / m.sqrt(), "mean {mean}");
                // var of sample variance for N(0,1) is 2/(m-1)
                assert!((var - 1.0).abs() < 4.0 * (2.0 / (m - 1.0)).sqrt(), "var {var}");
            }
        }
    }

    #[test]
    fn label_fraction_concentrates() {
        for pi in [0.1, 0.5, 0.8] {
            let n = 10_000;
            let ds = gen_gaussian_pair(n, pi, &mut RngStream::new(3, 1).rng()).unwrap();
            let tol = 4.0 * (pi * (1.0 - pi) / n as f64).sqrt();
            assert!((ds.positive_fraction() - pi).abs() < tol);
        }
    }

    #[test]
    fn moon_centers() {
        let close = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12;
        assert!(close(moon_center(1, 0.0), [0.0, 2.0]));
        assert!(close(moon_center(-1, 0.0), [4.0, 0.0]));
        assert!(close(moon_center(1, 1.0), [8.0, 2.0]));
    }

    #[test]
    fn deterministic_per_stream() {
        let a = gen_two_moons(50, 0.3, &mut RngStream::new(5, 2).rng()).unwrap();
        let b = gen_two_moons(50, 0.3, &mut RngStream::new(5, 2).rng()).unwrap();
        assert_eq!(a, b);
        let c = gen_gaussian_pair(50, 0.3, &mut RngStream::new(5, 2).rng()).unwrap();
        let d = gen_gaussian_pair(50, 0.3, &mut RngStream::new(5, 2).rng()).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn rejects_invalid() {
        let mut rng = RngStream::new(0, 0).rng();
        assert!(gen_two_moons(0, 0.5, &mut rng).is_err());
        assert!(gen_gaussian_pair(10, 0.0, &mut rng).is_err());
    }
}
