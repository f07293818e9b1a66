use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// `ln(1 + e^-z)` without overflow.
pub fn loss_logistic(z: f64) -> f64 {
    if z > 0.0 {
        (-z).exp().ln_1p()
    } else {
        -z + z.exp().ln_1p()
    }
}

/// `max(0, max(-z, (1 - z) / 2))`
pub fn loss_double_hinge(z: f64) -> f64 {
    0f64.max((-z).max((1.0 - z) / 2.0))
}

/// Losses satisfying `l(z) - l(-z) = -z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PuLoss {
    #[serde(rename = "log")]
    Logistic,
    #[serde(rename = "dh")]
    DoubleHinge,
}

impl PuLoss {
    pub fn value(self, z: f64) -> f64 {
        match self {
            PuLoss::Logistic => loss_logistic(z),
            PuLoss::DoubleHinge => loss_double_hinge(z),
        }
    }

    /// Derivative (a subgradient at the double hinge's kinks).
    pub fn derivative(self, z: f64) -> f64 {
        match self {
            // -1 / (1 + e^z)
            PuLoss::Logistic => {
                if z > 0.0 {
                    let e = (-z).exp();
                    -e / (1.0 + e)
                } else {
                    -1.0 / (1.0 + z.exp())
                }
            }
            PuLoss::DoubleHinge => {
                if z < -1.0 {
                    -1.0
                } else if z < 1.0 {
                    -0.5
                } else {
                    0.0
                }
            }
        }
    }
}

impl fmt::Display for PuLoss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PuLoss::Logistic => "log",
            PuLoss::DoubleHinge => "dh",
        })
    }
}

impl FromStr for PuLoss {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "log" | "logistic" => Ok(PuLoss::Logistic),
            "dh" | "double-hinge" => Ok(PuLoss::DoubleHinge),
            other => Err(Error::InvalidParameter(format!("unknown loss '{other}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn point_values() {
        assert_relative_eq!(loss_logistic(0.0), std::f64::consts::LN_2, epsilon = 1e-15);
        assert_eq!(loss_double_hinge(0.0), 0.5);
        assert_eq!(loss_double_hinge(-1.0), 1.0);
        assert_eq!(loss_double_hinge(3.0), 0.0);
    }

    #[test]
    fn logistic_is_overflow_safe() {
        assert_eq!(loss_logistic(1000.0), 0.0);
        assert_relative_eq!(loss_logistic(-1000.0), 1000.0, max_relative = 1e-15);
        assert!(PuLoss::Logistic.derivative(-1000.0).is_finite());
        assert!(PuLoss::Logistic.derivative(1000.0).is_finite());
    }

    #[test]
    fn linear_odd_identity() {
        for i in 0..=2000 {
            let z = -10.0 + i as f64 * 0.01;
            for loss in [PuLoss::Logistic, PuLoss::DoubleHinge] {
                assert!((loss.value(z) - loss.value(-z) + z).abs() < 1e-12, "{loss} at {z}");
            }
        }
    }

    #[test]
    fn derivative_matches_differences_away_from_kinks() {
        for &z in &[-3.0, -0.4, 0.2, 0.7, 2.5] {
            for loss in [PuLoss::Logistic, PuLoss::DoubleHinge] {
                let h = 1e-6;
                let fd = (loss.value(z + h) - loss.value(z - h)) / (2.0 * h);
                assert!((fd - loss.derivative(z)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn parses_names() {
        assert_eq!("LOG".parse::<PuLoss>().unwrap(), PuLoss::Logistic);
        assert_eq!("dh".parse::<PuLoss>().unwrap(), PuLoss::DoubleHinge);
        assert!("ramp".parse::<PuLoss>().is_err());
    }
}
