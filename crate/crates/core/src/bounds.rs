//! Estimation-error bound calculators for the WMMD classifier over an RKHS
//! ball, and the condition under which the Talagrand-based bound is sharper
//! than the McDiarmid-based one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `w / sqrt(n_p) + 1 / sqrt(n_u)`
pub fn chi1(w: f64, n_p: u64, n_u: u64) -> f64 {
    w / (n_p as f64).sqrt() + 1.0 / (n_u as f64).sqrt()
}

/// `2 (w / n_p + 1 / n_u)`
pub fn chi2(w: f64, n_p: u64, n_u: u64) -> f64 {
    2.0 * (w / n_p as f64 + 1.0 / n_u as f64)
}

/// Inputs shared by the bound calculators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub n_p: u64,
    pub n_u: u64,
    pub pi_plus: f64,
    /// Sup-norm envelope of the hypothesis class, in (0, 1].
    pub nu: f64,
    /// Variance envelope.
    pub rho: f64,
    /// Confidence parameter; the bound holds with probability `1 - e^-tau`.
    pub tau: f64,
    pub alpha: f64,
}

impl BoundInputs {
    /// `nu = rho = 1` (the unit-ball envelope), `tau = alpha = 1`.
    pub fn new(n_p: u64, n_u: u64, pi_plus: f64) -> Self {
        Self { n_p, n_u, pi_plus, nu: 1.0, rho: 1.0, tau: 1.0, alpha: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.n_p == 0 || self.n_u == 0 {
            return bad("sample sizes must be positive");
        }
        if !(self.pi_plus > 0.0 && self.pi_plus < 1.0) {
            return bad("pi_plus must lie in (0, 1)");
        }
        if !(self.nu > 0.0 && self.nu <= 1.0) {
            return bad("nu must lie in (0, 1]");
        }
        if !(self.rho >= 0.0 && self.rho.is_finite()) {
            return bad("rho must be non-negative");
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) || !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad("tau and alpha must be positive");
        }
        Ok(())
    }

    fn w(&self) -> f64 {
        2.0 * self.pi_plus
    }

    pub fn chi1(&self) -> f64 {
        chi1(self.w(), self.n_p, self.n_u)
    }

    pub fn chi2(&self) -> f64 {
        chi2(self.w(), self.n_p, self.n_u)
    }

    /// `4 (1 + alpha)`
    pub fn c_alpha(&self) -> f64 {
        4.0 * (1.0 + self.alpha)
    }

    /// `2 sqrt(2 tau rho^2)`
    pub fn c1(&self) -> f64 {
        2.0 * (2.0 * self.tau * self.rho * self.rho).sqrt()
    }

    /// `2 tau nu (2/3 + 1/alpha)`
    pub fn c2(&self) -> f64 {
        2.0 * self.tau * self.nu * (2.0 / 3.0 + 1.0 / self.alpha)
    }
}

/// `(C_alpha + C1) chi1(2 pi) + C2 chi2(2 pi)`.
pub fn explicit_estimation_bound(b: &BoundInputs) -> Result<f64> {
    b.validate()?;
    Ok((b.c_alpha() + b.c1()) * b.chi1() + b.c2() * b.chi2())
}

/// True when `(1 + nu)/2 - 5 sqrt(2 tau) chi2 nu / (6 chi1) >= rho`.
pub fn bound_comparison_condition(b: &BoundInputs) -> Result<bool> {
    b.validate()?;
    let lhs = (1.0 + b.nu) / 2.0 - 5.0 * (2.0 * b.tau).sqrt() * b.chi2() * b.nu / (6.0 * b.chi1());
    Ok(lhs >= b.rho)
}
