//! The map `t = xi / (sqrt(xi^2 + 1) + 1)` between the whole axis and `(-1, 1)`,
//! the phase of the basic monomials and the analytic prefactors.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Right,
    Left,
}

pub fn xi_to_t(xi: f64) -> f64 {
    let t = xi.abs() / ((xi * xi + 1.0).sqrt() + 1.0);
    if xi.is_sign_negative() {
        -t
    } else {
        t
    }
}

pub fn t_to_xi(t: f64) -> Result<f64> {
    if !(t.abs() < 1.0) {
        return Err(Error::Domain(format!("|t| must be below 1, got {t}")));
    }
    Ok(2.0 * t / ((1.0 - t) * (1.0 + t)))
}

/// `theta` with `(t - i)/(t + i) = exp(i theta)` on the branch `2 arctan(t) - pi`.
pub fn monomial_phase(t: f64) -> f64 {
    2.0 * t.atan() - PI
}

/// `exp(-p s)/s` with `s = sqrt(xi^2 + 1)`.
pub fn prefactor(xi: f64, p: f64) -> f64 {
    let s = xi.hypot(1.0);
    (-p * s).exp() / s
}

/// Branch factors `((1+t)/(1-t))^(a/2p)` (right) and `((1-t)/(1+t))^(a/2p)` (left).
pub fn asym_factor(t: f64, a: f64, p: f64, branch: Branch) -> Result<f64> {
    if !(t.abs() < 1.0) {
        return Err(Error::Domain(format!("|t| must be below 1, got {t}")));
    }
    if a == 0.0 {
        return Ok(1.0);
    }
    // ln((1+t)/(1-t)) = 2 atanh(t)
    let log_ratio = 2.0 * t.atanh();
    let e = a / (2.0 * p);
    Ok(match branch {
        Branch::Right => (e * log_ratio).exp(),
        Branch::Left => (-e * log_ratio).exp(),
    })
}

/// `ln((1+t)/(1-t))` at `t = t(xi)`. The ratio equals `xi + sqrt(xi^2+1)`.
pub fn log_branch_ratio(xi: f64) -> f64 {
    xi.asinh()
}
