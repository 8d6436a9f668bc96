//! Domain types shared by every solver, plus their validation rules.
//!
//! All types serialize with serde using the field names of the published
//! JSON contract (`N`, `U0`, `E_range`, ...). Complex numbers encode as
//! two-element arrays `[re, im]`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Problem tuple identifying one eigenpair of the quasi-radial equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralParams {
    pub m: i64,
    pub k: i64,
    pub p: f64,
    pub a: f64,
    pub tol: f64,
    #[serde(rename = "N")]
    pub n: usize,
}

impl SpectralParams {
    /// Parameters with the default tolerance and the automatic truncation order.
    pub fn new(m: i64, k: i64, p: f64, a: f64) -> Self {
        let n = if p > 0.0 && p.is_finite() && a.is_finite() {
            default_truncation(m.max(0), p, a)
        } else {
            64
        };
        SpectralParams {
            m,
            k,
            p,
            a,
            tol: 1e-10,
            n,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    /// Exponent of the asymmetric branch factor.
    pub fn exponent(&self) -> f64 {
        self.a / (2.0 * self.p)
    }
}

/// Starting truncation order for the series solvers.
///
/// The recessive coefficients decay roughly like `exp(-2 sqrt(p n))`, so the
/// order grows like `1/p` for small `p`.
pub fn default_truncation(m: i64, p: f64, a: f64) -> usize {
    let n0 = (16.0 * a * a / (p * p) + 64.0 * (m * m) as f64).sqrt();
    let lam_guess = p * p + a.abs() + 2.0 * (m as f64 + 1.0) * p + (m * m) as f64;
    let formula = (4.0 * n0 + 16.0 * p + 8.0 * lam_guess.sqrt()).ceil();
    let decay = (450.0 / p).ceil();
    formula.max(decay).clamp(64.0, 20_000.0) as usize
}

/// Check every invariant of `params`, reporting the first violation.
pub fn validate(params: &SpectralParams) -> Result<SpectralParams> {
    if !params.p.is_finite() || params.p <= 0.0 {
        return Err(Error::validation("p", "p must be positive"));
    }
    if params.m < 0 {
        return Err(Error::validation("m", "m must be nonnegative"));
    }
    if params.k < 0 {
        return Err(Error::validation("k", "k must be nonnegative"));
    }
    if !params.a.is_finite() {
        return Err(Error::validation("a", "a must be finite"));
    }
    if !params.tol.is_finite() || params.tol <= 0.0 {
        return Err(Error::validation("tol", "tol must be positive"));
    }
    if params.n < 8 {
        return Err(Error::validation("N", "N must be at least 8"));
    }
    if !params.exponent().is_finite() {
        return Err(Error::validation("a", "a/(2p) must be finite"));
    }
    Ok(*params)
}

/// Trigonometric-series representation of an eigenfunction.
///
/// `right_coeffs[j]` multiplies `exp(i j phi)` with `phi = arctan(xi)`;
/// `left_coeffs` holds the mirrored set, elementwise conjugate of the right one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigSeriesRep {
    pub params: SpectralParams,
    pub lambda: f64,
    pub right_coeffs: Vec<Complex64>,
    pub left_coeffs: Vec<Complex64>,
    pub scale: f64,
    /// Interval on which the series sum is accurate. Outside it `X` is the
    /// decaying solution integrated inward, matched in value at the ends.
    #[serde(default = "unbounded")]
    pub series_range: [f64; 2],
}

fn unbounded() -> [f64; 2] {
    [-f64::MAX, f64::MAX]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn as_str(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

/// Power-series representation in `u = (1+t^2)/2`, only for `a = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSeriesRep {
    pub params: SpectralParams,
    pub lambda: f64,
    pub parity: Parity,
    pub coeffs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Representation {
    Trig(TrigSeriesRep),
    Power(PowerSeriesRep),
}

impl Representation {
    pub fn params(&self) -> &SpectralParams {
        match self {
            Representation::Trig(r) => &r.params,
            Representation::Power(r) => &r.params,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub det_value: f64,
    pub residual_max: f64,
    #[serde(rename = "N_used")]
    pub n_used: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSolution {
    pub lambda: f64,
    pub node_count: i64,
    pub rep: Representation,
    pub diagnostics: Diagnostics,
}

impl EigenSolution {
    pub fn params(&self) -> &SpectralParams {
        self.rep.params()
    }
}

/// Sampled function with its derivative.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GridFunction {
    pub xi: Vec<f64>,
    pub x: Vec<f64>,
    pub dx: Vec<f64>,
}

impl GridFunction {
    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.x.len() != self.xi.len() || self.dx.len() != self.xi.len() {
            return Err(Error::validation("xi", "sequences must have equal length"));
        }
        if self.xi.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::validation("xi", "xi must be strictly increasing"));
        }
        Ok(())
    }

    /// CSV with header `xi,X,dX` and 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("xi,X,dX\n");
        for i in 0..self.xi.len() {
            out.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", self.xi[i], self.x[i], self.dx[i]));
        }
        out
    }
}

/// Finite-depth spheroidal ring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingConfig {
    pub m: i64,
    #[serde(rename = "U0")]
    pub u0: f64,
    pub xi0: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub lambda: f64,
    #[serde(rename = "E_range")]
    pub e_range: [f64; 2],
    pub tol: f64,
}

impl RingConfig {
    pub fn validate(&self) -> Result<RingConfig> {
        if self.m < 0 {
            return Err(Error::validation("m", "m must be nonnegative"));
        }
        if !self.u0.is_finite() || self.u0 < 0.0 {
            return Err(Error::validation("U0", "U0 must be nonnegative"));
        }
        if !self.xi0.is_finite() || self.xi0 <= 0.0 {
            return Err(Error::validation("xi0", "xi0 must be positive"));
        }
        if !self.r.is_finite() || self.r <= 0.0 {
            return Err(Error::validation("R", "R must be positive"));
        }
        if !self.lambda.is_finite() {
            return Err(Error::validation("lambda", "lambda must be finite"));
        }
        let [lo, hi] = self.e_range;
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
            return Err(Error::validation("E_range", "E_range must be nonempty"));
        }
        if hi >= 0.0 {
            return Err(Error::validation("E_range", "E_range must lie below zero"));
        }
        if !self.tol.is_finite() || self.tol <= 0.0 {
            return Err(Error::validation("tol", "tol must be positive"));
        }
        Ok(*self)
    }

    /// `s = |E| R^2 / 2`.
    pub fn s_of(&self, e: f64) -> f64 {
        e.abs() * self.r * self.r / 2.0
    }
}

/// One matched ring level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingLevel {
    #[serde(rename = "E")]
    pub e: f64,
    pub s: f64,
    pub parity: Parity,
    pub mismatch: f64,
    pub interior: GridFunction,
    pub exterior: GridFunction,
}
