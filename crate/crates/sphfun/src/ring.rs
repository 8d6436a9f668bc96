//! Levels of the finite-depth spheroidal ring: the interior solution on
//! `[0, xi0]` is matched to the decaying exterior solution at `xi0`.
//!
//! With `s = |E| R^2 / 2` the exterior equation is the whole-axis equation
//! with `p = sqrt(s)` and `a = 0`. Its decaying solution is computed by a
//! series in `w = (xi - xi0)/(xi + xi0)`, which maps `Re xi > 0` onto the unit
//! disc: `X = e^{-p xi} (xi + xi0)^{a/2p - 1} Y(w)` and the recessive `Y` is
//! the minimal solution of the Taylor-coefficient recurrence.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Parity, RingConfig, RingLevel};
use crate::numerics::{brent, linspace, par_map, pow2_reciprocal};
use crate::oracle::{
    asymptotic_start, exterior_start, normalized_wronskian, parity_start, ring_exterior, ring_interior, sample,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExteriorMethod {
    Series,
    Integration,
}

/// Number of energies in the level scan, per parity class.
pub const SCAN_POINTS: usize = 400;

// truncated power series helpers
fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut out = vec![0.0; n];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0.0 {
            continue;
        }
        for j in 0..n - i {
            out[i + j] += ai * b[j];
        }
    }
    out
}

fn inv(a: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut r = vec![0.0; n];
    r[0] = 1.0 / a[0];
    for k in 1..n {
        let mut s = 0.0;
        for j in 1..=k {
            s += a[j] * r[k - j];
        }
        r[k] = -s / a[0];
    }
    r
}

fn der(a: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut d = vec![0.0; n];
    for k in 1..n {
        d[k - 1] = a[k] * k as f64;
    }
    d
}

fn axpy(alpha: f64, x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| alpha * a + b).collect()
}

/// Energy-independent Taylor series of the exterior expansion. With
/// `psi = -p G1 + sigma G2`, `Y'' + A Y' + B Y = 0` has `A = 2 psi + alpha` and
/// `B = psi' + psi^2 + alpha psi - beta`, all polynomial in `p` and `sigma`.
#[derive(Debug, Clone)]
pub struct ExteriorSeries {
    m: i64,
    a: f64,
    lambda: f64,
    c: f64,
    g1: Vec<f64>,
    g2: Vec<f64>,
    dg1: Vec<f64>,
    dg2: Vec<f64>,
    g11: Vec<f64>,
    g12: Vec<f64>,
    g22: Vec<f64>,
    ag1: Vec<f64>,
    ag2: Vec<f64>,
    alpha: Vec<f64>,
    // beta = lambda bw + p^2 bp - a bx - m^2 bm
    bw: Vec<f64>,
    bp: Vec<f64>,
    bx: Vec<f64>,
    bm: Vec<f64>,
}

impl ExteriorSeries {
    pub fn new(m: i64, a: f64, lambda: f64, xi0: f64, n: usize) -> Self {
        let n = n.max(40);
        let c = xi0;
        let mut one = vec![0.0; n];
        one[0] = 1.0;
        // xi = c (1+w)/(1-w)
        let xi: Vec<f64> = (0..n).map(|k| if k == 0 { c } else { 2.0 * c }).collect();
        // g = dw/dxi = (1-w)^2/(2c), 1/g = 2c sum (k+1) w^k
        let mut g = vec![0.0; n];
        g[0] = 1.0 / (2.0 * c);
        g[1] = -2.0 / (2.0 * c);
        g[2] = 1.0 / (2.0 * c);
        let gw = der(&g);
        let ig: Vec<f64> = (0..n).map(|k| 2.0 * c * (k + 1) as f64).collect();
        // 1/(xi + c) = (1-w)/(2c)
        let mut ixc = vec![0.0; n];
        ixc[0] = 1.0 / (2.0 * c);
        ixc[1] = -1.0 / (2.0 * c);
        let q = axpy(1.0, &mul(&xi, &xi), &one);
        let iq = inv(&q);
        let iqig = mul(&iq, &ig);
        let alpha = axpy(2.0, &mul(&xi, &iqig), &mul(&gw, &ig));
        let ig2 = mul(&ig, &ig);
        let bw = mul(&iq, &ig2);
        let bx = mul(&xi, &bw);
        let bm = mul(&iq, &bw);
        let g1 = ig;
        let g2 = mul(&g1, &ixc);
        ExteriorSeries {
            m,
            a,
            lambda,
            c,
            dg1: der(&g1),
            dg2: der(&g2),
            g11: ig2.clone(),
            g12: mul(&g1, &g2),
            g22: mul(&g2, &g2),
            ag1: mul(&alpha, &g1),
            ag2: mul(&alpha, &g2),
            bp: ig2,
            g1,
            g2,
            alpha,
            bw,
            bx,
            bm,
        }
    }

    fn len(&self) -> usize {
        self.g1.len()
    }

    fn coefficients(&self, p: f64) -> (Vec<f64>, Vec<f64>) {
        let sigma = self.a / (2.0 * p) - 1.0;
        let m2 = (self.m * self.m) as f64;
        let n = self.len();
        let mut big_a = vec![0.0; n];
        let mut big_b = vec![0.0; n];
        for k in 0..n {
            let psi = -p * self.g1[k] + sigma * self.g2[k];
            big_a[k] = 2.0 * psi + self.alpha[k];
            let dpsi = -p * self.dg1[k] + sigma * self.dg2[k];
            let psi2 = p * p * self.g11[k] - 2.0 * p * sigma * self.g12[k] + sigma * sigma * self.g22[k];
            let apsi = -p * self.ag1[k] + sigma * self.ag2[k];
            let beta = self.lambda * self.bw[k] + p * p * self.bp[k] - self.a * self.bx[k] - m2 * self.bm[k];
            big_b[k] = dpsi + psi2 + apsi - beta;
        }
        (big_a, big_b)
    }

    /// Direction `(X, X')` at `xi0` of the solution decaying as `xi -> +inf`,
    /// and the change of that direction between `n - 20` and `n` terms.
    pub fn decaying_state(&self, p: f64) -> ([f64; 2], f64) {
        let n = self.len();
        let (ca, cb) = self.coefficients(p);
        let mut y1 = vec![0.0; n];
        let mut y2 = vec![0.0; n];
        y1[0] = 1.0;
        y2[1] = 1.0;
        for k in 0..n - 2 {
            let mut s1 = 0.0;
            let mut s2 = 0.0;
            for j in 0..=k {
                let d1 = (k - j + 1) as f64;
                let (aj, bj) = (ca[j] * d1, cb[j]);
                s1 += aj * y1[k - j + 1] + bj * y1[k - j];
                s2 += aj * y2[k - j + 1] + bj * y2[k - j];
            }
            let den = ((k + 2) * (k + 1)) as f64;
            y1[k + 2] = -s1 / den;
            y2[k + 2] = -s2 / den;
            let big = y1[k + 2].abs().max(y2[k + 2].abs());
            if big > 1e100 {
                let sc = pow2_reciprocal(big);
                y1.iter_mut().chain(y2.iter_mut()).for_each(|v| *v *= sc);
            }
        }
        let sigma = self.a / (2.0 * p) - 1.0;
        let d = -p + sigma / (2.0 * self.c);
        let c = self.c;
        // minimal combination Y = y2_N y1 - y1_N y2
        let state = |k: usize| {
            let x = y2[k];
            let dx = d * y2[k] - y1[k] / (2.0 * c);
            let nrm = x.hypot(dx);
            [x / nrm, dx / nrm]
        };
        let s_last = state(n - 1);
        let s_prev = state(n - 21);
        (s_last, normalized_wronskian(s_last, s_prev).abs())
    }
}

/// Direction `(X, X')` at `xi0` of the solution of the whole-axis equation that
/// decays as `xi -> +inf`, from the Möbius series with `n` terms.
/// Also returns the change of the direction between `n - 20` and `n` terms.
pub fn decaying_state_series(m: i64, p: f64, a: f64, lambda: f64, xi0: f64, n: usize) -> ([f64; 2], f64) {
    ExteriorSeries::new(m, a, lambda, xi0, n).decaying_state(p)
}

/// Series length for the exterior expansion at `p`, `xi0`.
pub fn series_terms(p: f64, xi0: f64) -> usize {
    ((150.0 / (p * xi0)).ceil() as usize + 60).min(4000)
}

/// Interior boundary state `(X, X')` at `xi0` for the given parity class.
pub fn interior_state(e: f64, config: &RingConfig, parity: Parity) -> Result<(f64, f64)> {
    let y = ring_interior(config, e).propagate(0.0, parity_start(parity), &[config.xi0])?[0];
    Ok((y[0], y[1] / (config.xi0 * config.xi0 + 1.0)))
}

/// Exterior boundary state `(X, X')` at `xi0`, normalized to unit length.
pub fn exterior_state(e: f64, config: &RingConfig, method: ExteriorMethod) -> Result<(f64, f64)> {
    let s = config.s_of(e);
    if !(s > 0.0) {
        return Err(Error::validation("E", "s = |E| R^2 / 2 must be positive"));
    }
    let p = s.sqrt();
    match method {
        ExteriorMethod::Series => {
            let (st, _) =
                decaying_state_series(config.m, p, 0.0, config.lambda, config.xi0, series_terms(p, config.xi0));
            Ok((st[0], st[1]))
        }
        ExteriorMethod::Integration => {
            let l = exterior_start(config, e);
            let y = ring_exterior(config, e).propagate(l, asymptotic_start(l, p, 0.0), &[config.xi0])?[0];
            let dx = y[1] / (config.xi0 * config.xi0 + 1.0);
            let nrm = y[0].hypot(dx);
            Ok((y[0] / nrm, dx / nrm))
        }
    }
}

fn state_p(x: (f64, f64), xi0: f64) -> [f64; 2] {
    [x.0, x.1 * (xi0 * xi0 + 1.0)]
}

/// Post-checks of one accepted level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelCheck {
    #[serde(rename = "E")]
    pub e: f64,
    pub parity: Parity,
    /// Relative jump of `X` across `xi0` after scaling the exterior solution.
    pub value_jump: f64,
    /// Relative jump of `X'` across `xi0`.
    pub derivative_jump: f64,
    /// `|X(4 xi0)| / |X(xi0)|`.
    pub decay_4: f64,
    /// `|X(8 xi0)| / |X(xi0)|`.
    pub decay_8: f64,
    /// Normalized Wronskian between the series and the integrated exterior states.
    pub method_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingScan {
    pub levels: Vec<RingLevel>,
    pub checks: Vec<LevelCheck>,
    pub points_per_parity: usize,
    pub series_terms: usize,
}

fn series_mismatch(config: &RingConfig, series: &ExteriorSeries, e: f64, parity: Parity) -> Result<f64> {
    let inner = interior_state(e, config, parity)?;
    let p = config.s_of(e).sqrt();
    let (outer, _) = series.decaying_state(p);
    Ok(normalized_wronskian(
        state_p(inner, config.xi0),
        [outer[0], outer[1] * (config.xi0 * config.xi0 + 1.0)],
    ))
}

/// Levels with full scan diagnostics.
pub fn ring_scan(config: &RingConfig) -> Result<RingScan> {
    let config = config.validate()?;
    let [elo, ehi] = config.e_range;
    let p_min = config.s_of(ehi).sqrt().min(config.s_of(elo).sqrt());
    let n = series_terms(p_min, config.xi0);
    let series = ExteriorSeries::new(config.m, 0.0, config.lambda, config.xi0, n);
    let grid = linspace(elo, ehi, SCAN_POINTS + 1);
    let mut levels = Vec::new();
    let mut checks = Vec::new();
    for parity in [Parity::Even, Parity::Odd] {
        let vals: Vec<f64> = par_map(&grid, |&e| series_mismatch(&config, &series, e, parity))
            .into_iter()
            .collect::<Result<_>>()?;
        let brackets: Vec<usize> = (0..SCAN_POINTS)
            .filter(|&i| vals[i] == 0.0 || vals[i].signum() != vals[i + 1].signum())
            .collect();
        let found: Vec<Result<Option<(RingLevel, LevelCheck)>>> = par_map(&brackets, |&i| {
            let xtol = config.tol * 1e-2 * (1.0 + grid[i].abs());
            let Some(e) = brent(
                |x| series_mismatch(&config, &series, x, parity).unwrap_or(f64::NAN),
                grid[i],
                grid[i + 1],
                vals[i],
                vals[i + 1],
                xtol,
                200,
            ) else {
                return Ok(None);
            };
            assemble_level(&config, &series, e, parity).map(Some)
        });
        for f in found {
            if let Some((lvl, chk)) = f? {
                levels.push(lvl);
                checks.push(chk);
            }
        }
    }
    let mut idx: Vec<usize> = (0..levels.len()).collect();
    idx.sort_by(|&i, &j| levels[i].e.total_cmp(&levels[j].e));
    Ok(RingScan {
        levels: idx.iter().map(|&i| levels[i].clone()).collect(),
        checks: idx.iter().map(|&i| checks[i]).collect(),
        points_per_parity: SCAN_POINTS + 1,
        series_terms: n,
    })
}

fn assemble_level(
    config: &RingConfig,
    series: &ExteriorSeries,
    e: f64,
    parity: Parity,
) -> Result<(RingLevel, LevelCheck)> {
    let s = config.s_of(e);
    let p = s.sqrt();
    let xi0 = config.xi0;
    let inner = ring_interior(config, e).propagate(0.0, parity_start(parity), &[xi0])?[0];
    let l = exterior_start(config, e);
    let ext = ring_exterior(config, e);
    let outs = ext.propagate(l, asymptotic_start(l, p, 0.0), &[8.0 * xi0, 4.0 * xi0, xi0])?;
    let outer = outs[2];
    let (st, _) = series.decaying_state(p);
    let q0 = xi0 * xi0 + 1.0;
    let method_gap = normalized_wronskian([st[0], st[1] * q0], outer).abs();
    if method_gap > 1e-8 {
        return Err(Error::Disagreement(format!(
            "exterior series and integration differ by {method_gap:e} at E = {e}"
        )));
    }
    // C2 continuity: scale the exterior solution to the interior one
    let scale = if inner[0].abs() >= 1e-8 * inner[1].abs() / q0 && outer[0] != 0.0 {
        inner[0] / outer[0]
    } else {
        inner[1] / outer[1]
    };
    let xin = inner[0];
    let dxin = inner[1] / q0;
    let xout = scale * outer[0];
    let dxout = scale * outer[1] / q0;
    let vnorm = xin.abs().max(xout.abs()).max(f64::MIN_POSITIVE);
    let dnorm = dxin.abs().max(dxout.abs()).max(xin.abs()).max(f64::MIN_POSITIVE);
    let value_jump = (xin - xout).abs() / vnorm.max(dxin.abs());
    let derivative_jump = (dxin - dxout).abs() / dnorm;
    let mismatch = normalized_wronskian(inner, outer);
    let interior = sample(&ring_interior(config, e), 0.0, parity_start(parity), xi0, 101)?;
    let mut exterior = sample(&ext, l, asymptotic_start(l, p, 0.0), xi0, 201)?;
    exterior.x.iter_mut().for_each(|v| *v *= scale);
    exterior.dx.iter_mut().for_each(|v| *v *= scale);
    let x0 = outer[0].abs();
    let check = LevelCheck {
        e,
        parity,
        value_jump,
        derivative_jump,
        decay_4: outs[1][0].abs() / x0,
        decay_8: outs[0][0].abs() / x0,
        method_gap,
    };
    Ok((
        RingLevel {
            e,
            s,
            parity,
            mismatch,
            interior,
            exterior,
        },
        check,
    ))
}

/// Accepted ring levels in ascending energy.
pub fn ring_spectrum(config: &RingConfig) -> Result<Vec<RingLevel>> {
    Ok(ring_scan(config)?.levels)
}

/// `min_k |lambda_k(sqrt s) - lambda|` over the top whole-axis eigenvalues at energy `e`.
/// Vanishes at the levels of a ring with `U0 = 0`.
pub fn reduction_gap(config: &RingConfig, e: f64, count: usize) -> Result<f64> {
    let p = config.s_of(e).sqrt();
    let ev = crate::eigensolver::top_eigenvalues(config.m, p, 0.0, count)?;
    Ok(ev
        .iter()
        .map(|l| (l - config.lambda).abs())
        .fold(f64::INFINITY, f64::min))
}
