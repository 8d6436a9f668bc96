//! Brute-force reference: direct integration of the quasi-radial equation and
//! shooting for eigenvalues and ring levels.
//!
//! All integration uses the state `(X, P)` with `P = (xi^2 + 1) X'`.

use crate::error::{Error, Result};
use crate::model::{GridFunction, Parity, RingConfig, RingLevel};
use crate::numerics::{bisect, linspace, par_map};
use crate::ode::Gbs;

/// `d/dxi[(xi^2+1) X'] = Q(xi) X` with
/// `Q = lambda + p2 (xi^2+1) - a xi - u0 xi^2 - m^2/(xi^2+1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equation {
    pub m: i64,
    pub lambda: f64,
    pub p2: f64,
    pub a: f64,
    pub u0: f64,
}

impl Equation {
    pub fn whole_axis(m: i64, p: f64, a: f64, lambda: f64) -> Self {
        Equation {
            m,
            lambda,
            p2: p * p,
            a,
            u0: 0.0,
        }
    }

    pub fn q(&self, xi: f64) -> f64 {
        let q = xi * xi + 1.0;
        self.lambda + self.p2 * q - self.a * xi - self.u0 * xi * xi - (self.m * self.m) as f64 / q
    }

    pub fn rhs(&self, xi: f64, y: &[f64; 2]) -> [f64; 2] {
        [y[1] / (xi * xi + 1.0), self.q(xi) * y[0]]
    }

    /// States `(X, P)` at `outputs`, starting from `(X, P)` at `from`.
    pub fn propagate(&self, from: f64, y0: [f64; 2], outputs: &[f64]) -> Result<Vec<[f64; 2]>> {
        Gbs::default().solve(|x, y| self.rhs(x, y), from, y0, outputs)
    }
}

/// Decaying start state at `xi` (`|xi|` large) with the amplitude set to 1.
///
/// `X ~ e^{-p s}/s |2 xi|^{sigma}`, `sigma = a/2p` for `xi > 0` and `-a/2p` for `xi < 0`.
pub fn asymptotic_start(xi: f64, p: f64, a: f64) -> [f64; 2] {
    let s2 = xi * xi + 1.0;
    let s = s2.sqrt();
    let sigma = if xi > 0.0 { a / (2.0 * p) } else { -a / (2.0 * p) };
    let dlog = -p * xi / s - xi / s2 + sigma / xi;
    [1.0, s2 * dlog]
}

fn to_grid(xi: &[f64], states: &[[f64; 2]]) -> GridFunction {
    let mut idx: Vec<usize> = (0..xi.len()).collect();
    idx.sort_by(|&i, &j| xi[i].total_cmp(&xi[j]));
    let mut g = GridFunction::default();
    for i in idx {
        g.xi.push(xi[i]);
        g.x.push(states[i][0]);
        g.dx.push(states[i][1] / (xi[i] * xi[i] + 1.0));
    }
    g
}

/// Integrate the whole-axis equation from `from_xi` to `to_xi` starting at
/// `initial = (X, X')`; the trajectory is sampled at `samples` equispaced points.
pub fn integrate(
    m: i64,
    p: f64,
    a: f64,
    lambda: f64,
    from_xi: f64,
    to_xi: f64,
    initial: (f64, f64),
    samples: usize,
) -> Result<GridFunction> {
    if !(from_xi.abs() <= 200.0 && to_xi.abs() <= 200.0) {
        return Err(Error::validation("xi", "|xi| must not exceed 200"));
    }
    let eq = Equation::whole_axis(m, p, a, lambda);
    let xs = linspace(from_xi, to_xi, samples.max(2));
    let y0 = [initial.0, initial.1 * (from_xi * from_xi + 1.0)];
    let mut states = vec![y0];
    states.extend(eq.propagate(from_xi, y0, &xs[1..])?);
    Ok(to_grid(&xs, &states))
}

/// Normalized Wronskian `(X1 P2 - X2 P1) / (|(X1,P1)| |(X2,P2)|)`.
pub fn normalized_wronskian(s1: [f64; 2], s2: [f64; 2]) -> f64 {
    let n = s1[0].hypot(s1[1]) * s2[0].hypot(s2[1]);
    if n == 0.0 {
        return 0.0;
    }
    (s1[0] * s2[1] - s2[0] * s1[1]) / n
}

/// Matching function of the shooting method at `lambda`: the normalized Wronskian
/// at `xi = 0` of the solutions decaying at `+L` and `-L`.
pub fn shooting_mismatch(m: i64, p: f64, a: f64, lambda: f64, l: f64) -> Result<f64> {
    let eq = Equation::whole_axis(m, p, a, lambda);
    let r = eq.propagate(l, asymptotic_start(l, p, a), &[0.0])?[0];
    let lft = eq.propagate(-l, asymptotic_start(-l, p, a), &[0.0])?[0];
    Ok(normalized_wronskian(r, lft))
}

/// Eigenvalue bracketed in `lambda_bracket`, bisected to `1e-10`.
pub fn shoot_eigenvalue(m: i64, p: f64, a: f64, lambda_bracket: (f64, f64), l: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::validation("p", "p must be positive"));
    }
    if l < 25.0 / p {
        return Err(Error::validation("L", "L must be at least 25/p"));
    }
    let (lo, hi) = lambda_bracket;
    let flo = shooting_mismatch(m, p, a, lo, l)?;
    let fhi = shooting_mismatch(m, p, a, hi, l)?;
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoBracket { lo, hi });
    }
    Ok(bisect(
        |x| shooting_mismatch(m, p, a, x, l).unwrap_or(f64::NAN),
        lo,
        hi,
        flo,
        1e-10,
    ))
}

/// All shooting eigenvalues in `[lo, hi]`, descending.
pub fn shoot_spectrum(m: i64, p: f64, a: f64, lo: f64, hi: f64, l: f64) -> Result<Vec<f64>> {
    let count = ((hi - lo) / 0.05).ceil().max(1.0) as usize;
    let grid: Vec<f64> = (0..=count).map(|i| hi - (hi - lo) * i as f64 / count as f64).collect();
    let vals: Vec<Result<f64>> = par_map(&grid, |&x| shooting_mismatch(m, p, a, x, l));
    let vals: Vec<f64> = vals.into_iter().collect::<Result<_>>()?;
    let pairs: Vec<usize> = (0..count)
        .filter(|&i| vals[i].signum() != vals[i + 1].signum())
        .collect();
    par_map(&pairs, |&i| shoot_eigenvalue(m, p, a, (grid[i + 1], grid[i]), l))
        .into_iter()
        .collect()
}

/// The eigenvalue with `k` nodes by shooting (k-th from the top of the default bracket).
pub fn oracle_eigenvalue(m: i64, k: i64, p: f64, a: f64) -> Result<f64> {
    let (lo, hi) = crate::eigensolver::scan_bracket(m, k, p, a);
    let (spec, lo) = crate::eigensolver::scan_down(lo, hi, k as usize + 1, |lo, hi| {
        shoot_spectrum(m, p, a, lo, hi, 30.0 / p)
    })?;
    spec.get(k as usize).copied().ok_or(Error::NotFound {
        k,
        lo,
        hi,
        found: (0..spec.len() as i64).collect(),
    })
}

/// Interior equation of the ring at energy `e`.
pub fn ring_interior(config: &RingConfig, e: f64) -> Equation {
    Equation {
        m: config.m,
        lambda: config.lambda,
        p2: config.s_of(e),
        a: 0.0,
        u0: config.u0,
    }
}

/// Exterior equation of the ring at energy `e`.
pub fn ring_exterior(config: &RingConfig, e: f64) -> Equation {
    Equation {
        u0: 0.0,
        ..ring_interior(config, e)
    }
}

pub fn parity_start(parity: Parity) -> [f64; 2] {
    match parity {
        Parity::Even => [1.0, 0.0],
        Parity::Odd => [0.0, 1.0],
    }
}

/// Point from which the exterior solution is integrated inward.
pub fn exterior_start(config: &RingConfig, e: f64) -> f64 {
    let s = config.s_of(e);
    (25.0 / s.sqrt()).max(12.0 * config.xi0).min(200.0)
}

fn ring_states(config: &RingConfig, e: f64, parity: Parity) -> Result<([f64; 2], [f64; 2])> {
    let s = config.s_of(e);
    let inner = ring_interior(config, e).propagate(0.0, parity_start(parity), &[config.xi0])?[0];
    let l = exterior_start(config, e);
    let outer = ring_exterior(config, e).propagate(l, asymptotic_start(l, s.sqrt(), 0.0), &[config.xi0])?[0];
    Ok((inner, outer))
}

/// Ring levels by direct integration on both sides of `xi0`.
pub fn oracle_ring(config: &RingConfig) -> Result<Vec<RingLevel>> {
    let config = config.validate()?;
    let [elo, ehi] = config.e_range;
    let count = 400;
    let grid = linspace(elo, ehi, count + 1);
    let mut levels = Vec::new();
    for parity in [Parity::Even, Parity::Odd] {
        let mism = |e: f64| ring_states(&config, e, parity).map(|(i, o)| normalized_wronskian(i, o));
        let vals: Vec<f64> = par_map(&grid, |&e| mism(e)).into_iter().collect::<Result<_>>()?;
        for i in 0..count {
            if vals[i] == 0.0 || vals[i].signum() != vals[i + 1].signum() {
                let e = bisect(
                    |x| mism(x).unwrap_or(f64::NAN),
                    grid[i],
                    grid[i + 1],
                    vals[i],
                    config.tol * 1e-2,
                );
                let (inner, outer) = ring_states(&config, e, parity)?;
                let interior = sample(&ring_interior(&config, e), 0.0, parity_start(parity), config.xi0, 101)?;
                let l = exterior_start(&config, e);
                let s = config.s_of(e);
                let mut exterior = sample(
                    &ring_exterior(&config, e),
                    l,
                    asymptotic_start(l, s.sqrt(), 0.0),
                    config.xi0,
                    101,
                )?;
                let scale = if outer[0].abs() > 1e-300 && inner[0].abs() >= inner[1].abs() * 1e-8 {
                    inner[0] / outer[0]
                } else {
                    inner[1] / outer[1]
                };
                exterior.x.iter_mut().for_each(|v| *v *= scale);
                exterior.dx.iter_mut().for_each(|v| *v *= scale);
                levels.push(RingLevel {
                    e,
                    s,
                    parity,
                    mismatch: normalized_wronskian(inner, outer),
                    interior,
                    exterior,
                });
            }
        }
    }
    levels.sort_by(|a, b| a.e.total_cmp(&b.e));
    Ok(levels)
}

/// Trajectory of `eq` from `from` (state `(X, P)`) sampled between `from` and `to`.
pub(crate) fn sample(eq: &Equation, from: f64, y0: [f64; 2], to: f64, count: usize) -> Result<GridFunction> {
    let xs = linspace(from, to, count);
    let mut states = vec![y0];
    states.extend(eq.propagate(from, y0, &xs[1..])?);
    Ok(to_grid(&xs, &states))
}
