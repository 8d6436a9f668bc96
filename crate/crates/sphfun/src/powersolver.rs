//! Eigenvalues for `a = 0` from the four-term recurrences of the parity
//! expansions in `u = (1+t^2)/2`.
//!
//! The recessive coefficient sequence is generated downward from
//! `f_N = 1, f_{N+1} = f_{N+2} = 0`. Each table has one row whose
//! `f_{n-1}` coefficient vanishes identically (row 1 for the even table,
//! row 0 for the odd one); the recursion stops there and the remaining
//! equation of that row is the eigencondition.
//!
//! The even table produces the eigenvalues with an odd node count and the
//! odd table those with an even node count.

use crate::eigensolver::{scan_bracket, scan_down};
use crate::error::{Error, Result};
use crate::model::{
    default_truncation, Diagnostics, EigenSolution, Parity, PowerSeriesRep, Representation, SpectralParams,
};
use crate::numerics::{brent, par_map, pow2_reciprocal, CompensatedSum};
use crate::recurrence::{four_term_step_backward, four_term_table, FourTermTable};

const RESCALE_AT: f64 = 1e100;
const SCAN_STEP: f64 = 0.05;

fn stop_row(parity: Parity) -> i64 {
    match parity {
        Parity::Even => 1,
        Parity::Odd => 0,
    }
}

/// Node-count parity served by a table.
pub fn k_offset(parity: Parity) -> i64 {
    match parity {
        Parity::Even => 1,
        Parity::Odd => 0,
    }
}

/// Table whose eigenvalues carry `k` nodes.
pub fn parity_for_k(k: i64) -> Parity {
    if k % 2 == 1 {
        Parity::Even
    } else {
        Parity::Odd
    }
}

/// Recessive coefficients `f_0..=f_N` (max-normalized) and the scale-free
/// residual of the terminating row.
pub fn recessive_coeffs(table: &FourTermTable, n: usize) -> (Vec<f64>, f64) {
    let stop = stop_row(table.parity);
    let mut f = vec![0.0; n + 3];
    f[n] = 1.0;
    for row in ((stop + 1)..=(n as i64)).rev() {
        let i = row as usize;
        let next = four_term_step_backward(table, row, &[f[i + 2], f[i + 1], f[i]])
            .expect("pivot only at the terminating row");
        f[i - 1] = next;
        if next.abs() > RESCALE_AT {
            let sc = pow2_reciprocal(next.abs());
            f.iter_mut().for_each(|x| *x *= sc);
        }
    }
    let s = stop as usize;
    let r = table.row(stop);
    let resid = r[0] * f[s + 2] + r[1] * f[s + 1] + r[2] * f[s];
    let rowscale = (r[0] * f[s + 2]).abs() + (r[1] * f[s + 1]).abs() + (r[2] * f[s]).abs();
    if stop == 1 {
        // row 0 with f_{-1} = 0 fixes f_0
        let r0 = table.row(0);
        f[0] = if r0[2] != 0.0 {
            -(r0[0] * f[2] + r0[1] * f[1]) / r0[2]
        } else {
            0.0
        };
    }
    f.truncate(n + 1);
    let big = f.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if big > 0.0 {
        f.iter_mut().for_each(|x| *x /= big);
    }
    let resid = if rowscale > 0.0 { resid / rowscale } else { resid };
    (f, resid)
}

/// Scale-free residual of the terminating row at `lambda`.
pub fn bottom_residual(m: i64, p: f64, parity: Parity, lambda: f64, n: usize) -> f64 {
    recessive_coeffs(&four_term_table(m, p, lambda, parity), n).1
}

fn refine(m: i64, p: f64, parity: Parity, n: usize, lo: f64, hi: f64, flo: f64, fhi: f64, tol: f64) -> Option<f64> {
    let xtol = (tol * 1e-3).max(1e-15) * (1.0 + lo.abs().max(hi.abs()));
    brent(|x| bottom_residual(m, p, parity, x, n), lo, hi, flo, fhi, xtol, 200)
}

/// Roots of the bottom residual in `[lo, hi]`, descending.
pub fn power_eigenvalues_in(m: i64, p: f64, parity: Parity, lo: f64, hi: f64, n: usize, tol: f64) -> Vec<f64> {
    let count = ((hi - lo) / SCAN_STEP).ceil().max(1.0) as usize;
    let grid: Vec<f64> = (0..=count).map(|i| hi - (hi - lo) * i as f64 / count as f64).collect();
    let vals: Vec<f64> = par_map(&grid, |&x| bottom_residual(m, p, parity, x, n));
    let pairs: Vec<usize> = (0..count)
        .filter(|&i| vals[i] == 0.0 || vals[i].signum() != vals[i + 1].signum())
        .collect();
    let roots: Vec<Option<f64>> = par_map(&pairs, |&i| {
        refine(m, p, parity, n, grid[i + 1], grid[i], vals[i + 1], vals[i], tol)
    });
    let mut out: Vec<f64> = roots.into_iter().flatten().collect();
    out.dedup_by(|x, y| (*x - *y).abs() < 1e-9 * (1.0 + x.abs()));
    out
}

fn track(m: i64, p: f64, parity: Parity, guess: f64, n: usize, tol: f64) -> Option<f64> {
    let mut w = 0.01;
    while w <= 0.2 {
        let (lo, hi) = (guess - w, guess + w);
        let flo = bottom_residual(m, p, parity, lo, n);
        let fhi = bottom_residual(m, p, parity, hi, n);
        if flo.signum() != fhi.signum() {
            return refine(m, p, parity, n, lo, hi, flo, fhi, tol);
        }
        w *= 2.0;
    }
    None
}

/// Eigenpair with `k` nodes from the power expansion (`a = 0`).
///
/// `parity` names the table; the even table serves odd `k` and the odd table even `k`.
/// `n = None` selects the automatic truncation order.
pub fn power_find_eigenvalue(
    m: i64,
    p: f64,
    parity: Parity,
    k: i64,
    tol: f64,
    n: Option<usize>,
) -> Result<EigenSolution> {
    let n = n.unwrap_or_else(|| default_truncation(m.max(0), p.max(1e-300), 0.0));
    let params = crate::model::validate(&SpectralParams {
        m,
        k,
        p,
        a: 0.0,
        tol,
        n,
    })?;
    if parity_for_k(k) != parity {
        return Err(Error::validation(
            "parity",
            format!("the {} table does not serve k = {k}", parity.as_str()),
        ));
    }
    let (lo, hi) = scan_bracket(m, k, p, 0.0);
    let mut n = params.n;
    let j = ((k - k_offset(parity)) / 2) as usize;
    let (roots, lo) = scan_down(lo, hi, j + 1, |lo, hi| {
        Ok(power_eigenvalues_in(m, p, parity, lo, hi, n, tol))
    })?;
    let mut lambda = *roots.get(j).ok_or_else(|| Error::NotFound {
        k,
        lo,
        hi,
        found: (0..roots.len() as i64).map(|i| 2 * i + k_offset(parity)).collect(),
    })?;
    let mut robust = false;
    for _ in 0..5 {
        let Some(l2) = track(m, p, parity, lambda, 2 * n, tol) else {
            break;
        };
        if (l2 - lambda).abs() < 10.0 * tol * lambda.abs().max(1.0) {
            robust = true;
            break;
        }
        n *= 2;
        lambda = l2;
    }
    let (coeffs, resid) = recessive_coeffs(&four_term_table(m, p, lambda, parity), n);
    let sol = EigenSolution {
        lambda,
        node_count: k,
        rep: Representation::Power(PowerSeriesRep {
            params: SpectralParams { n, ..params },
            lambda,
            parity,
            coeffs,
        }),
        diagnostics: Diagnostics {
            det_value: resid.abs(),
            residual_max: resid.abs(),
            n_used: n,
            converged: robust && resid.abs() < 1e-6,
        },
    };
    if !sol.diagnostics.converged {
        return Err(Error::NotConverged(format!(
            "power series at lambda = {lambda}, N = {n}, residual = {resid:e}"
        )));
    }
    Ok(sol)
}

/// `F(t) = sum f_n u^n` (even) or `t sum f_n u^n` (odd), `u = (1+t^2)/2`.
#[allow(non_snake_case)]
pub fn power_eval_F(rep: &PowerSeriesRep, t: f64) -> Result<f64> {
    if !(t.abs() < 1.0) {
        return Err(Error::Domain(format!("|t| must be below 1, got {t}")));
    }
    let u = 0.5 * (1.0 + t * t);
    let mut acc = CompensatedSum::new();
    let mut un = 1.0;
    for &c in &rep.coeffs {
        acc.add(c * un);
        un *= u;
        if un == 0.0 {
            break;
        }
    }
    Ok(match rep.parity {
        Parity::Even => acc.value(),
        Parity::Odd => t * acc.value(),
    })
}
