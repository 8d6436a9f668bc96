//! Eigenvalues of the whole-axis problem from the trigonometric (generalized
//! Jaffe) expansion.
//!
//! The coefficients `c_nu`, `nu` in Z, of the expansion in `exp(i nu phi)`
//! (`phi = arctan xi`) obey a five-term recurrence. A real eigenfunction has
//! `c_{-nu} = conj(c_nu)`, so only `nu >= 0` is stored. For large `nu` the
//! recurrence admits a two-dimensional recessive subspace; it is built by
//! backward recursion from the seeds `(c_N, c_{N-1}) = (1, 0)` and `(0, 1)`.
//! The rows `nu = 0, 1` of the conjugate-symmetric extension and the reality
//! of `c_0` give four real conditions on the two complex combination
//! constants, a real 4x4 system `M(lambda)`.
//!
//! `det M` touches zero quadratically at every eigenvalue, so eigenvalues
//! are located as sign changes of `d det M / d lambda`, which is propagated
//! exactly through the recursion. Stationary points of `det M` that are not
//! rank drops are rejected by the singular-value ratio of `M`.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::evaluator;
use crate::mapping::Branch;
use crate::model::{validate, Diagnostics, EigenSolution, Representation, SpectralParams, TrigSeriesRep};
use crate::numerics::{brent, par_map, pow2_reciprocal};
use crate::recurrence::{five_term_table, FiveTermTable, SetId};

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);
const RESCALE_AT: f64 = 1e100;
/// Singular-value ratio below which a stationary point of `det M` is a rank drop.
pub const RANK_DROP: f64 = 1e-8;
/// Residual bound for accepting an assembled eigenfunction.
pub const RESIDUAL_TOL: f64 = 1e-6;

/// Scan step in lambda.
pub const SCAN_STEP: f64 = 0.05;

/// The two recessive solutions of the five-term recurrence for `nu = 0..=N`
/// and, optionally, their lambda-derivatives.
#[derive(Debug, Clone)]
pub struct Family {
    pub u: Vec<C>,
    pub v: Vec<C>,
    pub du: Vec<C>,
    pub dv: Vec<C>,
    /// Row at which the backward step hit a zero pivot and the basis was recombined.
    pub pivot_row: Option<i64>,
}

fn table_for(m: i64, p: f64, a: f64, lambda: f64, side: Branch) -> FiveTermTable {
    let set = match side {
        Branch::Right => SetId::FSet,
        Branch::Left => SetId::GSet,
    };
    five_term_table(m, p, a, lambda, set)
}

/// Deferred shears `v -= kappa u` for the stored indices `>= start`.
fn apply_shears(shears: &mut Vec<(usize, C)>, u: &[C], v: &mut [C], du: &[C], dv: &mut [C]) {
    if shears.is_empty() {
        return;
    }
    shears.sort_by_key(|s| s.0);
    let mut acc = ZERO;
    let mut next = 0;
    for i in 0..v.len() {
        while next < shears.len() && shears[next].0 <= i {
            acc += shears[next].1;
            next += 1;
        }
        if acc != ZERO {
            v[i] -= acc * u[i];
            if !dv.is_empty() {
                dv[i] -= acc * du[i];
            }
        }
    }
    shears.clear();
}

/// Backward recursion of the recessive pair over the rows `nu = N..=2`.
///
/// The two recessive solutions grow at different algebraic rates when
/// `a != 0`, so `v` is re-orthogonalized against `u` on the recursion window
/// whenever the two become nearly parallel. The shear is unimodular, so the
/// span and `det M` are unchanged.
pub fn family(table: &FiveTermTable, m: i64, n: usize, with_derivative: bool) -> Family {
    let len = n + 3;
    let mut u = vec![ZERO; len];
    let mut v = vec![ZERO; len];
    let mut du = vec![ZERO; if with_derivative { len } else { 0 }];
    let mut dv = vec![ZERO; if with_derivative { len } else { 0 }];
    u[n] = C::new(1.0, 0.0);
    v[n - 1] = C::new(1.0, 0.0);
    let mut pivot_row = None;
    let mut shears: Vec<(usize, C)> = Vec::new();

    for nu in (2..=n).rev() {
        let r = table.row(nu as i64 + m);
        let val = |s: &[C]| r[0] * s[nu + 2] + r[1] * s[nu + 1] + r[2] * s[nu] + r[3] * s[nu - 1];
        let dval =
            |s: &[C], ds: &[C]| r[0] * ds[nu + 2] + r[1] * ds[nu + 1] + r[2] * ds[nu] + 4.0 * s[nu] + r[3] * ds[nu - 1];
        if r[4].norm() == 0.0 {
            // The row fixes a combination instead of c_{nu-2}: keep the combination
            // satisfying it and add the free unit vector at nu-2.
            apply_shears(&mut shears, &u, &mut v, &du, &mut dv);
            let ru = val(&u);
            let rv = val(&v);
            let mut w: Vec<C> = (0..len).map(|i| rv * u[i] - ru * v[i]).collect();
            if with_derivative {
                let dru = dval(&u, &du);
                let drv = dval(&v, &dv);
                let mut dw: Vec<C> = (0..len)
                    .map(|i| drv * u[i] + rv * du[i] - dru * v[i] - ru * dv[i])
                    .collect();
                let sc = pow2_reciprocal(max_norm(&w).max(f64::MIN_POSITIVE));
                w.iter_mut().for_each(|x| *x *= sc);
                dw.iter_mut().for_each(|x| *x *= sc);
                du = dw;
                dv = vec![ZERO; len];
            } else {
                let sc = pow2_reciprocal(max_norm(&w).max(f64::MIN_POSITIVE));
                w.iter_mut().for_each(|x| *x *= sc);
            }
            u = w;
            v = vec![ZERO; len];
            v[nu - 2] = C::new(1.0, 0.0);
            pivot_row = Some(nu as i64);
            continue;
        }
        let nu_new = nu - 2;
        let un = -val(&u) / r[4];
        let vn = -val(&v) / r[4];
        if with_derivative {
            let dun = -dval(&u, &du) / r[4];
            let dvn = -dval(&v, &dv) / r[4];
            du[nu_new] = dun;
            dv[nu_new] = dvn;
        }
        u[nu_new] = un;
        v[nu_new] = vn;
        let big = un.norm().max(vn.norm());
        if big > RESCALE_AT {
            let sc = pow2_reciprocal(big);
            for x in u.iter_mut().chain(v.iter_mut()) {
                *x *= sc;
            }
            for x in du.iter_mut().chain(dv.iter_mut()) {
                *x *= sc;
            }
        }
        let top = (nu_new + 3).min(len - 1);
        let (mut uu, mut vv, mut uv) = (0.0, 0.0, ZERO);
        for i in nu_new..=top {
            uu += u[i].norm_sqr();
            vv += v[i].norm_sqr();
            uv += u[i].conj() * v[i];
        }
        if uu > 0.0 && uv.norm_sqr() > 0.25 * uu * vv {
            let kappa = uv / uu;
            for i in nu_new..=top {
                v[i] -= kappa * u[i];
                if with_derivative {
                    dv[i] -= kappa * du[i];
                }
            }
            shears.push((top + 1, kappa));
        }
    }
    apply_shears(&mut shears, &u, &mut v, &du, &mut dv);
    u.truncate(n + 1);
    v.truncate(n + 1);
    if with_derivative {
        du.truncate(n + 1);
        dv.truncate(n + 1);
    }
    Family {
        u,
        v,
        du,
        dv,
        pivot_row,
    }
}

fn max_norm(s: &[C]) -> f64 {
    s.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

fn get_sym(c: &[C], k: i64) -> C {
    if k >= 0 {
        c.get(k as usize).copied().unwrap_or(ZERO)
    } else {
        c.get((-k) as usize).copied().unwrap_or(ZERO).conj()
    }
}

/// Rows 0 and 1 of the conjugate-symmetric extension of `c`.
fn symmetric_rows(table: &FiveTermTable, m: i64, c: &[C]) -> [C; 2] {
    let mut out = [ZERO; 2];
    for (idx, nu) in [0i64, 1].into_iter().enumerate() {
        let r = table.row(nu + m);
        out[idx] = (0..5).map(|j| r[j] * get_sym(c, nu + 2 - j as i64)).sum();
    }
    out
}

/// Same rows differentiated in lambda.
fn symmetric_rows_derivative(table: &FiveTermTable, m: i64, c: &[C], dc: &[C]) -> [C; 2] {
    let mut out = [ZERO; 2];
    for (idx, nu) in [0i64, 1].into_iter().enumerate() {
        let r = table.row(nu + m);
        let s: C = (0..5).map(|j| r[j] * get_sym(dc, nu + 2 - j as i64)).sum();
        out[idx] = s + 4.0 * get_sym(c, nu);
    }
    out
}

const BASIS: [(C, C); 4] = [
    (C::new(1.0, 0.0), ZERO),
    (C::new(0.0, 1.0), ZERO),
    (ZERO, C::new(1.0, 0.0)),
    (ZERO, C::new(0.0, 1.0)),
];

fn combine(k1: C, k2: C, u: &[C], v: &[C]) -> Vec<C> {
    u.iter().zip(v).map(|(&x, &y)| k1 * x + k2 * y).collect()
}

/// The real 4x4 match system and its lambda-derivative.
pub fn match_system(table: &FiveTermTable, m: i64, fam: &Family) -> (Matrix4<f64>, Option<Matrix4<f64>>) {
    let mut mm = Matrix4::zeros();
    let with_d = !fam.du.is_empty();
    let mut dm = Matrix4::zeros();
    for (col, &(k1, k2)) in BASIS.iter().enumerate() {
        let c = combine(k1, k2, &fam.u[..4], &fam.v[..4]);
        let [r0, r1] = symmetric_rows(table, m, &c);
        mm.set_column(col, &Vector4::new(r0.re, r1.re, r1.im, c[0].im));
        if with_d {
            let dc = combine(k1, k2, &fam.du[..4], &fam.dv[..4]);
            let [d0, d1] = symmetric_rows_derivative(table, m, &c, &dc);
            dm.set_column(col, &Vector4::new(d0.re, d1.re, d1.im, dc[0].im));
        }
    }
    (mm, with_d.then_some(dm))
}

/// `det M` and its exact lambda-derivative, up to a common positive factor.
pub fn det_and_derivative(params: &SpectralParams, lambda: f64, n: usize) -> (f64, f64) {
    let table = table_for(params.m, params.p, params.a, lambda, Branch::Right);
    let fam = family(&table, params.m, n, true);
    let (mm, dm) = match_system(&table, params.m, &fam);
    let dm = dm.expect("derivative requested");
    let det = mm.determinant();
    let mut ddet = 0.0;
    for j in 0..4 {
        let mut r = mm;
        r.set_column(j, &dm.column(j));
        ddet += r.determinant();
    }
    (det, ddet)
}

/// Scale `M` by the size of the recurrence rows and of the basis sequences so
/// that the singular-value ratio does not depend on the arbitrary seeds.
fn balanced(table: &FiveTermTable, m: i64, fam: &Family, mut mm: Matrix4<f64>) -> (Matrix4<f64>, [f64; 4]) {
    let row_scale = |nu: i64| {
        let r = table.row(nu + m);
        r.iter().map(|x| x.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE)
    };
    let rs = [row_scale(0), row_scale(1), row_scale(1), 1.0];
    let nu = max_norm(&fam.u).max(f64::MIN_POSITIVE);
    let nv = max_norm(&fam.v).max(f64::MIN_POSITIVE);
    let cs = [nu, nu, nv, nv];
    for i in 0..4 {
        for j in 0..4 {
            mm[(i, j)] /= rs[i] * cs[j];
        }
    }
    (mm, cs)
}

fn sv_ratio(mm: &Matrix4<f64>) -> f64 {
    let sv = mm.singular_values();
    let max = sv.max();
    if max == 0.0 {
        return f64::NAN;
    }
    sv.min() / max
}

fn match_determinant_n(params: &SpectralParams, lambda: f64, n: usize) -> Result<f64> {
    let table = table_for(params.m, params.p, params.a, lambda, Branch::Right);
    let fam = family(&table, params.m, n, false);
    let (mm, _) = match_system(&table, params.m, &fam);
    if mm.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical(format!(
            "non-finite match system at lambda = {lambda}"
        )));
    }
    Ok(sv_ratio(&balanced(&table, params.m, &fam, mm).0))
}

/// Scale-free rank deficiency `sigma_min / sigma_max` of the column-normalized match system.
pub fn match_determinant(params: &SpectralParams, lambda: f64) -> Result<f64> {
    let params = validate(params)?;
    match_determinant_n(&params, lambda, params.n)
}

/// Recessive pair on one side, extended to `nu = -2` by the one-sided rows 1 and 0.
#[derive(Debug, Clone)]
pub struct RecessivePair {
    /// `first[i]` holds the coefficient with index `i - 2`.
    pub first: Vec<C>,
    pub second: Vec<C>,
    pub pivot_row: Option<i64>,
}

impl RecessivePair {
    pub fn first_at(&self, n: i64) -> C {
        self.first[(n + 2) as usize]
    }

    pub fn second_at(&self, n: i64) -> C {
        self.second[(n + 2) as usize]
    }
}

pub fn recessive_pair(params: &SpectralParams, lambda: f64, side: Branch) -> Result<RecessivePair> {
    let params = validate(params)?;
    if !lambda.is_finite() {
        return Err(Error::validation("lambda", "lambda must be finite"));
    }
    let table = table_for(params.m, params.p, params.a, lambda, side);
    let fam = family(&table, params.m, params.n, false);
    let extend = |s: &[C]| -> Result<Vec<C>> {
        let mut out = vec![ZERO, ZERO];
        out.extend_from_slice(s);
        out.extend_from_slice(&[ZERO, ZERO]);
        // out[i] <-> index i-2; rows nu = 1, 0 give c_{-1}, c_{-2}
        for nu in [1i64, 0] {
            let i = (nu + 2) as usize;
            let r = table.row(nu + params.m);
            if r[4].norm() == 0.0 {
                return Err(Error::Pivot { row: nu });
            }
            let acc = r[0] * out[i + 2] + r[1] * out[i + 1] + r[2] * out[i] + r[3] * out[i - 1];
            out[i - 2] = -acc / r[4];
        }
        out.truncate(out.len() - 2);
        Ok(out)
    };
    Ok(RecessivePair {
        first: extend(&fam.u)?,
        second: extend(&fam.v)?,
        pivot_row: fam.pivot_row,
    })
}

/// One-sided regularity determinant `det [[f~_-1, f~~_-1], [f~_-2, f~~_-2]]`,
/// normalized by the largest coefficient of each sequence. Real part for `a != 0`.
pub fn side_determinant(params: &SpectralParams, lambda: f64, side: Branch) -> Result<f64> {
    let pair = match recessive_pair(params, lambda, side) {
        Ok(p) => p,
        Err(Error::Pivot { row }) => {
            return Err(Error::Degenerate(format!(
                "zero pivot in row {row} of the downward extension"
            )))
        }
        Err(e) => return Err(e),
    };
    let n1 = max_norm(&pair.first);
    let n2 = max_norm(&pair.second);
    if n1 == 0.0 || n2 == 0.0 {
        return Err(Error::Degenerate("identically zero column".into()));
    }
    let d = pair.first_at(-1) * pair.second_at(-2) - pair.first_at(-2) * pair.second_at(-1);
    Ok(d.re / (n1 * n2))
}

/// Default lambda bracket for the scan, `[lo, hi]`.
pub fn scan_bracket(m: i64, k: i64, p: f64, a: f64) -> (f64, f64) {
    let mf = m as f64;
    let lo = -(p * p + a.abs() + 2.0 * (k as f64 + mf + 1.0) * p + mf * mf) - 10.0;
    (lo, p * p + 10.0)
}

const MAX_EXTENSIONS: usize = 6;

/// Roots from `scan` over `[lo, hi]`, then over lower windows of doubling width
/// until at least `want` are found. Returns them descending, with the final lower end.
///
/// The default bracket grows linearly in `k`, the spectrum faster, so highly
/// excited states need the extra windows.
pub fn scan_down<F>(lo: f64, hi: f64, want: usize, mut scan: F) -> Result<(Vec<f64>, f64)>
where
    F: FnMut(f64, f64) -> Result<Vec<f64>>,
{
    let mut roots = scan(lo, hi)?;
    let (mut bottom, mut width) = (lo, hi - lo);
    for _ in 0..MAX_EXTENSIONS {
        if roots.len() >= want {
            break;
        }
        width *= 2.0;
        roots.extend(scan(bottom - width, bottom)?);
        roots.dedup_by(|x, y| (*x - *y).abs() < 1e-9 * (1.0 + x.abs()));
        bottom -= width;
    }
    Ok((roots, bottom))
}

fn refine(params: &SpectralParams, n: usize, lo: f64, hi: f64, dlo: f64, dhi: f64) -> Option<f64> {
    let xtol = (params.tol * 1e-3).max(1e-15) * (1.0 + lo.abs().max(hi.abs()));
    brent(|x| det_and_derivative(params, x, n).1, lo, hi, dlo, dhi, xtol, 200)
}

/// Eigenvalues in `[lo, hi]`, descending, at truncation order `n`.
pub fn eigenvalues_in(params: &SpectralParams, lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    let count = ((hi - lo) / SCAN_STEP).ceil().max(1.0) as usize;
    let grid: Vec<f64> = (0..=count).map(|i| hi - (hi - lo) * i as f64 / count as f64).collect();
    let ds: Vec<f64> = par_map(&grid, |&x| det_and_derivative(params, x, n).1);
    if ds.iter().any(|d| !d.is_finite()) {
        return Err(Error::Numerical("non-finite determinant during scan".into()));
    }
    let pairs: Vec<usize> = (0..count)
        .filter(|&i| ds[i] == 0.0 || ds[i].signum() != ds[i + 1].signum())
        .collect();
    let roots: Vec<Option<f64>> = par_map(&pairs, |&i| {
        let r = refine(params, n, grid[i + 1], grid[i], ds[i + 1], ds[i])?;
        let ratio = match_determinant_n(params, r, n).ok()?;
        (ratio < RANK_DROP).then_some(r)
    });
    let mut out: Vec<f64> = roots.into_iter().flatten().collect();
    out.dedup_by(|x, y| (*x - *y).abs() < 1e-9 * (1.0 + x.abs()));
    Ok(out)
}

/// The `count` largest eigenvalues, descending.
pub fn top_eigenvalues(m: i64, p: f64, a: f64, count: usize) -> Result<Vec<f64>> {
    let params = validate(&SpectralParams::new(m, count as i64, p, a))?;
    let (lo, hi) = scan_bracket(m, count as i64, p, a);
    let (mut ev, _) = scan_down(lo, hi, count, |lo, hi| eigenvalues_in(&params, lo, hi, params.n))?;
    ev.truncate(count);
    Ok(ev)
}

/// Refine an isolated eigenvalue near `guess` at truncation order `n`.
fn track(params: &SpectralParams, guess: f64, n: usize) -> Option<f64> {
    let mut w = 0.01;
    while w <= 0.2 {
        let lo = guess - w;
        let hi = guess + w;
        let dlo = det_and_derivative(params, lo, n).1;
        let dhi = det_and_derivative(params, hi, n).1;
        if dlo.signum() != dhi.signum() {
            let r = refine(params, n, lo, hi, dlo, dhi)?;
            let ok = match_determinant_n(params, r, n).ok()? < RANK_DROP;
            return ok.then_some(r);
        }
        w *= 2.0;
    }
    None
}

/// Null vector of the match system assembled into coefficients `f_j`, `j = 0..=N`,
/// with `f_0 = c_0 / 2`, so `S(phi) = 2 Re sum f_j exp(i j phi)`.
pub fn assemble_coeffs(params: &SpectralParams, lambda: f64, n: usize) -> (Vec<C>, f64) {
    let table = table_for(params.m, params.p, params.a, lambda, Branch::Right);
    let fam = family(&table, params.m, n, false);
    let (mm, _) = match_system(&table, params.m, &fam);
    let (bm, norms) = balanced(&table, params.m, &fam, mm);
    let ratio = sv_ratio(&bm);
    let svd = bm.svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let (imin, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
    let kvec: Vec<f64> = (0..4)
        .map(|j| if norms[j] > 0.0 { vt[(imin, j)] / norms[j] } else { 0.0 })
        .collect();
    let k1 = C::new(kvec[0], kvec[1]);
    let k2 = C::new(kvec[2], kvec[3]);
    let mut c = combine(k1, k2, &fam.u, &fam.v);
    c[0] = C::new(c[0].re * 0.5, 0.0);
    let big = max_norm(&c);
    if big > 0.0 {
        c.iter_mut().for_each(|x| *x /= big);
    }
    (c, ratio)
}

fn trig_rep(params: &SpectralParams, lambda: f64, n: usize) -> (TrigSeriesRep, f64) {
    let (coeffs, ratio) = assemble_coeffs(params, lambda, n);
    let left = coeffs.iter().map(|c| c.conj()).collect();
    let rep = TrigSeriesRep {
        params: SpectralParams { n, ..*params },
        lambda,
        right_coeffs: coeffs,
        left_coeffs: left,
        scale: 1.0,
        series_range: [-f64::MAX, f64::MAX],
    };
    let rep = TrigSeriesRep {
        series_range: evaluator::series_range(&rep),
        ..rep
    };
    (rep, ratio)
}

const MAX_DOUBLINGS: usize = 5;

/// Find the eigenpair with `params.k` nodes.
pub fn find_eigenvalue(params: &SpectralParams) -> Result<EigenSolution> {
    let params = validate(params)?;
    let (lo, hi) = scan_bracket(params.m, params.k, params.p, params.a);
    let mut n = params.n;
    let (roots, lo) = scan_down(lo, hi, params.k as usize + 1, |lo, hi| {
        eigenvalues_in(&params, lo, hi, n)
    })?;
    let mut found = Vec::new();
    let mut chosen = None;
    for &r in &roots {
        let (rep, _) = trig_rep(&params, r, n);
        let nodes = evaluator::count_nodes_rep(&Representation::Trig(rep), None, 4000);
        found.push(nodes);
        if nodes == params.k {
            chosen = Some(r);
            break;
        }
        if nodes > params.k {
            break;
        }
    }
    let mut lambda = chosen.ok_or_else(|| Error::NotFound {
        k: params.k,
        lo,
        hi,
        found: found.clone(),
    })?;

    let mut robust = false;
    for _ in 0..MAX_DOUBLINGS {
        let Some(l2) = track(&params, lambda, 2 * n) else {
            break;
        };
        if (l2 - lambda).abs() < 10.0 * params.tol * lambda.abs().max(1.0) {
            robust = true;
            break;
        }
        n *= 2;
        lambda = l2;
    }

    let (rep, ratio) = trig_rep(&params, lambda, n);
    let rep = Representation::Trig(rep);
    let nodes = evaluator::count_nodes_rep(&rep, None, 4000);
    let grid = crate::numerics::linspace(-10.0, 10.0, 801);
    let residual = evaluator::residual_rep(&rep, lambda, &grid);
    let mut sol = EigenSolution {
        lambda,
        node_count: nodes,
        rep,
        diagnostics: Diagnostics {
            det_value: ratio,
            residual_max: residual,
            n_used: n,
            converged: false,
        },
    };
    sol.diagnostics.converged = robust && nodes == params.k && residual < RESIDUAL_TOL && ratio < RANK_DROP;
    let sol = evaluator::normalize(&sol, evaluator::Normalization::MaxAbsOne)?;
    if !sol.diagnostics.converged {
        return Err(Error::NotConverged(format!(
            "lambda = {lambda}, nodes = {nodes}, residual = {residual:e}, det = {ratio:e}, N = {n}, robust = {robust}"
        )));
    }
    Ok(sol)
}
