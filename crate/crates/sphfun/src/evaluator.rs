//! Evaluation of assembled eigenfunctions: values, derivatives, the ODE
//! residual, node counting and normalization.
//!
//! A trigonometric representation evaluates as
//! `X(xi) = A e^{p s}/s ((1-t)/(1+t))^{a/2p} * 2 Re sum_j f_j e^{i j phi}`
//! with `s = sqrt(xi^2+1)` and `phi = arctan xi`; the growing exponential is
//! compensated by the series, which decays like `e^{-2 p s}` on the real axis.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mapping::{prefactor, xi_to_t};
use crate::model::{EigenSolution, GridFunction, PowerSeriesRep, Representation, TrigSeriesRep};
use crate::numerics::{linspace, CompensatedSum};
use crate::oracle::{asymptotic_start, Equation};
use crate::powersolver::power_eval_F;
use crate::quadrature::Integrator;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    MaxAbsOne,
    L2One,
}

/// Value, first and second derivative, and an absolute rounding-error bound for the value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub dx: f64,
    pub d2x: f64,
    pub noise: f64,
}

fn effective_len(f: &[Complex64]) -> usize {
    let total: f64 = f.iter().map(|c| c.norm()).sum();
    let mut tail = 0.0;
    let mut len = f.len();
    while len > 1 {
        let t = tail + f[len - 1].norm();
        if t > 1e-18 * total {
            break;
        }
        tail = t;
        len -= 1;
    }
    len
}

/// `(S, S_phi, S_phiphi, sum |2 f_j|)` for `S = 2 Re sum f_j e^{i j phi}`.
fn trig_sums(f: &[Complex64], phi: f64) -> (f64, f64, f64, f64) {
    let len = effective_len(f);
    let w = Complex64::from_polar(1.0, phi);
    let mut z = Complex64::new(1.0, 0.0);
    let mut s = CompensatedSum::new();
    let mut s1 = CompensatedSum::new();
    let mut s2 = CompensatedSum::new();
    let mut bound = 0.0;
    for (j, &c) in f[..len].iter().enumerate() {
        if j % 16 == 0 {
            z = Complex64::from_polar(1.0, j as f64 * phi);
        }
        let term = c * z;
        let jf = j as f64;
        s.add(2.0 * term.re);
        s1.add(-2.0 * jf * term.im);
        s2.add(-2.0 * jf * jf * term.re);
        bound += 2.0 * c.norm();
        z *= w;
    }
    (s.value(), s1.value(), s2.value(), bound)
}

/// Relative rounding bound accepted for the plain series sum.
const SERIES_NOISE: f64 = 1e-9;

/// Largest interval around the origin, within `|xi| <= 50`, on which the
/// rounding bound of the series stays below `SERIES_NOISE` relative to `|X|`.
pub fn series_range(rep: &TrigSeriesRep) -> [f64; 2] {
    let p = rep.params.p;
    let h = 0.02 / p;
    let steps = (50.0 / h).ceil() as usize;
    let edge = |dir: f64| {
        let mut last_good = 0.0;
        let mut bad_run = 0;
        for i in 0..=steps {
            let xi = (dir * h * i as f64).clamp(-50.0, 50.0);
            let pt = series_point(rep, xi);
            if pt.noise <= SERIES_NOISE * pt.x.abs() {
                last_good = xi;
                bad_run = 0;
            } else {
                bad_run += 1;
                // a short run is a node; a long one is the rounding floor
                if bad_run as f64 * h > 2.0 / p {
                    break;
                }
            }
        }
        last_good
    };
    let hi = edge(1.0);
    let lo = edge(-1.0);
    [
        if lo <= -50.0 { -f64::MAX } else { lo },
        if hi >= 50.0 { f64::MAX } else { hi },
    ]
}

fn eval_trig(rep: &TrigSeriesRep, xi: f64) -> Point {
    let [lo, hi] = rep.series_range;
    if xi < lo || xi > hi {
        let edge = if xi < lo { lo } else { hi };
        if let Some(mut pts) = tail_points(rep, &[xi], edge) {
            return pts.remove(0);
        }
    }
    series_point(rep, xi)
}

/// Decaying solution integrated inward through `xs` (outermost first),
/// scaled to the series at `edge`.
fn tail_points(rep: &TrigSeriesRep, xs: &[f64], edge: f64) -> Option<Vec<Point>> {
    let prm = &rep.params;
    let far = xs[0];
    let l = far.signum() * (far.abs() + 30.0 / prm.p);
    let eq = Equation::whole_axis(prm.m, prm.p, prm.a, rep.lambda);
    let mut outs = xs.to_vec();
    outs.push(edge);
    let ys = eq.propagate(l, asymptotic_start(l, prm.p, prm.a), &outs).ok()?;
    let anchor = ys[xs.len()][0];
    if anchor == 0.0 {
        return None;
    }
    let scale = series_point(rep, edge).x / anchor;
    Some(
        xs.iter()
            .zip(&ys)
            .map(|(&xi, y)| {
                let q = xi * xi + 1.0;
                let x = scale * y[0];
                let dx = scale * y[1] / q;
                Point {
                    x,
                    dx,
                    d2x: (eq.q(xi) * x - 2.0 * xi * dx) / q,
                    noise: 1e-12 * x.abs(),
                }
            })
            .collect(),
    )
}

fn series_point(rep: &TrigSeriesRep, xi: f64) -> Point {
    let p = rep.params.p;
    let e = rep.params.exponent();
    let s2 = xi * xi + 1.0;
    let s = s2.sqrt();
    let g = rep.scale * (p * s - s.ln() - e * xi.asinh()).exp();
    let l1 = p * xi / s - xi / s2 - e / s;
    let l2 = p / (s2 * s) - (1.0 - xi * xi) / (s2 * s2) + e * xi / (s2 * s);
    let (sv, sp, spp, bound) = trig_sums(&rep.right_coeffs, xi.atan());
    let sx = sp / s2;
    let sxx = (spp - 2.0 * xi * sp) / (s2 * s2);
    Point {
        x: g * sv,
        dx: g * (l1 * sv + sx),
        d2x: g * ((l2 + l1 * l1) * sv + 2.0 * l1 * sx + sxx),
        noise: 1e-13 * (g * bound).abs(),
    }
}

fn power_x(rep: &PowerSeriesRep, xi: f64) -> f64 {
    prefactor(xi, rep.params.p) * power_eval_F(rep, xi_to_t(xi)).unwrap_or(f64::NAN)
}

fn eval_power(rep: &PowerSeriesRep, xi: f64) -> Point {
    let h = 1e-4;
    let f: Vec<f64> = (-2..=2).map(|k| power_x(rep, xi + k as f64 * h)).collect();
    let dx = (f[0] - 8.0 * f[1] + 8.0 * f[3] - f[4]) / (12.0 * h);
    let d2x = (-f[0] + 16.0 * f[1] - 30.0 * f[2] + 16.0 * f[3] - f[4]) / (12.0 * h * h);
    Point {
        x: f[2],
        dx,
        d2x,
        noise: 1e-14 * f[2].abs(),
    }
}

/// Evaluate a representation without the convergence check.
pub fn eval_rep(rep: &Representation, xi: f64) -> Point {
    match rep {
        Representation::Trig(r) => eval_trig(r, xi),
        Representation::Power(r) => eval_power(r, xi),
    }
}

/// `eval_rep` at many points; tail points on each side share one integration.
pub fn eval_many(rep: &Representation, xs: &[f64]) -> Vec<Point> {
    let Representation::Trig(r) = rep else {
        return xs.iter().map(|&x| eval_rep(rep, x)).collect();
    };
    let [lo, hi] = r.series_range;
    let mut out: Vec<Option<Point>> = xs
        .iter()
        .map(|&x| (lo..=hi).contains(&x).then(|| series_point(r, x)))
        .collect();
    for (edge, side) in [(hi, 1.0), (lo, -1.0)] {
        let mut idx: Vec<usize> = (0..xs.len())
            .filter(|&i| out[i].is_none() && (xs[i] - edge) * side > 0.0)
            .collect();
        if idx.is_empty() {
            continue;
        }
        // outermost first
        idx.sort_by(|&i, &j| (xs[j] * side).total_cmp(&(xs[i] * side)));
        let pts: Vec<f64> = idx.iter().map(|&i| xs[i]).collect();
        match tail_points(r, &pts, edge) {
            Some(v) => idx.iter().zip(v).for_each(|(&i, pt)| out[i] = Some(pt)),
            None => idx.iter().for_each(|&i| out[i] = Some(series_point(r, xs[i]))),
        }
    }
    out.into_iter().map(|p| p.expect("every point evaluated")).collect()
}

fn require_converged(sol: &EigenSolution) -> Result<()> {
    if !sol.diagnostics.converged {
        return Err(Error::NotConverged("solution is not converged".into()));
    }
    Ok(())
}

#[allow(non_snake_case)]
pub fn eval_X(sol: &EigenSolution, xi: f64) -> Result<f64> {
    require_converged(sol)?;
    Ok(eval_rep(&sol.rep, xi).x)
}

/// `(X, X')` at `xi`.
pub fn eval_with_derivative(sol: &EigenSolution, xi: f64) -> Result<(f64, f64)> {
    require_converged(sol)?;
    let pt = eval_rep(&sol.rep, xi);
    Ok((pt.x, pt.dx))
}

pub fn grid_function(sol: &EigenSolution, xi: &[f64]) -> Result<GridFunction> {
    require_converged(sol)?;
    let mut g = GridFunction::default();
    for (&x, pt) in xi.iter().zip(eval_many(&sol.rep, xi)) {
        g.xi.push(x);
        g.x.push(pt.x);
        g.dx.push(pt.dx);
    }
    Ok(g)
}

/// Pointwise residual of the quasi-radial equation for a representation.
pub fn residual_at(rep: &Representation, lambda: f64, xi: f64) -> (f64, f64) {
    let pt = eval_rep(rep, xi);
    (residual_of(rep.params(), lambda, xi, &pt), pt.x)
}

fn residual_of(prm: &crate::model::SpectralParams, lambda: f64, xi: f64, pt: &Point) -> f64 {
    let q = xi * xi + 1.0;
    let m2 = (prm.m * prm.m) as f64;
    q * pt.d2x + 2.0 * xi * pt.dx - (lambda + prm.p * prm.p * q - prm.a * xi - m2 / q) * pt.x
}

pub fn residual_rep(rep: &Representation, lambda: f64, grid: &[f64]) -> f64 {
    let mut rmax: f64 = 0.0;
    let mut xmax: f64 = 0.0;
    for (&xi, pt) in grid.iter().zip(eval_many(rep, grid)) {
        let r = residual_of(rep.params(), lambda, xi, &pt);
        rmax = rmax.max(r.abs());
        xmax = xmax.max(pt.x.abs());
    }
    if xmax == 0.0 {
        0.0
    } else {
        rmax / xmax
    }
}

/// Max-normalized residual of the quasi-radial equation on `grid`.
pub fn ode_residual(sol: &EigenSolution, grid: &[f64]) -> Result<f64> {
    if grid.len() < 9 {
        return Err(Error::validation("grid", "grid needs at least 9 points"));
    }
    if grid.iter().any(|x| !(x.abs() <= 50.0)) {
        return Err(Error::validation("grid", "grid must lie within |xi| <= 50"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::validation("grid", "grid must be ascending"));
    }
    Ok(residual_rep(&sol.rep, sol.lambda, grid))
}

pub fn count_nodes_rep(rep: &Representation, range: Option<(f64, f64)>, samples: usize) -> i64 {
    let p = rep.params().p;
    let (lo, hi) = range.unwrap_or((-12.0 / p, 12.0 / p));
    let pts = eval_many(rep, &linspace(lo, hi, samples.max(2)));
    let xmax = pts.iter().map(|q| q.x.abs()).fold(0.0, f64::max);
    let mut last = 0.0f64;
    let mut nodes = 0;
    for q in &pts {
        let floor = q.noise.max(1e-12 * xmax);
        if q.x.abs() <= floor {
            continue;
        }
        if last != 0.0 && q.x.signum() != last {
            nodes += 1;
        }
        last = q.x.signum();
    }
    nodes
}

/// Sign changes of `X` on `range` (default `[-12/p, 12/p]`), ignoring values
/// below the rounding floor.
pub fn count_nodes(sol: &EigenSolution, range: Option<(f64, f64)>, samples: usize) -> Result<i64> {
    if samples < 1000 {
        return Err(Error::validation("samples", "samples must be at least 1000"));
    }
    Ok(count_nodes_rep(&sol.rep, range, samples))
}

/// Location and signed value of the extremum of `|X|`.
fn peak(rep: &Representation) -> (f64, f64) {
    let p = rep.params().p;
    let xs = linspace(-12.0 / p, 12.0 / p, 4001);
    let h = xs[1] - xs[0];
    let mut best: (f64, f64) = (0.0, 0.0);
    for (&x, pt) in xs.iter().zip(eval_many(rep, &xs)) {
        if pt.x.abs() > best.1.abs() {
            best = (x, pt.x);
        }
    }
    // golden-section refinement on |X|
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (best.0 - h, best.0 + h);
    let f = |x: f64| eval_rep(rep, x).x.abs();
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..60 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let xm = 0.5 * (a + b);
    let vm = eval_rep(rep, xm).x;
    if vm.abs() >= best.1.abs() {
        (xm, vm)
    } else {
        best
    }
}

fn rescale(rep: &mut Representation, factor: f64) {
    match rep {
        Representation::Trig(r) => r.scale *= factor,
        Representation::Power(r) => r.coeffs.iter_mut().for_each(|c| *c *= factor),
    }
}

/// `int X^2 dxi` over `[-40/p, 40/p]`.
pub fn l2_norm_squared(rep: &Representation) -> f64 {
    let p = rep.params().p;
    let q = Integrator::default();
    q.integrate_batch(
        |xs| eval_many(rep, xs).iter().map(|pt| pt.x * pt.x).collect(),
        -40.0 / p,
        40.0 / p,
        64,
        1e-13,
    )
}

/// Rescale so that `max |X| = 1` or `int X^2 = 1`. The sign is fixed so that
/// `X` is positive where `|X|` peaks.
pub fn normalize(sol: &EigenSolution, convention: Normalization) -> Result<EigenSolution> {
    let mut out = sol.clone();
    let (_, v) = peak(&out.rep);
    if v == 0.0 || !v.is_finite() {
        return Err(Error::Degenerate("cannot normalize a zero function".into()));
    }
    let factor = match convention {
        Normalization::MaxAbsOne => 1.0 / v,
        Normalization::L2One => {
            let n2 = l2_norm_squared(&out.rep);
            if !(n2 > 0.0) {
                return Err(Error::Degenerate("cannot normalize a zero function".into()));
            }
            v.signum() / n2.sqrt()
        }
    };
    rescale(&mut out.rep, factor);
    Ok(out)
}
