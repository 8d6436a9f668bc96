//! Gragg–Bulirsch–Stoer extrapolation integrator for small smooth systems.

use crate::error::{Error, Result};

const SEQ: [usize; 9] = [2, 4, 6, 8, 10, 12, 14, 16, 18];

#[derive(Debug, Clone, Copy)]
pub struct Gbs {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; `None` picks one from the interval length.
    pub h0: Option<f64>,
}

impl Default for Gbs {
    fn default() -> Self {
        Gbs {
            rtol: 1e-12,
            atol: 1e-300,
            h0: None,
        }
    }
}

fn midpoint<const D: usize, F>(f: &mut F, x: f64, y: &[f64; D], dy0: &[f64; D], big_h: f64, n: usize) -> [f64; D]
where
    F: FnMut(f64, &[f64; D]) -> [f64; D],
{
    let h = big_h / n as f64;
    let mut zm = *y;
    let mut z = [0.0; D];
    for i in 0..D {
        z[i] = y[i] + h * dy0[i];
    }
    for k in 1..n {
        let d = f(x + h * k as f64, &z);
        for i in 0..D {
            let t = zm[i] + 2.0 * h * d[i];
            zm[i] = z[i];
            z[i] = t;
        }
    }
    let d = f(x + big_h, &z);
    let mut out = [0.0; D];
    for i in 0..D {
        out[i] = 0.5 * (zm[i] + z[i] + h * d[i]);
    }
    out
}

impl Gbs {
    /// Integrate `y' = f(x, y)` from `x0` to each point of `outputs` in turn
    /// (monotone in the direction of integration). Returns the states at the outputs.
    pub fn solve<const D: usize, F>(&self, mut f: F, x0: f64, y0: [f64; D], outputs: &[f64]) -> Result<Vec<[f64; D]>>
    where
        F: FnMut(f64, &[f64; D]) -> [f64; D],
    {
        let mut out = Vec::with_capacity(outputs.len());
        let Some(&last) = outputs.last() else {
            return Ok(out);
        };
        let dir = if last >= x0 { 1.0 } else { -1.0 };
        let span = (last - x0).abs();
        let mut h = self.h0.unwrap_or((span / 16.0).clamp(1e-3, 0.5)) * dir;
        let mut x = x0;
        let mut y = y0;
        for &target in outputs {
            if (target - x) * dir < 0.0 {
                return Err(Error::Domain("output points must be monotone".into()));
            }
            while (target - x) * dir > 0.0 {
                let remaining = target - x;
                let clipped = remaining.abs() <= h.abs() * 1.0000001;
                let step = if clipped { remaining } else { h };
                let (y_new, h_next, accepted) = self.attempt(&mut f, x, &y, step);
                if accepted {
                    x = if clipped { target } else { x + step };
                    y = y_new;
                    // a short clipped step says nothing about the usable step size
                    if !clipped {
                        h = h_next;
                    }
                } else {
                    h = h_next;
                    if h.abs() < 1e-13 * x.abs().max(1.0) {
                        return Err(Error::Stiffness { xi: x });
                    }
                }
            }
            out.push(y);
        }
        Ok(out)
    }

    fn attempt<const D: usize, F>(&self, f: &mut F, x: f64, y: &[f64; D], big_h: f64) -> ([f64; D], f64, bool)
    where
        F: FnMut(f64, &[f64; D]) -> [f64; D],
    {
        let dy0 = f(x, y);
        let mut table: Vec<[f64; D]> = Vec::with_capacity(SEQ.len());
        let mut last_fac = 0.2;
        for k in 0..SEQ.len() {
            let t0 = midpoint(f, x, y, &dy0, big_h, SEQ[k]);
            // Neville extrapolation in h^2 over the row
            let mut row = vec![t0];
            for j in 1..=k {
                let ratio = (SEQ[k] as f64 / SEQ[k - j] as f64).powi(2) - 1.0;
                let prev = &table[j - 1];
                let cur = row[j - 1];
                let mut next = [0.0; D];
                for i in 0..D {
                    next[i] = cur[i] + (cur[i] - prev[i]) / ratio;
                }
                row.push(next);
            }
            if k >= 1 {
                let best = row[k];
                let lower = row[k - 1];
                let mut err: f64 = 0.0;
                for i in 0..D {
                    let sc = self.atol + self.rtol * best[i].abs().max(y[i].abs());
                    err = err.max((best[i] - lower[i]).abs() / sc);
                }
                let expo = 1.0 / (2 * k + 1) as f64;
                let fac = if err == 0.0 {
                    4.0
                } else {
                    (0.94 * (0.65 / err).powf(expo)).clamp(0.2, 4.0)
                };
                last_fac = fac;
                if err <= 1.0 {
                    let grow = if k <= 4 { fac } else { fac.min(1.0) };
                    return (best, big_h * grow, true);
                }
                if !err.is_finite() {
                    return (*y, big_h * 0.2, false);
                }
            }
            // keep the full row as the next row's "previous" entries
            table = row;
        }
        (*y, big_h * last_fac.min(0.5), false)
    }
}
