//! Five-term (general `a`) and four-term (`a = 0`) recurrences in cleared
//! polynomial form, their single-step backward engines, and the
//! characteristic polynomials governing coefficient ratios.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Parity;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetId {
    FSet,
    GSet,
}

/// Coefficients of the five-term recurrence, indexed by offset in the order
/// `[2, 1, 0, -1, -2]`.
///
/// Row `n` reads
/// `(n^2+a2 n+b2) f[n+2] + (a1 n+b1) f[n+1] + (2n^2+a0 n+b0) f[n]
///  + (a-1 n+b-1) f[n-1] + (n^2+a-2 n+b-2) f[n-2] = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiveTermTable {
    pub alpha: [Complex64; 5],
    pub beta: [Complex64; 5],
    pub set_id: SetId,
}

/// Index of offset `j` inside the table arrays.
pub fn offset_index(j: i32) -> usize {
    (2 - j) as usize
}

impl FiveTermTable {
    pub fn alpha_at(&self, j: i32) -> Complex64 {
        self.alpha[offset_index(j)]
    }

    pub fn beta_at(&self, j: i32) -> Complex64 {
        self.beta[offset_index(j)]
    }

    /// Cleared row coefficients multiplying `f[n+2] .. f[n-2]`.
    pub fn row(&self, n: i64) -> [Complex64; 5] {
        let nf = n as f64;
        let n2 = nf * nf;
        let lead = [1.0, 0.0, 2.0, 0.0, 1.0];
        let mut out = [Complex64::new(0.0, 0.0); 5];
        for i in 0..5 {
            out[i] = lead[i] * n2 + self.alpha[i] * nf + self.beta[i];
        }
        out
    }

    /// Residual of row `n` for the window `f[n+2] .. f[n-2]`.
    pub fn residual(&self, n: i64, window: &[Complex64; 5]) -> Complex64 {
        let r = self.row(n);
        (0..5).map(|i| r[i] * window[i]).sum()
    }
}

/// Five-term table obtained by substituting the monomials `z^(n-m)`,
/// `z = (t-i)/(t+i)`, into the transformed equation. The g-set negates `a`.
///
/// The commonly printed table differs from this one in `b2`, `b-2` and the
/// signs of the odd offsets; it is available as [`printed_five_term_table`].
pub fn five_term_table(m: i64, p: f64, a: f64, lambda: f64, set_id: SetId) -> FiveTermTable {
    let a = match set_id {
        SetId::FSet => a,
        SetId::GSet => -a,
    };
    let mf = m as f64;
    let q = Complex64::new(p, a / (2.0 * p));
    let qc = q.conj();
    let b0 = 4.0 * (lambda + p * p - a * a / (4.0 * p * p)) + 2.0;
    let c = |x: f64| Complex64::new(x, 0.0);
    FiveTermTable {
        alpha: [
            c(-2.0 * (mf - 1.0)),
            4.0 * q,
            c(-4.0 * mf),
            -4.0 * qc,
            c(-2.0 * (mf + 1.0)),
        ],
        beta: [
            c(1.0 - 2.0 * mf),
            -4.0 * q * (mf - 0.5),
            c(b0),
            4.0 * qc * (mf + 0.5),
            c(2.0 * mf + 1.0),
        ],
        set_id,
    }
}

/// The five-term table exactly as printed in the source article.
pub fn printed_five_term_table(m: i64, p: f64, a: f64, lambda: f64, set_id: SetId) -> FiveTermTable {
    let a = match set_id {
        SetId::FSet => a,
        SetId::GSet => -a,
    };
    let mf = m as f64;
    let q = p + I * (a / (2.0 * p));
    let qc = p - I * (a / (2.0 * p));
    let b0 = 4.0 * (lambda + p * p - a * a / (4.0 * p * p)) + 2.0;
    let c = |x: f64| Complex64::new(x, 0.0);
    FiveTermTable {
        alpha: [
            c(-2.0 * (mf - 1.0)),
            -4.0 * q,
            c(-4.0 * mf),
            4.0 * qc,
            c(-2.0 * (mf + 1.0)),
        ],
        beta: [
            c(-(mf + 1.0)),
            4.0 * q * (mf - 0.5),
            c(b0),
            -4.0 * qc * (mf + 0.5),
            c(mf - 1.0),
        ],
        set_id,
    }
}

/// Solve row `n` for `f[n-2]` given `window = [f[n+2], f[n+1], f[n], f[n-1]]`.
pub fn five_term_step_backward(table: &FiveTermTable, n: i64, window: &[Complex64; 4]) -> Result<Complex64> {
    let r = table.row(n);
    if r[4].norm() == 0.0 {
        return Err(Error::Pivot { row: n });
    }
    let s = r[0] * window[0] + r[1] * window[1] + r[2] * window[2] + r[3] * window[3];
    Ok(-s / r[4])
}

/// Four-term table for `a = 0`, offsets `[2, 1, 0, -1]`.
///
/// Row `n` reads
/// `(-n^2+a2 n+b2) f[n+2] + (4n^2+a1 n+b1) f[n+1] + (-5n^2+a0 n+b0) f[n]
///  + (2n^2+a-1 n+b-1) f[n-1] = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourTermTable {
    pub alpha: [f64; 4],
    pub beta: [f64; 4],
    pub parity: Parity,
}

impl FourTermTable {
    pub fn row(&self, n: i64) -> [f64; 4] {
        let nf = n as f64;
        let n2 = nf * nf;
        let lead = [-1.0, 4.0, -5.0, 2.0];
        let mut out = [0.0; 4];
        for i in 0..4 {
            out[i] = lead[i] * n2 + self.alpha[i] * nf + self.beta[i];
        }
        out
    }

    pub fn residual(&self, n: i64, window: &[f64; 4]) -> f64 {
        let r = self.row(n);
        (0..4).map(|i| r[i] * window[i]).sum()
    }
}

pub fn four_term_table(m: i64, p: f64, lambda: f64, parity: Parity) -> FourTermTable {
    let m2 = (m * m) as f64;
    match parity {
        Parity::Even => FourTermTable {
            alpha: [-2.0, 2.0 * p + 3.0, -4.0 * p + 2.0, -3.0],
            beta: [m2 - 1.0, p - 2.0 * m2 + 1.0, -lambda - p * p + p + m2 - 1.0, 1.0],
            parity,
        },
        Parity::Odd => FourTermTable {
            alpha: [-2.0, 2.0 * p + 5.0, -4.0 * p - 2.0, -1.0],
            beta: [m2 - 1.0, p - 2.0 * m2 + 2.0, -lambda - p * p - p + m2 - 1.0, 0.0],
            parity,
        },
    }
}

/// Solve row `n` for `f[n-1]` given `window = [f[n+2], f[n+1], f[n]]`.
pub fn four_term_step_backward(table: &FourTermTable, n: i64, window: &[f64; 3]) -> Result<f64> {
    let r = table.row(n);
    if r[3] == 0.0 {
        return Err(Error::Pivot { row: n });
    }
    Ok(-(r[0] * window[0] + r[1] * window[1] + r[2] * window[2]) / r[3])
}

/// `sqrt(16 a^2/p^2 + 64 m^2)`.
pub fn n0_threshold(m: i64, p: f64, a: f64) -> f64 {
    (16.0 * a * a / (p * p) + 64.0 * (m * m) as f64).sqrt()
}

/// A polynomial root with its modulus and residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub value: Complex64,
    pub modulus: f64,
    pub residual: f64,
}

fn horner(coeffs: &[Complex64], x: Complex64) -> (Complex64, Complex64) {
    // coeffs ordered from the leading term down
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

/// Roots of a polynomial given leading-first, via the companion matrix and a
/// few Newton corrections.
pub fn poly_roots(coeffs: &[Complex64]) -> Result<Vec<Root>> {
    let deg = coeffs.len() - 1;
    let lead = coeffs[0];
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if lead.norm() <= 1e-14 * scale {
        return Err(Error::Degenerate("vanishing leading coefficient".into()));
    }
    let mut comp = DMatrix::<Complex64>::zeros(deg, deg);
    for j in 0..deg {
        comp[(0, j)] = -coeffs[j + 1] / lead;
    }
    for i in 1..deg {
        comp[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    let eig = nalgebra::Schur::new(comp)
        .eigenvalues()
        .ok_or_else(|| Error::Numerical("companion eigenvalues failed".into()))?;
    let mut roots = Vec::with_capacity(deg);
    for &z0 in eig.iter() {
        let mut z = z0;
        let mut best = horner(coeffs, z).0.norm();
        for _ in 0..8 {
            let (pz, dpz) = horner(coeffs, z);
            if dpz.norm() == 0.0 {
                break;
            }
            let cand = z - pz / dpz;
            let r = horner(coeffs, cand).0.norm();
            if !(r < best) {
                break;
            }
            z = cand;
            best = r;
        }
        roots.push(Root {
            value: z,
            modulus: z.norm(),
            residual: best,
        });
    }
    roots.sort_by(|x, y| {
        x.modulus
            .total_cmp(&y.modulus)
            .then(x.value.im.total_cmp(&y.value.im))
            .then(x.value.re.total_cmp(&y.value.re))
    });
    Ok(roots)
}

/// Coefficients, leading first, of the quartic characteristic polynomial at `n`.
pub fn quartic_coeffs(table: &FiveTermTable, n: i64) -> [Complex64; 5] {
    let nf = n as f64;
    let one = Complex64::new(1.0, 0.0);
    [
        one + table.alpha_at(2) / nf,
        table.alpha_at(1) / nf,
        2.0 * one + table.alpha_at(0) / nf,
        table.alpha_at(-1) / nf,
        one + table.alpha_at(-2) / nf,
    ]
}

pub fn quartic_roots(table: &FiveTermTable, n: i64) -> Result<Vec<Root>> {
    if n < 1 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    poly_roots(&quartic_coeffs(table, n))
}

pub fn cubic_coeffs(table: &FourTermTable, n: i64) -> [Complex64; 4] {
    let nf = n as f64;
    let c = |x: f64| Complex64::new(x, 0.0);
    [
        c(-1.0 + table.alpha[0] / nf),
        c(4.0 + table.alpha[1] / nf),
        c(-5.0 + table.alpha[2] / nf),
        c(2.0 + table.alpha[3] / nf),
    ]
}

pub fn cubic_roots(table: &FourTermTable, n: i64) -> Result<Vec<Root>> {
    if n < 1 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    poly_roots(&cubic_coeffs(table, n))
}

/// Number of roots strictly inside the unit circle.
pub fn count_inside(roots: &[Root]) -> usize {
    roots.iter().filter(|r| r.modulus < 1.0).count()
}
