//! Gauss–Legendre rules (Golub–Welsch) and an adaptive composite integrator.

use nalgebra::{DMatrix, SymmetricEigen};

/// Nodes and weights of the `n`-point rule on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut j = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        let k = i as f64;
        let b = k / (4.0 * k * k - 1.0).sqrt();
        j[(i, i - 1)] = b;
        j[(i - 1, i)] = b;
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], 2.0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // symmetrize to remove eigen-solver noise
    for i in 0..n / 2 {
        let k = n - 1 - i;
        let x = 0.5 * (pairs[k].0 - pairs[i].0);
        let w = 0.5 * (pairs[k].1 + pairs[i].1);
        pairs[i] = (-x, w);
        pairs[k] = (x, w);
    }
    if n % 2 == 1 {
        pairs[n / 2].0 = 0.0;
    }
    pairs.into_iter().unzip()
}

/// Adaptive composite Gauss–Legendre integration.
pub struct Integrator {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Default for Integrator {
    fn default() -> Self {
        Self::new(20)
    }
}

impl Integrator {
    pub fn new(order: usize) -> Self {
        let (nodes, weights) = gauss_legendre(order);
        Integrator { nodes, weights }
    }

    fn panel<F: FnMut(&[f64]) -> Vec<f64>>(&self, f: &mut F, a: f64, b: f64) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let xs: Vec<f64> = self.nodes.iter().map(|x| c + h * x).collect();
        let ys = f(&xs);
        self.weights.iter().zip(&ys).map(|(w, y)| w * y).sum::<f64>() * h
    }

    /// Integral over `[a, b]` to relative tolerance `rtol`, starting from `panels` pieces.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64, panels: usize, rtol: f64) -> f64 {
        self.integrate_batch(|xs| xs.iter().map(|&x| f(x)).collect(), a, b, panels, rtol)
    }

    /// As `integrate`, with the integrand evaluated one panel of nodes at a time.
    pub fn integrate_batch<F: FnMut(&[f64]) -> Vec<f64>>(
        &self,
        mut f: F,
        a: f64,
        b: f64,
        panels: usize,
        rtol: f64,
    ) -> f64 {
        let panels = panels.max(1);
        let h = (b - a) / panels as f64;
        let mut stack: Vec<(f64, f64, f64, usize)> = Vec::new();
        for i in (0..panels).rev() {
            let lo = a + h * i as f64;
            let hi = if i + 1 == panels { b } else { lo + h };
            let whole = self.panel(&mut f, lo, hi);
            stack.push((lo, hi, whole, 0));
        }
        let total_guess: f64 = stack.iter().map(|e| e.2.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
        let mut total = 0.0;
        while let Some((lo, hi, whole, depth)) = stack.pop() {
            let mid = 0.5 * (lo + hi);
            let left = self.panel(&mut f, lo, mid);
            let right = self.panel(&mut f, mid, hi);
            let err = (left + right - whole).abs();
            if err <= rtol * total_guess * (hi - lo) / (b - a) || depth >= 30 {
                total += left + right;
            } else {
                stack.push((mid, hi, right, depth + 1));
                stack.push((lo, mid, left, depth + 1));
            }
        }
        total
    }
}
