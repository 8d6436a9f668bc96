//! Browser bindings for the demo page in `www/`.
//!
//! Every export returns a JSON string; failures come back as `{"error": "..."}`
//! so the page never has to catch exceptions.

use serde_json::{json, Value};
use sphfun::evaluator::grid_function;
use sphfun::numerics::linspace;
use sphfun::recurrence::{cubic_roots, five_term_table, four_term_table, n0_threshold, quartic_roots, Root, SetId};
use sphfun::{find_eigenvalue, normalize, ring_scan, Error, Normalization, Parity, RingConfig, SpectralParams};
use wasm_bindgen::prelude::*;

const MAX_POINTS: usize = 20_000;

fn invalid(field: &'static str, message: impl Into<String>) -> Error {
    Error::Validation {
        field,
        message: message.into(),
    }
}

fn respond(r: sphfun::Result<Value>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e.to_string() }).to_string(),
    }
}

fn curve(m: i64, k: i64, p: f64, a: f64, xi_max: f64, points: usize) -> sphfun::Result<Value> {
    if !(xi_max.is_finite() && xi_max > 0.0) {
        return Err(invalid("xi_max", "xi_max must be positive"));
    }
    if !(2..=MAX_POINTS).contains(&points) {
        return Err(invalid("points", format!("points must lie in 2..={MAX_POINTS}")));
    }
    let sol = find_eigenvalue(&SpectralParams::new(m, k, p, a))?;
    let sol = normalize(&sol, Normalization::MaxAbsOne)?;
    let g = grid_function(&sol, &linspace(-xi_max, xi_max, points))?;
    Ok(json!({ "lambda": sol.lambda, "nodes": sol.node_count, "xi": g.xi, "x": g.x }))
}

/// Max-normalized eigenfunction `X_mk` on `[-xi_max, xi_max]`.
#[wasm_bindgen]
pub fn eigenfunction(m: i32, k: i32, p: f64, a: f64, xi_max: f64, points: u32) -> String {
    respond(curve(m.into(), k.into(), p, a, xi_max, points as usize))
}

fn root_list(m: i64, p: f64, a: f64, lambda: f64, n: i64, cubic: bool) -> sphfun::Result<Value> {
    let mut roots: Vec<Root> = if cubic {
        if a != 0.0 {
            return Err(invalid("a", "the cubic family requires a = 0"));
        }
        cubic_roots(&four_term_table(m, p, lambda, Parity::Even), n)?
    } else {
        quartic_roots(&five_term_table(m, p, a, lambda, SetId::FSet), n)?
    };
    roots.sort_by(|x, y| x.modulus.total_cmp(&y.modulus));
    let pts: Vec<[f64; 2]> = roots.iter().map(|r| [r.value.re, r.value.im]).collect();
    let inside = roots.iter().filter(|r| r.modulus < 1.0).count();
    Ok(json!({ "roots": pts, "inside": inside, "n0": n0_threshold(m, p, a) }))
}

/// Characteristic roots at row `n`: the quartic (`cubic = false`) or the `a = 0` cubic.
#[wasm_bindgen]
pub fn characteristic_roots(m: i32, p: f64, a: f64, lambda: f64, n: i32, cubic: bool) -> String {
    respond(root_list(m.into(), p, a, lambda, n.into(), cubic))
}

fn levels(m: i64, u0: f64, xi0: f64, r: f64, lambda: f64, e_min: f64, e_max: f64) -> sphfun::Result<Value> {
    let config = RingConfig {
        m,
        u0,
        xi0,
        r,
        lambda,
        e_range: [e_min, e_max],
        tol: 1e-10,
    }
    .validate()?;
    let scan = ring_scan(&config)?;
    let out: Vec<Value> = scan
        .levels
        .iter()
        .map(|l| json!({ "E": l.e, "s": l.s, "parity": l.parity.as_str(), "mismatch": l.mismatch }))
        .collect();
    Ok(json!({ "levels": out }))
}

/// Bound levels of the spheroidal ring with energies in `[e_min, e_max]`.
#[wasm_bindgen]
pub fn ring_levels(m: i32, u0: f64, xi0: f64, r: f64, lambda: f64, e_min: f64, e_max: f64) -> String {
    respond(levels(m.into(), u0, xi0, r, lambda, e_min, e_max))
}
