use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use sphfun::evaluator::{count_nodes_rep, grid_function, residual_rep};
use sphfun::model::validate;
use sphfun::numerics::linspace;
use sphfun::oracle::oracle_eigenvalue;
use sphfun::powersolver::parity_for_k;
use sphfun::recurrence::{
    count_inside, cubic_roots, five_term_table, four_term_table, n0_threshold, printed_five_term_table, quartic_roots,
    Root, SetId,
};
use sphfun::ring::reduction_gap;
use sphfun::{
    find_eigenvalue, normalize, power_find_eigenvalue, ring_scan, Diagnostics, EigenSolution, GridFunction,
    Normalization, Parity, Representation, RingConfig, SpectralParams,
};

use crate::args::{
    EigenArgs, EvalArgs, Family, Format, Matrix, Method, Norm, Order, ParityArg, RingArgs, RootsArgs, Table, VerifyArgs,
};
use crate::error::{CliError, EXIT_VERIFY, SCHEMA};

/// Text for standard output and the exit code.
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { stdout, code: 0 }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("output serializes");
    s.push('\n');
    s
}

/// Residual acceptance bound on the default grid.
const RESIDUAL_TOL: f64 = 1e-6;
/// Relative eigenvalue tolerance against the oracle.
const ORACLE_TOL: f64 = 1e-6;
const NODE_SAMPLES: usize = 4000;

fn residual_grid() -> Vec<f64> {
    linspace(-10.0, 10.0, 801)
}

// ---------------------------------------------------------------- eigen

#[derive(Serialize)]
struct EigenOut<'a> {
    schema: &'static str,
    method: &'static str,
    lambda: f64,
    k: i64,
    m: i64,
    p: f64,
    a: f64,
    residual: f64,
    #[serde(rename = "N")]
    n: usize,
    nodes: i64,
    coeffs: Value,
    diagnostics: &'a Diagnostics,
    solution: &'a EigenSolution,
}

pub fn eigen(args: &EigenArgs) -> Result<Outcome, CliError> {
    let mut params = SpectralParams::new(args.m, args.k, args.p, args.a).with_tol(args.tol);
    if let Order::Fixed(n) = args.n {
        params = params.with_n(n);
    }
    validate(&params)?;
    let (sol, method) = match args.method {
        Method::Jaffe => (find_eigenvalue(&params)?, "jaffe"),
        Method::Power => {
            if args.a != 0.0 {
                return Err(CliError::usage("method", "--method power requires a = 0"));
            }
            let n = match args.n {
                Order::Auto => None,
                Order::Fixed(n) => Some(n),
            };
            let sol = power_find_eigenvalue(args.m, args.p, parity_for_k(args.k), args.k, args.tol, n)?;
            (sol, "power")
        }
    };
    let coeffs = match &sol.rep {
        Representation::Trig(r) => serde_json::to_value(&r.right_coeffs),
        Representation::Power(r) => serde_json::to_value(&r.coeffs),
    }
    .expect("coefficients serialize");
    let residual = residual_rep(&sol.rep, sol.lambda, &residual_grid());
    Ok(Outcome::ok(to_json(&EigenOut {
        schema: SCHEMA,
        method,
        lambda: sol.lambda,
        k: args.k,
        m: args.m,
        p: args.p,
        a: args.a,
        residual,
        n: sol.diagnostics.n_used,
        nodes: sol.node_count,
        coeffs,
        diagnostics: &sol.diagnostics,
        solution: &sol,
    })))
}

// ---------------------------------------------------------------- eval

fn read_json(path: &Path, what: &str) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {what} {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::input(format!("malformed {what} {}: {e}", path.display())))
}

/// Bare solution, or an object carrying one under `"solution"`.
fn solution_from(value: Value) -> Result<EigenSolution, CliError> {
    let inner = match value {
        Value::Object(mut map) if map.contains_key("solution") => map.remove("solution").unwrap_or_default(),
        other => other,
    };
    serde_json::from_value(inner).map_err(|e| CliError::input(format!("malformed solution: {e}")))
}

/// `start:stop:count`
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::usage("grid", format!("expected start:stop:count, got `{spec}`"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, stop, count] = parts[..] else {
        return Err(bad());
    };
    let start: f64 = start.trim().parse().map_err(|_| bad())?;
    let stop: f64 = stop.trim().parse().map_err(|_| bad())?;
    let count: usize = count.trim().parse().map_err(|_| bad())?;
    if !(start.is_finite() && stop.is_finite()) {
        return Err(CliError::usage("grid", "grid ends must be finite"));
    }
    if count == 0 || count > 1_000_000 {
        return Err(CliError::usage("grid", "grid count must be between 1 and 1000000"));
    }
    if count == 1 && start != stop {
        return Err(CliError::usage("grid", "a one-point grid needs start = stop"));
    }
    if count > 1 && stop <= start {
        return Err(CliError::usage("grid", "grid must be ascending"));
    }
    Ok(linspace(start, stop, count))
}

#[derive(Serialize)]
struct EvalOut<'a> {
    schema: &'static str,
    xi: &'a [f64],
    #[serde(rename = "X")]
    x: &'a [f64],
    #[serde(rename = "dX")]
    dx: &'a [f64],
}

pub fn eval(args: &EvalArgs) -> Result<Outcome, CliError> {
    let grid = parse_grid(&args.grid)?;
    let mut sol = solution_from(read_json(&args.solution, "solution")?)?;
    validate(sol.params())?;
    if let Some(norm) = args.normalize {
        let convention = match norm {
            Norm::Max => Normalization::MaxAbsOne,
            Norm::L2 => Normalization::L2One,
        };
        sol = normalize(&sol, convention)?;
    }
    let g: GridFunction = grid_function(&sol, &grid)?;
    Ok(Outcome::ok(match args.format {
        Format::Csv => g.to_csv(),
        Format::Json => to_json(&EvalOut {
            schema: SCHEMA,
            xi: &g.xi,
            x: &g.x,
            dx: &g.dx,
        }),
    }))
}

// ---------------------------------------------------------------- verify

#[derive(Debug, Clone, Deserialize)]
struct FixtureCase {
    m: i64,
    k: i64,
    p: f64,
    a: f64,
    lambda: f64,
    #[serde(default)]
    solution: Option<EigenSolution>,
}

#[derive(Debug, Clone)]
struct Case {
    params: SpectralParams,
    fixture: Option<FixtureCase>,
}

#[derive(Serialize)]
struct CaseReport {
    m: i64,
    k: i64,
    p: f64,
    a: f64,
    lambda_series: Option<f64>,
    lambda_oracle: Option<f64>,
    lambda_fixture: Option<f64>,
    delta: Option<f64>,
    fixture_delta: Option<f64>,
    tolerance: Option<f64>,
    residual: Option<f64>,
    nodes: Option<i64>,
    pass: bool,
    error: Option<String>,
}

#[derive(Serialize)]
struct VerifyOut {
    schema: &'static str,
    cases: Vec<CaseReport>,
    failed: usize,
    passed: bool,
}

/// m in {0,1,2}, k in {0..3}, p in {0.5,1,2}, a in {0,0.1,1}.
pub fn default_matrix() -> Vec<SpectralParams> {
    let mut out = Vec::new();
    for m in 0..=2 {
        for k in 0..=3 {
            for p in [0.5, 1.0, 2.0] {
                for a in [0.0, 0.1, 1.0] {
                    out.push(SpectralParams::new(m, k, p, a));
                }
            }
        }
    }
    out
}

fn fixture_cases(value: Value) -> Result<Vec<FixtureCase>, CliError> {
    let items = match value {
        Value::Array(items) => items,
        Value::Object(mut map) if map.contains_key("cases") => match map.remove("cases") {
            Some(Value::Array(items)) => items,
            _ => return Err(CliError::input("fixture `cases` must be an array")),
        },
        single @ Value::Object(_) => vec![single],
        _ => return Err(CliError::input("fixture must be an object or an array")),
    };
    items
        .into_iter()
        .map(|v| serde_json::from_value(v).map_err(|e| CliError::input(format!("malformed fixture case: {e}"))))
        .collect()
}

fn run_case(case: &Case) -> CaseReport {
    let prm = case.params;
    let mut report = CaseReport {
        m: prm.m,
        k: prm.k,
        p: prm.p,
        a: prm.a,
        lambda_series: None,
        lambda_oracle: None,
        lambda_fixture: case.fixture.as_ref().map(|f| f.lambda),
        delta: None,
        fixture_delta: None,
        tolerance: None,
        residual: None,
        nodes: None,
        pass: false,
        error: None,
    };
    let outcome = (|| -> sphfun::Result<bool> {
        let oracle = oracle_eigenvalue(prm.m, prm.k, prm.p, prm.a)?;
        report.lambda_oracle = Some(oracle);
        let tol = ORACLE_TOL * (1.0 + oracle.abs());
        report.tolerance = Some(tol);
        let series = find_eigenvalue(&prm)?;
        report.lambda_series = Some(series.lambda);
        let delta = (series.lambda - oracle).abs();
        report.delta = Some(delta);
        let mut pass = delta <= tol;
        let grid = residual_grid();
        let (rep, lambda) = match &case.fixture {
            Some(f) => {
                let fd = (f.lambda - oracle).abs();
                report.fixture_delta = Some(fd);
                pass &= fd <= tol;
                (f.solution.as_ref().map_or(&series.rep, |s| &s.rep), f.lambda)
            }
            None => (&series.rep, series.lambda),
        };
        let residual = residual_rep(rep, lambda, &grid);
        let nodes = count_nodes_rep(rep, None, NODE_SAMPLES);
        report.residual = Some(residual);
        report.nodes = Some(nodes);
        pass &= residual < RESIDUAL_TOL && nodes == prm.k;
        Ok(pass)
    })();
    match outcome {
        Ok(pass) => report.pass = pass,
        Err(e) => report.error = Some(e.to_string()),
    }
    report
}

pub fn verify(args: &VerifyArgs) -> Result<Outcome, CliError> {
    let cases: Vec<Case> = if let Some(Matrix::Default) = args.matrix {
        default_matrix()
            .into_iter()
            .map(|params| Case { params, fixture: None })
            .collect()
    } else if let Some(path) = &args.fixture {
        fixture_cases(read_json(path, "fixture")?)?
            .into_iter()
            .map(|f| Case {
                params: SpectralParams::new(f.m, f.k, f.p, f.a),
                fixture: Some(f),
            })
            .collect()
    } else if let (Some(m), Some(k), Some(p), Some(a)) = (args.m, args.k, args.p, args.a) {
        vec![Case {
            params: SpectralParams::new(m, k, p, a),
            fixture: None,
        }]
    } else {
        return Err(CliError::usage(
            "matrix",
            "give --matrix default, --fixture FILE, or --m --k --p --a",
        ));
    };
    if cases.is_empty() {
        return Err(CliError::input("fixture holds no cases"));
    }
    for c in &cases {
        validate(&c.params)?;
        if let Some(f) = &c.fixture {
            if !f.lambda.is_finite() {
                return Err(CliError::usage("lambda", "fixture lambda must be finite"));
            }
        }
    }
    let reports: Vec<CaseReport> = cases.par_iter().map(run_case).collect();
    let failed = reports.iter().filter(|r| !r.pass).count();
    let out = VerifyOut {
        schema: SCHEMA,
        cases: reports,
        failed,
        passed: failed == 0,
    };
    Ok(Outcome {
        stdout: to_json(&out),
        code: if failed == 0 { 0 } else { EXIT_VERIFY },
    })
}

// ---------------------------------------------------------------- ring

#[derive(Serialize)]
struct LevelOut<'a> {
    #[serde(rename = "E")]
    e: f64,
    s: f64,
    parity: Parity,
    mismatch: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    interior: Option<&'a GridFunction>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exterior: Option<&'a GridFunction>,
}

#[derive(Serialize)]
struct ScanDiagnostics<'a> {
    points_per_parity: usize,
    series_terms: usize,
    checks: &'a [sphfun::ring::LevelCheck],
    /// Distance of `lambda` from the whole-axis spectrum at each level; only for `U0 = 0`.
    #[serde(skip_serializing_if = "Option::is_none")]
    reduction_gaps: Option<Vec<f64>>,
}

#[derive(Serialize)]
struct RingOut<'a> {
    schema: &'static str,
    config: RingConfig,
    levels: Vec<LevelOut<'a>>,
    scan_diagnostics: ScanDiagnostics<'a>,
}

/// Whole-axis eigenvalues compared per level in the `U0 = 0` reduction.
const REDUCTION_COUNT: usize = 8;

pub fn ring(args: &RingArgs) -> Result<Outcome, CliError> {
    let config = RingConfig {
        m: args.m,
        u0: args.u0,
        xi0: args.xi0,
        r: args.r,
        lambda: args.lambda,
        e_range: [args.e_min, args.e_max],
        tol: args.tol,
    }
    .validate()?;
    let scan = ring_scan(&config)?;
    let reduction_gaps = if config.u0 == 0.0 {
        let gaps: Vec<sphfun::Result<f64>> = scan
            .levels
            .par_iter()
            .map(|l| reduction_gap(&config, l.e, REDUCTION_COUNT))
            .collect();
        Some(gaps.into_iter().collect::<sphfun::Result<Vec<f64>>>()?)
    } else {
        None
    };
    let levels = scan
        .levels
        .iter()
        .map(|l| LevelOut {
            e: l.e,
            s: l.s,
            parity: l.parity,
            mismatch: l.mismatch,
            interior: args.with_grids.then_some(&l.interior),
            exterior: args.with_grids.then_some(&l.exterior),
        })
        .collect();
    Ok(Outcome::ok(to_json(&RingOut {
        schema: SCHEMA,
        config,
        levels,
        scan_diagnostics: ScanDiagnostics {
            points_per_parity: scan.points_per_parity,
            series_terms: scan.series_terms,
            checks: &scan.checks,
            reduction_gaps,
        },
    })))
}

// ---------------------------------------------------------------- roots

#[derive(Serialize)]
struct RootsOut {
    schema: &'static str,
    family: &'static str,
    table: &'static str,
    m: i64,
    p: f64,
    a: f64,
    lambda: f64,
    n: i64,
    parity: Option<Parity>,
    n0: f64,
    roots: Vec<[f64; 2]>,
    moduli: Vec<f64>,
    residuals: Vec<f64>,
    inside: usize,
    outside: usize,
}

pub fn roots(args: &RootsArgs) -> Result<Outcome, CliError> {
    if args.m < 0 {
        return Err(CliError::usage("m", "m must be nonnegative"));
    }
    if !(args.p.is_finite() && args.p > 0.0) {
        return Err(CliError::usage("p", "p must be positive"));
    }
    if !args.a.is_finite() {
        return Err(CliError::usage("a", "a must be finite"));
    }
    if !args.lambda.is_finite() {
        return Err(CliError::usage("lambda", "lambda must be finite"));
    }
    if args.n < 1 {
        return Err(CliError::usage("n", "n must be positive"));
    }
    let parity = match args.parity {
        ParityArg::Even => Parity::Even,
        ParityArg::Odd => Parity::Odd,
    };
    let (mut found, family, table, parity): (Vec<Root>, _, _, _) = match args.family {
        Family::Quartic => {
            let (t, name) = match args.table {
                Table::Derived => (
                    five_term_table(args.m, args.p, args.a, args.lambda, SetId::FSet),
                    "derived",
                ),
                Table::Printed => (
                    printed_five_term_table(args.m, args.p, args.a, args.lambda, SetId::FSet),
                    "printed",
                ),
            };
            (quartic_roots(&t, args.n)?, "quartic", name, None)
        }
        Family::Cubic => {
            if args.a != 0.0 {
                return Err(CliError::usage("a", "the cubic family requires a = 0"));
            }
            if args.table == Table::Printed {
                return Err(CliError::usage("table", "--table printed applies to the quartic only"));
            }
            let t = four_term_table(args.m, args.p, args.lambda, parity);
            (cubic_roots(&t, args.n)?, "cubic", "derived", Some(parity))
        }
    };
    found.sort_by(|x, y| {
        x.modulus
            .total_cmp(&y.modulus)
            .then(x.value.re.total_cmp(&y.value.re))
            .then(x.value.im.total_cmp(&y.value.im))
    });
    let inside = count_inside(&found);
    Ok(Outcome::ok(to_json(&RootsOut {
        schema: SCHEMA,
        family,
        table,
        m: args.m,
        p: args.p,
        a: args.a,
        lambda: args.lambda,
        n: args.n,
        parity,
        n0: n0_threshold(args.m, args.p, args.a),
        roots: found.iter().map(|r| [r.value.re, r.value.im]).collect(),
        moduli: found.iter().map(|r| r.modulus).collect(),
        residuals: found.iter().map(|r| r.residual).collect(),
        inside,
        outside: found.len() - inside,
    })))
}
