use num_complex::Complex64 as C;
use sphfun::evaluator::{eval_many, grid_function, l2_norm_squared, residual_rep};
use sphfun::numerics::linspace;
use sphfun::quadrature::Integrator;
use sphfun::{
    count_nodes, eval_X, find_eigenvalue, normalize, ode_residual, Diagnostics, EigenSolution, Normalization,
    Representation, SpectralParams, TrigSeriesRep,
};

fn solve(m: i64, k: i64, p: f64, a: f64) -> EigenSolution {
    find_eigenvalue(&SpectralParams::new(m, k, p, a)).unwrap()
}

fn grid10() -> Vec<f64> {
    linspace(-10.0, 10.0, 801)
}

fn zero_solution() -> EigenSolution {
    let params = SpectralParams::new(1, 0, 1.0, 0.3);
    EigenSolution {
        lambda: -3.0,
        node_count: 0,
        rep: Representation::Trig(TrigSeriesRep {
            params,
            lambda: -3.0,
            right_coeffs: vec![C::new(0.0, 0.0); 12],
            left_coeffs: vec![C::new(0.0, 0.0); 12],
            scale: 1.0,
            series_range: [-f64::MAX, f64::MAX],
        }),
        diagnostics: Diagnostics {
            det_value: 0.0,
            residual_max: 0.0,
            n_used: 12,
            converged: true,
        },
    }
}

#[test]
fn zero_function() {
    let z = zero_solution();
    for xi in [-7.0, 0.0, 0.3, 12.0] {
        assert_eq!(eval_X(&z, xi).unwrap(), 0.0);
    }
    assert_eq!(ode_residual(&z, &grid10()).unwrap(), 0.0);
    assert!(normalize(&z, Normalization::MaxAbsOne).is_err());
}

#[test]
fn refuses_unconverged_and_coarse_grids() {
    let mut z = zero_solution();
    assert!(ode_residual(&z, &linspace(-1.0, 1.0, 8)).is_err());
    assert!(ode_residual(&z, &linspace(-60.0, 1.0, 20)).is_err());
    assert!(count_nodes(&z, None, 999).is_err());
    z.diagnostics.converged = false;
    assert!(eval_X(&z, 0.0).is_err());
}

#[test]
fn parity_at_zero_charge() {
    for k in [0, 1, 2] {
        let sol = solve(1, k, 1.0, 0.0);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let scale = (0..=40)
            .map(|i| eval_X(&sol, i as f64 * 0.25).unwrap().abs())
            .fold(0.0, f64::max);
        for i in 0..=40 {
            let xi = i as f64 * 0.25;
            let d = eval_X(&sol, xi).unwrap() - sign * eval_X(&sol, -xi).unwrap();
            assert!(d.abs() <= 1e-10 * scale, "k = {k}, xi = {xi}");
        }
    }
}

#[test]
fn decay_bound() {
    for (m, k, a) in [(0, 0, 0.0), (1, 2, 0.1), (2, 1, 1.0)] {
        let sol = normalize(&solve(m, k, 1.0, a), Normalization::MaxAbsOne).unwrap();
        let bound = (-9.0f64).exp() * 10.0;
        assert!(eval_X(&sol, 10.0).unwrap().abs() < bound);
        assert!(eval_X(&sol, -10.0).unwrap().abs() < bound);
    }
}

#[test]
fn residual_small_and_sensitive() {
    let sol = solve(0, 0, 1.0, 0.0);
    let r = ode_residual(&sol, &grid10()).unwrap();
    assert!(r < 1e-6, "{r}");
    let bumped = residual_rep(&sol.rep, sol.lambda + 1e-2, &grid10());
    assert!(bumped >= 10.0 * r.max(1e-12));
    assert!(bumped > 1e-3);
}

#[test]
fn node_counts() {
    assert_eq!(count_nodes(&solve(0, 0, 1.0, 0.0), None, 2000).unwrap(), 0);
    let fig = solve(2, 2, 1.0, 1.0);
    assert_eq!(count_nodes(&fig, None, 2000).unwrap(), 2);
    assert_eq!(count_nodes(&fig, None, 4000).unwrap(), 2);
    assert_eq!(count_nodes(&fig, Some((-20.0, 20.0)), 8000).unwrap(), 2);
}

#[test]
fn normalization_conventions() {
    let sol = solve(1, 1, 0.5, 0.1);
    let n1 = normalize(&sol, Normalization::MaxAbsOne).unwrap();
    let n2 = normalize(&n1, Normalization::MaxAbsOne).unwrap();
    let xs = linspace(-20.0, 20.0, 161);
    for &xi in &xs {
        let (a, b) = (eval_X(&n1, xi).unwrap(), eval_X(&n2, xi).unwrap());
        assert!((a - b).abs() < 1e-12);
    }
    let mut scaled = sol.clone();
    if let Representation::Trig(r) = &mut scaled.rep {
        r.scale *= 7.0;
    }
    let n3 = normalize(&scaled, Normalization::MaxAbsOne).unwrap();
    for &xi in &xs {
        assert!((eval_X(&n1, xi).unwrap() - eval_X(&n3, xi).unwrap()).abs() < 1e-12);
    }
    let peak = xs.iter().map(|&x| eval_X(&n1, x).unwrap().abs()).fold(0.0, f64::max);
    assert!(peak <= 1.0 + 1e-12 && peak > 0.9);

    let l2 = normalize(&sol, Normalization::L2One).unwrap();
    assert!((l2_norm_squared(&l2.rep) - 1.0).abs() < 1e-8);
}

#[test]
fn square_integrable() {
    let sol = normalize(&solve(1, 2, 1.0, 1.0), Normalization::L2One).unwrap();
    let wide = Integrator::default().integrate_batch(
        |xs| eval_many(&sol.rep, xs).iter().map(|q| q.x * q.x).collect(),
        -80.0,
        80.0,
        128,
        1e-13,
    );
    assert!((wide - 1.0).abs() < 1e-10, "{wide}");
}

#[test]
fn charge_reflection() {
    for (m, k, p, a) in [(0, 1, 1.0, 1.0), (2, 2, 1.0, 0.1)] {
        let plus = normalize(&solve(m, k, p, a), Normalization::MaxAbsOne).unwrap();
        let minus = normalize(&solve(m, k, p, -a), Normalization::MaxAbsOne).unwrap();
        let xs = linspace(-10.0, 10.0, 201);
        let s = eval_X(&plus, 0.37).unwrap().signum() * eval_X(&minus, -0.37).unwrap().signum();
        for &xi in &xs {
            let d = eval_X(&plus, xi).unwrap() - s * eval_X(&minus, -xi).unwrap();
            assert!(d.abs() < 1e-8, "m={m} k={k} a={a} xi={xi}: {d}");
        }
    }
}

#[test]
fn tail_continuation_is_smooth() {
    // p = 2 pushes the series past its rounding floor well inside |xi| = 10
    let sol = solve(0, 1, 2.0, 1.0);
    let Representation::Trig(rep) = &sol.rep else {
        panic!("trigonometric representation expected")
    };
    assert!(rep.series_range[1] < 10.0);
    let r = ode_residual(&sol, &grid10()).unwrap();
    assert!(r < 1e-6, "{r}");
    let hi = rep.series_range[1];
    let g = grid_function(&sol, &[hi - 1e-7, hi + 1e-7]).unwrap();
    assert!((g.x[0] - g.x[1]).abs() <= 1e-6 * g.x[0].abs());
    assert!((g.dx[0] - g.dx[1]).abs() <= 1e-5 * g.dx[0].abs().max(g.x[0].abs()));
}

#[test]
fn batched_and_pointwise_evaluation_agree() {
    let sol = solve(1, 0, 2.0, 0.1);
    let xs = linspace(-15.0, 15.0, 61);
    let g = grid_function(&sol, &xs).unwrap();
    let scale = g.x.iter().map(|v| v.abs()).fold(0.0, f64::max);
    for (i, &xi) in xs.iter().enumerate() {
        let v = eval_X(&sol, xi).unwrap();
        assert!((v - g.x[i]).abs() <= 1e-9 * scale + 1e-9 * v.abs());
    }
}
