use sphfun::oracle::{asymptotic_start, normalized_wronskian, oracle_ring, ring_exterior, ring_interior};
use sphfun::ring::{exterior_state, interior_state, reduction_gap, ring_scan, ExteriorMethod};
use sphfun::{ring_spectrum, Parity, RingConfig};

fn config(u0: f64, lambda: f64, xi0: f64) -> RingConfig {
    RingConfig {
        m: 0,
        u0,
        xi0,
        r: 1.0,
        lambda,
        e_range: [-30.0, -0.2],
        tol: 1e-10,
    }
}

fn dir(x: (f64, f64)) -> [f64; 2] {
    let n = x.0.hypot(x.1);
    [x.0 / n, x.1 / n]
}

#[test]
fn shallow_well_reduces_to_interior_equation() {
    let c = config(0.0, -2.0, 1.0);
    assert_eq!(ring_interior(&c, -1.3), ring_exterior(&c, -1.3));
    let deep = config(5.0, -2.0, 1.0);
    assert_ne!(ring_interior(&deep, -1.3), ring_exterior(&deep, -1.3));
}

#[test]
fn interior_state_parity_and_continuity() {
    let c = config(5.0, -2.0, 1.0);
    let tiny = RingConfig { xi0: 1e-12, ..c };
    let (_, d) = interior_state(-1.0, &tiny, Parity::Even).unwrap();
    assert!(d.abs() < 1e-9);
    let (x, _) = interior_state(-1.0, &tiny, Parity::Odd).unwrap();
    assert!(x.abs() < 1e-9);
    for parity in [Parity::Even, Parity::Odd] {
        let e = -2.3;
        let h = 1e-4;
        let s0 = interior_state(e, &c, parity).unwrap();
        let s1 = interior_state(e + h, &c, parity).unwrap();
        let sm = interior_state(e + h / 2.0, &c, parity).unwrap();
        assert!((sm.0 - 0.5 * (s0.0 + s1.0)).abs() < 1e-8);
        assert!((sm.1 - 0.5 * (s0.1 + s1.1)).abs() < 1e-8);
    }
}

#[test]
fn exterior_methods_agree() {
    // s = |E| R^2 / 2 = 1
    let c = RingConfig {
        r: 2f64.sqrt(),
        ..config(0.0, -2.0, 1.0)
    };
    let a = exterior_state(-1.0, &c, ExteriorMethod::Series).unwrap();
    let b = exterior_state(-1.0, &c, ExteriorMethod::Integration).unwrap();
    assert!(normalized_wronskian(dir(a), dir(b)).abs() < 1e-8);
    assert!(exterior_state(0.0, &c, ExteriorMethod::Series).is_err());
}

#[test]
fn exterior_log_derivative_far_out() {
    let c = RingConfig {
        r: 2f64.sqrt(),
        ..config(0.0, -2.0, 40.0)
    };
    for method in [ExteriorMethod::Series, ExteriorMethod::Integration] {
        let (x, d) = exterior_state(-1.0, &c, method).unwrap();
        let ld = d / x;
        assert!((ld + 1.0).abs() < 0.03, "{method:?}: {ld}");
    }
}

#[test]
fn zero_depth_levels_are_whole_axis_eigenvalues() {
    let c = config(0.0, -2.6541531338091, 1.0);
    let levels = ring_spectrum(&c).unwrap();
    assert!(!levels.is_empty());
    assert!(levels.iter().any(|l| (l.e + 2.0).abs() < 1e-8));
    for l in &levels {
        let gap = reduction_gap(&c, l.e, 6).unwrap();
        assert!(gap < 1e-6 * (1.0 + c.lambda.abs()), "E = {}: {gap}", l.e);
        assert!(l.s > 0.0);
    }
}

#[test]
fn matched_levels_are_smooth_and_decay() {
    for c in [config(5.0, -2.0, 1.0), config(20.0, -1.0, 2.0)] {
        let scan = ring_scan(&c).unwrap();
        assert!(!scan.levels.is_empty());
        assert!(scan.levels.windows(2).all(|w| w[0].e <= w[1].e));
        for (lvl, chk) in scan.levels.iter().zip(&scan.checks) {
            assert!(lvl.mismatch.abs() < c.tol);
            assert!(chk.value_jump < 1e-8 && chk.derivative_jump < 1e-8);
            assert!(chk.decay_4 < 1.0 && chk.decay_8 < chk.decay_4);
            assert!(chk.method_gap < 1e-8);
            assert!(lvl.interior.validate().is_ok() && lvl.exterior.validate().is_ok());
            let last = lvl.interior.len() - 1;
            assert!((lvl.interior.x[last] - lvl.exterior.x[0]).abs() <= 1e-8 * lvl.interior.x[last].abs().max(1e-3));
        }
    }
}

#[test]
fn oracle_and_series_levels_coincide() {
    let c = config(5.0, -2.0, 1.0);
    let a = ring_spectrum(&c).unwrap();
    let b = oracle_ring(&c).unwrap();
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.parity, y.parity);
        assert!((x.e - y.e).abs() < 1e-8);
    }
}

#[test]
fn outer_start_doubling() {
    let c = config(5.0, -2.0, 1.0);
    let e = ring_spectrum(&c).unwrap()[0].e;
    let p = c.s_of(e).sqrt();
    let eq = ring_exterior(&c, e);
    let l = 25.0 / p;
    let a = eq.propagate(l, asymptotic_start(l, p, 0.0), &[c.xi0]).unwrap()[0];
    let b = eq
        .propagate(2.0 * l, asymptotic_start(2.0 * l, p, 0.0), &[c.xi0])
        .unwrap()[0];
    assert!(normalized_wronskian(a, b).abs() < 1e-8);
}

#[test]
fn deeper_wells_keep_their_levels() {
    let counts: Vec<usize> = [0.0, 2.0, 5.0, 20.0]
        .iter()
        .map(|&u0| ring_spectrum(&config(u0, -2.0, 1.0)).unwrap().len())
        .collect();
    assert!(counts.windows(2).all(|w| w[1] >= w[0]), "{counts:?}");
}

#[test]
fn levels_move_continuously_with_depth() {
    let a = ring_spectrum(&config(5.0, -2.0, 1.0)).unwrap();
    let b = ring_spectrum(&config(5.05, -2.0, 1.0)).unwrap();
    assert_eq!(a.len(), b.len());
    for x in &a {
        let nearest = b
            .iter()
            .filter(|y| y.parity == x.parity)
            .map(|y| (y.e - x.e).abs())
            .fold(f64::INFINITY, f64::min);
        assert!(nearest > 0.0 && nearest < 0.1, "E = {}: {nearest}", x.e);
    }
    let doubled = ring_spectrum(&config(10.0, -2.0, 1.0)).unwrap();
    for x in &a {
        assert!(doubled.iter().all(|y| (y.e - x.e).abs() > 1e-6));
    }
}

#[test]
fn empty_range_is_not_an_error() {
    let c = RingConfig {
        e_range: [-0.3, -0.25],
        ..config(0.0, -2.0, 1.0)
    };
    assert!(ring_spectrum(&c).unwrap().is_empty());
    assert!(ring_spectrum(&RingConfig { xi0: -1.0, ..c }).is_err());
}
