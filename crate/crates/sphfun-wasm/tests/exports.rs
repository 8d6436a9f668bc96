use serde_json::Value;
use sphfun_wasm::{characteristic_roots, eigenfunction, ring_levels};

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn eigenfunction_curve() {
    let v = parse(eigenfunction(0, 0, 1.0, 0.0, 5.0, 101));
    assert!((v["lambda"].as_f64().unwrap() + 2.6541531338091).abs() < 1e-8);
    assert_eq!(v["nodes"], 0);
    let x: Vec<f64> = v["x"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(x.len(), 101);
    let peak = x.iter().fold(0.0f64, |m, y| m.max(y.abs()));
    assert!((peak - 1.0).abs() < 1e-12);
    assert!((x[0] - x[100]).abs() < 1e-10);
}

#[test]
fn eigenfunction_rejects_bad_grid() {
    for v in [
        parse(eigenfunction(0, 0, 1.0, 0.0, -1.0, 11)),
        parse(eigenfunction(0, 0, 1.0, 0.0, 5.0, 1)),
        parse(eigenfunction(0, 0, -1.0, 0.0, 5.0, 11)),
    ] {
        assert!(v["error"].is_string(), "{v}");
    }
}

#[test]
fn roots_inside_unit_circle() {
    let q = parse(characteristic_roots(1, 1.0, 0.5, -3.0, 200, false));
    assert_eq!(q["roots"].as_array().unwrap().len(), 4);
    assert_eq!(q["inside"], 2);
    let c = parse(characteristic_roots(1, 1.0, 0.0, -3.0, 200, true));
    assert_eq!(c["roots"].as_array().unwrap().len(), 3);
    assert_eq!(c["inside"], 1);
    assert!(parse(characteristic_roots(1, 1.0, 0.5, -3.0, 200, true))["error"].is_string());
}

#[test]
fn ring_levels_listed() {
    let v = parse(ring_levels(0, 5.0, 1.0, 1.0, -2.0, -30.0, -0.2));
    let levels = v["levels"].as_array().unwrap();
    assert!(!levels.is_empty());
    assert!(levels.iter().all(|l| l["E"].as_f64().unwrap() < 0.0));
    assert!(parse(ring_levels(0, 5.0, 1.0, 1.0, -2.0, -3.0, 0.5))["error"].is_string());
}
