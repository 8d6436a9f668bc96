use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sphfun::oracle::oracle_eigenvalue;
use sphfun::recurrence::n0_threshold;

fn sphfun(args: &[&str]) -> Output {
    sphfun_env(args, &[])
}

fn sphfun_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sphfun"));
    cmd.args(args).env_remove("SPHFUN_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    assert_eq!(code(out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).expect("JSON on stdout");
    assert_eq!(v["schema"], "sphfun/1");
    v
}

fn stderr_json(out: &Output) -> Value {
    let v: Value = serde_json::from_slice(&out.stderr).expect("JSON on stderr");
    assert_eq!(v["schema"], "sphfun/1");
    v
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> String {
    let path = dir.join(name);
    std::fs::write(&path, bytes).unwrap();
    path.to_str().unwrap().to_string()
}

fn rows(csv: &[u8]) -> Vec<[f64; 3]> {
    let text = std::str::from_utf8(csv).unwrap();
    let mut lines = text.split('\n');
    assert_eq!(lines.next(), Some("xi,X,dX"));
    lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|s| s.parse().unwrap()).collect();
            [v[0], v[1], v[2]]
        })
        .collect()
}

#[test]
fn eigen_fig2_parameters_match_oracle() {
    let v = json(&sphfun(&["eigen", "--m", "2", "--k", "2", "--p", "1", "--a", "0.1"]));
    let lambda = v["lambda"].as_f64().unwrap();
    let shot = oracle_eigenvalue(2, 2, 1.0, 0.1).unwrap();
    assert!((lambda - shot).abs() <= 1e-6 * (1.0 + shot.abs()));
    assert_eq!(v["nodes"], 2);
    assert_eq!(v["method"], "jaffe");
    assert!(v["residual"].as_f64().unwrap() < 1e-6);
    assert!(v["N"].as_u64().unwrap() >= 8);
    let c0 = &v["coeffs"][0];
    assert!(c0.is_array() && c0.as_array().unwrap().len() == 2);
}

#[test]
fn eigen_methods_agree() {
    let base = ["eigen", "--m", "0", "--k", "0", "--p", "1", "--a", "0"];
    let power = json(&sphfun(&[&base[..], &["--method", "power"]].concat()));
    let jaffe = json(&sphfun(&[&base[..], &["--method", "jaffe"]].concat()));
    let (lp, lj) = (power["lambda"].as_f64().unwrap(), jaffe["lambda"].as_f64().unwrap());
    assert!((lp - lj).abs() <= 1e-8 * (1.0 + lj.abs()));
    assert!(power["coeffs"][0].is_number());
}

#[test]
fn eigen_validation_errors() {
    let out = sphfun(&["eigen", "--m", "1", "--k", "0", "--p", "0", "--json-errors"]);
    assert_eq!(code(&out), 2);
    assert!(out.stdout.is_empty());
    let e = stderr_json(&out);
    assert_eq!(e["error"]["message"], "p must be positive");
    assert_eq!(e["error"]["field"], "p");

    let plain = sphfun(&["eigen", "--m", "1", "--k", "0", "--p", "0"]);
    assert_eq!(code(&plain), 2);
    assert!(String::from_utf8_lossy(&plain.stderr).contains("p must be positive"));

    let power = sphfun(&[
        "eigen",
        "--m",
        "0",
        "--k",
        "0",
        "--p",
        "1",
        "--a",
        "0.5",
        "--method",
        "power",
        "--json-errors",
    ]);
    assert_eq!(code(&power), 2);
    assert_eq!(stderr_json(&power)["error"]["field"], "method");

    for bad in [
        &["eigen", "--m", "0", "--p", "1", "--json-errors"][..],
        &["eigen", "--m", "0", "--k", "0", "--p", "x", "--json-errors"],
        &[
            "eigen",
            "--m",
            "0",
            "--k",
            "0",
            "--p",
            "1",
            "--N",
            "many",
            "--json-errors",
        ],
        &["eigen", "--m", "0", "--k", "0", "--p", "1", "--bogus", "--json-errors"],
        &["frobnicate", "--json-errors"],
    ] {
        let out = sphfun(bad);
        assert_eq!(code(&out), 2, "{bad:?}");
        assert_eq!(stderr_json(&out)["error"]["kind"], "usage");
    }
}

#[test]
fn convergence_failure_exits_3() {
    let out = sphfun(&[
        "eigen",
        "--m",
        "0",
        "--k",
        "0",
        "--p",
        "1",
        "--tol",
        "1e-300",
        "--json-errors",
    ]);
    assert_eq!(code(&out), 3);
    assert_eq!(stderr_json(&out)["error"]["kind"], "not_converged");
}

#[test]
fn eval_grids() {
    let dir = tempfile::tempdir().unwrap();
    let out = sphfun(&["eigen", "--m", "1", "--k", "2", "--p", "1", "--a", "0"]);
    assert_eq!(code(&out), 0);
    let sol = write(dir.path(), "sol.json", &out.stdout);

    let single = sphfun(&["eval", "--solution", &sol, "--grid", "0:0:1"]);
    assert_eq!(code(&single), 0);
    let r = rows(&single.stdout);
    assert_eq!(r.len(), 1);
    assert_eq!(r[0][0], 0.0);
    // 17 significant digits
    let line = String::from_utf8(single.stdout.clone()).unwrap();
    let first = line.lines().nth(1).unwrap().split(',').nth(1).unwrap();
    assert_eq!(first.split('e').next().unwrap().replace(['-', '.'], "").len(), 17);

    // a = 0 and k even: X is even
    let sym = sphfun(&["eval", "--solution", &sol, "--grid", "-6:6:121"]);
    let r = rows(&sym.stdout);
    let scale = r.iter().map(|x| x[1].abs()).fold(0.0, f64::max);
    for i in 0..r.len() {
        let j = r.len() - 1 - i;
        assert_eq!(r[i][0], -r[j][0]);
        assert!((r[i][1] - r[j][1]).abs() <= 1e-10 * scale);
    }

    // nodes from sign changes of the CSV
    let wide = sphfun(&["eval", "--solution", &sol, "--grid", "-20:20:4001"]);
    let r = rows(&wide.stdout);
    let changes = r.windows(2).filter(|w| w[0][1] * w[1][1] < 0.0).count();
    assert_eq!(changes, 2);

    let j = json(&sphfun(&[
        "eval",
        "--solution",
        &sol,
        "--grid",
        "-1:1:5",
        "--format",
        "json",
        "--normalize",
        "l2",
    ]));
    assert_eq!(j["xi"].as_array().unwrap().len(), 5);
    assert_eq!(j["X"].as_array().unwrap().len(), 5);
}

#[test]
fn eval_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let junk = write(dir.path(), "junk.json", b"{\"lambda\": 1");
    let wrong = write(dir.path(), "wrong.json", b"{\"x\": 1}");
    let missing = dir.path().join("absent.json");
    for file in [junk.as_str(), wrong.as_str(), missing.to_str().unwrap()] {
        let out = sphfun(&["eval", "--solution", file, "--grid", "0:1:3", "--json-errors"]);
        assert_eq!(code(&out), 2);
        assert_eq!(stderr_json(&out)["error"]["kind"], "input");
    }
    let out = sphfun(&["eigen", "--m", "0", "--k", "0", "--p", "1"]);
    let sol = write(dir.path(), "sol.json", &out.stdout);
    let bad = sphfun(&["eval", "--solution", &sol, "--grid", "3:1:4", "--json-errors"]);
    assert_eq!(code(&bad), 2);
    assert_eq!(stderr_json(&bad)["error"]["field"], "grid");
}

#[test]
fn verify_single_case_and_fixtures() {
    let v = json(&sphfun(&["verify", "--m", "2", "--k", "2", "--p", "1", "--a", "1"]));
    assert_eq!(v["passed"], true);
    let case = &v["cases"][0];
    assert!(case["delta"].as_f64().unwrap() <= case["tolerance"].as_f64().unwrap());
    assert_eq!(case["nodes"], 2);

    let dir = tempfile::tempdir().unwrap();
    let out = sphfun(&["eigen", "--m", "0", "--k", "1", "--p", "0.5", "--a", "0.1"]);
    let good = write(dir.path(), "good.json", &out.stdout);
    assert_eq!(json(&sphfun(&["verify", "--fixture", &good]))["passed"], true);

    let mut fx: Value = serde_json::from_slice(&out.stdout).unwrap();
    for shift in [1e-3, -1e-3] {
        let lam = fx["lambda"].as_f64().unwrap();
        fx["lambda"] = Value::from(lam + shift);
        let bad = write(dir.path(), "bad.json", serde_json::to_string(&fx).unwrap().as_bytes());
        let res = sphfun(&["verify", "--fixture", &bad]);
        assert_eq!(code(&res), 1);
        let v: Value = serde_json::from_slice(&res.stdout).unwrap();
        assert_eq!(v["passed"], false);
        fx["lambda"] = Value::from(lam);
    }

    let list = write(
        dir.path(),
        "list.json",
        br#"{"cases": [{"m": 0, "k": 0, "p": 1, "a": 0, "lambda": -2.6541531338091}]}"#,
    );
    assert_eq!(
        json(&sphfun(&["verify", "--fixture", &list]))["cases"]
            .as_array()
            .unwrap()
            .len(),
        1
    );
    let malformed = write(dir.path(), "m.json", br#"[{"m": 0}]"#);
    assert_eq!(code(&sphfun(&["verify", "--fixture", &malformed])), 2);
    assert_eq!(code(&sphfun(&["verify"])), 2);
    assert_eq!(
        code(&sphfun(&[
            "verify", "--matrix", "default", "--m", "1", "--k", "0", "--p", "1", "--a", "0"
        ])),
        2
    );
}

fn ring_args<'a>(u0: &'a str, lambda: &'a str, xi0: &'a str, extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec![
        "ring", "--m", "0", "--U0", u0, "--xi0", xi0, "--R", "1", "--lambda", lambda, "--E-min", "-30", "--E-max",
        "-0.2",
    ];
    v.extend_from_slice(extra);
    v
}

#[test]
fn ring_reduction_and_empty_range() {
    let v = json(&sphfun(&ring_args("0", "-2.6541531338091", "1", &[])));
    let levels = v["levels"].as_array().unwrap();
    assert!(!levels.is_empty());
    for g in v["scan_diagnostics"]["reduction_gaps"].as_array().unwrap() {
        assert!(g.as_f64().unwrap() < 1e-6 * (1.0 + 2.6541531338091));
    }
    assert!(levels[0].get("interior").is_none());

    let none = json(&sphfun(&[
        "ring", "--U0", "0", "--xi0", "1", "--R", "1", "--lambda", "-2", "--E-min", "-0.3", "--E-max", "-0.25",
    ]));
    assert_eq!(none["levels"], Value::Array(Vec::new()));

    let bad = sphfun(&[
        "ring",
        "--U0",
        "1",
        "--xi0",
        "1",
        "--R",
        "1",
        "--lambda",
        "-2",
        "--E-min",
        "-3",
        "--E-max",
        "0.5",
        "--json-errors",
    ]);
    assert_eq!(code(&bad), 2);
    assert_eq!(stderr_json(&bad)["error"]["field"], "E_range");
}

#[test]
fn ring_tolerance_keeps_level_count() {
    let count = |tol: &str| {
        let v = json(&sphfun(&ring_args("20", "-1", "2", &["--tol", tol])));
        v["levels"].as_array().unwrap().len()
    };
    assert_eq!(count("1e-10"), count("2e-10"));
    assert_eq!(count("1e-10"), count("1e-8"));
    let v = json(&sphfun(&ring_args("5", "-2", "1", &["--with-grids"])));
    for l in v["levels"].as_array().unwrap() {
        assert!(l["mismatch"].as_f64().unwrap().abs() < 1e-10);
        assert!(l["interior"]["xi"].is_array() && l["exterior"]["x"].is_array());
    }
}

#[test]
fn roots_diagnostics() {
    let (m, p, a) = (1, 1.0, 0.5);
    let q = json(&sphfun(&[
        "roots", "--m", "1", "--p", "1", "--a", "0.5", "--lambda", "-2", "--n", "2000",
    ]));
    assert_eq!(q["inside"], 2);
    assert_eq!(q["outside"], 2);
    for r in q["moduli"].as_array().unwrap() {
        assert!((r.as_f64().unwrap() - 1.0).abs() < 0.03);
    }
    assert_eq!(q["n0"].as_f64().unwrap(), n0_threshold(m, p, a));
    assert_eq!(q["n0"].as_f64().unwrap(), (16.0 * a * a / (p * p) + 64.0_f64).sqrt());

    let c = json(&sphfun(&[
        "roots", "--m", "1", "--p", "1", "--lambda", "-2", "--n", "300", "--family", "cubic", "--parity", "odd",
    ]));
    assert_eq!(c["inside"], 1);
    for r in c["roots"].as_array().unwrap() {
        assert!(r[0].as_f64().unwrap() > 0.0 && r[1].as_f64().unwrap() == 0.0);
    }

    let printed = json(&sphfun(&[
        "roots", "--m", "1", "--p", "1", "--a", "0.5", "--lambda", "-2", "--n", "2000", "--table", "printed",
    ]));
    assert_eq!(printed["table"], "printed");
    assert_eq!(printed["roots"].as_array().unwrap().len(), 4);

    for bad in [
        &[
            "roots", "--m", "1", "--p", "1", "--a", "0.5", "--lambda", "-2", "--n", "10", "--family", "cubic",
        ][..],
        &["roots", "--m", "1", "--p", "-1", "--lambda", "-2", "--n", "10"],
        &["roots", "--m", "1", "--p", "1", "--lambda", "-2", "--n", "0"],
        &[
            "roots", "--m", "1", "--p", "1", "--lambda", "-2", "--n", "5", "--family", "sextic",
        ],
    ] {
        assert_eq!(code(&sphfun(bad)), 2, "{bad:?}");
    }
}

#[test]
fn config_file_mirrors_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        br#"{"m": 2, "k": 2, "p": 1, "a": 0.1, "method": "jaffe"}"#,
    );
    let from_file = sphfun(&["eigen", "--config", &cfg]);
    let from_flags = sphfun(&["eigen", "--m", "2", "--k", "2", "--p", "1", "--a", "0.1"]);
    assert_eq!(code(&from_file), 0);
    assert_eq!(from_file.stdout, from_flags.stdout);
    // command-line flags win
    let over = json(&sphfun(&["--config", &cfg, "eigen", "--a", "1"]));
    assert_eq!(over["a"].as_f64(), Some(1.0));

    let ring = write(
        dir.path(),
        "r.json",
        br#"{"U0": 5, "xi0": 1, "R": 1, "lambda": -2, "E-min": -30, "E_max": -0.2, "with_grids": false}"#,
    );
    let v = json(&sphfun(&["ring", "--config", &ring]));
    assert_eq!(v["levels"].as_array().unwrap().len(), 2);

    for body in [&b"[1, 2]"[..], b"{\"m\": ", b"{\"grid\": [0, 1]}", b"{\"unknown\": 1}"] {
        let bad = write(dir.path(), "bad.json", body);
        let out = sphfun(&["eigen", "--config", &bad, "--json-errors"]);
        assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(body));
        stderr_json(&out);
    }
}

#[test]
fn outputs_are_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let sol = sphfun(&["eigen", "--m", "1", "--k", "1", "--p", "2", "--a", "1"]);
    let path = write(dir.path(), "sol.json", &sol.stdout);
    let commands: Vec<Vec<&str>> = vec![
        vec!["eigen", "--m", "1", "--k", "1", "--p", "2", "--a", "1"],
        vec!["eval", "--solution", &path, "--grid", "-12:12:97"],
        vec!["verify", "--m", "0", "--k", "1", "--p", "1", "--a", "0.1"],
        ring_args("5", "-2", "1", &["--with-grids"]),
        vec![
            "roots", "--m", "2", "--p", "1", "--a", "1", "--lambda", "-3", "--n", "50",
        ],
    ];
    for args in &commands {
        let a = sphfun_env(args, &[("SPHFUN_THREADS", "1")]);
        let b = sphfun_env(args, &[("SPHFUN_THREADS", "3")]);
        let c = sphfun(args);
        assert_eq!(code(&a), 0, "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert_eq!(a.stdout, c.stdout, "{args:?}");
        assert!(!a.stdout.contains(&b'\r'));
    }
}

#[test]
fn thread_variable_is_validated() {
    for bad in ["0", "-2", "lots"] {
        let out = sphfun_env(
            &[
                "roots",
                "--m",
                "0",
                "--p",
                "1",
                "--lambda",
                "0",
                "--n",
                "3",
                "--json-errors",
            ],
            &[("SPHFUN_THREADS", bad)],
        );
        assert_eq!(code(&out), 2);
        assert_eq!(stderr_json(&out)["error"]["field"], "SPHFUN_THREADS");
    }
}

#[test]
fn help_and_version() {
    let out = sphfun(&["--help"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    for cmd in ["eigen", "eval", "verify", "ring", "roots"] {
        assert!(text.contains(cmd));
    }
    assert_eq!(code(&sphfun(&["--version"])), 0);
}
