// SPDX-License-Identifier: Apache-2.0
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;
use tfsr_core::estimate::{improvement_ratio, sample_counts};
use tfsr_core::{DeviceCalibration, DiNoise};

fn tfsr(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_tfsr"));
    cmd.args(args).env_remove("TFSR_THREADS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = tfsr(args, &[]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn read(dir: &Path, file: &str) -> String {
    fs::read_to_string(dir.join(file)).unwrap()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&read(dir, "manifest.json")).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let idx = lines
        .next()
        .unwrap()
        .split(',')
        .position(|c| c == name)
        .unwrap();
    lines
        .map(|l| l.split(',').nth(idx).unwrap().parse().unwrap())
        .collect()
}

fn error_report(out: &Output) -> Value {
    assert!(!out.status.success());
    let text = String::from_utf8(out.stderr.clone()).unwrap();
    let last = text.lines().last().unwrap();
    serde_json::from_str(last).unwrap_or_else(|_| panic!("not JSON: {text}"))
}

#[test]
fn compare_emits_quantum_bound_row() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("cmp");
    ok(&["--mode", "compare", "--out", out.to_str().unwrap()]);
    let csv = read(&out, "compare.csv");
    assert_eq!(
        csv.lines().next().unwrap(),
        "epsilon,F_Q,F_SLIVER,F_DI,F_PuDTAI,F_QMTI"
    );
    let fq = column(&csv, "F_Q");
    assert_eq!(fq.len(), 25);
    assert!(fq.iter().all(|v| *v == 0.25));
    let m = manifest(&out);
    assert_eq!(m["mode"], "compare");
    assert_eq!(m["outputs"][0]["rows"], 25);
    assert_eq!(m["config"]["params"]["calibration"]["v_minus"], 0.9751);
}

#[test]
fn bootstrap_is_reproducible() {
    let tmp = TempDir::new().unwrap();
    let args = |dir: &str, seed: &str| {
        vec![
            "--mode".to_string(),
            "bootstrap".into(),
            "--seed".into(),
            seed.into(),
            "--out".into(),
            tmp.path().join(dir).to_str().unwrap().into(),
            "--params.estimate.n_boot=40".into(),
            "--params.estimate.photons_per_set=20000".into(),
        ]
    };
    let run = |dir: &str, seed: &str, envs: &[(&str, &str)]| {
        let a = args(dir, seed);
        let refs: Vec<&str> = a.iter().map(String::as_str).collect();
        let out = tfsr(&refs, envs);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        read(&tmp.path().join(dir), "bootstrap.csv")
    };
    let a = run("a", "7", &[]);
    let b = run("b", "7", &[]);
    let single = run("c", "7", &[("TFSR_THREADS", "1")]);
    let other = run("d", "8", &[]);
    assert_eq!(a, b);
    assert_eq!(a, single);
    assert_ne!(a, other);
    let (ma, mb) = (
        manifest(&tmp.path().join("a")),
        manifest(&tmp.path().join("b")),
    );
    assert_eq!(ma["seed"], 7);
    let strip = |mut m: Value| {
        m["config"]["output_path"] = Value::Null;
        m
    };
    assert_eq!(strip(ma), strip(mb));
}

#[test]
fn manifest_reproduces_run() {
    let tmp = TempDir::new().unwrap();
    let first = tmp.path().join("first");
    ok(&[
        "--mode",
        "estimate",
        "--seed",
        "99",
        "--out",
        first.to_str().unwrap(),
    ]);
    let cfg = tmp.path().join("cfg.json");
    fs::write(&cfg, manifest(&first)["config"].to_string()).unwrap();
    let second = tmp.path().join("second");
    ok(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
    ]);
    assert_eq!(read(&first, "estimate.csv"), read(&second, "estimate.csv"));
}

#[test]
fn estimate_matches_library_sampler() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("e");
    ok(&[
        "--mode",
        "estimate",
        "--seed",
        "3",
        "--params.estimate.photons_per_set=5000",
        "--out",
        out.to_str().unwrap(),
    ]);
    let csv = read(&out, "estimate.csv");
    let c = sample_counts(0.5, &DeviceCalibration::experimental(), 5000, 3).unwrap();
    assert_eq!(column(&csv, "n_minus"), vec![c.n_minus as f64]);
    assert_eq!(column(&csv, "n_plus"), vec![c.n_plus as f64]);
}

#[test]
fn sweep_improvement_ratio() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("s");
    ok(&["--mode", "sweep", "--out", out.to_str().unwrap()]);
    let csv = read(&out, "sweep.csv");
    let eps = column(&csv, "epsilon");
    let ratio = column(&csv, "improvement_ratio");
    assert!((eps[0] - 0.08).abs() < 1e-12 && (eps[eps.len() - 1] - 2.0).abs() < 1e-12);
    let cal = DeviceCalibration::experimental();
    for (e, r) in eps.iter().zip(&ratio) {
        let want = improvement_ratio(*e, &cal, &DiNoise::default()).unwrap();
        assert!((r - want).abs() <= 1e-10 * want, "eps={e}: {r} vs {want}");
    }
    let (imax, max) =
        ratio.iter().enumerate().fold(
            (0, 0.0),
            |acc, (i, r)| if *r > acc.1 { (i, *r) } else { acc },
        );
    assert_eq!(imax, 0);
    assert!((max - 20.0).abs() <= 3.0, "{max}");
}

#[test]
fn config_file_flags_and_overrides_layer() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"mode": "probabilities", "seed": 5, "params": {"calibration": {"v_minus": 0.9}, "sweep": {"points": 4, "spacing": "linear", "eps_min": 0.0}}}"#,
    )
    .unwrap();
    let out = tmp.path().join("o");
    ok(&[
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "6",
        "--params.calibration.v_minus=0.95",
        "--out",
        out.to_str().unwrap(),
    ]);
    let m = manifest(&out);
    assert_eq!(m["seed"], 6);
    assert_eq!(m["config"]["params"]["calibration"]["v_minus"], 0.95);
    assert_eq!(m["config"]["params"]["calibration"]["v_plus"], 0.764);
    let eps = column(&read(&out, "probabilities.csv"), "epsilon");
    for (e, want) in eps.iter().zip([0.0, 2.0 / 3.0, 4.0 / 3.0, 2.0]) {
        assert!((e - want).abs() < 1e-11);
    }
    assert_eq!(eps.len(), 4);
}

#[test]
fn probabilities_sum_to_one() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("p");
    ok(&["--mode", "probabilities", "--out", out.to_str().unwrap()]);
    let csv = read(&out, "probabilities.csv");
    let (m, p, x) = (
        column(&csv, "p_minus"),
        column(&csv, "p_plus"),
        column(&csv, "p_cross"),
    );
    for i in 0..m.len() {
        assert!((m[i] + p[i] + x[i] - 1.0).abs() < 1e-10);
    }
}

#[test]
fn pipeline_reports_stages() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("q");
    let o = ok(&[
        "--mode",
        "pipeline",
        "--verbose-stages",
        "--params.sweep.points=2",
        "--params.pipeline.phases=4",
        "--out",
        out.to_str().unwrap(),
    ]);
    let err = String::from_utf8(o.stderr).unwrap();
    for stage in ["aperture", "dual_lens", "port_minus", "port_plus"] {
        assert!(err.contains(&format!("stage {stage}")), "{err}");
    }
    let m = manifest(&out);
    assert!(m["results"]["theta"].as_f64().unwrap().abs() < 0.3);
    let csv = read(&out, "pipeline.csv");
    let (sim, model) = (column(&csv, "p_plus_sim"), column(&csv, "p_plus_model"));
    for (s, w) in sim.iter().zip(&model) {
        assert!((s - w).abs() < 1e-2);
    }
}

#[test]
fn synthesize_writes_grid() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("y");
    ok(&[
        "--mode",
        "synthesize",
        "--params.grid.points=256",
        "--out",
        out.to_str().unwrap(),
    ]);
    let csv = read(&out, "synthesize.csv");
    let t = column(&csv, "t");
    assert_eq!(t.len(), 256);
    assert_eq!(t[0], -8.0);
    let (re, im) = (column(&csv, "re"), column(&csv, "im"));
    let norm: f64 = re.iter().zip(&im).map(|(a, b)| a * a + b * b).sum::<f64>() * (t[1] - t[0]);
    // phi = 0 coherent sum at eps = 0.5: 1 + exp(-eps^2/8).
    assert!(
        (norm - (1.0 + (-0.25f64 / 8.0).exp())).abs() < 1e-9,
        "{norm}"
    );
}

#[test]
fn fisher_ports_add_up() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("f");
    ok(&[
        "--mode",
        "fisher",
        "--params.sweep.points=5",
        "--out",
        out.to_str().unwrap(),
    ]);
    let csv = read(&out, "fisher.csv");
    let (m, p, t, tri) = (
        column(&csv, "F_minus"),
        column(&csv, "F_plus"),
        column(&csv, "F_PuDTAI"),
        column(&csv, "F_trinomial"),
    );
    for i in 0..m.len() {
        assert!((m[i] + p[i] - t[i]).abs() <= 1e-11 * t[i]);
        assert!(tri[i] >= t[i] * (1.0 - 1e-6) && tri[i] <= 0.25);
    }
}

#[test]
fn invalid_configs_report_json() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("x");
    let o = out.to_str().unwrap();

    let e = error_report(&tfsr(&["--out", o], &[]));
    assert_eq!(e["error"]["kind"], "config");

    let e = error_report(&tfsr(&["--mode", "nope", "--out", o], &[]));
    assert_eq!(e["error"]["kind"], "config");

    let e = error_report(&tfsr(
        &[
            "--mode",
            "fisher",
            "--params.calibration.vminus=1",
            "--out",
            o,
        ],
        &[],
    ));
    assert!(e["error"]["message"]
        .as_str()
        .unwrap()
        .contains("params.calibration.vminus"));

    let e = error_report(&tfsr(
        &[
            "--mode",
            "fisher",
            "--params.calibration.v_minus=1.5",
            "--out",
            o,
        ],
        &[],
    ));
    assert_eq!(e["error"]["kind"], "invalid_parameter");

    let e = error_report(&tfsr(
        &[
            "--mode",
            "sweep",
            "--params.sweep.points=\"many\"",
            "--out",
            o,
        ],
        &[],
    ));
    assert_eq!(e["error"]["kind"], "config");

    let e = error_report(&tfsr(
        &["--mode", "compare", "--out", o],
        &[("TFSR_THREADS", "0")],
    ));
    assert_eq!(e["error"]["kind"], "config");

    let missing = tmp.path().join("missing.json");
    let o2 = tfsr(&["--config", missing.to_str().unwrap()], &[]);
    assert_eq!(o2.status.code(), Some(1));
    assert_eq!(error_report(&o2)["error"]["kind"], "io");

    let bad = tmp.path().join("bad.json");
    fs::write(&bad, "{ not json").unwrap();
    let e = error_report(&tfsr(&["--config", bad.to_str().unwrap()], &[]));
    assert_eq!(e["error"]["kind"], "config");
    assert!(!out.exists());
}
