use std::path::Path;
use std::process::{Command, Output};

use qcoherence::analysis::Field;
use qcoherence::cli::config::ConfigDraft;
use qcoherence::cli::csv::{Table, COLUMNS};
use serde_json::Value;

fn qc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcoherence")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = qc(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn csv(args: &[&str]) -> Table {
    let out = qc(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    Table::parse(std::str::from_utf8(&out.stdout).unwrap()).unwrap()
}

fn num(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or_else(|| panic!("missing {key} in {v}"))
}

#[test]
fn simulate_ghz_starts_fully_coherent() {
    let t = csv(&["simulate", "--state", "ghz", "--lambda", "0.01", "--delta", "0", "--points", "50"]);
    assert_eq!(t.columns, COLUMNS);
    assert_eq!(t.rows.len(), 50);
    assert!((t.column("C_total").unwrap()[0] - 1.0).abs() < 1e-12);
}

#[test]
fn simulate_w_single_channel_reaches_two_thirds() {
    let t = csv(&["simulate", "--state", "w", "--lambda", "1", "--delta", "0", "--mask", "1", "--t-max", "30"]);
    let last = *t.column("C_total").unwrap().last().unwrap();
    assert!((last - 0.666667).abs() < 1e-3, "{last}");
}

#[test]
fn simulate_without_coupling_is_constant() {
    let t = csv(&["simulate", "--state", "wwbar", "--lambda", "0.01", "--delta", "0.5", "--mask=", "--points", "40"]);
    for name in &COLUMNS[4..] {
        let col = t.column(name).unwrap();
        assert!(col.iter().all(|v| *v == col[0]), "{name} varies");
    }
}

#[test]
fn simulate_round_trips_the_in_memory_series() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.csv");
    let out = qc(&["simulate", "--preset", "fig2_inset", "--points", "300", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let table = Table::parse(&std::fs::read_to_string(&path).unwrap()).unwrap();

    let mut draft = ConfigDraft::from_preset("fig2_inset").unwrap();
    draft.n_points = Some(300);
    let series = draft.resolve().unwrap().sweep().unwrap();
    assert_eq!(table.column("t").unwrap(), series.times());
    for f in Field::ALL {
        let back = table.column(f.column()).unwrap();
        let orig = series.values(f).unwrap();
        for (a, b) in back.iter().zip(&orig) {
            assert!((a - b).abs() <= 1e-15 * b.abs().max(1e-300), "{f}: {a} vs {b}");
        }
    }
}

#[test]
fn simulate_writes_config_outputs_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("exp.conf");
    std::fs::write(
        &conf,
        "state = wwbar\nlambda = 0.01\ndelta = 0.5\nt_max = 50\nn_points = 200\noutputs = a.csv, b.csv\n",
    )
    .unwrap();
    let out = qc(&["simulate", "--config", conf.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.iter().filter(|&&c| c == b'\n').count(), 201);
}

fn write_fixture(dir: &Path) -> String {
    let mut text = String::from("t,C_total\n");
    for k in 0..=200 {
        let t = k as f64 * 0.05;
        text.push_str(&format!("{t:.16e},{:.16e}\n", (-0.3 * t).exp()));
    }
    let path = dir.join("decay.csv");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn fit_recovers_fixture_rate() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path());
    let v = json(&["fit", "--input", &input, "--field", "C_total"]);
    assert!((num(&v, "rate") - 0.3).abs() < 1e-6);
    assert_eq!(v["method"], "semilog");
    for key in ["intercept", "r_squared"] {
        assert!(v[key].is_number(), "{key}");
    }
    assert_eq!(v["window"].as_array().unwrap().len(), 2);
}

#[test]
fn fit_envelope_on_monotone_series_fails() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path());
    let out = qc(&["fit", "--input", &input, "--method", "envelope"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("maxima"));
}

#[test]
fn fit_local_decays_slower_than_global_at_markovian_points() {
    for preset in ["fig2_markov", "fig2_markov_strict"] {
        let rate = |field: &str| num(&json(&["fit", "--preset", preset, "--field", field, "--window", "0,5"]), "rate");
        let (l, g) = (rate("C_L"), rate("C_G"));
        assert!(l < g, "{preset}: {l} vs {g}");
    }
}

#[test]
fn tuple_examples() {
    let ghz = json(&["tuple", "--state", "ghz", "--lambda", "1", "--delta", "0"]);
    assert!((num(&ghz, "c123") - 1.0).abs() < 1e-12);
    for key in ["c1", "c2", "c3", "c12", "c13", "c23"] {
        assert!(num(&ghz, key).abs() < 1e-12, "{key}");
    }
    assert!(ghz.get("residual").is_none());

    let dir = tempfile::tempdir().unwrap();
    let plus = dir.path().join("plus.txt");
    let a = 1.0 / 8f64.sqrt();
    std::fs::write(&plus, format!("{a} 0\n").repeat(8)).unwrap();
    let prod = json(&["tuple", "--state", plus.to_str().unwrap(), "--lambda", "1", "--delta", "0", "--mode", "probe"]);
    for key in ["c1", "c2", "c3"] {
        assert!((num(&prod, key) - 1.0).abs() < 1e-9, "{key}");
    }
    for key in ["c12", "c13", "c23", "c123"] {
        assert!(num(&prod, key).abs() < 1e-9, "{key}");
    }
    assert!(num(&prod, "residual") < 1e-9);

    let w = json(&["tuple", "--state", "w", "--lambda", "1", "--delta", "0", "--mode", "probe"]);
    for key in ["c12", "c13", "c23"] {
        assert!((num(&w, key) - 2.0 / 3.0).abs() < 1e-9, "{key}");
    }
    assert!(w["residual"].is_number());
}

#[test]
fn tuple_needs_three_qubits() {
    let out = qc(&["tuple", "--state", "w", "--qubits", "2", "--lambda", "1", "--delta", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn oracle_check_examples() {
    let v = json(&["oracle-check", "--state", "w", "--lambda", "0.01", "--delta", "0"]);
    assert!(num(&v, "max_abs_err_standard") < 1e-6);
    let v = json(&["oracle-check", "--state", "w", "--lambda", "1", "--delta", "0.5"]);
    assert!(num(&v, "max_abs_err_standard") < 1e-6);
    assert!(num(&v, "max_abs_err_verbatim") > 0.1);
}

#[test]
fn revivals_and_monogamy_reports() {
    let v = json(&["revivals", "--preset", "fig2_inset", "--state", "ghz"]);
    let events = v["events"].as_array().unwrap();
    assert!(!events.is_empty());
    assert!(num(&events[0], "death_time") < num(&events[0], "revival_time"));

    let m = json(&["monogamy", "--preset", "fig4_ghz_resonant", "--points", "500"]);
    assert_eq!(m["sign"], "always_non_positive");
    assert!((num(&m, "initial") + 1.0).abs() < 1e-12);
    let m = json(&["monogamy", "--preset", "fig4_w_detuned", "--points", "500"]);
    assert_eq!(m["sign"], "always_non_negative");
}

#[test]
fn exit_codes() {
    assert_eq!(qc(&["simulate", "--config", "/nonexistent/exp.conf"]).status.code(), Some(2));
    assert_eq!(qc(&["simulate", "--state", "w", "--lambda", "0", "--delta", "0"]).status.code(), Some(1));
    assert_eq!(qc(&["simulate", "--preset", "fig9"]).status.code(), Some(1));
    assert_eq!(
        qc(&["simulate", "--state", "w", "--lambda", "1", "--delta", "0", "--mask", "5"]).status.code(),
        Some(1)
    );
    assert_eq!(qc(&["fit", "--input", "/nonexistent.csv"]).status.code(), Some(2));
    let out = qc(&["simulate", "--preset", "fig2_markov", "--out", "/nonexistent/dir/out.csv"]);
    assert_eq!(out.status.code(), Some(2));
}
