use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const SMALL_FIG1: &[&str] = &["fig1", "--n", "3", "--alpha-sq", "2", "--m", "2", "--max-local-ops", "10", "--grid-points", "128"];
const SMALL_FIG2: &[&str] = &[
    "fig2", "--nbar", "5", "--points", "4", "--tail-tol", "1e-2", "--max-local-ops", "10", "--restarts", "1", "--grid-points", "128",
];

fn ergox(args: &[&str]) -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ergox"));
    c.args(args).env_remove("ERGOX_SEED");
    c
}

fn run(c: &mut Command) -> Output {
    let out = c.output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out
}

fn stdout(args: &[&str]) -> String {
    String::from_utf8(run(&mut ergox(args)).stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn fig1_header_and_rerun_are_stable() {
    let a = stdout(SMALL_FIG1);
    assert_eq!(a.lines().next(), Some("input_label,steps,W,GE,ratio"));
    for label in ["fock", "coherent", "dressed"] {
        assert!(a.lines().any(|l| l.starts_with(&format!("{label},0,"))), "{label}");
    }
    assert!(a.contains("fock,3,3,3,1\n"));
    assert_eq!(a, stdout(SMALL_FIG1));
}

#[test]
fn fig2_is_independent_of_thread_count() {
    let one = run(ergox(SMALL_FIG2).env("RAYON_NUM_THREADS", "1")).stdout;
    let three = run(ergox(SMALL_FIG2).env("RAYON_NUM_THREADS", "3")).stdout;
    assert_eq!(one, three);
    let text = String::from_utf8(one).unwrap();
    assert_eq!(text.lines().next(), Some("T_S,W_greedy,GE,W_over_Q"));
    assert_eq!(text.lines().count(), 5);

    let mut inset = SMALL_FIG2.to_vec();
    inset.push("--inset");
    assert_eq!(stdout(&inset).lines().next(), Some("T_E,W_greedy,GE,W_over_Q"));
}

fn fig2_with(pre: &[&str], post: &[&str], seed_env: Option<&str>) -> String {
    let args: Vec<&str> = pre.iter().chain(SMALL_FIG2).chain(post).copied().collect();
    let mut c = ergox(&args);
    if let Some(s) = seed_env {
        c.env("ERGOX_SEED", s);
    }
    String::from_utf8(run(&mut c).stdout).unwrap()
}

#[test]
fn seed_flag_beats_config_and_env_fills_in() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"seed": 11, "fig2": {"points": 3}}"#);
    let from_cfg = fig2_with(&["--config", &cfg], &[], Some("999"));
    // --points 4 on the command line wins over the file
    assert_eq!(from_cfg.lines().count(), 5);
    assert_eq!(from_cfg, fig2_with(&[], &["--seed", "11"], None));
    assert_eq!(from_cfg, fig2_with(&[], &[], Some("11")));
    assert_eq!(from_cfg, fig2_with(&["--config", &cfg], &[], None));
    assert_ne!(from_cfg, fig2_with(&["--config", &cfg], &["--seed", "12"], None));
}

#[test]
fn invalid_configuration_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.json", r#"{"fig2": {"points": 1}}"#);
    let out = ergox(&["--config", &cfg, "fig2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("fig2.points"), "{err}");

    let unknown = write(dir.path(), "unknown.json", r#"{"fig9": {}}"#);
    assert_eq!(ergox(&["--config", &unknown, "fig1"]).output().unwrap().status.code(), Some(2));
    assert_eq!(ergox(&["fig1", "--bogus"]).output().unwrap().status.code(), Some(2));
    assert_eq!(ergox(&["--help"]).output().unwrap().status.code(), Some(0));
}

#[test]
fn ergo_reports_thermal_passivity_and_fock_value() {
    let dir = tempfile::tempdir().unwrap();
    let thermal = write(
        dir.path(),
        "t.json",
        r#"{"jc_thermal": {"system": {"temperature": 0.7}, "environment": {"temperature": 0.7}}}"#,
    );
    let fock = write(dir.path(), "f.json", r#"{"jc_product": {"qubit": 0, "photons": 3}}"#);
    let ham = write(dir.path(), "h.json", r#""jc_noninteracting""#);
    let v: Value = serde_json::from_str(&stdout(&["ergo", "--cutoff", "8", "--state", &thermal, "--ham", &ham])).unwrap();
    assert!(v["value"].as_f64().unwrap().abs() < 1e-9);
    let v: Value =
        serde_json::from_str(&stdout(&["ergo", "--cutoff", "4", "--state", &fock, "--ham", &ham, "--local"])).unwrap();
    assert!((v["value"].as_f64().unwrap() - 3.0).abs() < 1e-9);
    assert!(v["local"]["value"].as_f64().unwrap().abs() < 1e-6);
}

#[test]
fn lie_presets() {
    let v: Value = serde_json::from_str(&stdout(&["lie"])).unwrap();
    assert_eq!(v["dimension"], 15);
    let v: Value = serde_json::from_str(&stdout(&["lie", "--delta", "0", "--sites", "3"])).unwrap();
    assert_eq!(v["dimension"], 21);
}

#[test]
fn fock_protocol_replays_to_full_work() {
    let dir = tempfile::tempdir().unwrap();
    let proto = dir.path().join("p.json");
    run(&mut ergox(&["fock", "--photons", "5", "--cutoff", "5", "--out", proto.to_str().unwrap()]));
    let state = write(dir.path(), "s.json", r#"{"jc_product": {"qubit": 0, "photons": 5}}"#);
    let v: Value = serde_json::from_str(&stdout(&[
        "protocol", "--cutoff", "5", "--replay", proto.to_str().unwrap(), "--state", &state,
    ]))
    .unwrap();
    assert!((v["report"]["work"].as_f64().unwrap() - 5.0).abs() < 1e-9);
    assert_eq!(v["local_ops"], 5);
}

#[test]
fn gnuplot_script_points_at_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("fig1.csv");
    let gp = dir.path().join("fig1.gp");
    let mut args = SMALL_FIG1.to_vec();
    args.extend(["--out", csv.to_str().unwrap(), "--gnuplot", gp.to_str().unwrap()]);
    let out = run(&mut ergox(&args));
    assert!(out.stdout.is_empty());
    let script = std::fs::read_to_string(&gp).unwrap();
    assert!(script.contains(csv.to_str().unwrap()), "{script}");
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with("input_label,"));
}

#[test]
fn chain_report_is_json() {
    let v: Value = serde_json::from_str(&stdout(&["chain", "--cutoff", "6"])).unwrap();
    assert!(v.is_object());
}
