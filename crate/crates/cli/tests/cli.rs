use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn actcert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_actcert")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn tmp(name: &str) -> PathBuf {
    Path::new(env!("CARGO_TARGET_TMPDIR")).join(name)
}

/// Compares against `tests/golden/<name>`; `UPDATE_GOLDEN=1` rewrites it.
fn golden(name: &str, actual: &str) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let want = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
    assert_eq!(actual, want, "{name} differs from its golden file");
}

#[test]
fn golden_check_report() {
    let o = actcert(&["check", "--example", "symmetric-walk", "--horizon", "6", "--json"]);
    assert_eq!(code(&o), 0);
    golden("check-symmetric-walk.json", &stdout(&o));
}

#[test]
fn golden_failing_check() {
    let o = actcert(&["check", "--example", "symmetric-walk-demonic", "--horizon", "4", "--json"]);
    assert_eq!(code(&o), 0);
    let path = tmp("fail.acts");
    std::fs::write(
        &path,
        "system drift\nvar s : int\ntarget : s == 0\nrule when s != 0 :\n  choice :\n    1/3 -> s := s - 1\n    2/3 -> s := s + 1\nvariant : s\npd : p = piecewise { else: 1/2 }, d = piecewise { else: 1 }\ninit : 1\n",
    )
    .unwrap();
    let o = actcert(&["check", path.to_str().unwrap(), "--horizon", "3", "--exact", "--json"]);
    assert_eq!(code(&o), 1);
    golden("check-drift-fail.json", &stdout(&o));
}

#[test]
fn golden_refute_report() {
    let o = actcert(&["refute", "--example", "constant-bias-walk", "--horizon", "15/8", "--json"]);
    assert_eq!(code(&o), 0);
    golden("refute-constant-bias.json", &stdout(&o));
}

#[test]
fn golden_scan() {
    let o = actcert(&["scan-lgg", "--max", "6", "--function", "log", "--json"]);
    assert_eq!(code(&o), 1);
    golden("scan-log-6.json", &stdout(&o));
}

#[test]
fn golden_examples_list() {
    let o = actcert(&["examples", "list", "--json"]);
    assert_eq!(code(&o), 0);
    golden("examples.json", &stdout(&o));
}

#[test]
fn symmetric_walk_bound_from_file() {
    let path = tmp("symmetric-walk.acts");
    let o = actcert(&["examples", "emit", "symmetric-walk"]);
    std::fs::write(&path, &o.stdout).unwrap();
    let o = actcert(&["check", path.to_str().unwrap(), "--rule", "pd", "--horizon", "100", "--exact", "--json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["report"]["bounds"]["termination_lower_bound"], "99/100");
    assert_eq!(v["report"]["bounds"]["start_variant"], "1");
}

#[test]
fn captured_spline_pd_is_not_a_pass() {
    let path = tmp("captured-spline.acts");
    std::fs::write(&path, actcert(&["examples", "emit", "captured-spline"]).stdout).unwrap();
    let o = actcert(&["check", path.to_str().unwrap(), "--rule", "pd", "--horizon", "2", "--budget", "20000"]);
    assert!(matches!(code(&o), 1 | 2), "{}", stdout(&o));
    assert!(stdout(&o).contains("bounded variant"), "{}", stdout(&o));
}

#[test]
fn usage_and_parse_errors_exit_3() {
    assert_eq!(code(&actcert(&["check"])), 3);
    assert_eq!(code(&actcert(&["frobnicate"])), 3);
    assert_eq!(code(&actcert(&["check", "--example", "no-such-thing"])), 3);
    let path = tmp("bad.acts");
    std::fs::write(&path, "system bad\nvar s : int\ntarget : s == \n").unwrap();
    let o = actcert(&["check", path.to_str().unwrap(), "--horizon", "3"]);
    assert_eq!(code(&o), 3);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("bad.acts:4:1"), "{err}");
    // a file needs an explicit horizon
    std::fs::write(&path, actcert(&["examples", "emit", "symmetric-walk"]).stdout).unwrap();
    assert_eq!(code(&actcert(&["check", path.to_str().unwrap()])), 3);
    assert_eq!(code(&actcert(&["--help"])), 0);
}

#[test]
fn programmatic_only_bundles_are_marked() {
    let o = actcert(&["examples", "emit", "tinsel"]);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("programmatic-only"));
}

#[test]
fn walk_2d_has_nothing_to_check() {
    let o = actcert(&["check", "--example", "walk-2d", "--json"]);
    assert_eq!(code(&o), 2);
    assert_eq!(json(&o)["verdict"], "no-variant");
}

#[test]
fn simulation_is_replayable_and_thread_independent() {
    let args = ["simulate", "--example", "symmetric-walk", "--horizon", "20", "--trials", "5000", "--seed", "9", "--oracle", "--json"];
    let a = actcert(&args);
    assert_eq!(code(&a), 0);
    let b = Command::new(env!("CARGO_BIN_EXE_actcert")).args(args).env("ACTCERT_THREADS", "1").output().unwrap();
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["oracle"]["z"], "19/20");
    let z = v["result"]["z_hat"].as_f64().unwrap();
    let hw = v["result"]["half_width"].as_f64().unwrap();
    assert!((z - 0.95).abs() <= 3.0 * hw, "{z} ± {hw}");
}

#[test]
fn simulation_trace_csv() {
    let path = tmp("trace.csv");
    let o = actcert(&[
        "simulate", "--example", "symmetric-walk", "--horizon", "5", "--trials", "10", "--trace", path.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("trial,outcome,steps"));
    assert_eq!(lines.count(), 10);
}

#[test]
fn synthesize_outputs() {
    let o = actcert(&["synthesize", "tree", "--depth", "8", "--json"]);
    let want = ["0", "1", "3/2", "7/4", "2", "17/8", "9/4", "19/8", "5/2"];
    assert_eq!(json(&o)["values"], serde_json::json!(want));
    let o = actcert(&["synthesize", "birth-death", "--q", "1/3", "--max", "3", "--json"]);
    assert_eq!(json(&o)["values"], serde_json::json!(["0", "1", "3/2", "7/4"]));

    let path = tmp("nabla.acts");
    std::fs::write(
        &path,
        "system drift\nvar s : int\ntarget : s == 0\nrule when s > 0 :\n  choice :\n    3/4 -> s := s - 1\n    1/4 -> s := s + 1\nvariant : s\nnabla : piecewise { else: 1/2 }\ninit : 1\n",
    )
    .unwrap();
    let o = actcert(&["check", path.to_str().unwrap(), "--horizon", "30", "--exact"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let o = actcert(&["synthesize", "pd-from-nabla", path.to_str().unwrap(), "--hint", "30"]);
    assert_eq!(code(&o), 0);
    let line = stdout(&o);
    assert!(line.starts_with("pd : p = piecewise {"), "{line}");
    // the synthesized witness checks on the same window
    let text = std::fs::read_to_string(&path).unwrap().replace("nabla : piecewise { else: 1/2 }\n", &line);
    std::fs::write(&path, text).unwrap();
    let o = actcert(&["check", path.to_str().unwrap(), "--rule", "pd", "--horizon", "30", "--exact"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));

    let o = actcert(&["synthesize", "foster", "--t-max", "2000", "--i-max", "5", "--json"]);
    let v = json(&o);
    let vals: Vec<f64> = v["values"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(vals.len(), 6);
    assert_eq!(vals[0], 0.0);
    assert!(vals.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn scan_csv_lists_violations() {
    let path = tmp("scan.csv");
    let o = actcert(&["scan-lgg", "--max", "30", "--function", "log", "--csv", path.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("kind,x,y,slack\n"));
    assert!(text.lines().skip(1).all(|l| l.starts_with("violation,")));
    assert!(text.contains("violation,2,2,"));
    let o = actcert(&["scan-lgg", "--max", "30", "--function", "loglog", "--json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["violations"], serde_json::json!([]));
    assert_eq!(code(&actcert(&["scan-lgg", "--function", "cubic"])), 3);
}
