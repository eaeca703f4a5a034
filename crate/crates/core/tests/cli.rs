use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn kahlerlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kahlerlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn gma_config(flow: &str, outputs: &str) -> String {
    format!(
        r#"{{
            "problem": "gMA", "dimension": 2, "grid_N": 8,
            "backgrounds": {{ "chi": [[2, 0], [0, 2]], "omega": [[1, 0], [0, 1]] }},
            "coefficients": {{ "c": [1.0] }},
            "initial": {{ "kind": "trig", "terms": [{{ "amplitude": 0.03, "wave": [1, 0, 0, 0] }}] }},
            "flow": {flow},
            "outputs": {outputs}
        }}"#
    )
}

#[test]
fn op_examples() {
    let out = kahlerlab(&["op", "--gma", "--lambda", "2,2", "--c", "1", "--c0", "2"]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["Q"], 1.0);
    assert_eq!(v["P1"], 0.25);

    let v = stdout_json(&kahlerlab(&["op", "--dhym", "--lambda", "1,1"]));
    assert!((v["theta"].as_f64().unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    assert_eq!(v["slope"][0].as_f64().unwrap().abs(), 0.0);
    assert_eq!(v["slope"][1], 2.0);

    let v = stdout_json(&kahlerlab(&["op", "--lambda", "1,2,3", "--sym"]));
    assert_eq!(v, serde_json::json!({ "S": [1.0, 6.0, 11.0, 6.0] }));
}

#[test]
fn op_accepts_matrix_pairs() {
    let out = kahlerlab(&["op", "--sym", "--chi", "[[2, [0, 1]], [[0, -1], 2]]", "--omega", "[[1, 0], [0, 1]]"]);
    assert_eq!(code(&out), 0);
    let s = stdout_json(&out)["S"].clone();
    assert!((s[1].as_f64().unwrap() - 4.0).abs() < 1e-12);
    assert!((s[2].as_f64().unwrap() - 3.0).abs() < 1e-12);
}

#[test]
fn op_bad_input_exits_2() {
    assert_eq!(code(&kahlerlab(&["op", "--lambda", "1,x"])), 2);
    assert_eq!(code(&kahlerlab(&["op", "--gma", "--lambda", "1,2,3", "--c", "1"])), 2);
    assert_eq!(code(&kahlerlab(&["op", "--chi", "[[1, 2], [3, 1]]"])), 2);
    assert_eq!(code(&kahlerlab(&["op"])), 2);
}

#[test]
fn cone_exit_codes() {
    assert_eq!(code(&kahlerlab(&["cone", "--gma", "--lambda", "2,3", "--c", "1"])), 0);
    let out = kahlerlab(&["cone", "--gma", "--lambda", "0.1,5", "--c", "1"]);
    assert_eq!(code(&out), 1);
    assert!(stdout_json(&out)["report"]["witness"].is_object());
    assert_eq!(code(&kahlerlab(&["cone", "--dhym", "--lambda", "1,1", "--theta", "1.2", "--big-theta", "2"])), 0);
    assert_eq!(code(&kahlerlab(&["cone", "--dhym", "--lambda", "-3,1", "--theta", "1.2", "--big-theta", "2"])), 1);
    assert_eq!(code(&kahlerlab(&["cone", "--dhym", "--lambda", "1,1", "--theta", "2", "--big-theta", "1"])), 2);
}

#[test]
fn props_exit_codes() {
    let out = kahlerlab(&["props", "--suite", "tp-equivalence", "--seed", "7", "--samples", "200"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["passed"], true);

    let out = kahlerlab(&["props", "--suite", "gma-monotonicity", "--samples", "50", "--c", "-0.5"]);
    assert_eq!(code(&out), 1);
    assert!(stdout_json(&out)["witness"].is_object());

    assert_eq!(code(&kahlerlab(&["props", "--suite", "no-such-suite"])), 2);
}

#[test]
fn props_are_deterministic() {
    let args = ["props", "--suite", "ky-fan", "--seed", "3", "--samples", "300"];
    assert_eq!(kahlerlab(&args).stdout, kahlerlab(&args).stdout);
}

#[test]
fn intersect_exit_codes() {
    let out = kahlerlab(&["intersect", "--chi", "[[2, 0], [0, 2]]", "--c", "1"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["forced_c0"], 2.0);
    assert_eq!(code(&kahlerlab(&["intersect", "--chi", "[[0.4, 0], [0, 0.4]]", "--c", "1"])), 5);
    assert_eq!(code(&kahlerlab(&["intersect", "--chi", "[[2, 0], [0, 2]]", "--c", "1,2"])), 2);
}

#[test]
fn flow_converges_at_fixed_point() {
    let dir = tempfile::tempdir().unwrap();
    let body = gma_config("{}", r#"{ "csv": "run.csv", "summary": "run.json", "snapshot": "phi.kfld" }"#)
        .replace("\"amplitude\": 0.03", "\"amplitude\": 0.0");
    let cfg = write_config(dir.path(), "fixed.json", &body);
    let out = kahlerlab(&["flow", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("run.json")).unwrap()).unwrap();
    assert_eq!(summary["status"], "converged");
    assert_eq!(summary["t_final"], 0.0);
    assert_eq!(summary["config"]["problem"], "gMA");
    let csv = std::fs::read_to_string(dir.path().join("run.csv")).unwrap();
    assert!(csv.starts_with("t,res_l2,res_inf,sup_abs_phidot,energy_I,energy_J,min_eig,theta_min,theta_max,dt\n"));
    assert!(dir.path().join("phi.kfld").exists());
}

#[test]
fn flow_outputs_are_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| {
        let outputs = format!(r#"{{ "csv": "{tag}.csv", "snapshot": "{tag}.kfld" }}"#);
        let cfg = write_config(dir.path(), &format!("{tag}.json"), &gma_config(r#"{ "t_max": 0.3 }"#, &outputs));
        assert_eq!(code(&kahlerlab(&["flow", cfg.to_str().unwrap()])), 3);
        let read = |ext: &str| std::fs::read(dir.path().join(format!("{tag}.{ext}"))).unwrap();
        (read("csv"), read("kfld"))
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn flow_t_max_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "short.json", &gma_config(r#"{ "t_max": 0.2 }"#, "{}"));
    let out = kahlerlab(&["flow", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    assert_eq!(stdout_json(&out)["status"], "t_max_reached");
}

#[test]
fn flow_diverged_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "stiff.json", &gma_config(r#"{ "dt_min": 1e6 }"#, "{}"));
    let out = kahlerlab(&["flow", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 4);
    assert_eq!(stdout_json(&out)["status"], "diverged");
}

#[test]
fn flow_bad_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "typo.json", &gma_config(r#"{ "t_maxx": 1 }"#, "{}"));
    assert_eq!(code(&kahlerlab(&["flow", cfg.to_str().unwrap()])), 2);
    let cfg = write_config(dir.path(), "grid.json", &gma_config("{}", "{}").replace("\"grid_N\": 8", "\"grid_N\": 7"));
    assert_eq!(code(&kahlerlab(&["flow", cfg.to_str().unwrap()])), 2);
    assert_eq!(code(&kahlerlab(&["flow", dir.path().join("missing.json").to_str().unwrap()])), 2);
    // An inadmissible initial potential.
    let cfg = write_config(dir.path(), "steep.json", &gma_config("{}", "{}").replace("0.03", "5.0"));
    assert_eq!(code(&kahlerlab(&["flow", cfg.to_str().unwrap()])), 2);
}

fn sweep_config(chi: &str, s: &str) -> String {
    format!(
        r#"{{
            "problem": "gMA", "dimension": 2, "grid_N": 8,
            "backgrounds": {{ "chi": {chi}, "omega": [[1, 0], [0, 1]] }},
            "coefficients": {{ "c": [1.0] }},
            "schedule": {{ "s": {s}, "c0_amplitude": 0.3 }},
            "flow": {{ "residual_target": 1e-7 }},
            "outputs": {{ "dir": "sweep" }}
        }}"#
    )
}

#[test]
fn single_index_sweep_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "one.json", &sweep_config("[[2, 0], [0, 2]]", "[0.5]"));
    let out = kahlerlab(&["sweep", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["entries"].as_array().unwrap().len(), 1);
    for f in ["index_1.csv", "limit_1.kfld", "sweep.json"] {
        assert!(dir.path().join("sweep").join(f).exists(), "{f} missing");
    }
}

#[test]
fn infeasible_sweep_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", &sweep_config("[[0.4, 0], [0, 0.4]]", "[1.0, 0.5, 0.1]"));
    let out = kahlerlab(&["sweep", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 5);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("index 3") && err.contains("p = 1"), "{err}");
}

#[test]
fn malformed_sweep_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "up.json", &sweep_config("[[2, 0], [0, 2]]", "[0.1, 0.5]"));
    assert_eq!(code(&kahlerlab(&["sweep", cfg.to_str().unwrap()])), 2);
    let no_schedule = gma_config("{}", "{}");
    let cfg = write_config(dir.path(), "none.json", &no_schedule);
    assert_eq!(code(&kahlerlab(&["sweep", cfg.to_str().unwrap()])), 2);
}

#[test]
fn help_lists_commands() {
    let out = kahlerlab(&["--help"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    for cmd in ["op", "cone", "flow", "sweep", "props", "intersect"] {
        assert!(text.contains(cmd), "{cmd} missing from help");
    }
}
