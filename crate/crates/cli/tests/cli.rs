use std::process::{Command, Output};

use chansim_core::compiler::SimulationPlan;
use chansim_core::gates::{count_gates, GateList};

fn chansim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chansim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn sweep_to_stdout() {
    let out = chansim(&["sweep", "--channel", "pd", "--input", "-Y", "--columns", "exp_y"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "param,exp_y");
    assert_eq!(lines.len(), 22);
    assert_eq!(lines[1], "0,-1");
    assert_eq!(lines[21], "1,0");
}

#[test]
fn config_errors_carry_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "[sweep]\nchannel = \"pd\"\ngrid = \"0:2:0.1\"\n").unwrap();
    let out = chansim(&["sweep", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let msg = stderr(&out);
    assert!(msg.contains("bad.toml:3") && msg.contains("grid"), "{msg}");

    std::fs::write(&path, "[sweep]\nchanel = \"pd\"\n").unwrap();
    let out = chansim(&["sweep", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("chanel"));
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.toml");
    std::fs::write(&path, "[sweep]\nchannel = \"pd\"\ninput = \"Z\"\n").unwrap();
    let out = chansim(&[
        "sweep", "--config", path.to_str().unwrap(), "--channel", "ad", "--grid", "1:1:0.5",
        "--columns", "exp_z", "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v[0]["param"], 1.0);
    assert!((v[0]["exp_z"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn inapplicable_strategy_is_an_error() {
    let out = chansim(&["sweep", "--channel", "ad", "--strategy", "matched"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("matched"));
}

#[test]
fn plan_dump_parses_back() {
    let out = chansim(&["plan-dump", "--channel", "ad", "--param", "0.4"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let plan = SimulationPlan::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(plan.circuits().len(), 2);
}

#[test]
fn decompose_reports_counts() {
    let out = chansim(&["decompose", "--controls", "2", "--target", "X"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let gates = GateList::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(gates.wires(), 3);
    let counts = count_gates(&gates);
    assert_eq!(counts.cnot, 6);
    assert!(stderr(&out).contains("CNOTs: 6"));
}

#[test]
fn verify_and_costs() {
    let out = chansim(&["verify", "--channel", "dep", "--random", "5"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("channel,strategy,points,max_deviation\n"));
    assert!(text.contains("random,branch,5,"));

    let out = chansim(&["costs", "--n-max", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("2,16448,884736,")), "{text}");

    assert_eq!(chansim(&["costs", "--n-max", "9"]).status.code(), Some(2));
}
