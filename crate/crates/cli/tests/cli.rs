use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hirzfloor"))
        .args(args)
        .env_remove("HIRZFLOOR_CONFIG")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn no_floats(v: &Value) -> bool {
    match v {
        Value::Number(n) => n.is_i64() || n.is_u64(),
        Value::Array(a) => a.iter().all(no_floats),
        Value::Object(m) => m.values().all(no_floats),
        _ => true,
    }
}

#[test]
fn invariant_prints_the_count() {
    let o = run(&["invariant", "--a", "2", "--b", "0", "--k", "1", "--g", "0", "--beta", "2:1"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "2\n");
}

#[test]
fn list_diagrams_streams_five_lines_and_total() {
    let o = run(&[
        "invariant", "--a", "2", "--b", "1", "--k", "1", "--alpha", "2:1", "--beta", "1:1", "--alpha-tilde", "1:1",
        "--list-diagrams",
    ]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6);
    let mut mults = Vec::new();
    for l in &lines[..5] {
        let v: Value = serde_json::from_str(l).unwrap();
        mults.push(v["multiplicity"].as_str().unwrap().parse::<u64>().unwrap());
    }
    mults.sort_unstable();
    assert_eq!(mults, [1, 1, 1, 1, 4]);
    assert_eq!(lines[5], "8");
}

#[test]
fn inconsistent_and_zero_a_queries_exit_2() {
    let o = run(&["invariant", "--a", "3", "--b", "1", "--k", "1", "--alpha", "2:1", "--beta", "1:1", "--beta-tilde", "1:1"]);
    assert_eq!(code(&o), 2);
    let o = run(&["invariant", "--a", "0", "--b", "1", "--k", "1", "--beta-tilde", "1:1"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("a = 0"));
    let o = run(&["invariant", "--a", "2", "--b", "0", "--k", "1", "--beta", "2"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn f_reports_value_and_label() {
    let o = run(&["f", "--a", "2", "--k", "2", "--g", "0", "--x", "-1,3", "--y", "-6"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("276"));
    assert!(text.contains("chamber: 0 + −"));
}

#[test]
fn f_echoes_the_resolved_query() {
    let o = run(&["f", "--a", "3", "--k", "2", "--g", "1", "--x", "-2,-2,-1,1", "--y", "-3,-1,-1,1,2", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["query"], "N_1^{12,201,1,11}(3,4,2)");
    assert_eq!(v["b"], 4);
    assert!(no_floats(&v));
}

#[test]
fn f_rejects_points_off_the_lattice() {
    assert_eq!(code(&run(&["f", "--a", "2", "--k", "2", "--x", "-1,3", "--y", "0"])), 2);
    assert_eq!(code(&run(&["f", "--a", "2", "--k", "2", "--x", "-1,3", "--y", "-5"])), 2);
}

#[test]
fn chamber_poly_latex() {
    let o = run(&["chamber-poly", "--a", "2", "--k", "2", "--g", "0", "--n1", "2", "--n2", "1", "--point", "-1,3,-6", "--format", "latex"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "-2 x_{1}^{2} y_{1} - 2 x_{1} y_{1}^{2} - 2 y_{1}^{3} - 8 x_{1} y_{1} - 8 y_{1}^{2} - 16 y_{1}");
}

#[test]
fn chamber_poly_at_k0_is_odd_cubic() {
    let o = run(&["chamber-poly", "--a", "2", "--k", "0", "--g", "0", "--n1", "2", "--n2", "1", "--point", "-1,-1,2", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["report"]["degree"], 3);
    assert_eq!(v["report"]["fixed_k_parity"], true);
    assert!(no_floats(&v));
}

#[test]
fn chamber_poly_exit_codes() {
    let base = ["chamber-poly", "--a", "2", "--k", "2", "--g", "0", "--n1", "2", "--n2", "1"];
    let mut args = base.to_vec();
    args.extend(["--signature", "+-+-+-"]);
    assert_eq!(code(&run(&args)), 4);
    let mut args = base.to_vec();
    args.extend(["--point", "-2,4,-6"]);
    assert_eq!(code(&run(&args)), 2);
}

#[test]
fn budget_exhaustion_exits_3() {
    let o = run(&["--max-templates", "1", "invariant", "--a", "2", "--b", "1", "--k", "1", "--alpha", "2:1", "--beta", "1:1", "--alpha-tilde", "1:1"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn verify_suites() {
    let o = run(&["verify", "paper-values"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).ends_with("paper-values: pass\n"));

    let o = run(&["verify", "table1", "--k", "1", "--g", "0", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["checks"].as_array().unwrap().len(), 10);
    assert_eq!(v["pass"], true);
    assert!(no_floats(&v));

    let o = run(&["verify", "oracle", "--trials", "50", "--seed", "7"]);
    assert_eq!(code(&o), 0);

    assert_eq!(code(&run(&["verify", "everything"])), 2);
}

#[test]
fn output_is_independent_of_worker_count() {
    let args = |w: &'static str| {
        vec!["--workers", w, "invariant", "--a", "2", "--b", "1", "--k", "2", "--g", "1", "--alpha", "5:1", "--alpha-tilde", "1:1", "--list-diagrams"]
    };
    let one = run(&args("1"));
    let four = run(&args("4"));
    assert_eq!(code(&one), 0);
    assert!(stdout(&one).lines().count() > 2);
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn config_file_and_output_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    let out = dir.path().join("out.json");
    std::fs::write(&cfg, format!("# settings\nformat = json\noutput = {}\n", out.display())).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_hirzfloor"))
        .args(["invariant", "--a", "2", "--b", "0", "--k", "1", "--beta", "2:1"])
        .env("HIRZFLOOR_CONFIG", &cfg)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["value"], "2");

    // flags override the file
    let o = Command::new(env!("CARGO_BIN_EXE_hirzfloor"))
        .args(["--format", "text", "--config"])
        .arg(&cfg)
        .args(["--output", "-", "invariant", "--a", "2", "--b", "0", "--k", "1", "--beta", "2:1"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "2\n");

    std::fs::write(&cfg, "colour = red\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_hirzfloor"))
        .args(["invariant", "--a", "2", "--b", "0", "--k", "1", "--beta", "2:1"])
        .env("HIRZFLOOR_CONFIG", &cfg)
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}
