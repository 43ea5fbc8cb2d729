//! End-to-end checks of the binary: exit codes, output determinism, the
//! graph file format round trip, and the corpus directory environment
//! variable.

use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_eulerwalk"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn validate_classifies_generated_cycle() {
    let out = run(&["validate", "--graph", "cycle:8:2:1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("8,24,true,true,3"), "{text}");
}

#[test]
fn gen_and_validate_round_trip_through_a_file() {
    let dir = std::env::temp_dir().join(format!("eulerwalk-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("gadget.eul");
    let out = run(&[
        "gen",
        "gadget",
        "--n",
        "8",
        "--alpha",
        "golden",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("eul 15 48"));
    assert!(text.contains("holding"));

    let out = run(&["validate", "--graph", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("15,48,true,true,"));

    // The corpus directory env var resolves bare file names.
    let out = bin()
        .args(["validate", "--graph", "gadget.eul"])
        .env("EULERWALK_CORPUS", &dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "corpus dir lookup failed");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn mix_threshold_and_profile() {
    let out = run(&["mix", "--graph", "cycle:9:2:1", "--metric", "linf", "--eps", "0.25"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("linf,0.25,"));

    let out = run(&["mix", "--graph", "cycle:9:2:1", "--times", "1,4,16"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.lines().count() >= 4, "{text}");
    assert!(text.starts_with("t,d1,dinf,dbar"));
}

#[test]
fn dump_kernel_writes_rows() {
    let dir = std::env::temp_dir().join(format!("eulerwalk-kernel-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("kernel.csv");
    let out = run(&[
        "mix",
        "--graph",
        "cycle:4:2:1",
        "--dump-kernel",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("u,v,probability"));
    // Lazy biased 4-cycle: diagonal 1/2, forward 1/3, backward 1/6.
    assert!(text.contains("0,1,0.3333333333333333"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn bad_epsilon_is_a_usage_error() {
    let out = run(&["mix", "--graph", "cycle:9:2:1", "--eps", "2.0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn corrupted_graph_file_exits_two() {
    let dir = std::env::temp_dir().join(format!("eulerwalk-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.eul");
    std::fs::write(&path, "eul 2 5\n0 1 1\n1 0 1\n").unwrap();
    let out = run(&["validate", "--graph", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn missing_graph_file_exits_two() {
    let out = run(&["validate", "--graph", "no-such-file.eul"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn identical_seeds_give_byte_identical_csv() {
    let args = [
        "hit",
        "--graph",
        "cycle:12:2:1",
        "--collide",
        "ANTIPODAL",
        "--replicas",
        "500",
        "--seed",
        "9",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    // Worker count must not perturb results either.
    let c = bin().args(args).args(["--workers", "1"]).output().unwrap();
    assert_eq!(stdout(&a), stdout(&c));
}

#[test]
fn spectral_bound_audit_passes_on_small_chain() {
    let out = run(&["spectral", "--graph", "random:6:15:3", "--profile", "--gmt-a", "0.25"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("gmt_bound,0.25,"));
    assert!(text.contains("violations=0"));
}

#[test]
fn gadget_exact_reports_thresholds() {
    let out = run(&["gadget", "--n", "16", "--alpha", "golden", "--exact"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("n,alpha,t_mix,t_unif,fitted_exponent"), "{text}");
    assert!(text.contains("16,0.6180339887498949,"));
}

#[test]
fn dioph_json_has_schema_version() {
    let out = run(&["--format", "json", "dioph", "--xi", "golden", "--n", "1000"]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["schema_version"], "1");
    assert_eq!(json["audits"][0]["violations"], 0);
}

#[test]
fn explore_runs_with_phase_audits() {
    let out = run(&[
        "explore",
        "--graph",
        "cycle:12:2:1",
        "--k",
        "1,3,6,12",
        "--replicas",
        "100",
        "--seed",
        "3",
        "--dump-labelling",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("k,mean,stderr,bound,ok"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("labelling:"));
}

#[test]
fn unknown_flag_exits_two() {
    let out = run(&["mix", "--graph", "cycle:9:2:1", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}
