use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn model(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "models", name].iter().collect();
    p.to_str().unwrap().to_owned()
}

fn meanpay(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_meanpay")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn local_vi_on_three_mec() {
    let r = json(&meanpay(&["solve", "--alg", "local-vi", "--eps", "1e-6", &model("three_mec.mdp")]));
    assert!((r["value"].as_f64().unwrap() - 5.005).abs() < 1e-6);
    assert_eq!(r["algorithm"], "local-vi");
    assert_eq!(r["flags"], Value::Array(vec![]));
}

#[test]
fn unsound_criterion_is_flagged() {
    let f = model("span_trap_a1000.mdp");
    let r = json(&meanpay(&["solve", "--alg", "nvi", "--criterion", "sc2", "--eps", "0.1", &f]));
    assert_eq!(r["value"].as_f64(), Some(900.0));
    assert_eq!(r["iterations"].as_u64(), Some(2));
    assert!(r["flags"].as_array().unwrap().contains(&Value::from("criterion-unsound")));
}

#[test]
fn oracle_prints_exact_value() {
    let r = json(&meanpay(&["solve", "--alg", "oracle", &model("three_mec.mdp")]));
    assert_eq!(r["exact"], "1001/200");
}

#[test]
fn schema_has_every_field() {
    for alg in ["nvi", "local-vi", "odv", "oracle"] {
        let r = json(&meanpay(&["solve", "--alg", alg, "--generate", "grid:3,3", "--eps", "1e-3"]));
        let keys: Vec<&str> = r.as_object().unwrap().keys().map(String::as_str).collect();
        for k in [
            "algorithm", "model", "value", "lower", "upper", "epsilon", "iterations", "episodes", "explored_states",
            "explored_mecs", "wall_ms", "flags",
        ] {
            assert!(keys.contains(&k), "{alg}: missing {k}");
        }
    }
}

#[test]
fn plain_output() {
    let out = meanpay(&["solve", "--plain", &model("three_mec.mdp")]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l == "algorithm: local-vi"));
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| meanpay(args).status.code();
    let dir = std::env::temp_dir().join(format!("meanpay-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.mdp");
    std::fs::write(&bad, "mdp\nstates: 1\ninit: 0\n0 a 1 -> 0:0.5\n").unwrap();
    let bad = bad.to_str().unwrap();
    let fixture = model("three_mec.mdp");

    assert_eq!(code(&["solve", bad]), Some(1));
    assert_eq!(code(&["solve", "/nonexistent/model.mdp"]), Some(1));
    assert_eq!(code(&["solve", "--eps", "-1", &fixture]), Some(2));
    assert_eq!(code(&["solve", "--eps", "0", &fixture]), Some(2));
    assert_eq!(code(&["solve", "--tau", "1", &fixture]), Some(2));
    assert_eq!(code(&["solve", "--k", "1", &fixture]), Some(2));
    assert_eq!(code(&["solve", "--alg", "lp", &fixture]), Some(2));
    assert_eq!(code(&["solve", "--generate", "nope:1"]), Some(2));
    assert_eq!(code(&["solve"]), Some(2));
    assert_eq!(code(&["solve", "--generate", "three-mec", &fixture]), Some(2));
    // SC1 needs a communicating model
    assert_eq!(code(&["solve", "--alg", "nvi", &fixture]), Some(3));
    assert_eq!(code(&["solve", "--alg", "oracle", "--generate", "mec-chain:40,3"]), Some(3));
    assert_eq!(code(&["solve", "--alg", "nvi", "--generate", "grid:3,3"]), Some(0));

    let out = meanpay(&["solve", bad]);
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn empty_bench() {
    let out = meanpay(&["bench", "--json"]);
    assert_eq!(json(&out), Value::Array(vec![]));
    let out = meanpay(&["bench", "--alg", "odv"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 1);
}

#[test]
fn bench_partial_exploration() {
    let out = meanpay(&["bench", "--json", "--alg", "local-vi,odv", "--generate", "rare-branch:1000,0.001", "--eps", "0.1"]);
    let rows = json(&out);
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["algorithm"], "local-vi");
    assert_eq!(rows[1]["algorithm"], "odv");
    let total = rows[0]["explored_states"].as_u64().unwrap();
    assert_eq!(total, 1003);
    assert!(rows[1]["explored_states"].as_u64().unwrap() < total);
}

#[test]
fn bench_heuristics_are_deterministic() {
    let args = [
        "bench", "--json", "--alg", "odv", "--heuristic", "pr,rr,md", "--generate", "mec-chain:4,3", "--seed", "7",
        "--eps", "1e-3", "--jobs", "3",
    ];
    let strip = |v: Value| -> Vec<Value> {
        v.as_array()
            .unwrap()
            .iter()
            .cloned()
            .map(|mut r| {
                r.as_object_mut().unwrap().remove("wall_ms");
                r
            })
            .collect()
    };
    let a = strip(json(&meanpay(&args)));
    let b = strip(json(&meanpay(&args)));
    assert_eq!(a.len(), 3);
    let hs: Vec<&Value> = a.iter().map(|r| &r["heuristic"]).collect();
    assert_eq!(hs, ["pr", "rr", "md"]);
    assert_eq!(a, b);
}

#[test]
fn bench_records_errors_and_timeouts() {
    let rows = json(&meanpay(&[
        "bench", "--json", "--alg", "nvi,local-vi", "--model", &model("three_mec.mdp"), "--generate", "grid:3,3",
    ]));
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 4);
    // SC1 on a multichain model fails; the run continues
    assert!(rows[0]["error"].as_str().unwrap().contains("multichain"));
    assert!(rows[0]["value"].is_null());
    for r in &rows[1..] {
        assert!(r["error"].is_null() && r["value"].is_number(), "{r}");
    }

    let rows = json(&meanpay(&[
        "bench", "--json", "--alg", "odv", "--generate", "rare-branch:2000,0.001", "--eps", "1e-6", "--timeout-ms", "50",
    ]));
    let flags = rows[0]["flags"].as_array().unwrap();
    assert!(flags.contains(&Value::from("timeout")), "{flags:?}");
    assert!(rows[0]["lower"].as_f64().unwrap() <= rows[0]["upper"].as_f64().unwrap());
}
