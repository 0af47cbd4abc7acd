use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use qbd_core::fixtures::BACKDOOR_EXAMPLE_QDIMACS;
use qbd_core::io::parse_qdimacs;
use qbd_core::oracle::eval_bruteforce;

fn qbd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qbd"))
        .args(args)
        .env_remove("QBD_BRUTE_CAP")
        .env_remove("QBD_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn solve_example_is_true() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "ex.qdimacs", BACKDOOR_EXAMPLE_QDIMACS);
    let o = qbd(&["solve", &f]);
    assert_eq!(o.status.code(), Some(10));
    let out = stdout(&o);
    assert_eq!(out.lines().next(), Some("s TRUE"));
    assert!(out.contains("c k 3"));
}

#[test]
fn false_formula_exits_20() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "f.qdimacs", "p cnf 1 1\na 1 0\n1 0\n");
    let o = qbd(&["solve", "--algorithm", "brute", &f]);
    assert_eq!(o.status.code(), Some(20));
    assert!(stdout(&o).starts_with("s FALSE\n"));
}

#[test]
fn detect_prints_backdoor() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "ex.qdimacs", BACKDOOR_EXAMPLE_QDIMACS);
    let o = qbd(&["detect", "--class", "2cnf", &f]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "k=3: x3 x4 x5\n");
}

#[test]
fn solver_class_mismatch_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "h.qdimacs",
        "p cnf 2 1\nc class horn\ne 1 2 0\nc backdoor-begin\n1 2 0\n",
    );
    let o = qbd(&["solve", "--algorithm", "aff", &f]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("class"));
}

#[test]
fn parse_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "bad.qdimacs", "1 2 0\n");
    assert_eq!(qbd(&["solve", &f]).status.code(), Some(1));
    assert_eq!(qbd(&["solve", "missing.qdimacs"]).status.code(), Some(1));
    assert_ne!(qbd(&["solve", "--algorithm", "nope", &f]).status.code(), Some(0));
}

#[test]
fn strategy_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "ex.qdimacs", BACKDOOR_EXAMPLE_QDIMACS);
    let s = dir.path().join("strategy.txt");
    let o = qbd(&[
        "solve",
        "--algorithm",
        "brute",
        "--emit-strategy",
        s.to_str().unwrap(),
        &f,
    ]);
    assert_eq!(o.status.code(), Some(10));
    let tree = fs::read_to_string(&s).unwrap();
    assert!(tree.starts_with("(x1=1 "));
}

#[test]
fn brute_cap_flag_beats_environment() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "ex.qdimacs", BACKDOOR_EXAMPLE_QDIMACS);
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_qbd"));
        c.args(["solve", "--algorithm", "brute"]);
        if let Some(v) = flag {
            c.args(["--brute-cap", v]);
        }
        if let Some(v) = env {
            c.env("QBD_BRUTE_CAP", v);
        } else {
            c.env_remove("QBD_BRUTE_CAP");
        }
        c.arg(&f).output().unwrap().status.code()
    };
    assert_eq!(run(None, None), Some(10));
    assert_eq!(run(Some("3"), None), Some(1));
    assert_eq!(run(Some("3"), Some("10")), Some(10));
    assert_eq!(run(None, Some("3")), Some(1));
}

#[test]
fn kernelize_keeps_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("gen.qdimacs");
    for seed in 0..20 {
        let s = seed.to_string();
        let o = qbd(&[
            "generate",
            "random",
            "--class",
            "aff",
            "--n",
            "9",
            "--k",
            "3",
            "--atoms",
            "4",
            "--seed",
            &s,
            "-o",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        let original = parse_qdimacs(&fs::read_to_string(&out).unwrap()).unwrap().formula;
        let k = qbd(&["kernelize", out.to_str().unwrap()]);
        assert!(k.status.success());
        let kernel = parse_qdimacs(&stdout(&k)).unwrap().formula;
        assert!(kernel.matrix.tractable.len() <= 3);
        assert_eq!(
            eval_bruteforce(&kernel).unwrap(),
            eval_bruteforce(&original).unwrap(),
            "seed {seed}"
        );
    }
}

#[test]
fn classify_prints_verdict_and_witnesses() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "lang.txt", "impl 2 : 00,01,11\n");
    let o = qbd(&["classify", &f]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(out.lines().next(), Some("FPT"));
    assert!(out.contains("maj: preserves every relation"));
    let f = write(dir.path(), "bad.txt", "impl 2 : 00,011\n");
    assert_eq!(qbd(&["classify", &f]).status.code(), Some(1));
}

#[test]
fn mis_generators_encode_the_graph() {
    let dir = tempfile::tempdir().unwrap();
    // Two single-vertex parts joined by an edge: no independent transversal.
    let g = write(dir.path(), "g.txt", "parts 1 | 2\n1 2\n");
    for kind in ["mis-horn", "mis-ihsb"] {
        let o = qbd(&["generate", kind, "--graph", &g]);
        assert!(o.status.success());
        let f = parse_qdimacs(&stdout(&o)).unwrap().formula;
        assert!(eval_bruteforce(&f).unwrap(), "{kind}");
    }
    let g = write(dir.path(), "h.txt", "parts 1 | 2\n");
    let o = qbd(&["generate", "mis-horn", "--graph", &g]);
    let f = parse_qdimacs(&stdout(&o)).unwrap().formula;
    assert!(!eval_bruteforce(&f).unwrap());
}

#[test]
fn transforms_keep_value() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "ex.qdimacs", BACKDOOR_EXAMPLE_QDIMACS);
    let o = qbd(&["transform", "--dualize", &f]);
    assert!(o.status.success());
    let d = parse_qdimacs(&stdout(&o)).unwrap().formula;
    assert!(eval_bruteforce(&d).unwrap());
    let g = dir.path().join("mis.qdimacs");
    qbd(&[
        "generate",
        "mis-horn",
        "--vertices",
        "7",
        "--parts",
        "2",
        "--seed",
        "3",
        "-o",
        g.to_str().unwrap(),
    ]);
    let o = qbd(&["transform", "--to-3horn", g.to_str().unwrap()]);
    assert!(o.status.success());
    let before = parse_qdimacs(&fs::read_to_string(&g).unwrap()).unwrap().formula;
    let after = parse_qdimacs(&stdout(&o)).unwrap().formula;
    assert!(after
        .matrix
        .tractable
        .iter()
        .all(|a| a.as_clause().is_some_and(|c| c.len() <= 3)));
    assert_eq!(eval_bruteforce(&after).unwrap(), eval_bruteforce(&before).unwrap());
    assert_ne!(qbd(&["transform", &f]).status.code(), Some(0));
}

#[test]
fn bench_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench.jsonl");
    let out_s = out.to_str().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_qbd"))
        .args(["bench", "--suite", "class=2cnf,n=10,k=3,seeds=0..100", "--out", out_s])
        .env("QBD_THREADS", "2")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let lines: Vec<String> = fs::read_to_string(&out).unwrap().lines().map(String::from).collect();
    assert_eq!(lines.len(), 200);
    let v = qbd(&["bench-verify", out_s]);
    assert!(v.status.success());
    assert!(stdout(&v).contains("instances 100, disagreements 0, budget overruns 0"));

    // Flip one value: the instance must be reported.
    let mut rec: serde_json::Value = serde_json::from_str(&lines[0]).unwrap();
    let flipped = !rec["value"].as_bool().unwrap();
    rec["value"] = flipped.into();
    let mut corrupted = lines.clone();
    corrupted[0] = rec.to_string();
    let bad = write(dir.path(), "bad.jsonl", &(corrupted.join("\n") + "\n"));
    let v = qbd(&["bench-verify", &bad]);
    assert_eq!(v.status.code(), Some(1));
    assert!(stdout(&v).contains("disagreements 1"));

    let empty = write(dir.path(), "empty.jsonl", "");
    let v = qbd(&["bench-verify", &empty]);
    assert!(v.status.success());
    assert!(stdout(&v).contains("instances 0"));
}

#[test]
fn bench_suite_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.jsonl");
    let o = qbd(&["bench", "--suite", "colour=red", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let o = qbd(&[
        "bench",
        "--suite",
        "class=aff,n=8,k=2,seeds=0..5,algos=aff+brute",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
}
