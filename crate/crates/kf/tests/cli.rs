use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn theory(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../theories").join(format!("{name}.json"))
}

fn kf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kf")).args(args).env_remove("KF_MAX_BOUND_CAP").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn lines(p: &Path) -> usize {
    std::fs::read_to_string(p).unwrap().lines().count()
}

fn t(name: &str) -> String {
    theory(name).to_string_lossy().into_owned()
}

#[test]
fn decide_exit_codes() {
    let valid = kf(&["decide", "-t", &t("empty"), "-f", "[]p -> p"]);
    assert_eq!(code(&valid), 0);
    assert_eq!(stdout(&valid).trim(), r#"{"schema_version":1,"verdict":"valid"}"#);

    let counter = kf(&["decide", "-t", &t("empty"), "-f", "p"]);
    assert_eq!(code(&counter), 1);
    let v: serde_json::Value = serde_json::from_str(&stdout(&counter)).unwrap();
    assert_eq!(v["verdict"], "countermodel");
    assert!(v["model"]["loop"].is_array());

    assert_eq!(code(&kf(&["decide", "-t", &t("empty"), "-f", "p &"])), 64);
    assert_eq!(code(&kf(&["decide", "-t", &t("empty"), "-f", "r"])), 64);
    assert_eq!(code(&kf(&["decide", "-t", &t("box_p"), "-f", "<>p"])), 0);
    assert_eq!(code(&kf(&["decide", "-t", "/nonexistent.json", "-f", "p"])), 66);
}

#[test]
fn usage_and_data_errors() {
    assert_eq!(code(&kf(&["--help"])), 0);
    assert_eq!(code(&kf(&["--version"])), 0);
    assert_eq!(code(&kf(&["frobnicate"])), 64);
    assert_eq!(code(&kf(&["decide", "-f", "p"])), 64);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"schema_version": 7, "signature": {"atoms": ["p"]}}"#).unwrap();
    assert_eq!(code(&kf(&["decide", "-t", bad.to_str().unwrap(), "-f", "p"])), 65);
    std::fs::write(&bad, "not json").unwrap();
    assert_eq!(code(&kf(&["decide", "-t", bad.to_str().unwrap(), "-f", "p"])), 65);
}

#[test]
fn bound_cap_variable() {
    let run = |v: &str| {
        Command::new(env!("CARGO_BIN_EXE_kf"))
            .args(["decide", "-t", &t("empty"), "-f", "[]p -> p"])
            .env("KF_MAX_BOUND_CAP", v)
            .output()
            .unwrap()
    };
    assert_eq!(code(&run("lots")), 64);
    assert_eq!(code(&run("64")), 0);
    // Refuting this needs three distinct valuations in a row; a cap of one
    // allows at most two positions.
    let f = "~(~p & ~q & <>(p & ~q & <>(q & ~p)))";
    let one = Command::new(env!("CARGO_BIN_EXE_kf"))
        .args(["decide", "-t", &t("empty"), "-f", f])
        .env("KF_MAX_BOUND_CAP", "1")
        .output()
        .unwrap();
    assert_ne!(code(&one), 1);
    assert_eq!(code(&kf(&["decide", "-t", &t("empty"), "-f", f])), 1);
}

#[test]
fn parse_reports_forms_and_index() {
    let o = kf(&["parse", "--atoms", "p,q", "-f", "p -> q", "--index"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["sentence"], true);
    assert!(v["index"].is_u64());
    assert_eq!(v["modal_depth"], 0);
    let fo = kf(&["parse", "-t", &t("unary"), "-f", "exists x. P(x)", "--index"]);
    assert_eq!(code(&fo), 0);
    assert!(stdout(&fo).contains(r#""canonical":"exists x0. P(x0)""#));
}

#[test]
fn construct_writes_replayable_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = kf(&["construct", "-t", &t("empty"), "--stages", "100", "-o", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(lines(&a.join("trace.jsonl")), 100);
    for f in ["trace.jsonl", "fkd.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap());
    }
    let o = kf(&["construct", "-t", &t("inconsistent"), "--stages", "10", "-o", dir.path().join("c").to_str().unwrap()]);
    assert_eq!(code(&o), 3);
}

#[test]
fn conservative_placement_and_append_period() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r");
    let o = kf(&[
        "construct", "-t", &t("recurrence"), "--stages", "200", "--placement", "conservative", "--append-every", "0",
        "-o", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["stages"], 200);
    assert_eq!(code(&kf(&["construct", "-t", &t("empty"), "--stages", "1", "--placement", "other"])), 64);
}

#[test]
fn queries_extend_the_stage_cache() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let r = run.to_str().unwrap();
    assert_eq!(code(&kf(&["construct", "-t", &t("box_p"), "--stages", "50", "-o", r])), 0);

    let q = |w: &str, f: &str| kf(&["query", "--run", r, "--world", w, "-f", f]);
    let top = q("0", "true");
    assert_eq!((code(&top), stdout(&top).as_str()), (0, "true\n"));
    assert_eq!(stdout(&q("2", "[]p")), "true\n");
    let before = lines(&run.join("trace.jsonl"));
    assert!(before > 50);

    let pos = stdout(&q("1", "q"));
    let neg = stdout(&q("1", "~q"));
    assert_ne!(pos, neg);
    assert_eq!(stdout(&q("1", "q")), pos);
    assert!(lines(&run.join("trace.jsonl")) >= before);
    assert!(lines(&run.join("pins.jsonl")) >= 3);

    // The cache replays into the same answers from a fresh process.
    let fresh = kf(&["query", "-t", &t("box_p"), "--world", "1", "-f", "q"]);
    assert_eq!(stdout(&fresh), pos);
}

#[test]
fn cancelled_queries_keep_progress() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let r = run.to_str().unwrap();
    assert_eq!(code(&kf(&["construct", "-t", &t("empty"), "--stages", "0", "-o", r])), 0);
    let o = kf(&["query", "--run", r, "--world", "3", "-f", "[]<>p & <>[]q", "--max-stages", "300"]);
    assert_eq!(code(&o), 5);
    assert_eq!(lines(&run.join("trace.jsonl")), 300);
    let o = kf(&["query", "--run", r, "--world", "0", "-f", "p", "--timeout", "0"]);
    assert_eq!(code(&o), 0, "already decided, so no stage is needed");
}

#[test]
fn corrupted_trace_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let r = run.to_str().unwrap();
    assert_eq!(code(&kf(&["construct", "-t", &t("empty"), "--stages", "20", "-o", r])), 0);
    let trace = run.join("trace.jsonl");
    let text = std::fs::read_to_string(&trace).unwrap();
    let tampered: Vec<String> = text.lines().map(|l| l.replace(r#""e":0"#, r#""e":1"#)).collect();
    std::fs::write(&trace, tampered.join("\n") + "\n").unwrap();
    assert_eq!(code(&kf(&["query", "--run", r, "--world", "0", "-f", "p"])), 65);
}

#[test]
fn diagram_commands() {
    let dir = tempfile::tempdir().unwrap();
    let fkd = dir.path().join("d.json");
    std::fs::write(
        &fkd,
        r#"{"schema_version":1,"signature":{"atoms":["p","q"]},
            "worlds":[{"id":0,"sentences":["p"]},{"id":1,"sentences":[]},{"id":2,"sentences":["q"]}],
            "relation":[[0,1],[1,2],[0,2]]}"#,
    )
    .unwrap();
    let f = fkd.to_str().unwrap();
    assert_eq!(stdout(&kf(&["psi", "--fkd", f])), "p & <><>q & <>q\n");
    assert_eq!(code(&kf(&["consistent", "--fkd", f])), 0);
    assert_eq!(code(&kf(&["consistent", "--fkd", f, "-t", &t("box_p")])), 0);

    std::fs::write(
        &fkd,
        r#"{"schema_version":1,"signature":{"atoms":["p","q"]},
            "worlds":[{"id":0,"sentences":["[]p"]},{"id":1,"sentences":["~p"]}],
            "relation":[[0,1]]}"#,
    )
    .unwrap();
    assert_eq!(code(&kf(&["consistent", "--fkd", f])), 1);

    let dot = stdout(&kf(&["export", "--format", "dot", "--fkd", f]));
    assert!(dot.starts_with("digraph fkd {"));
    assert!(dot.contains("w0 -> w1;"));
    let json = stdout(&kf(&["export", "--format", "json", "--fkd", f]));
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["worlds"][1]["sentences"][0], "~p");

    let verdict = dir.path().join("v.json");
    let o = kf(&["decide", "-t", &t("empty"), "-f", "[]p"]);
    std::fs::write(&verdict, o.stdout).unwrap();
    let lasso = stdout(&kf(&["export", "--model", verdict.to_str().unwrap()]));
    assert!(lasso.contains("-> l0 [constraint=false];"));
    let out = dir.path().join("out.dot");
    assert_eq!(code(&kf(&["export", "--fkd", f, "-o", out.to_str().unwrap()])), 0);
    assert_eq!(std::fs::read_to_string(out).unwrap(), dot);
}
