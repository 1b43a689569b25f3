use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use deobbench_core::dataset::{read_jsonl, Condition, Role};
use deobbench_core::frontend::{parse_checked, pretty_print};
use deobbench_core::report::ScoreRecord;
use deobbench_core::transforms::{apply, TransformConfig, TransformKind};
use tempfile::TempDir;

fn fixtures(sub: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(sub)
}

fn deobbench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_deobbench"))
        .args(args)
        .env_remove("RUST_LOG")
        .output()
        .unwrap()
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout:\n{}\nstderr:\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// A corpus of three small programs, one of which loops without bound.
fn small_corpus(dir: &Path) -> PathBuf {
    let corpus = dir.join("corpus");
    fs::create_dir_all(&corpus).unwrap();
    for name in ["abs_value.c", "sign_class.c", "drain_tank.c"] {
        fs::copy(fixtures("corpus").join(name), corpus.join(name)).unwrap();
    }
    corpus
}

#[test]
fn obfuscate_matches_the_library() {
    let input = fixtures("listings").join("f_before.c");
    let text = fs::read_to_string(&input).unwrap();
    let unit = parse_checked("f.c", &text).unwrap();
    for kind in TransformKind::ALL {
        let cfg = TransformConfig {
            seed: 5,
            ..TransformConfig::default()
        };
        let expected = pretty_print(&apply(kind, &unit, &cfg).unwrap().output);
        let got = ok(&deobbench(&["obfuscate", "--kind", kind.tag(), "--seed", "5", path(&input)]));
        assert_eq!(got, expected, "{kind}");
    }
    let tmp = TempDir::new().unwrap();
    let dest = tmp.path().join("out.c");
    ok(&deobbench(&["obfuscate", "--kind", "cff", "--paper-fidelity", path(&input), "-o", path(&dest)]));
    let golden = parse_checked("f_after_cff.c", &fs::read_to_string(fixtures("listings").join("f_after_cff.c")).unwrap()).unwrap();
    let written = parse_checked("out.c", &fs::read_to_string(&dest).unwrap()).unwrap();
    assert!(written.same_code(&golden));
}

#[test]
fn symexec_writes_artifact_files() {
    let tmp = TempDir::new().unwrap();
    let input = fixtures("listings").join("f_before.c");
    let stdout = ok(&deobbench(&[
        "symexec",
        path(&input),
        "--entry",
        "f",
        "--max-paths",
        "100",
        "--domain",
        "-1024:1023",
        "--smt2-int-sort",
        "-o",
        path(tmp.path()),
    ]));
    assert!(stdout.starts_with("f: 2 path(s), 2 test(s)"), "{stdout}");
    let mut names: Vec<String> = fs::read_dir(tmp.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(names, ["f_before.istats", "f_before.kquery", "f_before.ktest.0", "f_before.ktest.1", "f_before.smt2"]);
    let smt2 = fs::read_to_string(tmp.path().join("f_before.smt2")).unwrap();
    assert!(smt2.lines().any(|l| l == "(assert (> x 0))"), "{smt2}");
}

#[test]
fn dataset_build_writes_one_file_per_kind_and_condition() {
    let tmp = TempDir::new().unwrap();
    let corpus = small_corpus(tmp.path());
    let out = tmp.path().join("data");
    let stdout = ok(&deobbench(&["dataset", "build", "--corpus", path(&corpus), "--out", path(&out)]));
    assert!(stdout.contains("kept 2 program(s); dropped 1 for path explosion, 0 for the token budget"), "{stdout}");
    for kind in TransformKind::ALL {
        for cond in Condition::ALL {
            let records = read_jsonl(&out.join("dataset").join(format!("{}_{}.jsonl", kind.tag(), cond.tag()))).unwrap();
            let ids: Vec<&str> = records.iter().map(|r| r.program_id.as_str()).collect();
            assert_eq!(ids, ["abs_value", "sign_class"]);
            assert!(records.iter().all(|r| r.kind == kind && r.condition == cond));
        }
    }
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("filter_report.json")).unwrap()).unwrap();
    assert_eq!(report["reasons"][0][0], "drain_tank");
}

#[test]
fn dataset_budget_and_split() {
    let tmp = TempDir::new().unwrap();
    let corpus = small_corpus(tmp.path());
    let out = tmp.path().join("data");
    let stdout = ok(&deobbench(&[
        "dataset", "build", "--corpus", path(&corpus), "--out", path(&out), "--condition", "baseline", "--budget", "0",
    ]));
    assert!(stdout.contains("kept 0 program(s); dropped 1 for path explosion, 2 for the token budget"), "{stdout}");
    assert!(!out.join("dataset").join("ae_enhanced.jsonl").exists());

    let out = tmp.path().join("split");
    ok(&deobbench(&[
        "dataset", "build", "--corpus", path(&corpus), "--out", path(&out), "--test-fraction", "0.5",
    ]));
    let train = read_jsonl(&out.join("dataset/train/be_baseline.jsonl")).unwrap();
    let test = read_jsonl(&out.join("dataset/test/be_baseline.jsonl")).unwrap();
    assert_eq!((train.len(), test.len()), (1, 1));
    assert_ne!(train[0].program_id, test[0].program_id);
}

#[test]
fn infer_with_stub_echoes_the_variant() {
    let tmp = TempDir::new().unwrap();
    let corpus = small_corpus(tmp.path());
    let out = tmp.path().join("data");
    ok(&deobbench(&["dataset", "build", "--corpus", path(&corpus), "--out", path(&out)]));
    let input = out.join("dataset/op_enhanced.jsonl");
    let results = tmp.path().join("results.jsonl");
    let stdout = ok(&deobbench(&["infer", "--stub", "--in", path(&input), "--out", path(&results)]));
    assert!(stdout.starts_with("2 record(s): 2 with code, 0 failed"), "{stdout}");
    let records = read_jsonl(&input).unwrap();
    let lines: Vec<serde_json::Value> = fs::read_to_string(&results)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    for (r, line) in records.iter().zip(&lines) {
        assert_eq!(line["program_id"], r.program_id.as_str());
        assert_eq!(line["extracted_code"], r.obfuscated_code().unwrap());
        assert_eq!(line["latency_ms"], 0);
        assert!(r.content(Role::User).unwrap().contains("KLEE Artifacts:"));
    }
}

#[test]
fn infer_needs_an_endpoint_or_the_stub() {
    let out = deobbench(&["infer", "--in", "x.jsonl"]);
    assert_eq!(out.status.code(), Some(2));
    let out = deobbench(&["infer", "--stub", "--in", "/nonexistent/x.jsonl"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn evaluate_emits_scores() {
    let original = fixtures("listings").join("f_before.c");
    let candidate = fixtures("listings").join("f_after_cff.c");
    let v: serde_json::Value =
        serde_json::from_str(&ok(&deobbench(&["evaluate", "--original", path(&original), "--candidate", path(&candidate)])))
            .unwrap();
    assert_eq!(v["syntax"]["value"], 100.0);
    assert_eq!(v["semantic"]["value"], 100.0);
    assert_eq!(v["semantic"]["n_original"], 2);
    assert!(v["quality"]["breakdown"]["cyclomatic"].is_array());

    let tmp = TempDir::new().unwrap();
    let broken = tmp.path().join("broken.c");
    fs::write(&broken, "int f(int x) { return x +; }").unwrap();
    let dest = tmp.path().join("score.json");
    ok(&deobbench(&[
        "evaluate", "--original", path(&original), "--candidate", path(&broken), "--entry", "f", "--kind", "be",
        "--model-condition", "m_baseline", "--out", path(&dest),
    ]));
    let record: ScoreRecord = serde_json::from_str(&fs::read_to_string(&dest).unwrap()).unwrap();
    assert_eq!((record.kind, record.model_condition.as_str()), (TransformKind::BE, "m_baseline"));
    assert!(!record.syntax.passed());
    assert_eq!(record.semantic.value, 0.0);
}

#[test]
fn evaluate_with_an_external_compiler() {
    let original = fixtures("listings").join("f_before.c");
    let out = deobbench(&[
        "evaluate", "--original", path(&original), "--candidate", path(&original), "--compiler-cmd", "true {file}",
    ]);
    let v: serde_json::Value = serde_json::from_str(&ok(&out)).unwrap();
    assert_eq!(v["syntax"]["method"], "external-command");
    assert_eq!(v["syntax"]["value"], 100.0);
    let out = deobbench(&[
        "evaluate", "--original", path(&original), "--candidate", path(&original), "--compiler-cmd",
        "/nonexistent/cc {file}",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn report_skips_malformed_files() {
    let tmp = TempDir::new().unwrap();
    let corpus = small_corpus(tmp.path());
    let run = tmp.path().join("run");
    ok(&deobbench(&["pipeline", "--corpus", path(&corpus), "--out", path(&run), "--kinds", "ae,op"]));
    let scores = run.join("scores");
    fs::write(scores.join("junk.json"), "{ not json").unwrap();
    fs::write(scores.join("notes.txt"), "ignored").unwrap();
    let rep = tmp.path().join("rep");
    let table = ok(&deobbench(&["report", path(&scores), "--out", path(&rep)]));
    assert!(table.ends_with("8 score file(s) read, 1 malformed file(s) skipped\n"), "{table}");
    let csv = fs::read_to_string(rep.join("report.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "transformation,model_condition,total_files,successful,success_rate,semantic_mean,semantic_std,quality_mean,quality_std");
    let cells: Vec<(&str, &str)> = lines[1..].iter().map(|l| {
        let mut it = l.split(',');
        (it.next().unwrap(), it.next().unwrap())
    }).collect();
    assert_eq!(
        cells,
        [
            ("ARITHMETIC", "stub-identity_baseline"),
            ("ARITHMETIC", "stub-identity_enhanced"),
            ("OPAQUE", "stub-identity_baseline"),
            ("OPAQUE", "stub-identity_enhanced"),
        ]
    );
    assert_eq!(csv, fs::read_to_string(run.join("report.csv")).unwrap());
}

#[test]
fn pipeline_usage_errors_exit_2() {
    let tmp = TempDir::new().unwrap();
    let out = deobbench(&["pipeline", "--corpus", "/nonexistent/corpus", "--out", path(tmp.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("corpus directory /nonexistent/corpus does not exist"));
    assert_eq!(deobbench(&["pipeline", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(deobbench(&["pipeline", "--test-fraction", "1.5", "--corpus", "."]).status.code(), Some(2));
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "sede = 1\n").unwrap();
    assert_eq!(deobbench(&["--config", path(&cfg), "pipeline"]).status.code(), Some(2));
}

#[test]
fn pipeline_failure_leaves_a_stage_marker() {
    let tmp = TempDir::new().unwrap();
    let corpus = small_corpus(tmp.path());
    let run = tmp.path().join("run");
    let out = deobbench(&[
        "pipeline", "--corpus", path(&corpus), "--out", path(&run), "--compiler-cmd", "/nonexistent/cc {file}",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let stage = fs::read_to_string(run.join("STAGE")).unwrap();
    assert!(stage.starts_with("failed evaluate: "), "{stage}");
    assert!(run.join("dataset/cff_baseline.jsonl").exists());
    assert!(run.join("inference/cff_baseline.results.jsonl").exists());
    assert!(!run.join("report.csv").exists());

    fs::write(corpus.join("broken.c"), "int broken(int x) { return y; }").unwrap();
    let out = deobbench(&["pipeline", "--corpus", path(&corpus), "--out", path(&run)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(fs::read_to_string(run.join("STAGE")).unwrap().starts_with("failed build: "));
}

#[test]
fn pipeline_reads_a_config_file() {
    let tmp = TempDir::new().unwrap();
    let corpus = small_corpus(tmp.path());
    let run = tmp.path().join("run");
    let cfg = tmp.path().join("run.toml");
    fs::write(
        &cfg,
        format!(
            "corpus = {:?}\nout = {:?}\nkinds = [\"be\"]\nconditions = [\"enhanced\"]\nseed = 3\n\n[limits]\nmax_paths = 500\n",
            path(&corpus),
            path(&run)
        ),
    )
    .unwrap();
    ok(&deobbench(&["--config", path(&cfg), "pipeline"]));
    let manifest = fs::read_to_string(run.join("manifest.toml")).unwrap();
    assert!(manifest.contains("seed = 3\n") && manifest.contains("max_paths = 500\n"), "{manifest}");
    assert!(manifest.contains("out = \".\"\n"));
    let inference: Vec<String> = fs::read_dir(run.join("inference"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert_eq!(inference, ["be_enhanced.results.jsonl"]);
    assert_eq!(fs::read_to_string(run.join("STAGE")).unwrap(), "complete\n");

    // A rerun from the written manifest reproduces the run.
    let rerun = tmp.path().join("rerun");
    ok(&deobbench(&["--config", path(&run.join("manifest.toml")), "--out", path(&rerun), "pipeline", "--corpus", path(&corpus)]));
    assert_eq!(
        fs::read_to_string(run.join("SHA256SUMS")).unwrap(),
        fs::read_to_string(rerun.join("SHA256SUMS")).unwrap()
    );
}
