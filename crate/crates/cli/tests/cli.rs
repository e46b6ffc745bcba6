use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use migmine_core::analytics::{Keywords, Labels};
use migmine_core::normalize::Exclusions;
use migmine_core::salm::PmtAliases;
use migmine_core::testkit::{planted_corpus, PLANTED_STATS};

fn migmine(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_migmine"))
        .args(args)
        .env_remove("MIGMINE_WORKERS")
        .output()
        .expect("run migmine")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn mined(tmp: &Path) -> PathBuf {
    let corpus = planted_corpus(tmp).unwrap();
    let out = tmp.join("out");
    let o = migmine(&["mine", "--corpus", s(&corpus), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

fn shipped(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../config")
        .join(name)
}

#[test]
fn scan_writes_candidates() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = planted_corpus(tmp.path()).unwrap();
    let out = tmp.path().join("scan");
    let o = migmine(&["scan", "--corpus", s(&corpus), "--out", s(&out)]);
    assert!(o.status.success());
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("meson\t2\n"));
    assert!(stdout.contains("deb\t2\n"));
    assert!(stdout.contains("gitsubmodule\t1\n"));
    assert!(stdout.ends_with("total\t5\n"));
    let lines = fs::read_to_string(out.join("candidates.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 5);
    for line in lines.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["pair_class"], "nontrivial");
    }

    let out = tmp.path().join("scan-deb");
    let o = migmine(&[
        "scan",
        "--corpus",
        s(&corpus),
        "--out",
        s(&out),
        "--pmt",
        "deb",
    ]);
    assert!(o.status.success());
    let lines = fs::read_to_string(out.join("candidates.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 2);
    assert!(lines.lines().all(|l| l.contains("\"pmt\":\"deb\"")));
}

#[test]
fn empty_corpus_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    for cmd in ["scan", "mine"] {
        let o = migmine(&[cmd, "--corpus", s(tmp.path()), "--out", s(&out)]);
        assert_eq!(o.status.code(), Some(2));
    }
    assert!(!out.exists());
}

#[test]
fn usage_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let t = s(tmp.path());
    assert_eq!(migmine(&["mine", "--corpus", t]).status.code(), Some(1));
    assert_eq!(migmine(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        migmine(&["mine", "--corpus", t, "--out", t, "--workers", "0"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        migmine(&["mine", "--corpus", t, "--out", t, "--pmt", "cmake"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        migmine(&[
            "mine",
            "--corpus",
            t,
            "--out",
            t,
            "--exclusions",
            "/nonexistent"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        migmine(&["stats", "--dataset", t, "--metric", "pagerank"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(migmine(&["--help"]).status.code(), Some(0));
}

#[test]
fn mine_matches_golden_and_is_repeatable() {
    let tmp = tempfile::tempdir().unwrap();
    let out = mined(tmp.path());
    assert_eq!(
        fs::read_to_string(out.join("stats.csv")).unwrap(),
        PLANTED_STATS
    );
    let records = fs::read_to_string(out.join("records.jsonl")).unwrap();
    let header: serde_json::Value = serde_json::from_str(records.lines().next().unwrap()).unwrap();
    assert_eq!(header["version"], 1);
    assert_eq!(header["config_hash"].as_str().unwrap().len(), 64);
    let first = records.lines().nth(1).unwrap();
    let mut at = 0;
    for key in [
        "project",
        "commit_id",
        "timestamp",
        "pmt",
        "source",
        "target",
        "salm",
        "message",
    ] {
        let pos = first.find(&format!("\"{key}\":")).unwrap();
        assert!(pos >= at, "{key} out of order in {first}");
        at = pos;
    }

    let rules = fs::read_to_string(out.join("rules.jsonl")).unwrap();
    assert_eq!(rules.lines().count(), 3);
    let pmt = fs::read_to_string(out.join("pmt_migrations.jsonl")).unwrap();
    assert!(pmt.contains("\"from_pmt\":\"gitsubmodule\",\"to_pmt\":\"conan\""));

    let corpus = tmp.path().join("corpus");
    let again = tmp.path().join("again");
    let o = migmine(&["mine", "--corpus", s(&corpus), "--out", s(&again)]);
    assert!(o.status.success());
    for f in [
        "records.jsonl",
        "rules.jsonl",
        "pmt_migrations.jsonl",
        "stats.csv",
    ] {
        assert_eq!(
            fs::read(out.join(f)).unwrap(),
            fs::read(again.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn workers_env_fallback() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = planted_corpus(tmp.path()).unwrap();
    let out = tmp.path().join("out");
    let o = Command::new(env!("CARGO_BIN_EXE_migmine"))
        .args(["mine", "--corpus", s(&corpus), "--out", s(&out)])
        .env("MIGMINE_WORKERS", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn stats_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let out = mined(tmp.path());
    let stats = |metric: &str, extra: &[&str]| {
        let mut args = vec!["stats", "--dataset", s(&out), "--metric", metric];
        args.extend_from_slice(extra);
        let o = migmine(&args);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        String::from_utf8(o.stdout).unwrap()
    };
    assert_eq!(
        stats("entropy", &[]),
        "library,entropy\ngtest,0.0000\nlibqt4-dev,0.0000\nrapidjson,0.0000\n"
    );
    assert_eq!(
        stats("summary", &[]),
        "one_to_one_share,unidirectional_share\n1.0000,1.0000\n"
    );
    assert_eq!(
        stats("trend", &[]),
        "bucket,migration_commits\n2019,2\n2020,2\n2021,1\n"
    );
    let flow = stats("flow", &[]);
    assert_eq!(flow.lines().count(), 7);
    assert!(flow.lines().skip(1).all(|l| l.ends_with(",1.0000")));
    assert_eq!(
        stats("domains", &["--labels", s(&shipped("labels.csv"))]),
        "domain,migrations\nGUI,2\nTesting,2\nSerialization,1\n"
    );
    assert_eq!(
        stats("entropy", &["--pmt", "deb"]),
        "library,entropy\nlibqt4-dev,0.0000\n"
    );

    let report_dir = tmp.path().join("reports");
    let o = migmine(&[
        "stats",
        "--dataset",
        s(&out),
        "--metric",
        "rationales",
        "--out",
        s(&report_dir),
    ]);
    assert!(o.status.success());
    let csv = fs::read_to_string(report_dir.join("rationales.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn stats_on_missing_or_corrupt_dataset_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let o = migmine(&["stats", "--dataset", s(tmp.path()), "--metric", "summary"]);
    assert_eq!(o.status.code(), Some(2));
    fs::write(tmp.path().join("records.jsonl"), "{\"version\": 1}\n").unwrap();
    let o = migmine(&["stats", "--dataset", s(tmp.path()), "--metric", "summary"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sankey_export() {
    let tmp = tempfile::tempdir().unwrap();
    let out = mined(tmp.path());
    let o = migmine(&["export", "--dataset", s(&out)]);
    assert!(o.status.success());
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("sankey.json")).unwrap()).unwrap();
    assert_eq!(v["nodes"].as_array().unwrap().len(), 6);
    assert_eq!(v["links"].as_array().unwrap().len(), 3);

    let testing = tmp.path().join("testing");
    let o = migmine(&[
        "export",
        "--dataset",
        s(&out),
        "--domain",
        "Testing",
        "--labels",
        s(&shipped("labels.csv")),
        "--out",
        s(&testing),
    ]);
    assert!(o.status.success());
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(testing.join("sankey.json")).unwrap()).unwrap();
    assert_eq!(
        v["nodes"],
        serde_json::json!([{"id": 0, "name": "catch2"}, {"id": 1, "name": "gtest"}])
    );
    assert_eq!(
        v["links"],
        serde_json::json!([{"source_index": 1, "target_index": 0, "value": 2}])
    );

    let o = migmine(&["export", "--dataset", s(&out), "--domain", "Testing"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn shipped_tables_match_builtin_defaults() {
    let read = |n: &str| fs::read_to_string(shipped(n)).unwrap();
    assert_eq!(
        Exclusions::parse(&read("exclusions.txt")).unwrap(),
        Exclusions::default()
    );
    assert_eq!(
        PmtAliases::parse(&read("pmt_aliases.txt")).unwrap(),
        PmtAliases::default()
    );
    assert_eq!(Keywords::parse(&read("keywords.txt")), Keywords::default());
    assert!(Labels::load(&shipped("labels.csv")).unwrap().len() > 20);
}
