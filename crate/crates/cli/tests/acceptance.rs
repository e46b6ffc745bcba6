//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use migmine_core::analytics::{entropy, flow, summary_stats, MigrationGraph};
use migmine_core::manifest::{decode, detect_manifest, parse_manifest_at};
use migmine_core::testkit::{manifest_fixtures, planted_corpus, PLANTED_STATS};
use migmine_core::{dataset::read_records, PmtKind};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

/// Adjacency matrix of a random graph with up to 12 nodes and weights 1..=9.
fn random_matrix(rng: &mut StdRng) -> Vec<Vec<u64>> {
    let n = rng.gen_range(2..=12);
    let mut m = vec![vec![0u64; n]; n];
    let edges = rng.gen_range(1..=n * 2);
    for _ in 0..edges {
        let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if i != j {
            m[i][j] = rng.gen_range(1..=9);
        }
    }
    if m.iter().all(|row| row.iter().all(|&w| w == 0)) {
        m[0][1] = 1;
    }
    m
}

fn graph_of(m: &[Vec<u64>]) -> MigrationGraph {
    let mut edges = Vec::new();
    for (i, row) in m.iter().enumerate() {
        for (j, &w) in row.iter().enumerate() {
            if w > 0 {
                edges.push((format!("n{i:02}"), format!("n{j:02}"), w));
            }
        }
    }
    MigrationGraph::from_edges(edges)
}

/// Entropy evaluated straight from the matrix row, natural log rescaled.
fn oracle_entropy(row: &[u64]) -> f64 {
    let total: u64 = row.iter().sum();
    row.iter()
        .filter(|&&w| w > 0)
        .map(|&w| {
            let p = w as f64 / total as f64;
            -p * p.ln() / 2f64.ln()
        })
        .sum()
}

fn oracle_flow(m: &[Vec<u64>], k: usize) -> f64 {
    let out: u64 = m[k].iter().sum();
    let inn: u64 = m.iter().map(|row| row[k]).sum();
    (inn as f64 - out as f64).abs() / (inn + out) as f64
}

fn metric_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut worst = 0f64;
    let mut checked = 0;
    for _ in 0..100 {
        let m = random_matrix(&mut rng);
        let g = graph_of(&m);
        for k in 0..m.len() {
            let name = format!("n{k:02}");
            if m[k].iter().any(|&w| w > 0) {
                let got = entropy(&g, &name).map_err(|e| e.to_string())?;
                worst = worst.max((got - oracle_entropy(&m[k])).abs());
                checked += 1;
            }
            let degree: u64 = m[k].iter().sum::<u64>() + m.iter().map(|r| r[k]).sum::<u64>();
            if degree > 0 {
                let got = flow(&g, &name).map_err(|e| e.to_string())?;
                worst = worst.max((got - oracle_flow(&m, k)).abs());
                checked += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    check(worst <= 1e-9, format!("max deviation {worst:e}"))?;
    check(
        elapsed < Duration::from_secs(5),
        format!("took {elapsed:?}"),
    )?;
    Ok(format!(
        "{checked} values, max deviation {worst:e}, {elapsed:.2?}"
    ))
}

fn entropy_boundaries() -> Outcome {
    let g = MigrationGraph::from_edges([("s", "t", 7)]);
    let single = entropy(&g, "s").map_err(|e| e.to_string())?;
    check(single == 0.0, format!("single target gave {single}"))?;
    for k in [2u32, 4, 8] {
        let g = MigrationGraph::from_edges((0..k).map(|i| ("s".to_string(), format!("t{i}"), 3)));
        let h = entropy(&g, "s").map_err(|e| e.to_string())?;
        check(
            (h - (k as f64).log2()).abs() <= 1e-9,
            format!("uniform {k} gave {h}"),
        )?;
    }
    let g = MigrationGraph::from_edges([("s", "a", 6), ("s", "b", 6), ("s", "c", 3)]);
    let h = entropy(&g, "s").map_err(|e| e.to_string())?;
    check((h - 1.5219).abs() <= 5e-5, format!("(6,6,3) gave {h}"))?;
    Ok(format!("0, log2 k for k=2,4,8, (6,6,3) -> {h:.7}"))
}

fn flow_boundaries() -> Outcome {
    let g = MigrationGraph::from_edges([("a", "x", 2), ("b", "x", 3)]);
    let adopted = flow(&g, "x").map_err(|e| e.to_string())?;
    check(adopted == 1.0, format!("deg_out 0 gave {adopted}"))?;
    let g = MigrationGraph::from_edges([("a", "x", 2), ("x", "b", 2)]);
    let balanced = flow(&g, "x").map_err(|e| e.to_string())?;
    check(balanced == 0.0, format!("balanced gave {balanced}"))?;
    let g = MigrationGraph::from_edges([("a", "x", 3), ("x", "b", 1)]);
    let half = flow(&g, "x").map_err(|e| e.to_string())?;
    check(half == 0.5, format!("(3,1) gave {half}"))?;
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut n = 0;
    for _ in 0..100 {
        let g = graph_of(&random_matrix(&mut rng));
        for node in g.nodes() {
            let f = flow(&g, node).map_err(|e| e.to_string())?;
            check((0.0..=1.0).contains(&f), format!("flow({node}) = {f}"))?;
            n += 1;
        }
    }
    Ok(format!("1.0, 0.0, 0.5 exact; {n} random values in [0,1]"))
}

fn migmine(args: &[&str]) -> Result<(), String> {
    let o = Command::new(env!("CARGO_BIN_EXE_migmine"))
        .args(args)
        .env_remove("MIGMINE_WORKERS")
        .output()
        .map_err(|e| e.to_string())?;
    if o.status.success() {
        Ok(())
    } else {
        Err(format!(
            "migmine {}: {}",
            args.join(" "),
            String::from_utf8_lossy(&o.stderr)
        ))
    }
}

fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 temp path")
}

fn end_to_end(corpus: &Path, work: &Path) -> Outcome {
    let out = work.join("e2e");
    let start = Instant::now();
    migmine(&["mine", "--corpus", p(corpus), "--out", p(&out)])?;
    let elapsed = start.elapsed();

    let rules = fs::read_to_string(out.join("rules.jsonl")).map_err(|e| e.to_string())?;
    check(
        rules.lines().count() == 3,
        format!("{} rules", rules.lines().count()),
    )?;
    let (_, records) = read_records(&out).map_err(|e| e.to_string())?;
    check(records.len() == 5, format!("{} records", records.len()))?;
    let salm = records.iter().filter(|r| r.salm).count();
    check(salm == 3, format!("{salm} salm records"))?;
    let rule_pmts: BTreeSet<PmtKind> = records.iter().filter(|r| r.salm).map(|r| r.pmt).collect();
    check(
        rule_pmts == BTreeSet::from([PmtKind::Meson, PmtKind::Deb, PmtKind::Gitsubmodule]),
        format!("salm tools {rule_pmts:?}"),
    )?;
    for distractor in ["libfoo-1", "spdlog", "debhelper"] {
        check(
            !records.iter().any(|r| r.source == distractor),
            format!("record for distractor {distractor}"),
        )?;
    }
    let pmt = fs::read_to_string(out.join("pmt_migrations.jsonl")).map_err(|e| e.to_string())?;
    check(
        pmt.lines().count() == 1,
        format!("{} tool migrations", pmt.lines().count()),
    )?;
    check(
        pmt.contains("\"from_pmt\":\"gitsubmodule\",\"to_pmt\":\"conan\""),
        "tool migration is not gitsubmodule -> conan",
    )?;
    let stats = fs::read_to_string(out.join("stats.csv")).map_err(|e| e.to_string())?;
    check(
        stats == PLANTED_STATS,
        format!("stats.csv differs from golden:\n{stats}"),
    )?;
    check(
        elapsed < Duration::from_secs(10),
        format!("took {elapsed:?}"),
    )?;
    Ok(format!(
        "3 rules, 5 records (3 salm), 1 tool migration, golden stats, {elapsed:.2?}"
    ))
}

fn parser_conformance() -> Outcome {
    let fixtures = manifest_fixtures().map_err(|e| e.to_string())?;
    check(
        fixtures.len() >= 35,
        format!("only {} fixtures", fixtures.len()),
    )?;
    for pmt in PmtKind::ALL {
        let n = fixtures
            .iter()
            .filter(|f| f.pmt_dir == pmt.as_str())
            .count();
        check(n >= 5, format!("{n} fixtures for {pmt}"))?;
    }
    let mut verbatim = 0;
    let mut failed = Vec::new();
    for f in &fixtures {
        let content = decode(&fs::read(&f.path).map_err(|e| e.to_string())?);
        if content.contains("dependency('libplacebo', version: '>= 3.110.0', required: false)")
            || content.contains("Requires: actionlib_msgs std_msgs trajectory_msgs")
        {
            verbatim += 1;
        }
        let Some(kind) = detect_manifest(&f.relative_path) else {
            failed.push(f.name.clone());
            continue;
        };
        let parsed = parse_manifest_at(kind, &f.relative_path, &content);
        let got: BTreeSet<&str> = parsed.names().collect();
        let want: BTreeSet<&str> = f.expected.iter().map(String::as_str).collect();
        if kind.as_str() != f.pmt_dir || got != want {
            failed.push(f.name.clone());
        }
    }
    check(
        verbatim == 2,
        format!("{verbatim} of 2 verbatim snippets present"),
    )?;
    check(
        failed.is_empty(),
        format!("mismatches: {}", failed.join(", ")),
    )?;
    Ok(format!(
        "{}/{} fixtures exact",
        fixtures.len(),
        fixtures.len()
    ))
}

fn determinism(corpus: &Path, work: &Path) -> Outcome {
    let one = work.join("w1");
    let eight = work.join("w8");
    migmine(&[
        "mine",
        "--corpus",
        p(corpus),
        "--out",
        p(&one),
        "--workers",
        "1",
    ])?;
    migmine(&[
        "mine",
        "--corpus",
        p(corpus),
        "--out",
        p(&eight),
        "--workers",
        "8",
    ])?;
    for f in ["records.jsonl", "rules.jsonl", "stats.csv"] {
        let a = fs::read(one.join(f)).map_err(|e| e.to_string())?;
        let b = fs::read(eight.join(f)).map_err(|e| e.to_string())?;
        check(a == b, format!("{f} differs"))?;
    }
    Ok("records.jsonl, rules.jsonl, stats.csv identical".into())
}

fn scale_invariance(work: &Path) -> Outcome {
    let (_, records) = read_records(&work.join("e2e")).map_err(|e| e.to_string())?;
    // a fixture-shaped graph with branching and back edges, plus the mined one
    let mined = migmine_core::analytics::build_graph(&records, None);
    let branching = MigrationGraph::from_edges([
        ("gtest", "catch2", 6),
        ("gtest", "doctest", 6),
        ("gtest", "boost-test", 3),
        ("catch2", "gtest", 1),
        ("catch2", "doctest", 2),
        ("libqt4-dev", "qtbase5-dev", 4),
    ]);
    for g in [mined, branching] {
        let scaled = g.scaled(3);
        for s in g.sources() {
            check(
                entropy(&g, s).ok() == entropy(&scaled, s).ok(),
                format!("entropy({s}) changed"),
            )?;
        }
        for n in g.nodes() {
            check(
                flow(&g, n).ok() == flow(&scaled, n).ok(),
                format!("flow({n}) changed"),
            )?;
        }
        check(
            summary_stats(&g) == summary_stats(&scaled),
            "summary shares changed",
        )?;
    }
    Ok("entropy, flow and both shares unchanged under x3".into())
}

fn rationale_filter(work: &Path) -> Outcome {
    let out = work.join("rationales");
    migmine(&[
        "stats",
        "--dataset",
        p(&work.join("e2e")),
        "--metric",
        "rationales",
        "--out",
        p(&out),
    ])?;
    let text = fs::read_to_string(out.join("rationales.csv")).map_err(|e| e.to_string())?;
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let msg_col = rdr
        .headers()
        .map_err(|e| e.to_string())?
        .iter()
        .position(|h| h == "message")
        .ok_or("no message column")?;
    let mut got = BTreeSet::new();
    for row in rdr.records() {
        got.insert(row.map_err(|e| e.to_string())?[msg_col].to_string());
    }
    let want: BTreeSet<String> = [
        "Switch tests from gtest to catch2 because gtest is deprecated here",
        "Port from libqt4-dev to qtbase5-dev so that the Qt 5 build works",
        "Replace rapidjson with nlohmann json for simpler parsing",
    ]
    .into_iter()
    .map(String::from)
    .collect();
    check(got == want, format!("got {got:?}"))?;
    Ok(format!(
        "{} planted rationale messages, no others",
        got.len()
    ))
}

fn main() -> ExitCode {
    let tmp = tempfile::tempdir().expect("temp dir");
    let corpus = planted_corpus(tmp.path()).expect("build planted corpus");
    let work = tmp.path();

    let results: Vec<(&str, Outcome)> = vec![
        ("metric oracle equivalence", metric_oracle()),
        ("entropy boundary suite", entropy_boundaries()),
        ("flow boundary suite", flow_boundaries()),
        ("end-to-end planted fixture", end_to_end(&corpus, work)),
        ("parser conformance", parser_conformance()),
        (
            "determinism across worker counts",
            determinism(&corpus, work),
        ),
        ("scale invariance", scale_invariance(work)),
        ("rationale filter", rationale_filter(work)),
    ];
    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
