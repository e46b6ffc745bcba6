//! Corpus-wide dataset construction: scanning every repository, mining the
//! migration rules, confirming candidates with them and counting the result.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::MinerConfig;
use crate::error::{Error, Result};
use crate::history::{
    candidate_migrations, commit_deltas, scan_repo, CandidateMigration, CommitDelta, CommitInfo,
    ManifestChange,
};
use crate::manifest::PmtKind;
use crate::normalize::{PairClass, PairClassifier};
use crate::salm::{
    detect_pmt_switch, extract_salm, PmtAliases, PmtMigration, PmtSwitch, RuleSet, SalmOptions,
};

pub const DATASET_VERSION: u32 = 1;

pub const RECORDS_FILE: &str = "records.jsonl";
pub const RULES_FILE: &str = "rules.jsonl";
pub const PMT_MIGRATIONS_FILE: &str = "pmt_migrations.jsonl";
pub const UNCONFIRMED_PMT_MIGRATIONS_FILE: &str = "pmt_migrations_unconfirmed.jsonl";
pub const STATS_FILE: &str = "stats.csv";
pub const CANDIDATES_FILE: &str = "candidates.jsonl";

/// One confirmed library migration in one commit.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MigrationRecord {
    pub project: String,
    pub commit_id: String,
    pub timestamp: i64,
    pub pmt: PmtKind,
    pub source: String,
    pub target: String,
    /// The commit message itself names this migration.
    pub salm: bool,
    pub message: String,
}

impl MigrationRecord {
    fn sort_key(&self) -> (&str, i64, &str, &str, &str, PmtKind) {
        (
            &self.project,
            self.timestamp,
            &self.commit_id,
            &self.source,
            &self.target,
            self.pmt,
        )
    }
}

/// (project, commit, source, target, tool) of every self-admitted migration.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SalmHits(BTreeSet<(String, String, String, String, PmtKind)>);

impl SalmHits {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, commit: &CommitInfo, source: &str, target: &str, pmt: PmtKind) {
        self.0.insert((
            commit.project.clone(),
            commit.commit_id.clone(),
            source.to_string(),
            target.to_string(),
            pmt,
        ));
    }

    pub fn contains(&self, commit: &CommitInfo, source: &str, target: &str, pmt: PmtKind) -> bool {
        self.0.contains(&(
            commit.project.clone(),
            commit.commit_id.clone(),
            source.to_string(),
            target.to_string(),
            pmt,
        ))
    }

    pub fn extend(&mut self, other: SalmHits) {
        self.0.extend(other.0);
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Records for every candidate confirmed by a rule, sorted by
/// (project, timestamp, commit, source, target) and deduplicated.
pub fn apply_rules<'a, I>(
    candidates: I,
    rules: &RuleSet,
    salm_hits: &SalmHits,
) -> Vec<MigrationRecord>
where
    I: IntoIterator<Item = &'a CandidateMigration>,
{
    let mut records: Vec<MigrationRecord> = candidates
        .into_iter()
        .filter(|c| rules.contains(c.source.as_str(), c.target.as_str(), c.pmt))
        .map(|c| MigrationRecord {
            project: c.commit.project.clone(),
            commit_id: c.commit.commit_id.clone(),
            timestamp: c.commit.timestamp,
            pmt: c.pmt,
            source: c.source.canonical.clone(),
            target: c.target.canonical.clone(),
            salm: salm_hits.contains(&c.commit, c.source.as_str(), c.target.as_str(), c.pmt),
            message: c.commit.message.clone(),
        })
        .collect();
    records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    records.dedup_by(|a, b| a.sort_key() == b.sort_key());
    records
}

/// Everything one repository contributes to the dataset.
#[derive(Debug, Clone, Default)]
pub struct ProjectScan {
    pub project: String,
    /// Tools with a manifest anywhere in the history.
    pub pmts: BTreeSet<PmtKind>,
    pub deltas: Vec<CommitDelta>,
    pub candidates: Vec<CandidateMigration>,
    pub rules: RuleSet,
    pub salm_hits: SalmHits,
    pub pmt_migrations: Vec<PmtMigration>,
    pub unconfirmed_pmt_migrations: Vec<PmtMigration>,
    pub latest_timestamp: Option<i64>,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct CorpusScan {
    /// In project-name order.
    pub projects: Vec<ProjectScan>,
    /// Directories that could not be read as repositories.
    pub skipped: Vec<String>,
}

impl CorpusScan {
    pub fn candidates(&self) -> impl Iterator<Item = &CandidateMigration> {
        self.projects.iter().flat_map(|p| p.candidates.iter())
    }
}

struct ScanContext {
    classifier: PairClassifier,
    aliases: PmtAliases,
    salm_options: SalmOptions,
    bulk_threshold: usize,
}

/// Repository directories directly under `corpus_dir`, sorted by name.
pub fn discover_repos(corpus_dir: &Path) -> Result<Vec<PathBuf>> {
    if !corpus_dir.is_dir() {
        return Err(Error::Config(format!(
            "corpus directory {} does not exist",
            corpus_dir.display()
        )));
    }
    let mut repos = Vec::new();
    for entry in fs::read_dir(corpus_dir)? {
        let path = entry?.path();
        let hidden = path
            .file_name()
            .is_some_and(|n| n.to_string_lossy().starts_with('.'));
        if hidden || !path.is_dir() {
            continue;
        }
        let is_repo = path.join(".git").exists()
            || (path.join("HEAD").is_file() && path.join("objects").is_dir());
        if is_repo {
            repos.push(path);
        } else {
            log::debug!("skipping {}: not a git repository", path.display());
        }
    }
    repos.sort();
    if repos.is_empty() {
        return Err(Error::EmptyCorpus(corpus_dir.to_path_buf()));
    }
    Ok(repos)
}

fn scan_project(path: &Path, config: &MinerConfig, ctx: &ScanContext) -> Result<ProjectScan> {
    let repo = scan_repo(path)?;
    let changes: Vec<ManifestChange> = repo
        .changes
        .into_iter()
        .filter(|c| config.includes(c.pmt))
        .collect();
    let mut scan = ProjectScan {
        project: repo.project,
        pmts: changes.iter().map(|c| c.pmt).collect(),
        latest_timestamp: changes.iter().map(|c| c.commit.timestamp).max(),
        diagnostics: repo.diagnostics,
        ..ProjectScan::default()
    };

    scan.deltas = commit_deltas(&changes);
    for delta in &scan.deltas {
        if !delta.is_candidate_commit() {
            continue;
        }
        scan.candidates.extend(candidate_migrations(
            delta,
            &ctx.classifier,
            ctx.bulk_threshold,
        ));
        let found = extract_salm(
            &delta.commit.message,
            delta,
            &ctx.classifier,
            &ctx.salm_options,
        );
        for rule in found.iter() {
            scan.salm_hits.insert(
                &delta.commit,
                rule.source.as_str(),
                rule.target.as_str(),
                rule.pmt,
            );
        }
        scan.rules.merge(found);
    }

    let mut confirmed: BTreeMap<(PmtKind, PmtKind), PmtMigration> = BTreeMap::new();
    let mut unconfirmed: BTreeMap<(PmtKind, PmtKind), PmtMigration> = BTreeMap::new();
    for group in changes.chunk_by(|a, b| a.commit.commit_id == b.commit.commit_id) {
        let Some(switch) = detect_pmt_switch(&group[0].commit.message, group, &ctx.aliases) else {
            continue;
        };
        let (target, m) = match switch {
            PmtSwitch::Confirmed(m) => (&mut confirmed, m),
            PmtSwitch::Unconfirmed(m) => (&mut unconfirmed, m),
        };
        // changes are in time order, so the first one seen is the earliest
        target.entry((m.from_pmt, m.to_pmt)).or_insert(m);
    }
    scan.pmt_migrations = confirmed.into_values().collect();
    scan.unconfirmed_pmt_migrations = unconfirmed.into_values().collect();
    for list in [
        &mut scan.pmt_migrations,
        &mut scan.unconfirmed_pmt_migrations,
    ] {
        list.sort_by(|a, b| a.commit.sort_key().cmp(&b.commit.sort_key()).then(a.cmp(b)));
    }
    Ok(scan)
}

/// Scans every repository of the corpus on `config.workers` threads.
pub fn scan_corpus(config: &MinerConfig) -> Result<CorpusScan> {
    config.validate()?;
    let repos = discover_repos(&config.corpus_dir)?;
    let ctx = ScanContext {
        classifier: PairClassifier::new(config.exclusions()?),
        aliases: config.aliases()?,
        salm_options: SalmOptions::default(),
        bulk_threshold: config.bulk_threshold,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {} workers: {e}", config.workers)))?;
    let results: Vec<(PathBuf, Result<ProjectScan>)> = pool.install(|| {
        repos
            .par_iter()
            .map(|path| (path.clone(), scan_project(path, config, &ctx)))
            .collect()
    });

    let mut corpus = CorpusScan::default();
    for (path, result) in results {
        match result {
            Ok(scan) => corpus.projects.push(scan),
            Err(e) => {
                log::warn!("skipping {}: {e}", path.display());
                corpus.skipped.push(format!("{}: {e}", path.display()));
            }
        }
    }
    corpus.projects.sort_by(|a, b| a.project.cmp(&b.project));
    Ok(corpus)
}

/// One row of the statistics table; `pmt` is `None` for the total row.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PmtStats {
    pub pmt: Option<PmtKind>,
    pub projects: usize,
    pub projects_with_migration: usize,
    pub candidate_commits: usize,
    pub migration_commits: usize,
    pub migrations: usize,
    pub rules: usize,
}

#[derive(Serialize)]
struct StatsRow<'a> {
    pmt: &'a str,
    projects: usize,
    projects_with_migration: usize,
    candidate_commits: usize,
    migration_commits: usize,
    migrations: usize,
    rules: usize,
}

impl PmtStats {
    fn row(&self) -> StatsRow<'_> {
        StatsRow {
            pmt: self.pmt.map_or("total", PmtKind::as_str),
            projects: self.projects,
            projects_with_migration: self.projects_with_migration,
            candidate_commits: self.candidate_commits,
            migration_commits: self.migration_commits,
            migrations: self.migrations,
            rules: self.rules,
        }
    }
}

/// Per-tool rows in report order followed by the total row.
pub fn compute_stats(
    corpus: &CorpusScan,
    records: &[MigrationRecord],
    rules: &RuleSet,
) -> Vec<PmtStats> {
    let mut rows = Vec::new();
    for pmt in PmtKind::REPORT_ORDER {
        let recs = || records.iter().filter(move |r| r.pmt == pmt);
        rows.push(PmtStats {
            pmt: Some(pmt),
            projects: corpus
                .projects
                .iter()
                .filter(|p| p.pmts.contains(&pmt))
                .count(),
            projects_with_migration: recs().map(|r| &r.project).collect::<BTreeSet<_>>().len(),
            candidate_commits: corpus
                .projects
                .iter()
                .flat_map(|p| &p.deltas)
                .filter(|d| d.pmt == pmt && d.is_candidate_commit())
                .map(|d| (&d.commit.project, &d.commit.commit_id))
                .collect::<BTreeSet<_>>()
                .len(),
            migration_commits: recs()
                .map(|r| (&r.project, &r.commit_id))
                .collect::<BTreeSet<_>>()
                .len(),
            migrations: recs().count(),
            rules: rules.count_for(pmt),
        });
    }
    let mut total = PmtStats::default();
    for row in &rows {
        total.projects += row.projects;
        total.projects_with_migration += row.projects_with_migration;
        total.candidate_commits += row.candidate_commits;
        total.migration_commits += row.migration_commits;
        total.migrations += row.migrations;
        total.rules += row.rules;
    }
    total.projects += corpus.projects.iter().filter(|p| p.pmts.is_empty()).count();
    rows.push(total);
    rows
}

/// The configuration that determines a dataset's content.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigSnapshot {
    pub bulk_threshold: usize,
    pub pmt_filter: Option<Vec<PmtKind>>,
    pub exclusions: Vec<(String, String)>,
    pub pmt_aliases: Vec<(PmtKind, String)>,
    pub keywords: Vec<String>,
}

impl ConfigSnapshot {
    pub fn of(config: &MinerConfig) -> Result<Self> {
        Ok(ConfigSnapshot {
            bulk_threshold: config.bulk_threshold,
            pmt_filter: config
                .pmt_filter
                .as_ref()
                .map(|f| f.iter().copied().collect()),
            exclusions: config
                .exclusions()?
                .pairs()
                .map(|(s, t)| (s.to_string(), t.to_string()))
                .collect(),
            pmt_aliases: config
                .aliases()?
                .entries()
                .map(|(p, a)| (p, a.to_string()))
                .collect(),
            keywords: config.keywords()?.iter().map(|k| k.label()).collect(),
        })
    }

    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config snapshot serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

/// First line of `records.jsonl`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub version: u32,
    pub config_hash: String,
    /// Time of the newest commit in the corpus, so reruns are identical.
    pub generated_at: String,
    pub config: ConfigSnapshot,
}

pub fn iso8601(timestamp: i64) -> String {
    DateTime::from_timestamp(timestamp, 0)
        .unwrap_or_default()
        .to_rfc3339_opts(SecondsFormat::Secs, true)
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub header: DatasetHeader,
    pub records: Vec<MigrationRecord>,
    pub rules: RuleSet,
    pub pmt_migrations: Vec<PmtMigration>,
    /// Tool switches visible in the manifests but not named in the message.
    pub unconfirmed_pmt_migrations: Vec<PmtMigration>,
    pub stats: Vec<PmtStats>,
    pub diagnostics: Vec<String>,
}

impl Dataset {
    pub fn total(&self) -> &PmtStats {
        self.stats
            .last()
            .expect("stats always end with the total row")
    }
}

/// Scans the corpus, mines rules, confirms candidates and counts the result.
pub fn build_dataset(corpus_dir: &Path, config: &MinerConfig) -> Result<Dataset> {
    let config = MinerConfig {
        corpus_dir: corpus_dir.to_path_buf(),
        ..config.clone()
    };
    let snapshot = ConfigSnapshot::of(&config)?;
    let corpus = scan_corpus(&config)?;
    Ok(assemble(&corpus, snapshot))
}

/// Dataset from an already scanned corpus.
pub fn assemble(corpus: &CorpusScan, snapshot: ConfigSnapshot) -> Dataset {
    let mut rules = RuleSet::new();
    let mut hits = SalmHits::new();
    for project in &corpus.projects {
        rules.merge(project.rules.clone());
        hits.extend(project.salm_hits.clone());
    }
    let records = apply_rules(corpus.candidates(), &rules, &hits);
    let stats = compute_stats(corpus, &records, &rules);

    let collect = |f: fn(&ProjectScan) -> &Vec<PmtMigration>| {
        let mut all: Vec<PmtMigration> = corpus
            .projects
            .iter()
            .flat_map(|p| f(p).iter().cloned())
            .collect();
        all.sort_by(|a, b| a.commit.sort_key().cmp(&b.commit.sort_key()).then(a.cmp(b)));
        all
    };
    let latest = corpus
        .projects
        .iter()
        .filter_map(|p| p.latest_timestamp)
        .max();
    let mut diagnostics: Vec<String> = corpus
        .projects
        .iter()
        .flat_map(|p| {
            p.diagnostics
                .iter()
                .map(move |d| format!("{}: {d}", p.project))
        })
        .collect();
    diagnostics.extend(corpus.skipped.iter().cloned());

    Dataset {
        header: DatasetHeader {
            version: DATASET_VERSION,
            config_hash: snapshot.hash(),
            generated_at: iso8601(latest.unwrap_or(0)),
            config: snapshot,
        },
        records,
        rules,
        pmt_migrations: collect(|p| &p.pmt_migrations),
        unconfirmed_pmt_migrations: collect(|p| &p.unconfirmed_pmt_migrations),
        stats,
        diagnostics,
    }
}

fn write_jsonl<T: Serialize>(
    path: &Path,
    header: Option<&DatasetHeader>,
    rows: impl IntoIterator<Item = T>,
) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    if let Some(h) = header {
        serde_json::to_writer(&mut out, h)?;
        out.write_all(b"\n")?;
    }
    for row in rows {
        serde_json::to_writer(&mut out, &row)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_stats_csv<W: std::io::Write>(stats: &[PmtStats], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in stats {
        w.serialize(row.row())?;
    }
    w.flush()?;
    Ok(())
}

/// Writes records, rules, tool migrations and statistics into `out_dir`.
pub fn write_dataset(dataset: &Dataset, out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    write_jsonl(
        &out_dir.join(RECORDS_FILE),
        Some(&dataset.header),
        &dataset.records,
    )?;
    write_jsonl(
        &out_dir.join(RULES_FILE),
        None,
        dataset.rules.iter().map(|r| r.row()),
    )?;
    write_jsonl(
        &out_dir.join(PMT_MIGRATIONS_FILE),
        None,
        dataset.pmt_migrations.iter().map(PmtMigration::row),
    )?;
    write_jsonl(
        &out_dir.join(UNCONFIRMED_PMT_MIGRATIONS_FILE),
        None,
        dataset
            .unconfirmed_pmt_migrations
            .iter()
            .map(PmtMigration::row),
    )?;
    let stats = BufWriter::new(File::create(out_dir.join(STATS_FILE))?);
    write_stats_csv(&dataset.stats, stats)
}

/// Serialized form of a candidate (`candidates.jsonl`).
#[derive(Debug, Serialize)]
pub struct CandidateRow<'a> {
    pub project: &'a str,
    pub commit_id: &'a str,
    pub timestamp: i64,
    pub pmt: PmtKind,
    pub source: &'a str,
    pub target: &'a str,
    pub pair_class: PairClass,
}

impl<'a> From<&'a CandidateMigration> for CandidateRow<'a> {
    fn from(c: &'a CandidateMigration) -> Self {
        CandidateRow {
            project: &c.commit.project,
            commit_id: &c.commit.commit_id,
            timestamp: c.commit.timestamp,
            pmt: c.pmt,
            source: c.source.as_str(),
            target: c.target.as_str(),
            pair_class: c.pair_class,
        }
    }
}

pub fn write_candidates(corpus: &CorpusScan, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    write_jsonl(path, None, corpus.candidates().map(CandidateRow::from))
}

/// Candidate counts per tool in report order.
pub fn candidate_counts(corpus: &CorpusScan) -> Vec<(PmtKind, usize)> {
    PmtKind::REPORT_ORDER
        .iter()
        .map(|&pmt| (pmt, corpus.candidates().filter(|c| c.pmt == pmt).count()))
        .collect()
}

/// Reads `records.jsonl`, given either the file or the directory holding it.
pub fn read_records(path: &Path) -> Result<(DatasetHeader, Vec<MigrationRecord>)> {
    let file_path = if path.is_dir() {
        path.join(RECORDS_FILE)
    } else {
        path.to_path_buf()
    };
    let bad = |reason: String| Error::Dataset {
        path: file_path.clone(),
        reason,
    };
    let file = File::open(&file_path).map_err(|e| bad(e.to_string()))?;
    let mut lines = BufReader::new(file).lines();
    let header_line = lines
        .next()
        .ok_or_else(|| bad("empty file".into()))?
        .map_err(|e| bad(e.to_string()))?;
    let header: DatasetHeader =
        serde_json::from_str(&header_line).map_err(|e| bad(format!("header: {e}")))?;
    if header.version != DATASET_VERSION {
        return Err(bad(format!("unsupported version {}", header.version)));
    }
    let mut records = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line.map_err(|e| bad(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let record =
            serde_json::from_str(&line).map_err(|e| bad(format!("line {}: {e}", idx + 2)))?;
        records.push(record);
    }
    Ok((header, records))
}
