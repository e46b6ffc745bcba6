//! Walking repository history and turning manifest edits into candidate
//! migrations.
//!
//! History is read through the system `git` executable. Every commit
//! reachable from `HEAD` is visited; merge commits are diffed against their
//! first parent only.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifest::{decode, detect_manifest, parse_manifest_at, ParsedManifest, PmtKind};
use crate::normalize::{normalize, CanonicalName, PairClass, PairClassifier};

pub const DEFAULT_BULK_THRESHOLD: usize = 50;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CommitInfo {
    pub commit_id: String,
    /// Committer time, seconds since the epoch.
    pub timestamp: i64,
    pub message: String,
    pub project: String,
}

impl CommitInfo {
    /// Canonical corpus ordering: project, time, id.
    pub fn sort_key(&self) -> (&str, i64, &str) {
        (&self.project, self.timestamp, &self.commit_id)
    }
}

pub fn is_commit_id(s: &str) -> bool {
    s.len() == 40 && s.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'))
}

/// One manifest touched by one commit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestChange {
    pub commit: CommitInfo,
    pub path: String,
    pub pmt: PmtKind,
    pub before: Option<ParsedManifest>,
    pub after: Option<ParsedManifest>,
}

impl ManifestChange {
    fn canonical_side(side: &Option<ParsedManifest>, pmt: PmtKind) -> BTreeSet<CanonicalName> {
        side.iter()
            .flat_map(|m| m.names())
            .map(|name| normalize(name, pmt))
            .collect()
    }
}

/// Libraries introduced and removed by one commit within one tool.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommitDelta {
    pub commit: CommitInfo,
    pub pmt: PmtKind,
    pub added: BTreeSet<CanonicalName>,
    pub removed: BTreeSet<CanonicalName>,
}

impl CommitDelta {
    fn new(
        commit: CommitInfo,
        pmt: PmtKind,
        mut added: BTreeSet<CanonicalName>,
        mut removed: BTreeSet<CanonicalName>,
    ) -> Self {
        let both: Vec<CanonicalName> = added.intersection(&removed).cloned().collect();
        for name in &both {
            added.remove(name);
            removed.remove(name);
        }
        CommitDelta {
            commit,
            pmt,
            added,
            removed,
        }
    }

    /// Both a library introduction and a removal.
    pub fn is_candidate_commit(&self) -> bool {
        !self.added.is_empty() && !self.removed.is_empty()
    }

    pub fn is_bulk(&self, threshold: usize) -> bool {
        self.added.len() > threshold || self.removed.len() > threshold
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CandidateMigration {
    pub commit: CommitInfo,
    pub pmt: PmtKind,
    pub source: CanonicalName,
    pub target: CanonicalName,
    pub pair_class: PairClass,
}

/// Dependency delta of a single manifest change.
pub fn diff_dependencies(change: &ManifestChange) -> CommitDelta {
    let before = ManifestChange::canonical_side(&change.before, change.pmt);
    let after = ManifestChange::canonical_side(&change.after, change.pmt);
    CommitDelta::new(
        change.commit.clone(),
        change.pmt,
        after.difference(&before).cloned().collect(),
        before.difference(&after).cloned().collect(),
    )
}

/// Per-(commit, tool) deltas of a change stream.
///
/// Deltas of several manifests of one tool in one commit are unioned; a
/// library removed at one path and added at another cancels out.
/// Output is sorted by (project, timestamp, commit id, tool).
pub fn commit_deltas(changes: &[ManifestChange]) -> Vec<CommitDelta> {
    type Key<'a> = ((&'a str, i64, &'a str), PmtKind);
    let mut grouped: BTreeMap<
        Key<'_>,
        (
            &CommitInfo,
            BTreeSet<CanonicalName>,
            BTreeSet<CanonicalName>,
        ),
    > = BTreeMap::new();
    for change in changes {
        let delta = diff_dependencies(change);
        let entry = grouped
            .entry((change.commit.sort_key(), change.pmt))
            .or_insert_with(|| (&change.commit, BTreeSet::new(), BTreeSet::new()));
        entry.1.extend(delta.added);
        entry.2.extend(delta.removed);
    }
    grouped
        .into_iter()
        .map(|((_, pmt), (commit, added, removed))| {
            CommitDelta::new(commit.clone(), pmt, added, removed)
        })
        .collect()
}

/// Cross product of removed × added libraries, minus trivial pairs.
///
/// Empty unless the delta both removes and adds something, and empty for
/// bulk commits exceeding `bulk_threshold` on either side.
pub fn candidate_migrations(
    delta: &CommitDelta,
    classifier: &PairClassifier,
    bulk_threshold: usize,
) -> BTreeSet<CandidateMigration> {
    let mut out = BTreeSet::new();
    if !delta.is_candidate_commit() || delta.is_bulk(bulk_threshold) {
        return out;
    }
    for source in &delta.removed {
        for target in &delta.added {
            let pair_class = classifier.classify(source, target);
            if pair_class == PairClass::Nontrivial && source.canonical != target.canonical {
                out.insert(CandidateMigration {
                    commit: delta.commit.clone(),
                    pmt: delta.pmt,
                    source: source.clone(),
                    target: target.clone(),
                    pair_class,
                });
            }
        }
    }
    out
}

/// Manifest changes of one repository plus anything that was skipped.
#[derive(Debug, Clone, Default)]
pub struct RepoScan {
    pub project: String,
    pub changes: Vec<ManifestChange>,
    pub diagnostics: Vec<String>,
}

/// Project identifier for a repository directory.
pub fn project_name(repo_path: &Path) -> String {
    repo_path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| repo_path.to_string_lossy().into_owned())
}

/// Every manifest change in the history reachable from `HEAD`, sorted by
/// (timestamp, commit id, path).
pub fn scan_repo(repo_path: &Path) -> Result<RepoScan> {
    let git = Git::open(repo_path)?;
    let project = project_name(repo_path);
    let mut scan = RepoScan {
        project: project.clone(),
        ..RepoScan::default()
    };
    if !git.has_head()? {
        return Ok(scan);
    }
    let commits = git.log_with_raw_diffs()?;
    let mut blobs = git.blob_reader()?;
    for raw in commits {
        let commit = CommitInfo {
            commit_id: raw.commit_id,
            timestamp: raw.timestamp,
            message: raw.message,
            project: project.clone(),
        };
        for entry in raw.entries {
            match load_change(&mut blobs, &commit, &entry) {
                Ok(changes) => scan.changes.extend(changes),
                Err(Error::CorruptObject { object, .. }) => {
                    let msg = format!(
                        "{project}: commit {} path {}: unreadable object {object}, skipped",
                        commit.commit_id, entry.new_path
                    );
                    log::warn!("{msg}");
                    scan.diagnostics.push(msg);
                }
                Err(e) => return Err(e),
            }
        }
    }
    for change in &scan.changes {
        for side in [&change.before, &change.after].into_iter().flatten() {
            if let Some(diag) = &side.diagnostic {
                scan.diagnostics.push(format!(
                    "{project}: commit {} path {}: {diag}",
                    change.commit.commit_id, change.path
                ));
            }
        }
    }
    scan.changes.sort_by(|a, b| {
        (a.commit.timestamp, &a.commit.commit_id, &a.path).cmp(&(
            b.commit.timestamp,
            &b.commit.commit_id,
            &b.path,
        ))
    });
    Ok(scan)
}

fn load_change(
    blobs: &mut BlobReader,
    commit: &CommitInfo,
    entry: &RawEntry,
) -> Result<Vec<ManifestChange>> {
    let old_path = entry.old_path.as_deref().unwrap_or(&entry.new_path);
    let old_kind = detect_manifest(old_path);
    let new_kind = detect_manifest(&entry.new_path);
    let mut read =
        |id: &Option<String>, kind: PmtKind, path: &str| -> Result<Option<ParsedManifest>> {
            match id {
                Some(id) => Ok(Some(parse_manifest_at(
                    kind,
                    path,
                    &decode(&blobs.read(id)?),
                ))),
                None => Ok(None),
            }
        };
    let mut out = Vec::new();
    if old_kind == new_kind {
        // plain edit, or a rename git matched by similarity
        let Some(pmt) = new_kind else {
            return Ok(out);
        };
        let before = read(&entry.old_blob, pmt, old_path)?;
        let after = read(&entry.new_blob, pmt, &entry.new_path)?;
        if before.is_some() || after.is_some() {
            out.push(ManifestChange {
                commit: commit.clone(),
                path: entry.new_path.clone(),
                pmt,
                before,
                after,
            });
        }
        return Ok(out);
    }
    // renamed across tools: a deletion of one manifest plus an addition
    if let (Some(pmt), Some(_)) = (old_kind, &entry.old_blob) {
        out.push(ManifestChange {
            commit: commit.clone(),
            path: old_path.to_string(),
            pmt,
            before: read(&entry.old_blob, pmt, old_path)?,
            after: None,
        });
    }
    if let (Some(pmt), Some(_)) = (new_kind, &entry.new_blob) {
        out.push(ManifestChange {
            commit: commit.clone(),
            path: entry.new_path.clone(),
            pmt,
            before: None,
            after: read(&entry.new_blob, pmt, &entry.new_path)?,
        });
    }
    Ok(out)
}

/// One line of `git log --raw` output.
#[derive(Debug, Clone, PartialEq, Eq)]
struct RawEntry {
    old_blob: Option<String>,
    new_blob: Option<String>,
    /// Set for renames and copies.
    old_path: Option<String>,
    new_path: String,
}

#[derive(Debug, Clone)]
struct RawCommit {
    commit_id: String,
    timestamp: i64,
    message: String,
    entries: Vec<RawEntry>,
}

struct Git {
    path: PathBuf,
}

impl Git {
    fn open(path: &Path) -> Result<Self> {
        if !path.is_dir() {
            return Err(Error::RepoUnreadable {
                path: path.to_path_buf(),
                reason: "not a directory".into(),
            });
        }
        let git = Git {
            path: path.to_path_buf(),
        };
        let out = git.command(&["rev-parse", "--git-dir"]).output()?;
        if !out.status.success() {
            return Err(Error::RepoUnreadable {
                path: path.to_path_buf(),
                reason: String::from_utf8_lossy(&out.stderr).trim().to_string(),
            });
        }
        Ok(git)
    }

    fn command(&self, args: &[&str]) -> Command {
        let mut cmd = Command::new("git");
        cmd.arg("-C")
            .arg(&self.path)
            .args(["-c", "safe.directory=*", "-c", "log.showSignature=false"])
            .args(["-c", "core.quotePath=false"])
            .args(args)
            .env("GIT_TERMINAL_PROMPT", "0")
            .env("LC_ALL", "C")
            .stdin(Stdio::null());
        cmd
    }

    fn git_error(&self, stderr: &[u8]) -> Error {
        Error::Git {
            path: self.path.clone(),
            reason: String::from_utf8_lossy(stderr).trim().to_string(),
        }
    }

    fn has_head(&self) -> Result<bool> {
        let out = self
            .command(&["rev-parse", "--verify", "--quiet", "HEAD^{commit}"])
            .output()?;
        Ok(out.status.success())
    }

    fn log_with_raw_diffs(&self) -> Result<Vec<RawCommit>> {
        let out = self
            .command(&[
                "log",
                "--no-color",
                "--no-ext-diff",
                "--diff-merges=first-parent",
                "-M",
                "--raw",
                "--no-abbrev",
                "-z",
                "--format=%H%x1f%ct%x1f%B",
                "HEAD",
            ])
            .output()?;
        if !out.status.success() {
            return Err(self.git_error(&out.stderr));
        }
        parse_raw_log(&out.stdout).map_err(|reason| Error::Git {
            path: self.path.clone(),
            reason,
        })
    }

    fn blob_reader(&self) -> Result<BlobReader> {
        let mut child = self
            .command(&["cat-file", "--batch"])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(BlobReader {
            path: self.path.clone(),
            child,
            stdin,
            stdout,
        })
    }
}

struct BlobReader {
    path: PathBuf,
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

impl BlobReader {
    fn read(&mut self, id: &str) -> Result<Vec<u8>> {
        let corrupt = || Error::CorruptObject {
            path: self.path.clone(),
            object: id.to_string(),
        };
        writeln!(self.stdin, "{id}")?;
        self.stdin.flush()?;
        let mut header = String::new();
        self.stdout.read_line(&mut header)?;
        let mut parts = header.split_whitespace();
        let (_, kind, size) = (parts.next(), parts.next(), parts.next());
        if kind != Some("blob") {
            return Err(corrupt());
        }
        let size: usize = size.and_then(|s| s.parse().ok()).ok_or_else(corrupt)?;
        let mut buf = vec![0u8; size + 1];
        self.stdout.read_exact(&mut buf)?;
        buf.truncate(size);
        Ok(buf)
    }
}

impl Drop for BlobReader {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

const NULL_OBJECT: &str = "0000000000000000000000000000000000000000";

/// Parses `git log -z --raw --format=%H%x1f%ct%x1f%B` output.
///
/// The stream is NUL-separated: a commit header, then for every changed
/// path a status field followed by one path (two for renames and copies).
fn parse_raw_log(bytes: &[u8]) -> std::result::Result<Vec<RawCommit>, String> {
    let text = String::from_utf8_lossy(bytes);
    let mut fields = text.split('\0').peekable();
    let mut commits: Vec<RawCommit> = Vec::new();
    while let Some(field) = fields.next() {
        let field = field.strip_prefix('\n').unwrap_or(field);
        if field.is_empty() {
            continue;
        }
        if let Some(status) = field.strip_prefix(':') {
            let current = commits
                .last_mut()
                .ok_or_else(|| "diff entry before any commit".to_string())?;
            let parts: Vec<&str> = status.split(' ').collect();
            if parts.len() < 5 {
                return Err(format!("malformed raw diff line {field:?}"));
            }
            let (old_mode, new_mode) = (parts[0], parts[1]);
            let (old_blob, new_blob) = (parts[2], parts[3]);
            let code = parts[4].chars().next().unwrap_or('M');
            let first = fields.next().ok_or("missing path")?.to_string();
            let (old_path, new_path) = if matches!(code, 'R' | 'C') {
                let second = fields.next().ok_or("missing rename target")?.to_string();
                (Some(first), second)
            } else {
                (None, first)
            };
            let blob = |mode: &str, id: &str| {
                // only regular files: skip gitlinks (160000) and symlinks (120000)
                (id != NULL_OBJECT && mode.starts_with("100")).then(|| id.to_string())
            };
            let mut entry = RawEntry {
                old_blob: blob(old_mode, old_blob),
                new_blob: blob(new_mode, new_blob),
                old_path,
                new_path,
            };
            if code == 'C' {
                // a copy leaves its source untouched
                entry.old_blob = None;
                entry.old_path = None;
            }
            current.entries.push(entry);
        } else {
            let mut parts = field.splitn(3, '\x1f');
            let id = parts.next().unwrap_or_default().trim().to_string();
            if !is_commit_id(&id) {
                return Err(format!("unexpected log record {field:?}"));
            }
            let timestamp = parts
                .next()
                .and_then(|t| t.trim().parse().ok())
                .ok_or_else(|| format!("bad timestamp in {field:?}"))?;
            let message = parts.next().unwrap_or_default().trim_end().to_string();
            commits.push(RawCommit {
                commit_id: id,
                timestamp,
                message,
                entries: Vec::new(),
            });
        }
    }
    Ok(commits)
}
