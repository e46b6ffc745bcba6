//! Test support: builds small git repositories from a TOML description and
//! exposes the bundled fixtures.
//!
//! ```toml
//! [[repo]]
//! name = "alpha"
//!
//! [[repo.commit]]
//! date = "2019-01-10T12:00:00Z"
//! message = "Initial import"
//! delete = ["old.txt"]
//! [repo.commit.files]
//! "meson.build" = "dependency('zlib')"
//! ```
//!
//! Identity, dates and git configuration are fixed, so the same description
//! always produces the same commit ids.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde::Deserialize;

use crate::error::{Error, Result};

pub const PLANTED_CORPUS: &str = include_str!("../testdata/planted/corpus.toml");
pub const PLANTED_STATS: &str = include_str!("../testdata/planted/stats.csv");

/// Hand-labeled manifest fixtures: `<pmt>/<case>/` holds one manifest at
/// its usual relative path plus `expected.txt` listing the dependency names.
pub fn manifest_fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("testdata")
        .join("manifests")
}

#[derive(Debug, Deserialize)]
pub struct CorpusSpec {
    #[serde(default)]
    pub repo: Vec<RepoSpec>,
}

#[derive(Debug, Deserialize)]
pub struct RepoSpec {
    pub name: String,
    #[serde(default)]
    pub commit: Vec<CommitSpec>,
}

#[derive(Debug, Deserialize)]
pub struct CommitSpec {
    pub date: String,
    pub message: String,
    #[serde(default)]
    pub files: BTreeMap<String, String>,
    #[serde(default)]
    pub delete: Vec<String>,
}

fn git(dir: &Path, date: &str, args: &[&str]) -> Result<()> {
    let output = Command::new("git")
        .args([
            "-c",
            "commit.gpgsign=false",
            "-c",
            "core.autocrlf=false",
            "-c",
            "init.defaultBranch=master",
        ])
        .args(args)
        .current_dir(dir)
        .env("GIT_CONFIG_GLOBAL", "/dev/null")
        .env("GIT_CONFIG_NOSYSTEM", "1")
        .env("GIT_AUTHOR_NAME", "Fixture Author")
        .env("GIT_AUTHOR_EMAIL", "author@example.org")
        .env("GIT_COMMITTER_NAME", "Fixture Author")
        .env("GIT_COMMITTER_EMAIL", "author@example.org")
        .env("GIT_AUTHOR_DATE", date)
        .env("GIT_COMMITTER_DATE", date)
        .output()?;
    if !output.status.success() {
        return Err(Error::Git {
            path: dir.to_path_buf(),
            reason: String::from_utf8_lossy(&output.stderr).trim().to_string(),
        });
    }
    Ok(())
}

/// Creates one repository per `[[repo]]` entry under `dir`.
pub fn build_corpus(spec_toml: &str, dir: &Path) -> Result<()> {
    let spec: CorpusSpec =
        toml::from_str(spec_toml).map_err(|e| Error::Config(format!("corpus description: {e}")))?;
    fs::create_dir_all(dir)?;
    for repo in &spec.repo {
        let root = dir.join(&repo.name);
        fs::create_dir_all(&root)?;
        git(
            &root,
            "2000-01-01T00:00:00Z",
            &["init", "-q", "-b", "master"],
        )?;
        for commit in &repo.commit {
            for path in &commit.delete {
                fs::remove_file(root.join(path))?;
            }
            for (path, content) in &commit.files {
                let file = root.join(path);
                if let Some(parent) = file.parent() {
                    fs::create_dir_all(parent)?;
                }
                fs::write(file, content)?;
            }
            git(&root, &commit.date, &["add", "-A"])?;
            git(
                &root,
                &commit.date,
                &["commit", "-q", "--allow-empty", "-m", &commit.message],
            )?;
        }
    }
    Ok(())
}

/// Builds the planted corpus in `dir` and returns its path.
pub fn planted_corpus(dir: &Path) -> Result<PathBuf> {
    let corpus = dir.join("corpus");
    build_corpus(PLANTED_CORPUS, &corpus)?;
    Ok(corpus)
}

/// One manifest fixture with its expected dependency names.
#[derive(Debug, Clone)]
pub struct ManifestFixture {
    /// `<pmt>/<case>`.
    pub name: String,
    pub pmt_dir: String,
    /// Manifest path relative to the case directory, e.g. `debian/control`.
    pub relative_path: String,
    pub path: PathBuf,
    pub expected: Vec<String>,
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut entries = fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<Vec<_>>>()?;
    entries.sort();
    Ok(entries)
}

fn files_under(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    for path in sorted_entries(dir)? {
        if path.is_dir() {
            files_under(&path, out)?;
        } else {
            out.push(path);
        }
    }
    Ok(())
}

pub fn manifest_fixtures() -> Result<Vec<ManifestFixture>> {
    let mut out = Vec::new();
    for pmt_path in sorted_entries(&manifest_fixtures_dir())? {
        let pmt_dir = pmt_path
            .file_name()
            .unwrap_or_default()
            .to_string_lossy()
            .into_owned();
        for case in sorted_entries(&pmt_path)? {
            let case_name = case
                .file_name()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned();
            let expected = fs::read_to_string(case.join("expected.txt"))?
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(String::from)
                .collect();
            let mut files = Vec::new();
            files_under(&case, &mut files)?;
            files.retain(|f| f != &case.join("expected.txt"));
            let [path] = files.as_slice() else {
                return Err(Error::Config(format!(
                    "fixture {} must hold exactly one manifest",
                    case.display()
                )));
            };
            let relative_path = path
                .strip_prefix(&case)
                .unwrap_or(path)
                .to_string_lossy()
                .replace('\\', "/");
            out.push(ManifestFixture {
                name: format!("{pmt_dir}/{case_name}"),
                pmt_dir: pmt_dir.clone(),
                relative_path,
                path: path.clone(),
                expected,
            });
        }
    }
    Ok(out)
}
