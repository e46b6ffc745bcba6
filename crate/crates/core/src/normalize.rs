//! Library-name canonicalisation, similarity and trivial-pair filtering.
//!
//! Tools name the same library differently (`libsystemd-dev` in a Debian
//! control file, `systemd` in a commit message, a full URL in `.gitmodules`).
//! [`normalize`] produces the canonical identity of a declared dependency
//! together with the alias forms developers are likely to type.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::manifest::PmtKind;

/// Canonical identity of a declared library.
///
/// Equality and ordering include the origin owner, so two submodules of the
/// same repository name from different owners are different libraries.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalName {
    pub canonical: String,
    pub origin_owner: Option<String>,
    pub pmt: PmtKind,
    /// Match forms, canonical first.
    pub aliases: Vec<String>,
}

impl CanonicalName {
    pub fn as_str(&self) -> &str {
        &self.canonical
    }

    pub fn is_git_url(&self) -> bool {
        self.origin_owner.is_some()
    }
}

impl fmt::Display for CanonicalName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical)
    }
}

impl Serialize for CanonicalName {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.canonical)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairClass {
    VersionUpdate,
    ForkSwap,
    Excluded,
    Nontrivial,
}

impl fmt::Display for PairClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PairClass::VersionUpdate => "version_update",
            PairClass::ForkSwap => "fork_swap",
            PairClass::Excluded => "excluded",
            PairClass::Nontrivial => "nontrivial",
        })
    }
}

fn version_suffix() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"[-_.]?[0-9]+(?:\.[0-9]+)*$").expect("static regex"))
}

/// Removes one trailing `-<digits>` / `<digits>` version component
/// (`gtk-3.0`, `qt4`, `libmutter-2`). Returns the input if that would empty it.
pub fn strip_version_suffix(name: &str) -> &str {
    match version_suffix().find(name) {
        Some(m) if m.start() > 0 => &name[..m.start()],
        _ => name,
    }
}

fn strip_lib_prefix(name: &str) -> &str {
    let rest = name
        .strip_prefix("lib-")
        .or_else(|| name.strip_prefix("lib"))
        .unwrap_or(name);
    if rest.is_empty() {
        name
    } else {
        rest
    }
}

fn split_dev_suffix(name: &str) -> (&str, &str) {
    for suffix in ["-dev-tools", "-dev"] {
        if let Some(rest) = name.strip_suffix(suffix) {
            if !rest.is_empty() {
                return (rest, &name[rest.len()..]);
            }
        }
    }
    (name, "")
}

/// Name with any version embedded before a `-dev` suffix removed:
/// `libmutter-2-dev` and `libmutter-3-dev` both become `libmutter-dev`.
fn without_version(name: &str) -> String {
    let (stem, dev) = split_dev_suffix(name);
    format!("{}{}", strip_version_suffix(stem), dev)
}

struct GitUrl {
    owner: Option<String>,
    repo: String,
}

fn parse_git_url(raw: &str) -> GitUrl {
    let trimmed = raw.trim().trim_end_matches('/');
    let (path, host) = if let Some((_, rest)) = trimmed.split_once("://") {
        let rest = rest.rsplit_once('@').map_or(rest, |(_, r)| r);
        match rest.split_once('/') {
            Some((host, path)) => (path, Some(host)),
            None => ("", Some(rest)),
        }
    } else if let Some((host, path)) = scp_like(trimmed) {
        (path, Some(host))
    } else {
        (trimmed, None)
    };
    let segments: Vec<&str> = path.split('/').filter(|s| !s.is_empty()).collect();
    let repo = segments
        .last()
        .map(|s| s.strip_suffix(".git").unwrap_or(s))
        .unwrap_or("")
        .to_lowercase();
    let owner = host.map(|host| {
        if segments.len() >= 2 {
            segments[segments.len() - 2].to_lowercase()
        } else {
            host.rsplit_once('@')
                .map_or(host, |(_, h)| h)
                .to_lowercase()
        }
    });
    GitUrl { owner, repo }
}

/// `user@host:owner/repo.git`
fn scp_like(s: &str) -> Option<(&str, &str)> {
    let (host, path) = s.split_once(':')?;
    (host.contains('@') && !host.contains('/') && !path.is_empty()).then_some((host, path))
}

fn alias_chain(base: &str) -> Vec<String> {
    let mut aliases = vec![base.to_string()];
    let mut push = |s: &str| {
        if !s.is_empty() && !aliases.iter().any(|a| a == s) {
            aliases.push(s.to_string());
        }
    };
    let no_lib = strip_lib_prefix(base);
    push(no_lib);
    let no_dev = split_dev_suffix(no_lib).0;
    push(no_dev);
    push(strip_version_suffix(no_dev));
    aliases
}

/// Canonicalises a declared dependency name.
pub fn normalize(raw_name: &str, pmt: PmtKind) -> CanonicalName {
    let lowered = raw_name.trim().to_lowercase();
    let (canonical, origin_owner) = match pmt {
        PmtKind::Gitsubmodule => {
            let url = parse_git_url(raw_name);
            let repo = if url.repo.is_empty() {
                lowered.clone()
            } else {
                url.repo
            };
            (repo, url.owner)
        }
        // architecture qualifiers: python3:any, libc6:amd64
        PmtKind::Deb => match lowered.split_once(':') {
            Some((name, _)) if !name.is_empty() => (name.to_string(), None),
            _ => (lowered.clone(), None),
        },
        _ => (lowered.clone(), None),
    };
    let aliases = alias_chain(&canonical);
    CanonicalName {
        canonical,
        origin_owner,
        pmt,
        aliases,
    }
}

/// Best normalized edit-distance similarity over all alias pairs.
pub fn name_similarity(a: &CanonicalName, b: &CanonicalName) -> f64 {
    let mut best = 0.0f64;
    for x in &a.aliases {
        for y in &b.aliases {
            if x == y {
                return 1.0;
            }
            best = best.max(strsim::normalized_levenshtein(x, y));
        }
    }
    best
}

/// Ordered pairs that are never migrations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exclusions {
    pairs: BTreeSet<(String, String)>,
}

impl Default for Exclusions {
    fn default() -> Self {
        Exclusions::parse(DEFAULT_EXCLUSIONS).expect("built-in exclusion list")
    }
}

pub const DEFAULT_EXCLUSIONS: &str = "# source<TAB>target\ndebhelper\tdebhelper-compat\n";

impl Exclusions {
    pub fn empty() -> Self {
        Exclusions {
            pairs: BTreeSet::new(),
        }
    }

    /// Parses `source<TAB>target` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = BTreeSet::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim_end();
            if line.trim().is_empty() {
                continue;
            }
            let Some((source, target)) = line.split_once('\t') else {
                return Err(Error::Config(format!(
                    "exclusions line {}: expected source<TAB>target",
                    idx + 1
                )));
            };
            let (source, target) = (source.trim().to_lowercase(), target.trim().to_lowercase());
            if source.is_empty() || target.is_empty() {
                return Err(Error::Config(format!(
                    "exclusions line {}: empty name",
                    idx + 1
                )));
            }
            pairs.insert((source, target));
        }
        Ok(Exclusions { pairs })
    }

    pub fn insert(&mut self, source: &str, target: &str) {
        self.pairs
            .insert((source.to_lowercase(), target.to_lowercase()));
    }

    pub fn contains(&self, source: &str, target: &str) -> bool {
        self.pairs
            .contains(&(source.to_string(), target.to_string()))
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.pairs.iter().map(|(s, t)| (s.as_str(), t.as_str()))
    }
}

/// Classifies (removed, added) library pairs.
#[derive(Debug, Clone, Default)]
pub struct PairClassifier {
    pub exclusions: Exclusions,
}

impl PairClassifier {
    pub fn new(exclusions: Exclusions) -> Self {
        PairClassifier { exclusions }
    }

    pub fn classify(&self, removed: &CanonicalName, added: &CanonicalName) -> PairClass {
        if removed.is_git_url()
            && added.is_git_url()
            && removed.canonical == added.canonical
            && removed.origin_owner != added.origin_owner
        {
            return PairClass::ForkSwap;
        }
        if removed.canonical != added.canonical
            && removed.origin_owner == added.origin_owner
            && without_version(&removed.canonical) == without_version(&added.canonical)
        {
            return PairClass::VersionUpdate;
        }
        if self
            .exclusions
            .contains(&removed.canonical, &added.canonical)
        {
            return PairClass::Excluded;
        }
        PairClass::Nontrivial
    }
}

/// [`PairClassifier::classify`] with the built-in exclusion list.
pub fn classify_pair(removed: &CanonicalName, added: &CanonicalName) -> PairClass {
    static DEFAULT: OnceLock<PairClassifier> = OnceLock::new();
    DEFAULT
        .get_or_init(PairClassifier::default)
        .classify(removed, added)
}
