//! Self-admitted library migrations (SALMs): commits whose message names both
//! the removed and the added library. They become the migration rules that
//! later confirm silent candidates across the corpus.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::history::{CommitDelta, CommitInfo, ManifestChange};
use crate::manifest::PmtKind;
use crate::normalize::{name_similarity, CanonicalName, PairClass, PairClassifier};

/// Maximum number of example commits kept per rule.
pub const MAX_EXAMPLE_COMMITS: usize = 20;

/// Migration rule `source -> target` within one tool.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MigrationRule {
    pub source: CanonicalName,
    pub target: CanonicalName,
    pub pmt: PmtKind,
    pub salm_support: usize,
    /// (timestamp, commit id), earliest first.
    examples: Vec<(i64, String)>,
}

pub type RuleKey = (String, String, PmtKind);

impl MigrationRule {
    pub fn new(
        source: CanonicalName,
        target: CanonicalName,
        pmt: PmtKind,
        commit: &CommitInfo,
    ) -> Self {
        MigrationRule {
            source,
            target,
            pmt,
            salm_support: 1,
            examples: vec![(commit.timestamp, commit.commit_id.clone())],
        }
    }

    pub fn key(&self) -> RuleKey {
        (
            self.source.canonical.clone(),
            self.target.canonical.clone(),
            self.pmt,
        )
    }

    pub fn example_commits(&self) -> impl Iterator<Item = &str> {
        self.examples.iter().map(|(_, id)| id.as_str())
    }

    fn merge(&mut self, other: MigrationRule) {
        self.salm_support += other.salm_support;
        if other.source < self.source {
            self.source = other.source;
        }
        if other.target < self.target {
            self.target = other.target;
        }
        self.examples.extend(other.examples);
        self.examples.sort();
        self.examples.dedup();
        self.examples.truncate(MAX_EXAMPLE_COMMITS);
    }

    pub fn row(&self) -> RuleRow<'_> {
        RuleRow {
            source: &self.source.canonical,
            target: &self.target.canonical,
            pmt: self.pmt,
            salm_support: self.salm_support,
            example_commits: self.example_commits().collect(),
        }
    }
}

/// Serialized form of a rule (`rules.jsonl`).
#[derive(Debug, Serialize)]
pub struct RuleRow<'a> {
    pub source: &'a str,
    pub target: &'a str,
    pub pmt: PmtKind,
    pub salm_support: usize,
    pub example_commits: Vec<&'a str>,
}

/// Rules keyed on (source, target, tool).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RuleSet {
    rules: BTreeMap<RuleKey, MigrationRule>,
}

impl RuleSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, rule: MigrationRule) {
        match self.rules.get_mut(&rule.key()) {
            Some(existing) => existing.merge(rule),
            None => {
                self.rules.insert(rule.key(), rule);
            }
        }
    }

    pub fn merge(&mut self, other: RuleSet) {
        for rule in other.rules.into_values() {
            self.insert(rule);
        }
    }

    pub fn contains(&self, source: &str, target: &str, pmt: PmtKind) -> bool {
        self.rules
            .contains_key(&(source.to_string(), target.to_string(), pmt))
    }

    pub fn get(&self, source: &str, target: &str, pmt: PmtKind) -> Option<&MigrationRule> {
        self.rules
            .get(&(source.to_string(), target.to_string(), pmt))
    }

    pub fn remove(&mut self, source: &str, target: &str, pmt: PmtKind) -> Option<MigrationRule> {
        self.rules
            .remove(&(source.to_string(), target.to_string(), pmt))
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Rules in (source, target, tool) order.
    pub fn iter(&self) -> impl Iterator<Item = &MigrationRule> {
        self.rules.values()
    }

    pub fn count_for(&self, pmt: PmtKind) -> usize {
        self.rules.values().filter(|r| r.pmt == pmt).count()
    }
}

impl FromIterator<MigrationRule> for RuleSet {
    fn from_iter<I: IntoIterator<Item = MigrationRule>>(iter: I) -> Self {
        let mut set = RuleSet::new();
        for rule in iter {
            set.insert(rule);
        }
        set
    }
}

/// Lowercased message tokens, split on anything that is not alphanumeric,
/// `-`, `_` or `.`; separators at the token ends are trimmed.
pub fn message_tokens(message: &str) -> BTreeSet<String> {
    message
        .to_lowercase()
        .split(|c: char| !(c.is_alphanumeric() || matches!(c, '-' | '_' | '.')))
        .map(|t| t.trim_matches(|c| matches!(c, '-' | '_' | '.')))
        .filter(|t| !t.is_empty())
        .map(String::from)
        .collect()
}

const MIGRATION_VERBS: &[&str] = &["switch", "migrat", "replac", "instead", "move"];

#[derive(Debug, Clone, Default)]
pub struct SalmOptions {
    /// Also require a migration verb (switch, migrate, replace, ...) in the message.
    pub require_migration_verb: bool,
}

/// Rules self-admitted by one commit.
///
/// Every removed library mentioned in the message is paired with the most
/// similar mentioned added library (ties go to the lexicographically
/// smallest target); trivial pairs are dropped.
pub fn extract_salm(
    message: &str,
    delta: &CommitDelta,
    classifier: &PairClassifier,
    options: &SalmOptions,
) -> RuleSet {
    let mut rules = RuleSet::new();
    if !delta.is_candidate_commit() {
        return rules;
    }
    let tokens = message_tokens(message);
    if options.require_migration_verb
        && !tokens
            .iter()
            .any(|t| MIGRATION_VERBS.iter().any(|v| t.starts_with(v)))
    {
        return rules;
    }
    let mentioned = |name: &&CanonicalName| name.aliases.iter().any(|a| tokens.contains(a));
    let added: Vec<&CanonicalName> = delta.added.iter().filter(mentioned).collect();
    if added.is_empty() {
        return rules;
    }
    for source in delta.removed.iter().filter(mentioned) {
        let mut best: Option<(&CanonicalName, f64)> = None;
        // `added` is sorted, so keeping the first maximum breaks ties
        // towards the smallest canonical name
        for &target in &added {
            let sim = name_similarity(source, target);
            if best.is_none_or(|(_, s)| sim > s) {
                best = Some((target, sim));
            }
        }
        let Some((target, _)) = best else {
            continue;
        };
        if source.canonical == target.canonical
            || classifier.classify(source, target) != PairClass::Nontrivial
        {
            continue;
        }
        rules.insert(MigrationRule::new(
            source.clone(),
            target.clone(),
            delta.pmt,
            &delta.commit,
        ));
    }
    rules
}

/// Unions the SALM rules of a corpus. The result does not depend on the
/// order of the stream.
pub fn mine_rules<'a, I>(corpus: I, classifier: &PairClassifier, options: &SalmOptions) -> RuleSet
where
    I: IntoIterator<Item = (&'a CommitDelta, &'a str)>,
{
    let mut rules = RuleSet::new();
    for (delta, message) in corpus {
        rules.merge(extract_salm(message, delta, classifier, options));
    }
    rules
}

/// A project moving its dependency declarations from one tool to another.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PmtMigration {
    pub commit: CommitInfo,
    pub from_pmt: PmtKind,
    pub to_pmt: PmtKind,
}

impl PmtMigration {
    pub fn row(&self) -> PmtMigrationRow<'_> {
        PmtMigrationRow {
            project: &self.commit.project,
            commit_id: &self.commit.commit_id,
            timestamp: self.commit.timestamp,
            from_pmt: self.from_pmt,
            to_pmt: self.to_pmt,
            message: &self.commit.message,
        }
    }
}

/// Serialized form of a tool migration (`pmt_migrations.jsonl`).
#[derive(Debug, Serialize)]
pub struct PmtMigrationRow<'a> {
    pub project: &'a str,
    pub commit_id: &'a str,
    pub timestamp: i64,
    pub from_pmt: PmtKind,
    pub to_pmt: PmtKind,
    pub message: &'a str,
}

/// Names by which commit messages refer to each tool.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PmtAliases {
    aliases: BTreeMap<PmtKind, Vec<String>>,
}

pub const DEFAULT_PMT_ALIASES: &str = "\
conan\tconan
vcpkg\tvcpkg
meson\tmeson
xmake\txmake
gitsubmodule\tsubmodule
gitsubmodule\tgitsubmodule
gitsubmodule\tgit submodule
deb\tdeb
deb\tdebian
pkgconfig\tpkg-config
pkgconfig\tpkgconfig
";

impl Default for PmtAliases {
    fn default() -> Self {
        PmtAliases::parse(DEFAULT_PMT_ALIASES).expect("built-in alias table")
    }
}

impl PmtAliases {
    /// Parses `pmt<TAB>alias` lines; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut aliases: BTreeMap<PmtKind, Vec<String>> = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (pmt, alias) = line.split_once('\t').ok_or_else(|| {
                Error::Config(format!("aliases line {}: expected pmt<TAB>alias", idx + 1))
            })?;
            let pmt: PmtKind = pmt
                .parse()
                .map_err(|e| Error::Config(format!("aliases line {}: {e}", idx + 1)))?;
            let alias = alias.trim().to_lowercase();
            if alias.is_empty() {
                return Err(Error::Config(format!(
                    "aliases line {}: empty alias",
                    idx + 1
                )));
            }
            let list = aliases.entry(pmt).or_default();
            if !list.contains(&alias) {
                list.push(alias);
            }
        }
        Ok(PmtAliases { aliases })
    }

    pub fn mentioned(&self, pmt: PmtKind, message: &str) -> bool {
        let lowered = message.to_lowercase();
        self.aliases
            .get(&pmt)
            .is_some_and(|list| list.iter().any(|a| lowered.contains(a.as_str())))
    }

    pub fn entries(&self) -> impl Iterator<Item = (PmtKind, &str)> {
        self.aliases
            .iter()
            .flat_map(|(pmt, list)| list.iter().map(move |a| (*pmt, a.as_str())))
    }
}

/// Outcome of looking for a tool migration in one commit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PmtSwitch {
    /// Manifests moved and the message names both tools.
    Confirmed(PmtMigration),
    /// Manifests moved but the message does not name both tools.
    Unconfirmed(PmtMigration),
}

fn tools_moved(changes: &[ManifestChange]) -> (BTreeSet<PmtKind>, BTreeSet<PmtKind>) {
    let mut removed = BTreeSet::new();
    let mut added = BTreeSet::new();
    for change in changes {
        let before_nonempty = change.before.as_ref().is_some_and(|m| !m.is_empty());
        let after_nonempty = change.after.as_ref().is_some_and(|m| !m.is_empty());
        let deleted_or_emptied = change.after.is_none() || (!after_nonempty && before_nonempty);
        let added_or_populated = change.before.is_none() || (!before_nonempty && after_nonempty);
        if deleted_or_emptied {
            removed.insert(change.pmt);
        }
        if added_or_populated {
            added.insert(change.pmt);
        }
    }
    (removed, added)
}

/// Tool-migration evidence of one commit's manifest changes, confirmed or not.
pub fn detect_pmt_switch(
    message: &str,
    changes: &[ManifestChange],
    aliases: &PmtAliases,
) -> Option<PmtSwitch> {
    let commit = changes.first()?.commit.clone();
    let (removed, added) = tools_moved(changes);
    let mut first = None;
    for &from in &removed {
        for &to in &added {
            if from == to {
                continue;
            }
            let migration = PmtMigration {
                commit: commit.clone(),
                from_pmt: from,
                to_pmt: to,
            };
            if aliases.mentioned(from, message) && aliases.mentioned(to, message) {
                return Some(PmtSwitch::Confirmed(migration));
            }
            first.get_or_insert(migration);
        }
    }
    first.map(PmtSwitch::Unconfirmed)
}

/// A confirmed tool migration: manifests of one tool removed, another's
/// added, and both tools named in the message.
pub fn extract_pmt_migration(
    message: &str,
    changes: &[ManifestChange],
    aliases: &PmtAliases,
) -> Option<PmtMigration> {
    match detect_pmt_switch(message, changes, aliases)? {
        PmtSwitch::Confirmed(m) => Some(m),
        PmtSwitch::Unconfirmed(_) => None,
    }
}
