//! Analyses over a migration dataset: the weighted migration graph with its
//! entropy and flow metrics, trends, domain counts and rationale keywords.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use chrono::{DateTime, Datelike};

use crate::dataset::MigrationRecord;
use crate::error::{Error, Result};
use crate::manifest::PmtKind;

/// Weighted directed graph of library migrations. Edge weight is the number
/// of migration records for the pair.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MigrationGraph {
    edges: BTreeMap<(String, String), u64>,
    in_degree: BTreeMap<String, u64>,
    out_degree: BTreeMap<String, u64>,
}

impl MigrationGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_edges<I, S>(edges: I) -> Self
    where
        I: IntoIterator<Item = (S, S, u64)>,
        S: Into<String>,
    {
        let mut graph = MigrationGraph::new();
        for (s, t, w) in edges {
            graph.add_edge(s, t, w);
        }
        graph
    }

    /// Adds `weight` to the edge `source -> target`. Zero weights are ignored.
    pub fn add_edge(&mut self, source: impl Into<String>, target: impl Into<String>, weight: u64) {
        if weight == 0 {
            return;
        }
        let (source, target) = (source.into(), target.into());
        *self.out_degree.entry(source.clone()).or_default() += weight;
        *self.in_degree.entry(target.clone()).or_default() += weight;
        *self.edges.entry((source, target)).or_default() += weight;
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// All libraries, in lexicographic order.
    pub fn nodes(&self) -> BTreeSet<&str> {
        self.in_degree
            .keys()
            .chain(self.out_degree.keys())
            .map(String::as_str)
            .collect()
    }

    /// Edges in (source, target) order.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str, u64)> {
        self.edges
            .iter()
            .map(|((s, t), w)| (s.as_str(), t.as_str(), *w))
    }

    pub fn weight(&self, source: &str, target: &str) -> u64 {
        self.edges
            .get(&(source.to_string(), target.to_string()))
            .copied()
            .unwrap_or(0)
    }

    /// Weighted in-degree: how often the library was adopted.
    pub fn in_degree(&self, library: &str) -> u64 {
        self.in_degree.get(library).copied().unwrap_or(0)
    }

    /// Weighted out-degree: how often the library was abandoned.
    pub fn out_degree(&self, library: &str) -> u64 {
        self.out_degree.get(library).copied().unwrap_or(0)
    }

    /// Libraries with at least one outgoing edge.
    pub fn sources(&self) -> impl Iterator<Item = &str> {
        self.out_degree.keys().map(String::as_str)
    }

    pub fn targets_of<'a>(&'a self, source: &'a str) -> impl Iterator<Item = (&'a str, u64)> + 'a {
        self.edges
            .range((source.to_string(), String::new())..)
            .take_while(move |((s, _), _)| s == source)
            .map(|((_, t), w)| (t.as_str(), *w))
    }

    /// Same graph with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: u64) -> MigrationGraph {
        MigrationGraph::from_edges(self.edges().map(|(s, t, w)| (s, t, w * factor)))
    }

    /// Subgraph of the edges whose source satisfies `keep`.
    pub fn filter_sources(&self, mut keep: impl FnMut(&str) -> bool) -> MigrationGraph {
        MigrationGraph::from_edges(self.edges().filter(|(s, _, _)| keep(s)))
    }
}

/// Graph of the records, optionally restricted to one tool.
pub fn build_graph(records: &[MigrationRecord], pmt: Option<PmtKind>) -> MigrationGraph {
    let mut graph = MigrationGraph::new();
    for record in records.iter().filter(|r| pmt.is_none_or(|p| r.pmt == p)) {
        graph.add_edge(record.source.as_str(), record.target.as_str(), 1);
    }
    graph
}

/// Probability of each migration target of one source library.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetDistribution {
    pub source: String,
    pub probabilities: BTreeMap<String, f64>,
}

impl TargetDistribution {
    pub fn of(graph: &MigrationGraph, source: &str) -> Result<Self> {
        let total = graph.out_degree(source);
        if total == 0 {
            return Err(Error::NoOutgoingEdges(source.to_string()));
        }
        let probabilities = graph
            .targets_of(source)
            .map(|(t, w)| (t.to_string(), w as f64 / total as f64))
            .collect();
        Ok(TargetDistribution {
            source: source.to_string(),
            probabilities,
        })
    }

    /// Shannon entropy in bits.
    pub fn entropy(&self) -> f64 {
        self.probabilities
            .values()
            .fold(0.0, |acc, &p| acc - p * p.log2())
    }
}

/// Base-2 entropy of the target distribution of `library`. Zero means every
/// migration away from it chose the same target.
pub fn entropy(graph: &MigrationGraph, library: &str) -> Result<f64> {
    Ok(TargetDistribution::of(graph, library)?.entropy())
}

/// `|deg_in - deg_out| / (deg_in + deg_out)`. One means the library is only
/// ever adopted or only ever abandoned.
pub fn flow(graph: &MigrationGraph, library: &str) -> Result<f64> {
    let adopted = graph.in_degree(library);
    let abandoned = graph.out_degree(library);
    let total = adopted + abandoned;
    if total == 0 {
        return Err(Error::IsolatedNode(library.to_string()));
    }
    Ok(adopted.abs_diff(abandoned) as f64 / total as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryStats {
    /// Sources with exactly one distinct target.
    pub one_to_one_share: f64,
    /// Unordered library pairs migrated in one direction only.
    pub unidirectional_share: f64,
}

/// `None` for an empty graph.
pub fn summary_stats(graph: &MigrationGraph) -> Option<SummaryStats> {
    if graph.is_empty() {
        return None;
    }
    let mut sources = 0usize;
    let mut one_to_one = 0usize;
    for source in graph.sources() {
        sources += 1;
        if graph.targets_of(source).count() == 1 {
            one_to_one += 1;
        }
    }
    let mut pairs: BTreeMap<(&str, &str), u8> = BTreeMap::new();
    for (s, t, _) in graph.edges() {
        if s == t {
            continue;
        }
        let key = if s < t { (s, t) } else { (t, s) };
        *pairs.entry(key).or_default() += 1;
    }
    let unidirectional = pairs.values().filter(|&&n| n == 1).count();
    let share = |num: usize, den: usize| {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    Some(SummaryStats {
        one_to_one_share: share(one_to_one, sources),
        unidirectional_share: share(unidirectional, pairs.len()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bucket {
    Year,
    Month,
}

impl std::str::FromStr for Bucket {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "year" => Ok(Bucket::Year),
            "month" => Ok(Bucket::Month),
            other => Err(format!("unknown bucket {other:?} (expected year or month)")),
        }
    }
}

/// Index of the year or month containing the timestamp.
fn bucket_index(timestamp: i64, bucket: Bucket) -> i64 {
    let dt = DateTime::from_timestamp(timestamp, 0).unwrap_or_default();
    match bucket {
        Bucket::Year => dt.year() as i64,
        Bucket::Month => dt.year() as i64 * 12 + dt.month0() as i64,
    }
}

fn bucket_label(index: i64, bucket: Bucket) -> String {
    match bucket {
        Bucket::Year => format!("{index:04}"),
        Bucket::Month => format!(
            "{:04}-{:02}",
            index.div_euclid(12),
            index.rem_euclid(12) + 1
        ),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrendPoint {
    /// `YYYY` or `YYYY-MM`.
    pub bucket: String,
    pub pmt: Option<PmtKind>,
    pub migration_commits: usize,
}

/// Distinct migration commits per time bucket, zero-filled between the first
/// and last bucket. With `by_pmt` there is one series per tool present in the
/// records, each over the same range.
pub fn trend(records: &[MigrationRecord], bucket: Bucket, by_pmt: bool) -> Vec<TrendPoint> {
    type Commits<'a> = BTreeSet<(&'a str, &'a str)>;
    let mut commits: BTreeMap<(i64, Option<PmtKind>), Commits> = BTreeMap::new();
    let mut pmts = BTreeSet::new();
    for r in records {
        let pmt = by_pmt.then_some(r.pmt);
        pmts.insert(pmt);
        commits
            .entry((bucket_index(r.timestamp, bucket), pmt))
            .or_default()
            .insert((r.project.as_str(), r.commit_id.as_str()));
    }
    let (Some(first), Some(last)) = (
        commits.keys().map(|k| k.0).min(),
        commits.keys().map(|k| k.0).max(),
    ) else {
        return Vec::new();
    };
    let mut pmts: Vec<Option<PmtKind>> = pmts.into_iter().collect();
    pmts.sort_by_key(|p| p.map(|p| PmtKind::REPORT_ORDER.iter().position(|&q| q == p)));
    let mut out = Vec::new();
    for idx in first..=last {
        for &pmt in &pmts {
            out.push(TrendPoint {
                bucket: bucket_label(idx, bucket),
                pmt,
                migration_commits: commits.get(&(idx, pmt)).map_or(0, BTreeSet::len),
            });
        }
    }
    out
}

pub const UNLABELED: &str = "unlabeled";
pub const OTHER: &str = "Other";

/// Library to domain labels, keyed by lowercase library name.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Labels {
    map: BTreeMap<String, String>,
}

impl Labels {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, library: &str, domain: &str) {
        self.map
            .insert(library.trim().to_lowercase(), domain.trim().to_string());
    }

    pub fn domain_of(&self, library: &str) -> Option<&str> {
        self.map.get(&library.to_lowercase()).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Reads a `library,domain` CSV with a header row.
    pub fn from_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h.eq_ignore_ascii_case(name))
                .ok_or_else(|| Error::Config(format!("labels file lacks a {name:?} column")))
        };
        let (lib_col, dom_col) = (col("library")?, col("domain")?);
        let mut labels = Labels::new();
        for row in rdr.records() {
            let row = row?;
            let (Some(lib), Some(dom)) = (row.get(lib_col), row.get(dom_col)) else {
                continue;
            };
            if !lib.is_empty() && !dom.is_empty() {
                labels.insert(lib, dom);
            }
        }
        Ok(labels)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)
            .map_err(|e| Error::Config(format!("cannot read labels {}: {e}", path.display())))?;
        Labels::from_reader(file).map_err(|e| match e {
            Error::Csv(e) => Error::Config(format!("labels {}: {e}", path.display())),
            other => other,
        })
    }
}

/// Migration records per domain of their source library. Domains with fewer
/// than `other_threshold` records are merged into `Other`; unlabeled sources
/// are never merged.
pub fn domain_distribution(
    records: &[MigrationRecord],
    labels: &Labels,
    other_threshold: Option<usize>,
) -> BTreeMap<String, usize> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for r in records {
        let domain = labels.domain_of(&r.source).unwrap_or(UNLABELED);
        *counts.entry(domain.to_string()).or_default() += 1;
    }
    let Some(threshold) = other_threshold else {
        return counts;
    };
    let mut merged: BTreeMap<String, usize> = BTreeMap::new();
    for (domain, n) in counts {
        let key = if domain != UNLABELED && n < threshold {
            OTHER.to_string()
        } else {
            domain
        };
        *merged.entry(key).or_default() += n;
    }
    merged
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeywordKind {
    /// Whole word.
    Word,
    /// Word prefix, written with a trailing `*`.
    Stem,
    /// Several words, matched as a phrase.
    Phrase,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Keyword {
    text: String,
    kind: KeywordKind,
}

impl Keyword {
    pub fn parse(spec: &str) -> Option<Keyword> {
        let spec = spec.trim().to_lowercase();
        if let Some(stem) = spec.strip_suffix('*') {
            let stem = stem.trim();
            return (!stem.is_empty()).then(|| Keyword {
                text: stem.to_string(),
                kind: KeywordKind::Stem,
            });
        }
        let words: Vec<&str> = spec.split_whitespace().collect();
        match words.len() {
            0 => None,
            1 => Some(Keyword {
                text: words[0].to_string(),
                kind: KeywordKind::Word,
            }),
            _ => Some(Keyword {
                text: words.join(" "),
                kind: KeywordKind::Phrase,
            }),
        }
    }

    pub fn kind(&self) -> KeywordKind {
        self.kind
    }

    /// The keyword as written in a keyword list.
    pub fn label(&self) -> String {
        match self.kind {
            KeywordKind::Stem => format!("{}*", self.text),
            _ => self.text.clone(),
        }
    }

    fn matches(&self, text: &MessageText) -> bool {
        match self.kind {
            KeywordKind::Word => text.words.contains(&self.text),
            KeywordKind::Stem => {
                // deprecate* also covers deprecation
                let root = self
                    .text
                    .strip_suffix('e')
                    .filter(|r| r.len() >= 3)
                    .unwrap_or(&self.text);
                text.words.iter().any(|w| w.starts_with(root))
            }
            KeywordKind::Phrase => text.joined.match_indices(&self.text).any(|(at, m)| {
                let before = text.joined[..at].chars().next_back();
                let after = text.joined[at + m.len()..].chars().next();
                !before.is_some_and(char::is_alphanumeric)
                    && !after.is_some_and(char::is_alphanumeric)
            }),
        }
    }
}

struct MessageText {
    words: Vec<String>,
    /// Lowercased, whitespace collapsed.
    joined: String,
}

impl MessageText {
    fn new(message: &str) -> Self {
        let lower = message.to_lowercase();
        MessageText {
            words: lower
                .split(|c: char| !c.is_alphanumeric())
                .filter(|w| !w.is_empty())
                .map(String::from)
                .collect(),
            joined: lower.split_whitespace().collect::<Vec<_>>().join(" "),
        }
    }
}

pub const DEFAULT_KEYWORDS: &str = "because\nfor\nso that\ndeprecate*\nbetter\ncan\nhelp\n";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Keywords(Vec<Keyword>);

impl Default for Keywords {
    fn default() -> Self {
        Keywords::parse(DEFAULT_KEYWORDS)
    }
}

impl Keywords {
    /// One keyword or phrase per line; `#` starts a comment line.
    pub fn parse(text: &str) -> Self {
        let mut out: Vec<Keyword> = Vec::new();
        for line in text.lines() {
            if line.trim_start().starts_with('#') {
                continue;
            }
            if let Some(k) = Keyword::parse(line) {
                if !out.contains(&k) {
                    out.push(k);
                }
            }
        }
        Keywords(out)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Keyword> {
        self.0.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Labels of the keywords found in `message`, in list order.
    pub fn matches(&self, message: &str) -> Vec<String> {
        if self.0.is_empty() {
            return Vec::new();
        }
        let text = MessageText::new(message);
        self.0
            .iter()
            .filter(|k| k.matches(&text))
            .map(Keyword::label)
            .collect()
    }
}

/// Records whose message contains at least one keyword, with the matches.
pub fn rationale_candidates<'a>(
    records: &'a [MigrationRecord],
    keywords: &Keywords,
) -> Vec<(&'a MigrationRecord, Vec<String>)> {
    records
        .iter()
        .filter_map(|r| {
            let found = keywords.matches(&r.message);
            (!found.is_empty()).then_some((r, found))
        })
        .collect()
}
