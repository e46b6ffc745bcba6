//! Run configuration and the editable tables it points to.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use crate::analytics::{Keywords, Labels};
use crate::error::{Error, Result};
use crate::history::DEFAULT_BULK_THRESHOLD;
use crate::manifest::PmtKind;
use crate::normalize::Exclusions;
use crate::salm::PmtAliases;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinerConfig {
    pub corpus_dir: PathBuf,
    pub output_dir: PathBuf,
    /// Only these tools are mined; `None` means all.
    pub pmt_filter: Option<BTreeSet<PmtKind>>,
    pub bulk_threshold: usize,
    pub exclusions_path: Option<PathBuf>,
    pub aliases_path: Option<PathBuf>,
    pub keywords_path: Option<PathBuf>,
    pub labels_path: Option<PathBuf>,
    pub workers: usize,
}

impl MinerConfig {
    pub fn new(corpus_dir: impl Into<PathBuf>, output_dir: impl Into<PathBuf>) -> Self {
        MinerConfig {
            corpus_dir: corpus_dir.into(),
            output_dir: output_dir.into(),
            pmt_filter: None,
            bulk_threshold: DEFAULT_BULK_THRESHOLD,
            exclusions_path: None,
            aliases_path: None,
            keywords_path: None,
            labels_path: None,
            workers: default_workers(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.bulk_threshold == 0 {
            return Err(Error::Config("bulk threshold must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if self.pmt_filter.as_ref().is_some_and(BTreeSet::is_empty) {
            return Err(Error::Config("empty tool filter".into()));
        }
        Ok(())
    }

    pub fn includes(&self, pmt: PmtKind) -> bool {
        self.pmt_filter.as_ref().is_none_or(|f| f.contains(&pmt))
    }

    pub fn exclusions(&self) -> Result<Exclusions> {
        match &self.exclusions_path {
            Some(path) => Exclusions::parse(&read_table(path)?),
            None => Ok(Exclusions::default()),
        }
    }

    pub fn aliases(&self) -> Result<PmtAliases> {
        match &self.aliases_path {
            Some(path) => PmtAliases::parse(&read_table(path)?),
            None => Ok(PmtAliases::default()),
        }
    }

    pub fn keywords(&self) -> Result<Keywords> {
        match &self.keywords_path {
            Some(path) => Ok(Keywords::parse(&read_table(path)?)),
            None => Ok(Keywords::default()),
        }
    }

    pub fn labels(&self) -> Result<Option<Labels>> {
        self.labels_path.as_deref().map(Labels::load).transpose()
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn read_table(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}

/// Parses a comma-separated tool list such as `deb,conan`.
pub fn parse_pmt_filter(spec: &str) -> Result<BTreeSet<PmtKind>> {
    spec.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse::<PmtKind>().map_err(Error::Config))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = MinerConfig::new("corpus", "out");
        cfg.validate().unwrap();
        assert_eq!(cfg.bulk_threshold, 50);
        assert!(cfg.includes(PmtKind::Deb));
        assert!(cfg
            .exclusions()
            .unwrap()
            .contains("debhelper", "debhelper-compat"));
        assert!(cfg.labels().unwrap().is_none());
    }

    #[test]
    fn rejects_zero_values() {
        let mut cfg = MinerConfig::new("c", "o");
        cfg.workers = 0;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        cfg.workers = 1;
        cfg.bulk_threshold = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn missing_tables_are_config_errors() {
        let mut cfg = MinerConfig::new("c", "o");
        cfg.keywords_path = Some("/nonexistent/keywords.txt".into());
        assert!(matches!(cfg.keywords(), Err(Error::Config(_))));
        cfg.labels_path = Some("/nonexistent/labels.csv".into());
        assert!(matches!(cfg.labels(), Err(Error::Config(_))));
    }

    #[test]
    fn tool_filter() {
        let f = parse_pmt_filter("deb, conan").unwrap();
        assert_eq!(f, BTreeSet::from([PmtKind::Deb, PmtKind::Conan]));
        assert!(parse_pmt_filter("deb,cmake").is_err());
        let mut cfg = MinerConfig::new("c", "o");
        cfg.pmt_filter = Some(f);
        assert!(!cfg.includes(PmtKind::Meson));
    }
}
