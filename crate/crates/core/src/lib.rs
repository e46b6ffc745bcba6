//! Mining C/C++ library migrations from Git history.
//!
//! The pipeline runs in stages, each in its own module:
//!
//! 1. [`manifest`] recognises and parses the manifests of seven package
//!    management tools (meson, xmake, Debian control, conan, vcpkg,
//!    pkg-config, git submodules).
//! 2. [`normalize`] canonicalises library names and filters trivial pairs
//!    (version bumps, fork swaps, excluded pairs).
//! 3. [`history`] walks a repository, diffs the parsed manifests commit by
//!    commit and generates candidate migrations.
//! 4. [`salm`] finds migrations that developers name in their commit
//!    messages and turns them into migration rules.
//! 5. [`dataset`] applies the rules corpus-wide and computes per-tool
//!    statistics.
//! 6. [`analytics`] and [`reports`] compute graph metrics (entropy, flow),
//!    trends and exports over the resulting dataset.

pub mod analytics;
pub mod config;
pub mod dataset;
pub mod error;
pub mod history;
pub mod manifest;
pub mod normalize;
pub mod reports;
pub mod salm;
#[cfg(feature = "testkit")]
#[doc(hidden)]
pub mod testkit;

pub use analytics::{MigrationGraph, SummaryStats, TargetDistribution};
pub use config::MinerConfig;
pub use dataset::{build_dataset, Dataset, MigrationRecord, PmtStats};
pub use error::{Error, Result};
pub use history::{CandidateMigration, CommitDelta, CommitInfo, ManifestChange};
pub use manifest::{detect_manifest, parse_manifest, DependencyDecl, ParsedManifest, PmtKind};
pub use normalize::{
    classify_pair, name_similarity, normalize, CanonicalName, Exclusions, PairClass, PairClassifier,
};
pub use salm::{MigrationRule, PmtAliases, PmtMigration, RuleSet};
