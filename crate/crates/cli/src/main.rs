//! `migmine`: mine library migrations from a directory of git repositories.
//!
//! Exit codes: 0 on success, 1 for usage or configuration errors, 2 when the
//! corpus or dataset itself is unusable.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use migmine_core::analytics::{build_graph, domain_distribution, Bucket, Keywords, Labels};
use migmine_core::config::parse_pmt_filter;
use migmine_core::dataset::{
    assemble, candidate_counts, read_records, scan_corpus, write_candidates, write_dataset,
    ConfigSnapshot, CANDIDATES_FILE,
};
use migmine_core::reports::{self, Metric, SankeyExport};
use migmine_core::{MinerConfig, PmtKind};

#[derive(Debug, Parser)]
#[command(
    name = "migmine",
    version,
    about = "Mine C/C++ library migrations from git history"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write candidate migrations (candidates.jsonl) and print per-tool counts.
    Scan(MineArgs),
    /// Build the migration dataset: records, rules, tool migrations, stats.
    Mine(MineArgs),
    /// Compute one analysis over a mined dataset as CSV.
    Stats(StatsArgs),
    /// Export the migration graph as Sankey node/link JSON.
    Export(ExportArgs),
}

#[derive(Debug, Args)]
struct MineArgs {
    /// Directory whose subdirectories are git repositories.
    #[arg(long)]
    corpus: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated tools to mine (e.g. deb,conan).
    #[arg(long)]
    pmt: Option<String>,
    #[arg(long, env = "MIGMINE_WORKERS")]
    workers: Option<usize>,
    /// Commits adding or removing more libraries than this are not candidates.
    #[arg(long, default_value_t = migmine_core::history::DEFAULT_BULK_THRESHOLD)]
    bulk_threshold: usize,
    /// Excluded pairs, one `source<TAB>target` per line.
    #[arg(long)]
    exclusions: Option<PathBuf>,
    /// Tool-name aliases, one `pmt<TAB>alias` per line.
    #[arg(long)]
    aliases: Option<PathBuf>,
    /// Rationale keywords recorded in the dataset header.
    #[arg(long)]
    keywords: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct StatsArgs {
    /// Dataset directory or records.jsonl file.
    #[arg(long)]
    dataset: PathBuf,
    /// entropy, flow, trend, domains, summary or rationales.
    #[arg(long)]
    metric: Metric,
    /// Write `<metric>.csv` into this directory instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Restrict the graph metrics to one tool.
    #[arg(long)]
    pmt: Option<PmtKind>,
    #[arg(long)]
    keywords: Option<PathBuf>,
    /// `library,domain` CSV.
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long, default_value = "year")]
    bucket: Bucket,
    /// Split the trend per tool.
    #[arg(long)]
    by_pmt: bool,
    /// Merge domains with fewer migrations than this into `Other`.
    #[arg(long)]
    other_threshold: Option<usize>,
}

#[derive(Debug, Args)]
struct ExportArgs {
    /// Dataset directory or records.jsonl file.
    #[arg(long)]
    dataset: PathBuf,
    /// Only migrations whose source library has this domain.
    #[arg(long)]
    domain: Option<String>,
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long)]
    pmt: Option<PmtKind>,
    /// Directory for sankey.json; defaults to the dataset directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl MineArgs {
    fn config(&self) -> anyhow::Result<MinerConfig> {
        let mut config = MinerConfig::new(&self.corpus, &self.out);
        if let Some(spec) = &self.pmt {
            config.pmt_filter = Some(parse_pmt_filter(spec)?);
        }
        if let Some(workers) = self.workers {
            config.workers = workers;
        }
        config.bulk_threshold = self.bulk_threshold;
        config.exclusions_path = self.exclusions.clone();
        config.aliases_path = self.aliases.clone();
        config.keywords_path = self.keywords.clone();
        config.validate()?;
        Ok(config)
    }
}

fn cmd_scan(args: &MineArgs) -> anyhow::Result<()> {
    let config = args.config()?;
    let corpus = scan_corpus(&config)?;
    let path = config.output_dir.join(CANDIDATES_FILE);
    write_candidates(&corpus, &path).with_context(|| format!("writing {}", path.display()))?;
    let mut stdout = io::stdout().lock();
    let mut total = 0;
    for (pmt, n) in candidate_counts(&corpus) {
        writeln!(stdout, "{pmt}\t{n}")?;
        total += n;
    }
    writeln!(stdout, "total\t{total}")?;
    Ok(())
}

fn cmd_mine(args: &MineArgs) -> anyhow::Result<()> {
    let config = args.config()?;
    let snapshot = ConfigSnapshot::of(&config)?;
    let corpus = scan_corpus(&config)?;
    let dataset = assemble(&corpus, snapshot);
    for d in &dataset.diagnostics {
        log::warn!("{d}");
    }
    write_dataset(&dataset, &config.output_dir)
        .with_context(|| format!("writing dataset to {}", config.output_dir.display()))?;
    let total = dataset.total();
    println!(
        "{} rules, {} migrations in {} commits, {} tool migrations",
        dataset.rules.len(),
        total.migrations,
        total.migration_commits,
        dataset.pmt_migrations.len()
    );
    Ok(())
}

fn load_labels(path: Option<&Path>) -> anyhow::Result<Labels> {
    Ok(match path {
        Some(p) => Labels::load(p)?,
        None => Labels::new(),
    })
}

fn emit(out_dir: Option<&Path>, file_name: &str, bytes: &[u8]) -> anyhow::Result<()> {
    match out_dir {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let path = dir.join(file_name);
            fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        }
        None => io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn cmd_stats(args: &StatsArgs) -> anyhow::Result<()> {
    let keywords = match &args.keywords {
        Some(p) => Keywords::parse(&fs::read_to_string(p).map_err(|e| {
            migmine_core::Error::Config(format!("cannot read {}: {e}", p.display()))
        })?),
        None => Keywords::default(),
    };
    let labels = load_labels(args.labels.as_deref())?;
    let (_, records) = read_records(&args.dataset)?;
    let graph = build_graph(&records, args.pmt);
    let mut buf = Vec::new();
    match args.metric {
        Metric::Entropy => reports::write_entropy(&graph, &mut buf)?,
        Metric::Flow => reports::write_flow(&graph, &mut buf)?,
        Metric::Summary => reports::write_summary(&graph, &mut buf)?,
        Metric::Trend => reports::write_trend(&records, args.bucket, args.by_pmt, &mut buf)?,
        Metric::Domains => {
            let dist = domain_distribution(&records, &labels, args.other_threshold);
            reports::write_domains(&dist, &mut buf)?
        }
        Metric::Rationales => reports::write_rationales(&records, &keywords, &mut buf)?,
    }
    emit(
        args.out.as_deref(),
        &format!("{}.csv", args.metric.as_str()),
        &buf,
    )
}

fn cmd_export(args: &ExportArgs) -> anyhow::Result<()> {
    if args.domain.is_some() && args.labels.is_none() {
        return Err(migmine_core::Error::Config("--domain requires --labels".into()).into());
    }
    let labels = load_labels(args.labels.as_deref())?;
    let (_, records) = read_records(&args.dataset)?;
    let mut graph = build_graph(&records, args.pmt);
    if let Some(domain) = &args.domain {
        graph = graph.filter_sources(|lib| labels.domain_of(lib) == Some(domain.as_str()));
    }
    let json = SankeyExport::from_graph(&graph).to_json();
    let out_dir = match &args.out {
        Some(dir) => dir.clone(),
        None if args.dataset.is_dir() => args.dataset.clone(),
        None => args
            .dataset
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from(".")),
    };
    emit(Some(&out_dir), "sankey.json", json.as_bytes())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<migmine_core::Error>() {
        Some(e) if e.is_data_error() => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Scan(args) => cmd_scan(args),
        Command::Mine(args) => cmd_mine(args),
        Command::Stats(args) => cmd_stats(args),
        Command::Export(args) => cmd_export(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("migmine: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn data_errors_exit_two() {
        let e = anyhow::Error::new(migmine_core::Error::EmptyCorpus("x".into()));
        assert_eq!(exit_code(&e), 2);
        let e = anyhow::Error::new(migmine_core::Error::Config("x".into()));
        assert_eq!(exit_code(&e), 1);
        assert_eq!(exit_code(&anyhow::anyhow!("other")), 1);
    }
}
