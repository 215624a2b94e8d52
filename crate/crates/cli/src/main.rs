use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use onionforge_core::chain::{ExplorerAdapter, FixtureExplorer, HttpExplorer, RetryPolicy};
use onionforge_core::classify::{ClassifyConfig, DEFAULT_THRESHOLD};
use onionforge_core::cluster::{ClusterConfig, DEFAULT_PREFIX_LEN, MIN_MIX_PARTICIPANTS};
use onionforge_core::data;
use onionforge_core::par::Exec;
use onionforge_core::report::{self, ClusterOutputs, ClusterPaths, Layout, RunConfig, TableOptions, TraceOutputs};
use onionforge_core::trace::{FixtureSearch, HttpSearch, SearchAdapter};
use onionforge_core::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_STAGE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "onionforge",
    version,
    about = "Onion-site address forensics and campaign clustering"
)]
struct Cli {
    /// Run batch stages on the calling thread only.
    #[arg(long, global = true)]
    sequential: bool,
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Provider {
    Fixtures,
    Http,
}

#[derive(Clone, Copy, ValueEnum)]
enum Search {
    None,
    Fixtures,
    Http,
}

#[derive(clap::Args)]
struct Net {
    /// Request starts per second; 0 disables limiting.
    #[arg(long, default_value_t = 5.0)]
    rate_limit: f64,
    #[arg(long, default_value_t = 3)]
    retries: u32,
    #[arg(long, default_value_t = 30)]
    timeout_secs: u64,
}

impl Net {
    fn retry(&self) -> RetryPolicy {
        RetryPolicy {
            max_retries: self.retries,
            ..RetryPolicy::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Replay a crawled snapshot directory into corpus.jsonl.
    Ingest {
        #[arg(long)]
        root: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        warnings: Option<PathBuf>,
    },
    /// Extract BTC, ETH and email candidates with validity verdicts.
    Extract {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Replacement TLD list, one per line.
        #[arg(long)]
        tlds: Option<PathBuf>,
    },
    /// Label every site with a category.
    Classify {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        ground_truth: PathBuf,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        #[arg(long)]
        stopwords: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Keep BTC addresses found on illicit sites that pass the zone review.
    Filter {
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        addresses: PathBuf,
        #[arg(long)]
        annotations: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        removed: Option<PathBuf>,
    },
    /// Fetch transaction histories for a set of addresses.
    FetchTx {
        /// Illicit-set or extraction JSONL.
        #[arg(long)]
        addresses: PathBuf,
        #[arg(long, value_enum, default_value = "fixtures")]
        provider: Provider,
        #[arg(long)]
        fixtures: Option<PathBuf>,
        #[arg(long)]
        base_url: Option<String>,
        #[command(flatten)]
        net: Net,
        #[arg(long)]
        out: PathBuf,
    },
    /// Search the surface web for addresses and join analyst annotations.
    Trace {
        #[arg(long)]
        addresses: PathBuf,
        #[arg(long, value_enum, default_value = "fixtures")]
        provider: Search,
        #[arg(long)]
        fixtures: Option<PathBuf>,
        /// Search URL template; `{address}` is replaced by the address.
        #[arg(long)]
        search_url: Option<String>,
        #[arg(long)]
        annotations: Option<PathBuf>,
        /// Extra surface facts to pass through unchanged.
        #[arg(long)]
        surface_facts: Option<PathBuf>,
        #[arg(long)]
        explorer_domains: Option<PathBuf>,
        #[command(flatten)]
        net: Net,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        surface: PathBuf,
        #[arg(long)]
        failures: Option<PathBuf>,
    },
    /// Group sites, addresses and identity facts into campaigns.
    Cluster {
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        illicit: PathBuf,
        #[arg(long)]
        ledgers: PathBuf,
        /// Extraction output holding the email records.
        #[arg(long)]
        emails: PathBuf,
        #[arg(long)]
        surface: Option<PathBuf>,
        #[arg(long, default_value_t = 50)]
        public_threshold: usize,
        #[arg(long, default_value_t = 0)]
        min_received: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Write tables and graph exports for a pipeline directory.
    Report {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, default_value_t = 10)]
        top_n: usize,
        #[arg(long, default_value_t = 0)]
        min_received: u64,
        #[arg(long, default_value_t = DEFAULT_PREFIX_LEN)]
        vanity_prefix: usize,
    },
    /// Run every stage from a config file, reusing up-to-date outputs.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

fn need<'a, T: ?Sized>(v: Option<&'a T>, what: &str) -> Result<&'a T, Error> {
    v.ok_or_else(|| Error::Config(format!("{what} is required")))
}

fn check_threshold(t: f64) -> Result<(), Error> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::Config(format!("threshold must be in [0, 1], got {t}")))
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let exec = if cli.sequential {
        Exec::Sequential
    } else {
        Exec::Parallel
    };
    match cli.command {
        Command::Ingest { root, out, warnings } => {
            if !root.is_dir() {
                return Err(Error::Config(format!("--root {} is not a directory", root.display())));
            }
            let (corpus, rep) = report::ingest(&root, &out, warnings.as_deref(), exec)?;
            eprintln!(
                "ingested {} pages from {} sites ({} warnings)",
                corpus.len(),
                corpus.domain_count(),
                rep.warnings.len()
            );
        }
        Command::Extract { corpus, out, tlds } => {
            let tlds = data::word_list_or(tlds.as_deref(), data::TLDS)?;
            let n = report::extract(&corpus, &tlds, &out, exec)?;
            eprintln!("wrote {n} address records");
        }
        Command::Classify {
            corpus,
            ground_truth,
            threshold,
            stopwords,
            out,
        } => {
            check_threshold(threshold)?;
            let cfg = ClassifyConfig {
                threshold,
                stopwords: data::word_list_or(stopwords.as_deref(), data::STOPWORDS_EN)?,
            };
            let warnings = report::classify(&corpus, &ground_truth, &cfg, &out, exec)?;
            eprintln!("labels written ({} ground-truth warnings)", warnings.len());
        }
        Command::Filter {
            labels,
            addresses,
            annotations,
            out,
            removed,
        } => {
            let rep = report::filter(&labels, &addresses, annotations.as_deref(), &out, removed.as_deref())?;
            eprintln!("{} addresses removed by review", rep.removed.len());
        }
        Command::FetchTx {
            addresses,
            provider,
            fixtures,
            base_url,
            net,
            out,
        } => {
            let adapter: Box<dyn ExplorerAdapter> = match provider {
                Provider::Fixtures => Box::new(FixtureExplorer::new(need(fixtures.as_deref(), "--fixtures")?)),
                Provider::Http => Box::new(HttpExplorer::new(
                    need(base_url.as_deref(), "--base-url")?,
                    net.rate_limit,
                    Duration::from_secs(net.timeout_secs),
                )),
            };
            let (ok, failed) = report::fetch_tx(&addresses, adapter.as_ref(), &net.retry(), &out, exec)?;
            eprintln!("fetched {ok} ledgers, {failed} failures");
        }
        Command::Trace {
            addresses,
            provider,
            fixtures,
            search_url,
            annotations,
            surface_facts,
            explorer_domains,
            net,
            out,
            surface,
            failures,
        } => {
            let adapter: Option<Box<dyn SearchAdapter>> = match provider {
                Search::None => None,
                Search::Fixtures => Some(Box::new(FixtureSearch::new(need(fixtures.as_deref(), "--fixtures")?))),
                Search::Http => Some(Box::new(HttpSearch::new(
                    need(search_url.as_deref(), "--search-url")?,
                    net.rate_limit,
                    Duration::from_secs(net.timeout_secs),
                ))),
            };
            let domains = data::word_list_or(explorer_domains.as_deref(), data::EXPLORER_DOMAINS)?;
            let warnings = report::trace(
                &addresses,
                adapter.as_deref(),
                &domains,
                annotations.as_deref(),
                surface_facts.as_deref(),
                &net.retry(),
                &TraceOutputs {
                    hits: &out,
                    surface: &surface,
                    failures: failures.as_deref(),
                },
                exec,
            )?;
            eprintln!("trace written ({} annotation warnings)", warnings.len());
        }
        Command::Cluster {
            labels,
            illicit,
            ledgers,
            emails,
            surface,
            public_threshold,
            min_received,
            out,
            trace,
            graph,
            report: report_out,
        } => {
            if public_threshold == 0 {
                return Err(Error::Config("public threshold must be at least 1".into()));
            }
            let cfg = ClusterConfig {
                public_threshold,
                mix_participants: MIN_MIX_PARTICIPANTS,
                vanity_prefix: DEFAULT_PREFIX_LEN,
            };
            let campaigns = report::cluster(
                &ClusterPaths {
                    labels: &labels,
                    illicit: &illicit,
                    ledgers: &ledgers,
                    addresses: &emails,
                    surface: surface.as_deref(),
                },
                &cfg,
                min_received,
                &ClusterOutputs {
                    campaigns: &out,
                    trace: &trace,
                    graph: graph.as_deref(),
                    report: report_out.as_deref(),
                },
                exec,
            )?;
            eprintln!("{} campaigns", campaigns.len());
        }
        Command::Report {
            dir,
            top_n,
            min_received,
            vanity_prefix,
        } => {
            if vanity_prefix == 0 {
                return Err(Error::Config("vanity prefix must be at least 1".into()));
            }
            let t = report::report(
                &Layout::new(dir),
                &TableOptions {
                    top_n,
                    min_received,
                    vanity_prefix,
                },
            )?;
            eprintln!(
                "{} campaigns, {} vanity groups",
                t.campaigns.len(),
                t.vanity_groups.len()
            );
        }
        Command::Run { config } => {
            let (mut cfg, text) = RunConfig::load(&config)?;
            if exec == Exec::Sequential {
                cfg.parallel = false;
            }
            let run = report::run_pipeline(&cfg, &text)?;
            for s in &run.stages {
                eprintln!("{:<9} {}", s.stage, if s.reused { "reused" } else { "done" });
            }
            println!(
                "{}",
                serde_json::json!({ "run_id": run.run_id, "output_dir": cfg.output_dir })
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) => ExitCode::from(EXIT_CONFIG),
                _ => ExitCode::from(EXIT_STAGE),
            }
        }
    }
}
