//! End-to-end run with per-stage digests so an interrupted or repeated run
//! only recomputes stages whose inputs changed.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{ProviderMode, RunConfig, SearchMode};
use super::stages::{self, ClusterOutputs, ClusterPaths, Layout, TraceOutputs};
use super::tables::TableOptions;
use crate::chain::{ExplorerAdapter, FixtureExplorer, HttpExplorer, RetryPolicy};
use crate::classify::ClassifyConfig;
use crate::cluster::{ClusterConfig, MIN_MIX_PARTICIPANTS};
use crate::data;
use crate::error::{Error, Result};
use crate::trace::{FixtureSearch, HttpSearch, SearchAdapter};

pub const STAGES: [&str; 8] = [
    "ingest", "extract", "classify", "filter", "fetch-tx", "trace", "cluster", "report",
];

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageDigest {
    pub input: String,
    pub output: String,
}

/// Digest bookkeeping kept in `state.json`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineState {
    pub stages: BTreeMap<String, StageDigest>,
}

impl PipelineState {
    pub fn load(path: &Path) -> Self {
        if !path.exists() {
            return PipelineState::default();
        }
        match crate::jsonl::read_json(path) {
            Ok(s) => s,
            Err(e) => {
                log::warn!("ignoring unreadable state: {e}");
                PipelineState::default()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub reused: bool,
    pub input_digest: String,
    pub output_digest: String,
    pub started_at: DateTime<Utc>,
    pub finished_at: DateTime<Utc>,
}

/// Provenance of one pipeline run, written to `run.json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineRun {
    pub run_id: String,
    pub config: String,
    pub corpus_digest: String,
    pub started_at: DateTime<Utc>,
    pub finished_at: DateTime<Utc>,
    pub stages: Vec<StageRecord>,
}

impl PipelineRun {
    pub fn reused(&self, stage: &str) -> Option<bool> {
        self.stages.iter().find(|s| s.stage == stage).map(|s| s.reused)
    }
}

fn hash_into(h: &mut Sha256, path: &Path, rel: &Path) -> Result<()> {
    if path.is_dir() {
        let mut entries: Vec<PathBuf> = std::fs::read_dir(path)
            .map_err(|e| Error::io(path, e))?
            .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(path, err)))
            .collect::<Result<_>>()?;
        entries.sort();
        for e in entries {
            let name = e.file_name().map(PathBuf::from).unwrap_or_default();
            hash_into(h, &e, &rel.join(name))?;
        }
    } else if path.is_file() {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        h.update(rel.to_string_lossy().as_bytes());
        h.update([0]);
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(&bytes);
    } else {
        h.update(rel.to_string_lossy().as_bytes());
        h.update(b"\0missing");
    }
    Ok(())
}

/// SHA-256 over a file or a directory tree (relative names and contents).
pub fn digest_path(path: &Path) -> Result<String> {
    let mut h = Sha256::new();
    hash_into(&mut h, path, Path::new(""))?;
    Ok(hex::encode(h.finalize()))
}

fn digest_all(parts: &[String]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.as_bytes());
        h.update([0]);
    }
    hex::encode(h.finalize())
}

fn digest_paths(paths: &[&Path]) -> Result<String> {
    let parts = paths.iter().map(|p| digest_path(p)).collect::<Result<Vec<_>>>()?;
    Ok(digest_all(&parts))
}

fn opt_digest(p: &Option<PathBuf>) -> Result<String> {
    match p {
        Some(p) => digest_path(p),
        None => Ok("-".into()),
    }
}

struct Plan {
    input: String,
    outputs: Vec<PathBuf>,
}

fn plan(cfg: &RunConfig, l: &Layout, stage: &str, state: &PipelineState) -> Result<Plan> {
    let upstream = |s: &str| state.stages.get(s).map(|d| d.output.clone()).unwrap_or_default();
    let (mut parts, outputs): (Vec<String>, Vec<PathBuf>) = match stage {
        "ingest" => (
            vec![digest_path(&cfg.corpus_root)?],
            vec![l.corpus(), l.ingest_warnings()],
        ),
        "extract" => (vec![upstream("ingest"), opt_digest(&cfg.tlds)?], vec![l.addresses()]),
        "classify" => (
            vec![
                upstream("ingest"),
                digest_path(&cfg.ground_truth)?,
                opt_digest(&cfg.stopwords)?,
                cfg.threshold.to_string(),
            ],
            vec![l.labels()],
        ),
        "filter" => (
            vec![
                upstream("extract"),
                upstream("classify"),
                opt_digest(&cfg.address_annotations)?,
            ],
            vec![l.illicit(), l.removed()],
        ),
        "fetch-tx" => {
            let source = match cfg.provider {
                ProviderMode::Fixtures => opt_digest(&cfg.ledger_fixtures)?,
                ProviderMode::Http => format!("http {}", cfg.base_url.as_deref().unwrap_or_default()),
            };
            (vec![upstream("filter"), source], vec![l.ledgers()])
        }
        "trace" => {
            let source = match cfg.search_provider {
                SearchMode::None => "none".to_string(),
                SearchMode::Fixtures => opt_digest(&cfg.search_fixtures)?,
                SearchMode::Http => format!("http {}", cfg.search_url.as_deref().unwrap_or_default()),
            };
            (
                vec![
                    upstream("filter"),
                    source,
                    opt_digest(&cfg.trace_annotations)?,
                    opt_digest(&cfg.surface_facts)?,
                    opt_digest(&cfg.explorer_domains)?,
                ],
                vec![l.hits(), l.surface(), l.search_failures()],
            )
        }
        "cluster" => (
            vec![
                upstream("extract"),
                upstream("classify"),
                upstream("filter"),
                upstream("fetch-tx"),
                upstream("trace"),
                cfg.public_threshold.to_string(),
                cfg.min_received.to_string(),
            ],
            vec![l.campaigns(), l.phase_trace(), l.campaign_graph(), l.cluster_report()],
        ),
        "report" => (
            vec![
                upstream("ingest"),
                upstream("cluster"),
                cfg.top_n.to_string(),
                cfg.vanity_prefix_len.to_string(),
            ],
            vec![l.tables(), l.graphml(), l.dot()],
        ),
        _ => unreachable!("unknown stage {stage}"),
    };
    parts.insert(0, stage.to_string());
    Ok(Plan {
        input: digest_all(&parts),
        outputs,
    })
}

fn explorer(cfg: &RunConfig) -> Box<dyn ExplorerAdapter> {
    let timeout = Duration::from_secs(cfg.timeout_secs);
    match cfg.provider {
        ProviderMode::Fixtures => Box::new(FixtureExplorer::new(cfg.ledger_fixtures.clone().unwrap_or_default())),
        ProviderMode::Http => Box::new(HttpExplorer::new(
            cfg.base_url.as_deref().unwrap_or_default(),
            cfg.rate_limit,
            timeout,
        )),
    }
}

fn searcher(cfg: &RunConfig) -> Option<Box<dyn SearchAdapter>> {
    let timeout = Duration::from_secs(cfg.timeout_secs);
    match cfg.search_provider {
        SearchMode::None => None,
        SearchMode::Fixtures => Some(Box::new(FixtureSearch::new(
            cfg.search_fixtures.clone().unwrap_or_default(),
        ))),
        SearchMode::Http => Some(Box::new(HttpSearch::new(
            cfg.search_url.as_deref().unwrap_or_default(),
            cfg.rate_limit,
            timeout,
        ))),
    }
}

fn retry(cfg: &RunConfig) -> RetryPolicy {
    RetryPolicy {
        max_retries: cfg.retries,
        ..RetryPolicy::default()
    }
}

pub fn cluster_config(cfg: &RunConfig) -> ClusterConfig {
    ClusterConfig {
        public_threshold: cfg.public_threshold,
        mix_participants: MIN_MIX_PARTICIPANTS,
        vanity_prefix: cfg.vanity_prefix_len,
    }
}

pub fn table_options(cfg: &RunConfig) -> TableOptions {
    TableOptions {
        top_n: cfg.top_n,
        min_received: cfg.min_received,
        vanity_prefix: cfg.vanity_prefix_len,
    }
}

fn execute(cfg: &RunConfig, l: &Layout, stage: &str) -> Result<()> {
    let exec = cfg.exec();
    match stage {
        "ingest" => {
            stages::ingest(&cfg.corpus_root, &l.corpus(), Some(&l.ingest_warnings()), exec)?;
        }
        "extract" => {
            let tlds = data::word_list_or(cfg.tlds.as_deref(), data::TLDS)?;
            stages::extract(&l.corpus(), &tlds, &l.addresses(), exec)?;
        }
        "classify" => {
            let ccfg = ClassifyConfig {
                threshold: cfg.threshold,
                stopwords: data::word_list_or(cfg.stopwords.as_deref(), data::STOPWORDS_EN)?,
            };
            stages::classify(&l.corpus(), &cfg.ground_truth, &ccfg, &l.labels(), exec)?;
        }
        "filter" => {
            stages::filter(
                &l.labels(),
                &l.addresses(),
                cfg.address_annotations.as_deref(),
                &l.illicit(),
                Some(&l.removed()),
            )?;
        }
        "fetch-tx" => {
            let provider = explorer(cfg);
            stages::fetch_tx(&l.illicit(), provider.as_ref(), &retry(cfg), &l.ledgers(), exec)?;
        }
        "trace" => {
            let provider = searcher(cfg);
            let domains = data::word_list_or(cfg.explorer_domains.as_deref(), data::EXPLORER_DOMAINS)?;
            let (hits, surface, failures) = (l.hits(), l.surface(), l.search_failures());
            stages::trace(
                &l.illicit(),
                provider.as_deref(),
                &domains,
                cfg.trace_annotations.as_deref(),
                cfg.surface_facts.as_deref(),
                &retry(cfg),
                &TraceOutputs {
                    hits: &hits,
                    surface: &surface,
                    failures: Some(&failures),
                },
                exec,
            )?;
        }
        "cluster" => {
            let (labels, illicit, ledgers, addresses, surface) =
                (l.labels(), l.illicit(), l.ledgers(), l.addresses(), l.surface());
            let (campaigns, trace, graph, report) =
                (l.campaigns(), l.phase_trace(), l.campaign_graph(), l.cluster_report());
            stages::cluster(
                &ClusterPaths {
                    labels: &labels,
                    illicit: &illicit,
                    ledgers: &ledgers,
                    addresses: &addresses,
                    surface: Some(&surface),
                },
                &cluster_config(cfg),
                cfg.min_received,
                &ClusterOutputs {
                    campaigns: &campaigns,
                    trace: &trace,
                    graph: Some(&graph),
                    report: Some(&report),
                },
                exec,
            )?;
        }
        "report" => {
            stages::report(l, &table_options(cfg))?;
        }
        _ => unreachable!("unknown stage {stage}"),
    }
    Ok(())
}

fn run_id(text: &str, at: DateTime<Utc>) -> String {
    let h = hex::encode(Sha256::digest(text.as_bytes()));
    format!("{}-{}", at.format("%Y%m%dT%H%M%SZ"), &h[..8])
}

/// Run every stage in order, reusing outputs whose recorded input and
/// output digests still match. `config_text` is stored verbatim in
/// `run.json`.
pub fn run_pipeline(cfg: &RunConfig, config_text: &str) -> Result<PipelineRun> {
    let l = Layout::new(&cfg.output_dir);
    std::fs::create_dir_all(&l.dir).map_err(|e| Error::io(&l.dir, e))?;
    let mut state = PipelineState::load(&l.state());
    let started_at = Utc::now();
    let mut records = Vec::new();
    let mut corpus_digest = String::new();

    for stage in STAGES {
        let t0 = Utc::now();
        let plan = plan(cfg, &l, stage, &state)?;
        if stage == "ingest" {
            corpus_digest = plan.input.clone();
        }
        let outputs: Vec<&Path> = plan.outputs.iter().map(PathBuf::as_path).collect();
        let previous = state.stages.get(stage).cloned();
        let reusable = match &previous {
            Some(d) if d.input == plan.input => digest_paths(&outputs)? == d.output,
            _ => false,
        };
        let output = if reusable {
            log::info!("{stage}: up to date");
            previous.map(|d| d.output).unwrap_or_default()
        } else {
            log::info!("{stage}: running");
            state.stages.remove(stage);
            execute(cfg, &l, stage).map_err(|e| Error::Stage {
                stage,
                source: Box::new(e),
            })?;
            digest_paths(&outputs)?
        };
        state.stages.insert(
            stage.to_string(),
            StageDigest {
                input: plan.input.clone(),
                output: output.clone(),
            },
        );
        crate::jsonl::write_json(&l.state(), &state)?;
        records.push(StageRecord {
            stage: stage.to_string(),
            reused: reusable,
            input_digest: plan.input,
            output_digest: output,
            started_at: t0,
            finished_at: Utc::now(),
        });
    }

    let run = PipelineRun {
        run_id: run_id(config_text, started_at),
        config: config_text.to_string(),
        corpus_digest,
        started_at,
        finished_at: Utc::now(),
        stages: records,
    };
    crate::jsonl::write_json(&l.run(), &run)?;
    Ok(run)
}
