//! Individual pipeline stages as file-to-file steps. The `run` pipeline
//! and the per-stage CLI subcommands share these.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::graph::{campaign_graph, to_dot, to_graphml, CampaignGraph};
use super::tables::{emit_tables, write_tables, RunArtifacts, TableOptions, Tables};
use crate::chain::{
    estimate_income, fetch_all, filter_illicit_addresses, read_annotations, read_ledger_dir, write_ledger_dir,
    ExplorerAdapter, FilterReport, IllicitAddressSet, RetryPolicy,
};
use crate::classify::{classify_corpus, read_labels, write_labels, ClassifyConfig, GroundTruth};
use crate::cluster::{
    cluster_entities, site_emails, write_campaigns, BuildReport, Campaign, ClusterConfig, ClusterInput, PhaseTrace,
};
use crate::corpus::{ingest_snapshot, Corpus, IngestReport, OnionDomain};
use crate::error::{Error, Result};
use crate::extract::{extract_corpus, read_records, write_records, AddressKind, BtcAddress};
use crate::jsonl;
use crate::par::Exec;
use crate::trace::{
    import_annotations, read_annotation_rows, read_surface, search_all, surface_links, write_hits, write_surface,
    SearchAdapter, SurfaceLink,
};

/// File names inside a pipeline output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub dir: PathBuf,
}

impl Layout {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Layout { dir: dir.into() }
    }

    fn p(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn corpus(&self) -> PathBuf {
        self.p("corpus.jsonl")
    }
    pub fn ingest_warnings(&self) -> PathBuf {
        self.p("ingest_warnings.jsonl")
    }
    pub fn addresses(&self) -> PathBuf {
        self.p("addresses.jsonl")
    }
    pub fn labels(&self) -> PathBuf {
        self.p("labels.jsonl")
    }
    pub fn illicit(&self) -> PathBuf {
        self.p("illicit.jsonl")
    }
    pub fn removed(&self) -> PathBuf {
        self.p("removed.jsonl")
    }
    pub fn ledgers(&self) -> PathBuf {
        self.p("ledgers")
    }
    pub fn hits(&self) -> PathBuf {
        self.p("hits.jsonl")
    }
    pub fn surface(&self) -> PathBuf {
        self.p("surface.jsonl")
    }
    pub fn search_failures(&self) -> PathBuf {
        self.p("search_failures.jsonl")
    }
    pub fn campaigns(&self) -> PathBuf {
        self.p("campaigns.json")
    }
    pub fn phase_trace(&self) -> PathBuf {
        self.p("phase_trace.json")
    }
    pub fn campaign_graph(&self) -> PathBuf {
        self.p("campaign_graph.json")
    }
    pub fn cluster_report(&self) -> PathBuf {
        self.p("cluster_report.json")
    }
    pub fn tables(&self) -> PathBuf {
        self.p("tables")
    }
    pub fn graphml(&self) -> PathBuf {
        self.p("campaigns.graphml")
    }
    pub fn dot(&self) -> PathBuf {
        self.p("campaigns.dot")
    }
    pub fn state(&self) -> PathBuf {
        self.p("state.json")
    }
    pub fn run(&self) -> PathBuf {
        self.p("run.json")
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn ingest(root: &Path, out: &Path, warnings_out: Option<&Path>, exec: Exec) -> Result<(Corpus, IngestReport)> {
    let (corpus, report) = ingest_snapshot(root, exec)?;
    for w in &report.warnings {
        log::warn!("ingest: {}", serde_json::to_string(w).unwrap_or_default());
    }
    corpus.write_jsonl(out)?;
    if let Some(p) = warnings_out {
        jsonl::write(p, &report.warnings)?;
    }
    Ok((corpus, report))
}

pub fn read_corpus(path: &Path) -> Result<Corpus> {
    let (corpus, warnings) = Corpus::read_jsonl(path)?;
    for w in warnings {
        log::warn!("{}: {}", path.display(), serde_json::to_string(&w).unwrap_or_default());
    }
    Ok(corpus)
}

/// Returns the number of records written.
pub fn extract(corpus: &Path, tlds: &BTreeSet<String>, out: &Path, exec: Exec) -> Result<usize> {
    let corpus = read_corpus(corpus)?;
    let records = extract_corpus(&corpus, tlds, exec);
    write_records(out, &records)?;
    Ok(records.len())
}

/// Returns ground-truth warnings.
pub fn classify(
    corpus: &Path,
    ground_truth: &Path,
    cfg: &ClassifyConfig,
    out: &Path,
    exec: Exec,
) -> Result<Vec<String>> {
    let corpus = read_corpus(corpus)?;
    let (gt, warnings) = GroundTruth::load(ground_truth, &corpus)?;
    for w in &warnings {
        log::warn!("{w}");
    }
    let labels = classify_corpus(&corpus, &gt, cfg, exec)?;
    write_labels(out, &labels)?;
    Ok(warnings)
}

pub fn filter(
    labels: &Path,
    addresses: &Path,
    annotations: Option<&Path>,
    out: &Path,
    removed_out: Option<&Path>,
) -> Result<FilterReport> {
    let labels = read_labels(labels)?;
    let records = read_records(addresses)?;
    let annotations = match annotations {
        Some(p) => read_annotations(p)?,
        None => Vec::new(),
    };
    let (set, report) = filter_illicit_addresses(&labels, &records, &annotations);
    set.write(out)?;
    if let Some(p) = removed_out {
        jsonl::write(p, &report.removed)?;
    }
    Ok(report)
}

#[derive(Deserialize)]
struct AnyAddressLine {
    #[serde(default)]
    address: Option<String>,
    #[serde(default)]
    kind: Option<AddressKind>,
    #[serde(default)]
    value: Option<String>,
    #[serde(default)]
    valid: Option<bool>,
}

/// Bitcoin addresses from either an illicit-set file (`address` field) or
/// an extraction file (valid `btc` records), deduplicated and sorted.
pub fn load_btc_addresses(path: &Path) -> Result<Vec<BtcAddress>> {
    let lines: Vec<AnyAddressLine> = jsonl::read(path)?;
    let mut out = BTreeSet::new();
    for l in lines {
        let text = match (l.address, l.kind, l.value, l.valid) {
            (Some(a), ..) => a,
            (None, Some(AddressKind::Btc), Some(v), Some(true)) => v,
            _ => continue,
        };
        match BtcAddress::parse(&text) {
            Ok(a) => {
                out.insert(a);
            }
            Err(e) => log::warn!("{}: skipping {text}: {e}", path.display()),
        }
    }
    Ok(out.into_iter().collect())
}

/// Returns the number of ledgers and failures.
pub fn fetch_tx(
    addresses: &Path,
    provider: &dyn ExplorerAdapter,
    retry: &RetryPolicy,
    out_dir: &Path,
    exec: Exec,
) -> Result<(usize, usize)> {
    let addrs = load_btc_addresses(addresses)?;
    let (ledgers, failures) = fetch_all(&addrs, provider, retry, exec);
    if out_dir.exists() {
        std::fs::remove_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    }
    write_ledger_dir(out_dir, &ledgers, &failures)?;
    Ok((ledgers.len(), failures.len()))
}

pub struct TraceOutputs<'a> {
    pub hits: &'a Path,
    pub surface: &'a Path,
    pub failures: Option<&'a Path>,
}

/// Search every address, apply analyst annotations and write hits and the
/// joined surface facts. Without a provider, only `extra_surface` facts
/// are passed through.
#[allow(clippy::too_many_arguments)]
pub fn trace(
    addresses: &Path,
    provider: Option<&dyn SearchAdapter>,
    explorer_domains: &BTreeSet<String>,
    annotations: Option<&Path>,
    extra_surface: Option<&Path>,
    retry: &RetryPolicy,
    out: &TraceOutputs<'_>,
    exec: Exec,
) -> Result<Vec<String>> {
    let addrs = load_btc_addresses(addresses)?;
    let (hits, failures) = match provider {
        Some(p) => search_all(&addrs, p, explorer_domains, retry, exec),
        None => (Vec::new(), Vec::new()),
    };
    let (rows, mut warnings) = match annotations {
        Some(p) => read_annotation_rows(p)?,
        None => (Vec::new(), Vec::new()),
    };
    let annotated = import_annotations(hits, &rows);
    warnings.extend(annotated.warnings);
    for w in &warnings {
        log::warn!("trace: {w}");
    }
    let mut links = surface_links(&annotated.hits, &annotated.facts);
    if let Some(p) = extra_surface {
        links.extend(read_surface(p)?);
        links.sort_by(|a, b| a.url.cmp(&b.url));
    }
    write_hits(out.hits, &annotated.hits)?;
    write_surface(out.surface, &links)?;
    if let Some(p) = out.failures {
        jsonl::write(p, &failures)?;
    }
    Ok(warnings)
}

#[derive(Debug, Clone, Copy)]
pub struct ClusterPaths<'a> {
    pub labels: &'a Path,
    pub illicit: &'a Path,
    pub ledgers: &'a Path,
    pub addresses: &'a Path,
    pub surface: Option<&'a Path>,
}

#[derive(Debug, Clone, Copy)]
pub struct ClusterOutputs<'a> {
    pub campaigns: &'a Path,
    pub trace: &'a Path,
    pub graph: Option<&'a Path>,
    pub report: Option<&'a Path>,
}

pub fn cluster(
    input: &ClusterPaths<'_>,
    cfg: &ClusterConfig,
    min_received: u64,
    out: &ClusterOutputs<'_>,
    exec: Exec,
) -> Result<Vec<Campaign>> {
    let labels = read_labels(input.labels)?;
    let illicit = IllicitAddressSet::read(input.illicit)?;
    let ledgers = read_ledger_dir(input.ledgers)?;
    let emails = site_emails(&read_records(input.addresses)?);
    let surface: Vec<SurfaceLink> = match input.surface {
        Some(p) => read_surface(p)?,
        None => Vec::new(),
    };
    let ci = ClusterInput {
        labels: &labels,
        illicit: &illicit,
        ledgers: &ledgers,
        emails: &emails,
        surface: &surface,
    };
    let mut c = cluster_entities(&ci, cfg, exec);
    let income = estimate_income(&illicit, &ledgers, min_received, exec);
    let campaigns = crate::cluster::campaign_stats(&mut c.partition, &c.graph, &labels, &income);
    write_campaigns(out.campaigns, &campaigns)?;
    jsonl::write_json(out.trace, &c.trace)?;
    if let Some(p) = out.graph {
        jsonl::write_json(p, &campaign_graph(&campaigns, &c.graph, &labels, &income))?;
    }
    if let Some(p) = out.report {
        jsonl::write_json(p, &c.report)?;
    }
    Ok(campaigns)
}

fn load_if<T>(path: &Path, f: impl FnOnce(&Path) -> Result<T>) -> Result<Option<T>> {
    if path.exists() {
        f(path).map(Some)
    } else {
        Ok(None)
    }
}

/// Read whatever stage outputs exist in a pipeline directory.
pub fn load_artifacts(layout: &Layout) -> Result<RunArtifacts> {
    let site_pages = load_if(&layout.corpus(), |p| {
        let corpus = read_corpus(p)?;
        let mut m: BTreeMap<OnionDomain, usize> = BTreeMap::new();
        for page in corpus.pages() {
            *m.entry(page.domain.clone()).or_default() += 1;
        }
        Ok(m)
    })?;
    Ok(RunArtifacts {
        site_pages,
        records: load_if(&layout.addresses(), read_records)?,
        labels: load_if(&layout.labels(), read_labels)?,
        illicit: load_if(&layout.illicit(), IllicitAddressSet::read)?,
        ledgers: load_if(&layout.ledgers(), read_ledger_dir)?,
        trace: load_if(&layout.phase_trace(), jsonl::read_json::<Vec<PhaseTrace>>)?,
        campaigns: load_if(&layout.campaigns(), crate::cluster::read_campaigns)?,
    })
}

/// Build tables and graph exports from a pipeline directory.
pub fn report(layout: &Layout, opts: &TableOptions) -> Result<Tables> {
    let art = load_artifacts(layout)?;
    let tables = emit_tables(&art, opts)?;
    write_tables(&layout.tables(), &tables)?;
    let graph: CampaignGraph = match load_if(&layout.campaign_graph(), jsonl::read_json)? {
        Some(g) => g,
        None => return Err(Error::StageNotRun("cluster")),
    };
    write_text(&layout.graphml(), &to_graphml(&graph))?;
    write_text(&layout.dot(), &to_dot(&graph))?;
    Ok(tables)
}

/// Cluster build diagnostics as written by the cluster stage.
pub fn read_cluster_report(path: &Path) -> Result<BuildReport> {
    jsonl::read_json(path)
}
