//! Campaign clustering.
//!
//! Sites, illicit addresses, emails and surface identity facts form an
//! [`EntityGraph`]. Five phases then merge a single union-find partition,
//! each applying one family of edges: shared sites, common inputs,
//! internal transactions, shared emails and shared hosting identity.
//! Clusters holding at least one Bitcoin address become campaigns.

mod graph;
mod mixing;
mod unionfind;
mod vanity;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::chain::{IncomeReport, Satoshi};
use crate::classify::{Category, SiteLabel};
use crate::corpus::OnionDomain;
use crate::error::Result;
use crate::extract::BtcAddress;
use crate::par::Exec;

pub use graph::{
    build_graph, site_emails, BuildReport, ClusterConfig, ClusterInput, Edge, EdgeKind, EntityGraph, GraphBuilder,
    NodeId, NodeKind, PublicIdentity, SiteEmail,
};
pub use mixing::{detect_mixing, detect_mixing_with, MIN_MIX_PARTICIPANTS};
pub use unionfind::UnionFind;
pub use vanity::{vanity_groups, VanityGroup, DEFAULT_PREFIX_LEN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    SharedSite,
    CommonInput,
    InternalTx,
    Email,
    Identity,
}

impl Phase {
    pub const ALL: [Phase; 5] = [
        Phase::SharedSite,
        Phase::CommonInput,
        Phase::InternalTx,
        Phase::Email,
        Phase::Identity,
    ];

    pub fn edge_kinds(self) -> &'static [EdgeKind] {
        match self {
            Phase::SharedSite => &[EdgeKind::SiteHostsAddr],
            Phase::CommonInput => &[EdgeKind::CommonInput],
            Phase::InternalTx => &[EdgeKind::InternalTx],
            Phase::Email => &[EdgeKind::SiteListsEmail],
            Phase::Identity => &[
                EdgeKind::UrlResolvesIp,
                EdgeKind::UrlRegisteredBy,
                EdgeKind::AddrFoundAtUrl,
            ],
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Phase::SharedSite => "Bitcoin address clustering I (shared sites)",
            Phase::CommonInput => "Bitcoin address clustering II (common inputs)",
            Phase::InternalTx => "Bitcoin address clustering III (internal transactions)",
            Phase::Email => "Email address clustering",
            Phase::Identity => "IP and registrant clustering",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::SharedSite => "shared-site",
            Phase::CommonInput => "common-input",
            Phase::InternalTx => "internal-tx",
            Phase::Email => "email",
            Phase::Identity => "identity",
        }
    }
}

/// Partition of the graph's nodes. Sets only ever merge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    uf: UnionFind,
}

impl Partition {
    /// Every node in its own set.
    pub fn new(graph: &EntityGraph) -> Self {
        Partition {
            uf: UnionFind::new(graph.nodes().len()),
        }
    }

    /// Union along every edge of the given kinds; returns effective merges.
    pub fn apply(&mut self, graph: &EntityGraph, kinds: &[EdgeKind]) -> usize {
        graph
            .edges()
            .iter()
            .filter(|e| kinds.contains(&e.kind))
            .map(|e| self.uf.union(e.a, e.b) as usize)
            .sum()
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        self.uf.union(a, b)
    }

    /// Index of the lexicographically smallest node id in `x`'s set.
    pub fn representative(&mut self, x: usize) -> usize {
        self.uf.representative(x)
    }

    pub fn same(&mut self, a: usize, b: usize) -> bool {
        self.uf.same(a, b)
    }

    /// All sets ordered by representative.
    pub fn components(&mut self) -> Vec<Vec<usize>> {
        self.uf.sets()
    }
}

pub fn phase_shared_site(p: &mut Partition, g: &EntityGraph) -> usize {
    p.apply(g, Phase::SharedSite.edge_kinds())
}

pub fn phase_common_input(p: &mut Partition, g: &EntityGraph) -> usize {
    p.apply(g, Phase::CommonInput.edge_kinds())
}

pub fn phase_internal_tx(p: &mut Partition, g: &EntityGraph) -> usize {
    p.apply(g, Phase::InternalTx.edge_kinds())
}

pub fn phase_email(p: &mut Partition, g: &EntityGraph) -> usize {
    p.apply(g, Phase::Email.edge_kinds())
}

pub fn phase_identity(p: &mut Partition, g: &EntityGraph) -> usize {
    p.apply(g, Phase::Identity.edge_kinds())
}

pub fn run_phase(phase: Phase, p: &mut Partition, g: &EntityGraph) -> usize {
    match phase {
        Phase::SharedSite => phase_shared_site(p, g),
        Phase::CommonInput => phase_common_input(p, g),
        Phase::InternalTx => phase_internal_tx(p, g),
        Phase::Email => phase_email(p, g),
        Phase::Identity => phase_identity(p, g),
    }
}

fn count_kinds(g: &EntityGraph, members: &[usize]) -> BTreeMap<NodeKind, usize> {
    let mut m = BTreeMap::new();
    for &i in members {
        *m.entry(g.node(i).kind()).or_default() += 1;
    }
    m
}

/// A component with at least two sites or at least two addresses.
pub fn is_cluster(g: &EntityGraph, members: &[usize]) -> bool {
    let k = count_kinds(g, members);
    k.get(&NodeKind::Site).copied().unwrap_or(0) >= 2 || k.get(&NodeKind::Btc).copied().unwrap_or(0) >= 2
}

/// Partition snapshot after one phase.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseTrace {
    pub phase: Phase,
    pub merges: usize,
    /// All clusters, including those without an address.
    pub clusters: usize,
    pub clusters_with_btc: usize,
    /// Sites inside any cluster.
    pub clustered_sites: usize,
    /// Sites inside clusters that hold an address.
    pub campaign_sites: usize,
    pub btc_addresses: usize,
    pub emails: usize,
    pub ips: usize,
    pub registrants: usize,
}

pub fn phase_trace(phase: Phase, merges: usize, p: &mut Partition, g: &EntityGraph) -> PhaseTrace {
    let mut t = PhaseTrace {
        phase,
        merges,
        clusters: 0,
        clusters_with_btc: 0,
        clustered_sites: 0,
        campaign_sites: 0,
        btc_addresses: 0,
        emails: 0,
        ips: 0,
        registrants: 0,
    };
    for c in p.components() {
        if !is_cluster(g, &c) {
            continue;
        }
        let k = count_kinds(g, &c);
        let n = |kind| k.get(&kind).copied().unwrap_or(0);
        t.clusters += 1;
        t.clustered_sites += n(NodeKind::Site);
        if n(NodeKind::Btc) > 0 {
            t.clusters_with_btc += 1;
            t.campaign_sites += n(NodeKind::Site);
            t.btc_addresses += n(NodeKind::Btc);
            t.emails += n(NodeKind::Email);
            t.ips += n(NodeKind::Ip);
            t.registrants += n(NodeKind::Registrant);
        }
    }
    t
}

/// Run the five phases in order, recording a trace after each.
pub fn run_phases(g: &EntityGraph) -> (Partition, Vec<PhaseTrace>) {
    let mut p = Partition::new(g);
    let mut trace = Vec::with_capacity(Phase::ALL.len());
    for phase in Phase::ALL {
        let merges = run_phase(phase, &mut p, g);
        trace.push(phase_trace(phase, merges, &mut p, g));
    }
    (p, trace)
}

#[derive(Debug, Clone)]
pub struct Clustering {
    pub graph: EntityGraph,
    pub partition: Partition,
    pub trace: Vec<PhaseTrace>,
    pub report: BuildReport,
}

pub fn cluster_entities(input: &ClusterInput<'_>, cfg: &ClusterConfig, exec: Exec) -> Clustering {
    let (graph, report) = build_graph(input, cfg, exec);
    let (partition, trace) = run_phases(&graph);
    Clustering {
        graph,
        partition,
        trace,
        report,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Campaign {
    /// Rank by income, starting at 1.
    pub id: usize,
    pub representative: NodeId,
    pub sites: BTreeSet<OnionDomain>,
    pub btc_addresses: BTreeSet<BtcAddress>,
    pub emails: BTreeSet<String>,
    pub ips: BTreeSet<String>,
    pub registrants: BTreeSet<String>,
    pub urls: BTreeSet<String>,
    pub categories: BTreeSet<Category>,
    /// Non-internal income of the member addresses.
    pub received: Satoshi,
    /// Non-internal transactions paying member addresses.
    pub incoming_txs: usize,
}

/// Clusters with at least one address, ordered by income (descending),
/// then site count (descending), then representative id.
pub fn campaign_stats(
    p: &mut Partition,
    g: &EntityGraph,
    labels: &[SiteLabel],
    income: &IncomeReport,
) -> Vec<Campaign> {
    let category: BTreeMap<&str, Category> = labels.iter().map(|l| (l.domain.as_str(), l.category)).collect();
    let per_addr: BTreeMap<&str, (Satoshi, usize)> = income
        .per_address
        .iter()
        .map(|a| (a.address.as_str(), (a.income, a.incoming_txs)))
        .collect();
    let mut out = Vec::new();
    for c in p.components() {
        if !is_cluster(g, &c) {
            continue;
        }
        let mut cam = Campaign {
            id: 0,
            representative: g.node(c[0]).clone(),
            sites: BTreeSet::new(),
            btc_addresses: BTreeSet::new(),
            emails: BTreeSet::new(),
            ips: BTreeSet::new(),
            registrants: BTreeSet::new(),
            urls: BTreeSet::new(),
            categories: BTreeSet::new(),
            received: 0,
            incoming_txs: 0,
        };
        for &i in &c {
            let n = g.node(i);
            let v = n.value().to_string();
            match n.kind() {
                NodeKind::Site => {
                    if let Some(c) = category.get(v.as_str()).filter(|c| c.is_illicit()) {
                        cam.categories.insert(*c);
                    }
                    cam.sites
                        .insert(OnionDomain::parse(&v).expect("site node holds an onion domain"));
                }
                NodeKind::Btc => {
                    let (s, t) = per_addr.get(v.as_str()).copied().unwrap_or_default();
                    cam.received += s;
                    cam.incoming_txs += t;
                    cam.btc_addresses
                        .insert(BtcAddress::parse(&v).expect("btc node holds a valid address"));
                }
                NodeKind::Email => {
                    cam.emails.insert(v);
                }
                NodeKind::Ip => {
                    cam.ips.insert(v);
                }
                NodeKind::Registrant => {
                    cam.registrants.insert(v);
                }
                NodeKind::Url => {
                    cam.urls.insert(v);
                }
            }
        }
        if !cam.btc_addresses.is_empty() {
            out.push(cam);
        }
    }
    out.sort_by(|a, b| {
        b.received
            .cmp(&a.received)
            .then(b.sites.len().cmp(&a.sites.len()))
            .then_with(|| a.representative.cmp(&b.representative))
    });
    for (i, c) in out.iter_mut().enumerate() {
        c.id = i + 1;
    }
    out
}

pub fn write_campaigns(path: &Path, campaigns: &[Campaign]) -> Result<()> {
    crate::jsonl::write_json(path, campaigns)
}

pub fn read_campaigns(path: &Path) -> Result<Vec<Campaign>> {
    crate::jsonl::read_json(path)
}
