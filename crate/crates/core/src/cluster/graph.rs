use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::mixing::detect_mixing_with;
use crate::chain::{is_internal, AddressLedger, IllicitAddressSet, Transaction, Txid};
use crate::classify::SiteLabel;
use crate::corpus::OnionDomain;
use crate::extract::{AddressKind, AddressRecord};
use crate::par::Exec;
use crate::trace::SurfaceLink;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeKind {
    Site,
    Btc,
    Email,
    Ip,
    Registrant,
    Url,
}

impl NodeKind {
    pub const ALL: [NodeKind; 6] = [
        NodeKind::Site,
        NodeKind::Btc,
        NodeKind::Email,
        NodeKind::Ip,
        NodeKind::Registrant,
        NodeKind::Url,
    ];

    pub fn prefix(self) -> &'static str {
        match self {
            NodeKind::Site => "site",
            NodeKind::Btc => "btc",
            NodeKind::Email => "email",
            NodeKind::Ip => "ip",
            NodeKind::Registrant => "registrant",
            NodeKind::Url => "url",
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.prefix())
    }
}

/// Typed node id such as `site:abc...onion` or `btc:1A1z...`. Ids order
/// lexicographically as strings.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct NodeId(String);

impl NodeId {
    pub fn new(kind: NodeKind, value: &str) -> Self {
        NodeId(format!("{}:{}", kind.prefix(), value))
    }

    pub fn site(d: &OnionDomain) -> Self {
        NodeId::new(NodeKind::Site, d.as_str())
    }

    pub fn btc(a: &str) -> Self {
        NodeId::new(NodeKind::Btc, a)
    }

    /// Emails compare case-insensitively.
    pub fn email(e: &str) -> Self {
        NodeId::new(NodeKind::Email, &e.to_lowercase())
    }

    /// Registrant names are trimmed and compared case-insensitively.
    pub fn registrant(r: &str) -> Self {
        NodeId::new(NodeKind::Registrant, &r.trim().to_lowercase())
    }

    pub fn kind(&self) -> NodeKind {
        let p = self.0.split(':').next().unwrap_or_default();
        NodeKind::ALL
            .into_iter()
            .find(|k| k.prefix() == p)
            .expect("validated prefix")
    }

    pub fn value(&self) -> &str {
        self.0.split_once(':').map(|(_, v)| v).unwrap_or_default()
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for NodeId {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        match s.split_once(':') {
            Some((p, _)) if NodeKind::ALL.iter().any(|k| k.prefix() == p) => Ok(NodeId(s)),
            _ => Err(format!("node id without a known type prefix: {s:?}")),
        }
    }
}

impl From<NodeId> for String {
    fn from(n: NodeId) -> String {
        n.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeKind {
    SiteHostsAddr,
    CommonInput,
    InternalTx,
    SiteListsEmail,
    UrlResolvesIp,
    UrlRegisteredBy,
    AddrFoundAtUrl,
}

impl EdgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::SiteHostsAddr => "site-hosts-addr",
            EdgeKind::CommonInput => "common-input",
            EdgeKind::InternalTx => "internal-tx",
            EdgeKind::SiteListsEmail => "site-lists-email",
            EdgeKind::UrlResolvesIp => "url-resolves-ip",
            EdgeKind::UrlRegisteredBy => "url-registered-by",
            EdgeKind::AddrFoundAtUrl => "addr-found-at-url",
        }
    }
}

/// Edge between node indices with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub kind: EdgeKind,
    pub a: usize,
    pub b: usize,
}

/// Typed entity graph. Nodes are sorted by id, so node index order is id
/// order; edges are deduplicated, free of self-loops, and sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EntityGraph {
    nodes: Vec<NodeId>,
    edges: Vec<Edge>,
    index: HashMap<NodeId, usize>,
}

impl EntityGraph {
    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node(&self, i: usize) -> &NodeId {
        &self.nodes[i]
    }

    pub fn index_of(&self, id: &NodeId) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn edges_of(&self, kind: EdgeKind) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.kind == kind)
    }
}

#[derive(Debug, Clone, Default)]
pub struct GraphBuilder {
    nodes: BTreeSet<NodeId>,
    edges: BTreeSet<(EdgeKind, NodeId, NodeId)>,
}

impl GraphBuilder {
    pub fn add_node(&mut self, id: NodeId) {
        self.nodes.insert(id);
    }

    /// Self-loops are ignored.
    pub fn add_edge(&mut self, kind: EdgeKind, x: NodeId, y: NodeId) {
        if x == y {
            return;
        }
        let (a, b) = if x < y { (x, y) } else { (y, x) };
        self.nodes.insert(a.clone());
        self.nodes.insert(b.clone());
        self.edges.insert((kind, a, b));
    }

    pub fn build(self) -> EntityGraph {
        let nodes: Vec<NodeId> = self.nodes.into_iter().collect();
        let index: HashMap<NodeId, usize> = nodes.iter().cloned().enumerate().map(|(i, n)| (n, i)).collect();
        let mut edges: Vec<Edge> = self
            .edges
            .into_iter()
            .map(|(kind, a, b)| Edge {
                kind,
                a: index[&a],
                b: index[&b],
            })
            .collect();
        edges.sort();
        EntityGraph { nodes, edges, index }
    }
}

/// A site's contact email.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SiteEmail {
    pub domain: OnionDomain,
    pub email: String,
}

/// Valid email records, one per (site, lowercase address).
pub fn site_emails(records: &[AddressRecord]) -> Vec<SiteEmail> {
    let set: BTreeSet<SiteEmail> = records
        .iter()
        .filter(|r| r.kind == AddressKind::Email && r.valid)
        .map(|r| SiteEmail {
            domain: r.domain.clone(),
            email: r.value.to_lowercase(),
        })
        .collect();
    set.into_iter().collect()
}

/// Everything the clustering phases consume.
#[derive(Debug, Clone, Copy)]
pub struct ClusterInput<'a> {
    pub labels: &'a [SiteLabel],
    pub illicit: &'a IllicitAddressSet,
    pub ledgers: &'a [AddressLedger],
    pub emails: &'a [SiteEmail],
    pub surface: &'a [SurfaceLink],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterConfig {
    /// IPs or registrants seen on more distinct hosts than this are public.
    pub public_threshold: usize,
    pub mix_participants: usize,
    pub vanity_prefix: usize,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig {
            public_threshold: 50,
            mix_participants: super::mixing::MIN_MIX_PARTICIPANTS,
            vanity_prefix: super::vanity::DEFAULT_PREFIX_LEN,
        }
    }
}

/// An IP or registrant left out of the identity phase; listed for review.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicIdentity {
    pub node: NodeId,
    pub hosts: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildReport {
    /// Transactions matching the mixing pattern; they contribute no edges.
    pub mixing_txs: Vec<Txid>,
    pub public_identities: Vec<PublicIdentity>,
}

fn host_of(url: &str) -> String {
    url::Url::parse(url)
        .ok()
        .and_then(|u| u.host_str().map(str::to_ascii_lowercase))
        .unwrap_or_else(|| url.to_string())
}

fn tx_edges(tx: &Transaction, members: &BTreeSet<String>, mix: usize) -> Result<Vec<(EdgeKind, NodeId, NodeId)>, Txid> {
    if detect_mixing_with(tx, mix) {
        return Err(tx.txid.clone());
    }
    let ins: BTreeSet<&str> = tx
        .inputs
        .iter()
        .map(|i| i.address.as_str())
        .filter(|a| members.contains(*a))
        .collect();
    let mut out = Vec::new();
    // a chain over the sorted inputs connects them all
    for w in ins.iter().collect::<Vec<_>>().windows(2) {
        out.push((EdgeKind::CommonInput, NodeId::btc(w[0]), NodeId::btc(w[1])));
    }
    if is_internal(tx, members) {
        let outs: BTreeSet<&str> = tx
            .outputs
            .iter()
            .map(|o| o.address.as_str())
            .filter(|a| members.contains(*a))
            .collect();
        for i in &ins {
            for o in &outs {
                out.push((EdgeKind::InternalTx, NodeId::btc(i), NodeId::btc(o)));
            }
        }
    }
    Ok(out)
}

/// Assemble the entity graph.
///
/// Only illicit addresses become address nodes; transactions matching the
/// mixing pattern contribute nothing; identity anchors linked to more than
/// `public_threshold` distinct hosts are dropped.
pub fn build_graph(input: &ClusterInput<'_>, cfg: &ClusterConfig, exec: Exec) -> (EntityGraph, BuildReport) {
    let mut g = GraphBuilder::default();
    for l in input.labels {
        if l.category.is_illicit() {
            g.add_node(NodeId::site(&l.domain));
        }
    }
    for (addr, entry) in input.illicit.iter() {
        g.add_node(NodeId::btc(addr.as_str()));
        for s in &entry.sites {
            g.add_edge(EdgeKind::SiteHostsAddr, NodeId::site(s), NodeId::btc(addr.as_str()));
        }
    }

    let members = input.illicit.address_strings();
    let mut txs: BTreeMap<&Txid, &Transaction> = BTreeMap::new();
    for l in input.ledgers {
        for t in &l.transactions {
            txs.entry(&t.txid).or_insert(t);
        }
    }
    let txs: Vec<&Transaction> = txs.into_values().collect();
    let mut report = BuildReport::default();
    for r in exec.map(&txs, |t| tx_edges(t, &members, cfg.mix_participants)) {
        match r {
            Ok(edges) => {
                for (k, a, b) in edges {
                    g.add_edge(k, a, b);
                }
            }
            Err(txid) => report.mixing_txs.push(txid),
        }
    }

    for e in input.emails {
        g.add_edge(
            EdgeKind::SiteListsEmail,
            NodeId::site(&e.domain),
            NodeId::email(&e.email),
        );
    }

    let mut hosts: BTreeMap<NodeId, BTreeSet<String>> = BTreeMap::new();
    for link in input.surface {
        let host = host_of(&link.url);
        if let Some(ip) = link.ip {
            hosts
                .entry(NodeId::new(NodeKind::Ip, &ip.to_string()))
                .or_default()
                .insert(host.clone());
        }
        if let Some(r) = link.registrant.as_deref().filter(|r| !r.trim().is_empty()) {
            hosts.entry(NodeId::registrant(r)).or_default().insert(host);
        }
    }
    let public: BTreeSet<&NodeId> = hosts
        .iter()
        .filter(|(_, h)| h.len() > cfg.public_threshold)
        .map(|(n, _)| n)
        .collect();
    report.public_identities = public
        .iter()
        .map(|n| PublicIdentity {
            node: (*n).clone(),
            hosts: hosts[*n].len(),
        })
        .collect();

    for link in input.surface {
        let addrs: Vec<&str> = link
            .addresses
            .iter()
            .map(|a| a.as_str())
            .filter(|a| members.contains(*a))
            .collect();
        if addrs.is_empty() {
            continue;
        }
        let mut anchors = Vec::new();
        if let Some(ip) = link.ip {
            anchors.push((EdgeKind::UrlResolvesIp, NodeId::new(NodeKind::Ip, &ip.to_string())));
        }
        if let Some(r) = link.registrant.as_deref().filter(|r| !r.trim().is_empty()) {
            anchors.push((EdgeKind::UrlRegisteredBy, NodeId::registrant(r)));
        }
        anchors.retain(|(_, n)| !public.contains(n));
        if anchors.is_empty() {
            continue;
        }
        let url = NodeId::new(NodeKind::Url, &link.url);
        for (k, n) in anchors {
            g.add_edge(k, url.clone(), n);
        }
        for a in addrs {
            g.add_edge(EdgeKind::AddrFoundAtUrl, url.clone(), NodeId::btc(a));
        }
    }
    (g.build(), report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_ids() {
        let n = NodeId::registrant("  ACME Hosting ");
        assert_eq!(n.as_str(), "registrant:acme hosting");
        assert_eq!(n.kind(), NodeKind::Registrant);
        assert_eq!(n.value(), "acme hosting");
        assert_eq!(
            NodeId::new(NodeKind::Url, "https://x.example/a:b").value(),
            "https://x.example/a:b"
        );
        assert!(NodeId::try_from("nope:1".to_string()).is_err());
    }

    #[test]
    fn builder_dedups_and_drops_self_loops() {
        let mut b = GraphBuilder::default();
        let (x, y) = (NodeId::btc("x"), NodeId::btc("y"));
        b.add_edge(EdgeKind::CommonInput, y.clone(), x.clone());
        b.add_edge(EdgeKind::CommonInput, x.clone(), y.clone());
        b.add_edge(EdgeKind::CommonInput, x.clone(), x.clone());
        let g = b.build();
        assert_eq!(g.nodes().len(), 2);
        assert_eq!(g.edges().len(), 1);
        assert!(g.edges().iter().all(|e| e.a < e.b));
    }
}
