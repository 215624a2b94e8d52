use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use quick_xml::escape::escape;
use serde::{Deserialize, Serialize};

use crate::chain::{format_btc, IncomeReport, Satoshi};
use crate::classify::SiteLabel;
use crate::cluster::{Campaign, EdgeKind, EntityGraph, NodeId, NodeKind};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GraphNode {
    pub id: NodeId,
    pub kind: NodeKind,
    pub campaign: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    /// Non-internal income in satoshis (address nodes only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub received: Option<Satoshi>,
}

impl GraphNode {
    /// Display size of an address node: its income in BTC.
    pub fn size(&self) -> Option<String> {
        self.received.map(format_btc)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GraphEdge {
    pub source: NodeId,
    pub target: NodeId,
    pub kind: EdgeKind,
}

/// The members of every campaign and the edges between them.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignGraph {
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
}

fn member_ids(c: &Campaign) -> Vec<NodeId> {
    let mut ids: Vec<NodeId> = c.sites.iter().map(NodeId::site).collect();
    ids.extend(c.btc_addresses.iter().map(|a| NodeId::btc(a.as_str())));
    ids.extend(c.emails.iter().map(|e| NodeId::new(NodeKind::Email, e)));
    ids.extend(c.ips.iter().map(|v| NodeId::new(NodeKind::Ip, v)));
    ids.extend(c.registrants.iter().map(|v| NodeId::new(NodeKind::Registrant, v)));
    ids.extend(c.urls.iter().map(|v| NodeId::new(NodeKind::Url, v)));
    ids
}

/// Restrict the entity graph to campaign members and attach the
/// attributes used for plotting.
pub fn campaign_graph(
    campaigns: &[Campaign],
    graph: &EntityGraph,
    labels: &[SiteLabel],
    income: &IncomeReport,
) -> CampaignGraph {
    let site_cat: BTreeMap<&str, &str> = labels
        .iter()
        .map(|l| (l.domain.as_str(), l.category.display_name()))
        .collect();
    let addr: BTreeMap<&str, (Satoshi, String)> = income
        .per_address
        .iter()
        .map(|a| {
            let cats: Vec<&str> = a.categories.iter().map(|c| c.display_name()).collect();
            (a.address.as_str(), (a.income, cats.join(", ")))
        })
        .collect();

    let mut campaign_of: BTreeMap<NodeId, usize> = BTreeMap::new();
    for c in campaigns {
        for id in member_ids(c) {
            campaign_of.insert(id, c.id);
        }
    }
    let nodes = campaign_of
        .iter()
        .map(|(id, &campaign)| {
            let kind = id.kind();
            let (category, received) = match kind {
                NodeKind::Site => (site_cat.get(id.value()).map(|s| s.to_string()), None),
                NodeKind::Btc => {
                    let (r, c) = addr.get(id.value()).cloned().unwrap_or_default();
                    (Some(c).filter(|c| !c.is_empty()), Some(r))
                }
                _ => (None, None),
            };
            GraphNode {
                id: id.clone(),
                kind,
                campaign,
                category,
                received,
            }
        })
        .collect();
    let mut edges: Vec<GraphEdge> = graph
        .edges()
        .iter()
        .filter_map(|e| {
            let (s, t) = (graph.node(e.a), graph.node(e.b));
            (campaign_of.contains_key(s) && campaign_of.contains_key(t)).then(|| GraphEdge {
                source: s.clone(),
                target: t.clone(),
                kind: e.kind,
            })
        })
        .collect();
    edges.sort();
    CampaignGraph { nodes, edges }
}

/// GraphML document with `type`, `campaign`, `category`, `received` and
/// `size` node attributes and a `kind` edge attribute.
pub fn to_graphml(g: &CampaignGraph) -> String {
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    for (id, ty) in [
        ("type", "string"),
        ("campaign", "int"),
        ("category", "string"),
        ("received", "long"),
        ("size", "double"),
    ] {
        let _ = writeln!(
            s,
            "  <key id=\"{id}\" for=\"node\" attr.name=\"{id}\" attr.type=\"{ty}\"/>"
        );
    }
    s.push_str("  <key id=\"kind\" for=\"edge\" attr.name=\"kind\" attr.type=\"string\"/>\n");
    s.push_str("  <graph id=\"campaigns\" edgedefault=\"undirected\">\n");
    for n in &g.nodes {
        let _ = writeln!(s, "    <node id=\"{}\">", escape(n.id.as_str()));
        let _ = writeln!(s, "      <data key=\"type\">{}</data>", n.kind);
        let _ = writeln!(s, "      <data key=\"campaign\">{}</data>", n.campaign);
        if let Some(c) = &n.category {
            let _ = writeln!(s, "      <data key=\"category\">{}</data>", escape(c.as_str()));
        }
        if let Some(r) = n.received {
            let _ = writeln!(s, "      <data key=\"received\">{r}</data>");
        }
        if let Some(size) = n.size() {
            let _ = writeln!(s, "      <data key=\"size\">{size}</data>");
        }
        s.push_str("    </node>\n");
    }
    for e in &g.edges {
        let _ = writeln!(
            s,
            "    <edge source=\"{}\" target=\"{}\"><data key=\"kind\">{}</data></edge>",
            escape(e.source.as_str()),
            escape(e.target.as_str()),
            e.kind.as_str()
        );
    }
    s.push_str("  </graph>\n</graphml>\n");
    s
}

fn dot_quote(v: &str) -> String {
    format!("\"{}\"", v.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Undirected DOT graph with the same attributes as the GraphML output.
pub fn to_dot(g: &CampaignGraph) -> String {
    let mut s = String::from("graph campaigns {\n");
    for n in &g.nodes {
        let mut attrs = vec![
            format!("type={}", dot_quote(n.kind.prefix())),
            format!("campaign={}", n.campaign),
        ];
        if let Some(c) = &n.category {
            attrs.push(format!("category={}", dot_quote(c)));
        }
        if let Some(r) = n.received {
            attrs.push(format!("received={r}"));
        }
        if let Some(size) = n.size() {
            attrs.push(format!("size={size}"));
        }
        let _ = writeln!(s, "  {} [{}];", dot_quote(n.id.as_str()), attrs.join(", "));
    }
    for e in &g.edges {
        let _ = writeln!(
            s,
            "  {} -- {} [kind={}];",
            dot_quote(e.source.as_str()),
            dot_quote(e.target.as_str()),
            dot_quote(e.kind.as_str())
        );
    }
    s.push_str("}\n");
    s
}

/// Distinct node ids referenced by the graph's edges, for sanity checks.
pub fn edge_endpoints(g: &CampaignGraph) -> BTreeSet<&NodeId> {
    g.edges.iter().flat_map(|e| [&e.source, &e.target]).collect()
}
