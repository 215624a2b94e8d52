//! Surface-web tracing of illicit addresses.
//!
//! Addresses are searched through a [`SearchAdapter`], explorer pages are
//! filtered out automatically, and everything else waits for analyst
//! annotations. Annotations also carry the IP and registrant facts that
//! feed the identity clustering phase.

mod search;

use std::collections::{BTreeMap, BTreeSet};
use std::net::IpAddr;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::extract::BtcAddress;
use crate::jsonl;

pub use search::{
    filter_explorer_urls, host_matches, normalize_url, search_address, search_all, FixtureSearch, HttpSearch,
    SearchAdapter, SearchError, SearchFailure,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HitKind {
    #[serde(alias = "Explorer")]
    Explorer,
    #[serde(alias = "AbuseReport")]
    AbuseReport,
    #[serde(alias = "IllicitSite")]
    IllicitSite,
    #[serde(alias = "Benign")]
    Benign,
    #[serde(alias = "Unreviewed")]
    Unreviewed,
}

impl HitKind {
    /// Kinds only an analyst may assign.
    pub fn is_analyst(self) -> bool {
        matches!(self, HitKind::AbuseReport | HitKind::IllicitSite | HitKind::Benign)
    }
}

/// One search result for one address.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceHit {
    pub address: BtcAddress,
    pub url: String,
    pub source: String,
    pub kind: HitKind,
}

pub fn write_hits(path: &Path, hits: &[SurfaceHit]) -> Result<()> {
    jsonl::write(path, hits)
}

pub fn read_hits(path: &Path) -> Result<Vec<SurfaceHit>> {
    jsonl::read(path)
}

/// Hosting facts about one surface URL.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityFact {
    pub url: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ip: Option<IpAddr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub registrant: Option<String>,
}

/// One analyst annotation row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRow {
    pub url: String,
    pub kind: HitKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ip: Option<IpAddr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub registrant: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Annotated {
    pub hits: Vec<SurfaceHit>,
    pub facts: Vec<IdentityFact>,
    pub warnings: Vec<String>,
}

/// Apply analyst rows to the hits. A row may set an analyst kind
/// (`unreviewed` leaves the kind alone) and add an identity fact. Rows for
/// unknown URLs or with an `explorer` kind are skipped with a warning.
pub fn import_annotations(hits: Vec<SurfaceHit>, rows: &[AnnotationRow]) -> Annotated {
    let mut out = Annotated {
        hits,
        ..Annotated::default()
    };
    let mut by_url: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, h) in out.hits.iter().enumerate() {
        by_url.entry(h.url.clone()).or_default().push(i);
    }
    let mut facts: BTreeMap<String, IdentityFact> = BTreeMap::new();
    for (n, row) in rows.iter().enumerate() {
        let line = n + 1;
        let Some(url) = normalize_url(&row.url) else {
            out.warnings
                .push(format!("annotation {line}: invalid url {:?}", row.url));
            continue;
        };
        let Some(idx) = by_url.get(&url) else {
            out.warnings.push(format!("annotation {line}: unknown url {url}"));
            continue;
        };
        if row.kind == HitKind::Explorer {
            out.warnings
                .push(format!("annotation {line}: kind explorer is assigned automatically"));
            continue;
        }
        if row.kind.is_analyst() {
            for &i in idx {
                out.hits[i].kind = row.kind;
            }
        }
        let registrant = row.registrant.as_deref().map(str::trim).filter(|r| !r.is_empty());
        if row.ip.is_some() || registrant.is_some() {
            let f = facts.entry(url.clone()).or_insert_with(|| IdentityFact {
                url,
                ip: None,
                registrant: None,
            });
            f.ip = row.ip.or(f.ip);
            if let Some(r) = registrant {
                f.registrant = Some(r.to_string());
            }
        }
    }
    out.facts = facts.into_values().collect();
    out
}

/// Read an annotation file; malformed lines become warnings.
pub fn read_annotation_rows(path: &Path) -> Result<(Vec<AnnotationRow>, Vec<String>)> {
    jsonl::read_lenient(path)
}

/// Identity facts joined with the addresses found at each URL: the input
/// of the identity clustering phase.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceLink {
    pub url: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ip: Option<IpAddr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub registrant: Option<String>,
    pub addresses: BTreeSet<BtcAddress>,
}

/// Join facts with hits. Explorer and benign hits do not tie an address to
/// a URL.
pub fn surface_links(hits: &[SurfaceHit], facts: &[IdentityFact]) -> Vec<SurfaceLink> {
    let mut addrs: BTreeMap<&str, BTreeSet<BtcAddress>> = BTreeMap::new();
    for h in hits {
        if !matches!(h.kind, HitKind::Explorer | HitKind::Benign) {
            addrs.entry(&h.url).or_default().insert(h.address.clone());
        }
    }
    let mut links: Vec<SurfaceLink> = facts
        .iter()
        .map(|f| SurfaceLink {
            url: f.url.clone(),
            ip: f.ip,
            registrant: f.registrant.clone(),
            addresses: addrs.get(f.url.as_str()).cloned().unwrap_or_default(),
        })
        .collect();
    links.sort_by(|a, b| a.url.cmp(&b.url));
    links
}

pub fn write_surface(path: &Path, links: &[SurfaceLink]) -> Result<()> {
    jsonl::write(path, links)
}

pub fn read_surface(path: &Path) -> Result<Vec<SurfaceLink>> {
    jsonl::read(path)
}
