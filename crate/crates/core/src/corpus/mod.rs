//! Offline snapshot corpus: onion domains, pages, and the link frontier.

mod frontier;
mod ingest;
mod links;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use base64::Engine;
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsonl;

pub use frontier::{crawl, frontier_crawl, FetchAdapter, Frontier};
pub use ingest::{
    decode_page_file_name, encode_page_file_name, export_snapshot, ingest_snapshot, IngestReport, IngestWarning,
};
pub use links::{extract_onion_links, onion_links_in};

/// A canonical (lowercase) v2 or v3 onion service name, including the
/// `.onion` suffix.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct OnionDomain(String);

const V2_LEN: usize = 16;
const V3_LEN: usize = 56;

pub(crate) fn is_onion_label(label: &str) -> bool {
    (label.len() == V2_LEN || label.len() == V3_LEN) && label.bytes().all(|b| matches!(b, b'a'..=b'z' | b'2'..=b'7'))
}

impl OnionDomain {
    pub fn parse(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.strip_suffix(".onion") {
            Some(label) if is_onion_label(label) => Ok(OnionDomain(lower)),
            _ => Err(Error::InvalidDomain(s.to_string())),
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The name without the `.onion` suffix.
    pub fn label(&self) -> &str {
        &self.0[..self.0.len() - ".onion".len()]
    }

    pub fn is_v3(&self) -> bool {
        self.label().len() == V3_LEN
    }
}

impl FromStr for OnionDomain {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        OnionDomain::parse(s)
    }
}

impl TryFrom<String> for OnionDomain {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        OnionDomain::parse(&s)
    }
}

impl From<OnionDomain> for String {
    fn from(d: OnionDomain) -> String {
        d.0
    }
}

impl fmt::Display for OnionDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One crawled page.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageRecord {
    pub domain: OnionDomain,
    /// URL path, always starting with `/`.
    pub path: String,
    pub html: Vec<u8>,
    pub fetched_at: DateTime<Utc>,
}

/// Identifies a page inside a corpus.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PageKey {
    pub domain: OnionDomain,
    pub path: String,
}

impl PageRecord {
    pub fn key(&self) -> PageKey {
        PageKey {
            domain: self.domain.clone(),
            path: self.path.clone(),
        }
    }
}

/// Normalize a URL path so it begins with `/`.
pub fn normalize_path(path: &str) -> String {
    if path.starts_with('/') {
        path.to_string()
    } else {
        format!("/{path}")
    }
}

#[derive(Serialize, Deserialize)]
struct PageLine {
    domain: OnionDomain,
    path: String,
    fetched_at: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    html: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    html_base64: Option<String>,
}

impl From<&PageRecord> for PageLine {
    fn from(p: &PageRecord) -> Self {
        let (html, html_base64) = match std::str::from_utf8(&p.html) {
            Ok(s) => (Some(s.to_string()), None),
            Err(_) => (None, Some(base64::engine::general_purpose::STANDARD.encode(&p.html))),
        };
        PageLine {
            domain: p.domain.clone(),
            path: p.path.clone(),
            fetched_at: p.fetched_at,
            html,
            html_base64,
        }
    }
}

/// An immutable set of pages, indexed by domain.
///
/// Pages are kept sorted by `(domain, path)` and the pair is unique.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    pages: Vec<PageRecord>,
    index: BTreeMap<OnionDomain, Vec<usize>>,
}

impl Corpus {
    /// Build a corpus. Later duplicates of a `(domain, path)` pair replace
    /// earlier ones and empty pages are dropped; both produce warnings.
    pub fn from_pages(pages: impl IntoIterator<Item = PageRecord>) -> (Self, Vec<IngestWarning>) {
        let mut warnings = Vec::new();
        let mut by_key: BTreeMap<PageKey, PageRecord> = BTreeMap::new();
        for page in pages {
            if page.html.is_empty() {
                warnings.push(IngestWarning::EmptyPage {
                    domain: page.domain.to_string(),
                    path: page.path.clone(),
                });
                continue;
            }
            if let Some(_old) = by_key.insert(page.key(), page.clone()) {
                warnings.push(IngestWarning::DuplicatePage {
                    domain: page.domain.to_string(),
                    path: page.path.clone(),
                });
            }
        }
        let pages: Vec<PageRecord> = by_key.into_values().collect();
        let mut index: BTreeMap<OnionDomain, Vec<usize>> = BTreeMap::new();
        for (i, p) in pages.iter().enumerate() {
            index.entry(p.domain.clone()).or_default().push(i);
        }
        (Corpus { pages, index }, warnings)
    }

    pub fn pages(&self) -> &[PageRecord] {
        &self.pages
    }

    pub fn len(&self) -> usize {
        self.pages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pages.is_empty()
    }

    pub fn domains(&self) -> impl Iterator<Item = &OnionDomain> {
        self.index.keys()
    }

    pub fn domain_count(&self) -> usize {
        self.index.len()
    }

    pub fn contains_domain(&self, domain: &OnionDomain) -> bool {
        self.index.contains_key(domain)
    }

    pub fn pages_of<'a>(&'a self, domain: &OnionDomain) -> impl Iterator<Item = &'a PageRecord> + 'a {
        self.index
            .get(domain)
            .into_iter()
            .flatten()
            .map(move |&i| &self.pages[i])
    }

    pub fn page(&self, domain: &OnionDomain, path: &str) -> Option<&PageRecord> {
        self.pages_of(domain).find(|p| p.path == path)
    }

    pub fn to_jsonl(&self) -> String {
        let lines: Vec<PageLine> = self.pages.iter().map(PageLine::from).collect();
        jsonl::to_string(&lines)
    }

    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        let lines: Vec<PageLine> = self.pages.iter().map(PageLine::from).collect();
        jsonl::write(path, &lines)
    }

    pub fn read_jsonl(path: &Path) -> Result<(Self, Vec<IngestWarning>)> {
        let lines: Vec<PageLine> = jsonl::read(path)?;
        let mut pages = Vec::with_capacity(lines.len());
        for (i, line) in lines.into_iter().enumerate() {
            let html = match (line.html, line.html_base64) {
                (Some(s), _) => s.into_bytes(),
                (None, Some(b)) => base64::engine::general_purpose::STANDARD.decode(b).map_err(|e| {
                    Error::Config(format!("{}: record {}: bad html_base64: {e}", path.display(), i + 1))
                })?,
                (None, None) => Vec::new(),
            };
            pages.push(PageRecord {
                domain: line.domain,
                path: normalize_path(&line.path),
                html,
                fetched_at: line.fetched_at,
            });
        }
        Ok(Corpus::from_pages(pages))
    }
}
