use std::collections::{BTreeSet, HashSet};
use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use url::Url;

use super::{HitKind, SurfaceHit};
use crate::chain::RetryPolicy;
use crate::extract::BtcAddress;
use crate::par::Exec;
use crate::ratelimit::RateLimiter;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SearchError {
    #[error("search quota exhausted: {0}")]
    Quota(String),
    #[error("transient search error: {0}")]
    Transient(String),
    #[error("search error: {0}")]
    Fatal(String),
}

pub trait SearchAdapter: Sync {
    /// Short provider id recorded on every hit.
    fn id(&self) -> &str;
    /// Result URLs for an exact-string query, in rank order.
    fn search(&self, address: &BtcAddress) -> Result<Vec<String>, SearchError>;
}

/// Accepted result bodies: a bare URL array, `{"results": [{"url"}]}`, or
/// the `{"items": [{"link"}]}` shape of common web-search APIs.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ResultBody {
    Urls(Vec<String>),
    Results {
        results: Vec<UrlItem>,
    },
    Items {
        #[serde(default)]
        items: Vec<LinkItem>,
    },
}

#[derive(Debug, Deserialize)]
struct UrlItem {
    url: String,
}

#[derive(Debug, Deserialize)]
struct LinkItem {
    link: String,
}

impl ResultBody {
    fn into_urls(self) -> Vec<String> {
        match self {
            ResultBody::Urls(v) => v,
            ResultBody::Results { results } => results.into_iter().map(|r| r.url).collect(),
            ResultBody::Items { items } => items.into_iter().map(|r| r.link).collect(),
        }
    }
}

/// Replays `<dir>/<address>.json`; a missing file means no results.
#[derive(Debug, Clone)]
pub struct FixtureSearch {
    dir: PathBuf,
}

impl FixtureSearch {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        FixtureSearch { dir: dir.into() }
    }
}

impl SearchAdapter for FixtureSearch {
    fn id(&self) -> &str {
        "fixtures"
    }

    fn search(&self, address: &BtcAddress) -> Result<Vec<String>, SearchError> {
        let path = self.dir.join(format!("{address}.json"));
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(SearchError::Fatal(format!("{}: {e}", path.display()))),
        };
        serde_json::from_str::<ResultBody>(&text)
            .map(ResultBody::into_urls)
            .map_err(|e| SearchError::Fatal(format!("{}: {e}", path.display())))
    }
}

/// HTTP search client. The endpoint is a URL template in which
/// `{address}` is replaced by the queried address.
#[derive(Debug)]
pub struct HttpSearch {
    template: String,
    agent: ureq::Agent,
    limiter: RateLimiter,
}

impl HttpSearch {
    pub fn new(template: &str, requests_per_second: f64, timeout: Duration) -> Self {
        HttpSearch {
            template: template.to_string(),
            agent: ureq::AgentBuilder::new().timeout(timeout).build(),
            limiter: RateLimiter::new(requests_per_second),
        }
    }

    pub fn url(&self, address: &BtcAddress) -> String {
        if self.template.contains("{address}") {
            self.template.replace("{address}", address.as_str())
        } else {
            format!("{}/search?q={}", self.template.trim_end_matches('/'), address)
        }
    }
}

impl SearchAdapter for HttpSearch {
    fn id(&self) -> &str {
        "http"
    }

    fn search(&self, address: &BtcAddress) -> Result<Vec<String>, SearchError> {
        self.limiter.acquire();
        let resp = self.agent.get(&self.url(address)).call().map_err(|e| match e {
            ureq::Error::Status(404, _) => SearchError::Fatal("HTTP 404".into()),
            ureq::Error::Status(403 | 429, _) => SearchError::Quota(e.to_string()),
            ureq::Error::Status(code, _) if code >= 500 => SearchError::Transient(format!("HTTP {code}")),
            ureq::Error::Status(code, _) => SearchError::Fatal(format!("HTTP {code}")),
            ureq::Error::Transport(t) => SearchError::Transient(t.to_string()),
        })?;
        let body = resp.into_string().map_err(|e| SearchError::Transient(e.to_string()))?;
        serde_json::from_str::<ResultBody>(&body)
            .map(ResultBody::into_urls)
            .map_err(|e| SearchError::Fatal(format!("bad response body: {e}")))
    }
}

/// An address whose search failed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchFailure {
    pub address: String,
    pub error: String,
}

/// Parse and canonicalize a result URL; only http(s) URLs with a host count.
pub fn normalize_url(raw: &str) -> Option<String> {
    let u = Url::parse(raw.trim()).ok()?;
    if !matches!(u.scheme(), "http" | "https") || u.host_str().is_none() {
        return None;
    }
    Some(u.to_string())
}

fn host_of(url: &str) -> Option<String> {
    Url::parse(url)
        .ok()?
        .host_str()
        .map(|h| h.trim_end_matches('.').to_ascii_lowercase())
}

/// True when `host` is one of `domains` or a subdomain of one.
pub fn host_matches(host: &str, domains: &BTreeSet<String>) -> bool {
    let mut h = host;
    loop {
        if domains.contains(h) {
            return true;
        }
        match h.split_once('.') {
            Some((_, rest)) => h = rest,
            None => return false,
        }
    }
}

/// Mark unreviewed hits on explorer hosts as `Explorer`. Hits of any other
/// kind are left untouched, so analyst verdicts survive re-filtering.
pub fn filter_explorer_urls(mut hits: Vec<SurfaceHit>, explorer_domains: &BTreeSet<String>) -> Vec<SurfaceHit> {
    for h in &mut hits {
        if h.kind == HitKind::Unreviewed && host_of(&h.url).is_some_and(|host| host_matches(&host, explorer_domains)) {
            h.kind = HitKind::Explorer;
        }
    }
    hits
}

/// Search one address and triage its results: invalid URLs are dropped,
/// duplicates collapse to the first occurrence, explorer hosts are marked.
pub fn search_address(
    address: &BtcAddress,
    provider: &dyn SearchAdapter,
    explorer_domains: &BTreeSet<String>,
    retry: &RetryPolicy,
) -> Result<Vec<SurfaceHit>, SearchFailure> {
    let mut retries = 0;
    let urls = loop {
        match provider.search(address) {
            Ok(u) => break u,
            Err(SearchError::Transient(e)) if retries < retry.max_retries => {
                log::warn!("search {address}: {e}; retrying");
                std::thread::sleep(retry.base_delay.saturating_mul(1 << retries.min(16)));
                retries += 1;
            }
            Err(e) => {
                return Err(SearchFailure {
                    address: address.to_string(),
                    error: e.to_string(),
                })
            }
        }
    };
    let mut seen = HashSet::new();
    let mut hits = Vec::new();
    for raw in urls {
        let Some(url) = normalize_url(&raw) else {
            log::warn!("search {address}: dropping invalid url {raw:?}");
            continue;
        };
        if seen.insert(url.clone()) {
            hits.push(SurfaceHit {
                address: address.clone(),
                url,
                source: provider.id().to_string(),
                kind: HitKind::Unreviewed,
            });
        }
    }
    Ok(filter_explorer_urls(hits, explorer_domains))
}

/// Search many addresses concurrently; hits keep input order.
pub fn search_all(
    addresses: &[BtcAddress],
    provider: &dyn SearchAdapter,
    explorer_domains: &BTreeSet<String>,
    retry: &RetryPolicy,
    exec: Exec,
) -> (Vec<SurfaceHit>, Vec<SearchFailure>) {
    let mut hits = Vec::new();
    let mut failures = Vec::new();
    for r in exec.map(addresses, |a| search_address(a, provider, explorer_domains, retry)) {
        match r {
            Ok(h) => hits.extend(h),
            Err(f) => {
                log::warn!("search failed for {}: {}", f.address, f.error);
                failures.push(f);
            }
        }
    }
    (hits, failures)
}
