//! Transaction-history providers.
//!
//! Two adapters ship: [`FixtureExplorer`] replays `<dir>/<address>.json`
//! files holding an array of transactions, and [`HttpExplorer`] talks to a
//! JSON endpoint of the form
//! `GET {base}/address/{address}/transactions?page={n}` returning
//! `{"transactions": [...], "next_page": n | null}`.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ledger::AddressLedger;
use super::tx::Transaction;
use crate::extract::BtcAddress;
use crate::par::Exec;
use crate::ratelimit::RateLimiter;

/// One page of an address history. Pages are numbered from 1.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TxPage {
    pub transactions: Vec<Transaction>,
    #[serde(default)]
    pub next_page: Option<u32>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ExplorerError {
    /// The provider has never seen the address.
    #[error("address not found")]
    NotFound,
    /// Timeouts, throttling and server errors; worth retrying.
    #[error("transient provider error: {0}")]
    Transient(String),
    #[error("provider error: {0}")]
    Fatal(String),
}

pub trait ExplorerAdapter: Sync {
    fn page(&self, address: &BtcAddress, page: u32) -> Result<TxPage, ExplorerError>;
}

/// Replays histories from a directory of JSON files.
#[derive(Debug, Clone)]
pub struct FixtureExplorer {
    dir: PathBuf,
    page_size: usize,
}

impl FixtureExplorer {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        FixtureExplorer {
            dir: dir.into(),
            page_size: 50,
        }
    }

    /// Serve each fixture in pages of `n` transactions.
    pub fn with_page_size(mut self, n: usize) -> Self {
        self.page_size = n.max(1);
        self
    }

    pub fn fixture_path(&self, address: &BtcAddress) -> PathBuf {
        self.dir.join(format!("{address}.json"))
    }
}

impl ExplorerAdapter for FixtureExplorer {
    fn page(&self, address: &BtcAddress, page: u32) -> Result<TxPage, ExplorerError> {
        let path = self.fixture_path(address);
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(ExplorerError::NotFound),
            Err(e) => return Err(ExplorerError::Fatal(format!("{}: {e}", path.display()))),
        };
        let all: Vec<Transaction> =
            serde_json::from_str(&text).map_err(|e| ExplorerError::Fatal(format!("{}: {e}", path.display())))?;
        let start = (page.max(1) as usize - 1) * self.page_size;
        let end = (start + self.page_size).min(all.len());
        let transactions = all.get(start..end).map(<[Transaction]>::to_vec).unwrap_or_default();
        let next_page = (end < all.len()).then_some(page + 1);
        Ok(TxPage {
            transactions,
            next_page,
        })
    }
}

/// JSON-over-HTTP provider with a shared start-rate limit.
#[derive(Debug)]
pub struct HttpExplorer {
    base_url: String,
    agent: ureq::Agent,
    limiter: RateLimiter,
}

impl HttpExplorer {
    pub fn new(base_url: &str, requests_per_second: f64, timeout: Duration) -> Self {
        HttpExplorer {
            base_url: base_url.trim_end_matches('/').to_string(),
            agent: ureq::AgentBuilder::new().timeout(timeout).build(),
            limiter: RateLimiter::new(requests_per_second),
        }
    }

    pub fn url(&self, address: &BtcAddress, page: u32) -> String {
        format!("{}/address/{}/transactions?page={}", self.base_url, address, page)
    }
}

pub(crate) fn classify_http_error(err: ureq::Error) -> ExplorerError {
    match err {
        ureq::Error::Status(404, _) => ExplorerError::NotFound,
        ureq::Error::Status(code, _) if code == 429 || code >= 500 => ExplorerError::Transient(format!("HTTP {code}")),
        ureq::Error::Status(code, _) => ExplorerError::Fatal(format!("HTTP {code}")),
        ureq::Error::Transport(t) => ExplorerError::Transient(t.to_string()),
    }
}

impl ExplorerAdapter for HttpExplorer {
    fn page(&self, address: &BtcAddress, page: u32) -> Result<TxPage, ExplorerError> {
        self.limiter.acquire();
        let resp = self
            .agent
            .get(&self.url(address, page))
            .call()
            .map_err(classify_http_error)?;
        let body = resp
            .into_string()
            .map_err(|e| ExplorerError::Transient(e.to_string()))?;
        serde_json::from_str(&body).map_err(|e| ExplorerError::Fatal(format!("bad response body: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub max_retries: u32,
    /// Delay before the first retry; doubled for each further retry.
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_retries: 3,
            base_delay: Duration::from_millis(500),
        }
    }
}

impl RetryPolicy {
    pub fn none() -> Self {
        RetryPolicy {
            max_retries: 0,
            base_delay: Duration::ZERO,
        }
    }

    fn delay(&self, retry: u32) -> Duration {
        self.base_delay.saturating_mul(1u32 << retry.min(16))
    }
}

/// An address whose history could not be fetched.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FetchFailure {
    pub address: String,
    pub error: String,
    pub attempts: u32,
}

const MAX_PAGES: u32 = 100_000;

fn page_with_retry(
    provider: &dyn ExplorerAdapter,
    address: &BtcAddress,
    page: u32,
    retry: &RetryPolicy,
    attempts: &mut u32,
) -> Result<TxPage, ExplorerError> {
    let mut retries = 0;
    loop {
        *attempts += 1;
        match provider.page(address, page) {
            Err(ExplorerError::Transient(e)) if retries < retry.max_retries => {
                log::warn!("{address} page {page}: {e}; retrying");
                std::thread::sleep(retry.delay(retries));
                retries += 1;
            }
            other => return other,
        }
    }
}

/// Fetch every page of an address history and normalize it into a ledger.
/// An unknown address yields an empty ledger.
pub fn fetch_transactions(
    address: &BtcAddress,
    provider: &dyn ExplorerAdapter,
    retry: &RetryPolicy,
) -> Result<AddressLedger, FetchFailure> {
    let mut attempts = 0;
    let mut txs = Vec::new();
    let mut page = 1;
    let fail = |error: String, attempts: u32| FetchFailure {
        address: address.to_string(),
        error,
        attempts,
    };
    loop {
        match page_with_retry(provider, address, page, retry, &mut attempts) {
            Ok(p) => {
                txs.extend(p.transactions);
                match p.next_page {
                    Some(n) if n > page && n <= MAX_PAGES => page = n,
                    _ => break,
                }
            }
            Err(ExplorerError::NotFound) if page == 1 => return Ok(AddressLedger::empty(address.clone())),
            Err(e) => return Err(fail(e.to_string(), attempts)),
        }
    }
    AddressLedger::from_transactions(address.clone(), txs).map_err(|e| fail(e.to_string(), attempts))
}

/// Fetch many addresses concurrently. Ledgers come back in input order.
pub fn fetch_all(
    addresses: &[BtcAddress],
    provider: &dyn ExplorerAdapter,
    retry: &RetryPolicy,
    exec: Exec,
) -> (Vec<AddressLedger>, Vec<FetchFailure>) {
    let results = exec.map(addresses, |a| fetch_transactions(a, provider, retry));
    let mut ledgers = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(l) => ledgers.push(l),
            Err(f) => {
                log::warn!("fetch failed for {}: {}", f.address, f.error);
                failures.push(f);
            }
        }
    }
    (ledgers, failures)
}

/// Write one `<address>.json` per ledger plus `failures.jsonl`.
pub fn write_ledger_dir(dir: &Path, ledgers: &[AddressLedger], failures: &[FetchFailure]) -> crate::Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| crate::Error::io(dir, e))?;
    for l in ledgers {
        l.write(&dir.join(format!("{}.json", l.address)))?;
    }
    crate::jsonl::write(&dir.join("failures.jsonl"), failures)
}

/// Read every `*.json` ledger in a directory, sorted by address.
pub fn read_ledger_dir(dir: &Path) -> crate::Result<Vec<AddressLedger>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| crate::Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths.iter().map(|p| AddressLedger::read(p)).collect()
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;
    use std::sync::atomic::{AtomicU32, Ordering};
    use std::sync::Mutex;

    use super::*;
    use crate::chain::ledger::tests::{tx, A, B};
    use crate::testutil::serve;

    fn addr(s: &str) -> BtcAddress {
        BtcAddress::parse(s).unwrap()
    }

    fn write_fixture(dir: &Path, address: &str, txs: &[Transaction]) {
        std::fs::write(dir.join(format!("{address}.json")), serde_json::to_string(txs).unwrap()).unwrap();
    }

    #[test]
    fn fixture_three_transactions() {
        let dir = tempfile::tempdir().unwrap();
        write_fixture(
            dir.path(),
            A,
            &[
                tx(1, 10, &[("x", 5_000)], &[(A, 4_000), ("x", 900)]),
                tx(2, 20, &[("y", 2_500)], &[(A, 2_500)]),
                tx(3, 30, &[(A, 6_000)], &[("z", 5_900)]),
            ],
        );
        let l = fetch_transactions(&addr(A), &FixtureExplorer::new(dir.path()), &RetryPolicy::none()).unwrap();
        assert_eq!(l.transactions.len(), 3);
        // received 4000 + 2500, sent 6000
        assert_eq!((l.received, l.sent, l.balance), (6_500, 6_000, 500));
    }

    #[test]
    fn unknown_address_is_empty() {
        let dir = tempfile::tempdir().unwrap();
        let l = fetch_transactions(&addr(B), &FixtureExplorer::new(dir.path()), &RetryPolicy::none()).unwrap();
        assert!(l.transactions.is_empty());
        assert_eq!(l.first_seen, None);
    }

    #[test]
    fn two_pages_of_fifty() {
        let dir = tempfile::tempdir().unwrap();
        let txs: Vec<Transaction> = (0..100).map(|i| tx(i, i as i64, &[("x", 1)], &[(A, 1)])).collect();
        write_fixture(dir.path(), A, &txs);
        let provider = FixtureExplorer::new(dir.path()).with_page_size(50);
        assert_eq!(provider.page(&addr(A), 1).unwrap().next_page, Some(2));
        assert_eq!(provider.page(&addr(A), 2).unwrap().next_page, None);
        let l = fetch_transactions(&addr(A), &provider, &RetryPolicy::none()).unwrap();
        assert_eq!(l.transactions.len(), 100);
        let ids: BTreeSet<_> = l.transactions.iter().map(|t| &t.txid).collect();
        assert_eq!(ids.len(), 100);
    }

    /// Pages overlap by one transaction and the first call of each page
    /// fails transiently.
    struct Flaky {
        calls: AtomicU32,
        failed: Mutex<BTreeSet<u32>>,
    }

    impl ExplorerAdapter for Flaky {
        fn page(&self, _: &BtcAddress, page: u32) -> Result<TxPage, ExplorerError> {
            self.calls.fetch_add(1, Ordering::SeqCst);
            if self.failed.lock().unwrap().insert(page) {
                return Err(ExplorerError::Transient("503".into()));
            }
            let start = (page as u64 - 1) * 10;
            Ok(TxPage {
                transactions: (start..start + 11)
                    .map(|i| tx(i, i as i64, &[("x", 1)], &[(A, 1)]))
                    .collect(),
                next_page: (page < 3).then_some(page + 1),
            })
        }
    }

    #[test]
    fn retries_and_dedups_overlapping_pages() {
        let p = Flaky {
            calls: AtomicU32::new(0),
            failed: Mutex::new(BTreeSet::new()),
        };
        let retry = RetryPolicy {
            max_retries: 2,
            base_delay: Duration::from_millis(1),
        };
        let l = fetch_transactions(&addr(A), &p, &retry).unwrap();
        assert_eq!(l.transactions.len(), 31);
        assert_eq!(p.calls.load(Ordering::SeqCst), 6);
    }

    struct AlwaysDown;
    impl ExplorerAdapter for AlwaysDown {
        fn page(&self, _: &BtcAddress, _: u32) -> Result<TxPage, ExplorerError> {
            Err(ExplorerError::Transient("timeout".into()))
        }
    }

    #[test]
    fn bounded_retries_then_failure_record() {
        let retry = RetryPolicy {
            max_retries: 2,
            base_delay: Duration::from_millis(1),
        };
        let (ledgers, failures) = fetch_all(&[addr(A), addr(B)], &AlwaysDown, &retry, Exec::default());
        assert!(ledgers.is_empty());
        assert_eq!(failures.len(), 2);
        assert_eq!(failures[0].attempts, 3);
        assert_eq!(failures[0].address, A);
    }

    #[test]
    fn http_adapter_paginates_and_maps_404() {
        let page1 = TxPage {
            transactions: vec![tx(1, 1, &[("x", 7)], &[(A, 7)])],
            next_page: Some(2),
        };
        let page2 = TxPage {
            transactions: vec![tx(2, 2, &[("x", 3)], &[(A, 3)])],
            next_page: None,
        };
        let routes = vec![
            (
                format!("/address/{A}/transactions?page=1"),
                200,
                serde_json::to_string(&page1).unwrap(),
            ),
            (format!("/address/{A}/transactions?page=2"), 503, String::new()),
            (
                format!("/address/{A}/transactions?page=2"),
                200,
                serde_json::to_string(&page2).unwrap(),
            ),
        ];
        // the 503 route shadows the 200 one, so page 2 keeps failing
        let (base, handle) = serve(routes, 3);
        let http = HttpExplorer::new(&base, 0.0, Duration::from_secs(5));
        let retry = RetryPolicy {
            max_retries: 1,
            base_delay: Duration::from_millis(1),
        };
        let err = fetch_transactions(&addr(A), &http, &retry).unwrap_err();
        assert!(err.error.contains("503"), "{err:?}");
        assert_eq!(err.attempts, 3);
        handle.join().unwrap();

        let routes = vec![
            (
                format!("/address/{A}/transactions?page=1"),
                200,
                serde_json::to_string(&page1).unwrap(),
            ),
            (
                format!("/address/{A}/transactions?page=2"),
                200,
                serde_json::to_string(&page2).unwrap(),
            ),
        ];
        let (base, handle) = serve(routes, 3);
        let http = HttpExplorer::new(&base, 100.0, Duration::from_secs(5));
        let l = fetch_transactions(&addr(A), &http, &RetryPolicy::none()).unwrap();
        assert_eq!(l.received, 10);
        let empty = fetch_transactions(&addr(B), &http, &RetryPolicy::none()).unwrap();
        assert!(empty.transactions.is_empty());
        let seen = handle.join().unwrap();
        assert_eq!(seen.len(), 3);
    }
}
