//! Payment and email address extraction and validation.
//!
//! Extraction scans the tag-stripped page text plus attribute values.
//! Bitcoin candidates follow the `[0-9a-zA-Z]{25,39}` shape but must be
//! delimited by non-alphanumerics; Bech32 addresses are not recognised.

pub mod base58;
mod btc;
mod email;
mod eth;

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, OnionDomain, PageRecord};
use crate::error::Result;
use crate::html::PageText;
use crate::jsonl;
use crate::par::Exec;

pub use btc::{
    find_btc_candidates, validate_btc, BtcAddress, BtcReject, MAX_CANDIDATE_LEN, MIN_CANDIDATE_LEN, P2PKH_VERSION,
    P2SH_VERSION,
};
pub use email::{find_emails, scan_emails, validate_email, EmailAddress, EmailReject};
pub use eth::{eip55_checksum, find_eth_candidates, validate_eth, EthAddress, EthReject};

/// Maximal runs of ASCII alphanumerics.
pub(crate) fn alnum_runs(text: &str) -> impl Iterator<Item = &str> {
    text.split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|s| !s.is_empty())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AddressKind {
    Btc,
    Eth,
    Email,
}

/// One extracted string and its validation verdict.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AddressRecord {
    pub domain: OnionDomain,
    pub path: String,
    pub kind: AddressKind,
    pub value: String,
    pub valid: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reject_reason: Option<String>,
}

fn record(page: &PageRecord, kind: AddressKind, value: String, reject: Option<&str>) -> AddressRecord {
    AddressRecord {
        domain: page.domain.clone(),
        path: page.path.clone(),
        kind,
        value,
        valid: reject.is_none(),
        reject_reason: reject.map(str::to_string),
    }
}

/// All Bitcoin, Ethereum and email candidates on one page with verdicts.
pub fn extract_page(page: &PageRecord, known_tlds: &BTreeSet<String>) -> Vec<AddressRecord> {
    let text = PageText::parse(&page.html).scan_text();
    let mut out = Vec::new();
    for c in find_btc_candidates(&text) {
        let reject = validate_btc(&c).err().map(BtcReject::as_str);
        out.push(record(page, AddressKind::Btc, c, reject));
    }
    for c in find_eth_candidates(&text) {
        let reject = validate_eth(&c).err().map(EthReject::as_str);
        out.push(record(page, AddressKind::Eth, c, reject));
    }
    for (raw, verdict) in scan_emails(&text, known_tlds) {
        match verdict {
            Ok(e) => out.push(record(page, AddressKind::Email, e.to_string(), None)),
            Err(r) => out.push(record(page, AddressKind::Email, raw, Some(r.as_str()))),
        }
    }
    out
}

pub fn extract_corpus(corpus: &Corpus, known_tlds: &BTreeSet<String>, exec: Exec) -> Vec<AddressRecord> {
    exec.flat_map(corpus.pages(), |p| extract_page(p, known_tlds))
}

pub fn write_records(path: &Path, records: &[AddressRecord]) -> Result<()> {
    jsonl::write(path, records)
}

pub fn read_records(path: &Path) -> Result<Vec<AddressRecord>> {
    jsonl::read(path)
}
