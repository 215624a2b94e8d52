use std::collections::BTreeMap;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::tx::{Satoshi, Transaction, Txid};
use crate::error::{Error, Result};
use crate::extract::BtcAddress;

/// Full history of one address with derived totals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AddressLedger {
    pub address: BtcAddress,
    /// Ordered by `(timestamp, txid)`, txids unique.
    pub transactions: Vec<Transaction>,
    pub received: Satoshi,
    pub sent: Satoshi,
    pub balance: Satoshi,
    pub first_seen: Option<DateTime<Utc>>,
    pub last_seen: Option<DateTime<Utc>>,
}

fn invalid(address: &BtcAddress, reason: impl Into<String>) -> Error {
    Error::InvalidLedger {
        address: address.to_string(),
        reason: reason.into(),
    }
}

impl AddressLedger {
    pub fn empty(address: BtcAddress) -> Self {
        AddressLedger {
            address,
            transactions: Vec::new(),
            received: 0,
            sent: 0,
            balance: 0,
            first_seen: None,
            last_seen: None,
        }
    }

    /// Normalize a raw history: drop repeated txids (first copy wins), order
    /// by time, and derive totals. Fails if the address would spend more
    /// than it received or a transaction is malformed.
    pub fn from_transactions(address: BtcAddress, txs: impl IntoIterator<Item = Transaction>) -> Result<Self> {
        let mut by_id: BTreeMap<Txid, Transaction> = BTreeMap::new();
        for tx in txs {
            tx.check().map_err(|e| invalid(&address, e))?;
            by_id.entry(tx.txid.clone()).or_insert(tx);
        }
        let mut transactions: Vec<Transaction> = by_id.into_values().collect();
        transactions.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then_with(|| a.txid.cmp(&b.txid)));

        let a = address.as_str();
        let received: Satoshi = transactions.iter().map(|t| t.received_by(a)).sum();
        let sent: Satoshi = transactions.iter().map(|t| t.sent_by(a)).sum();
        let balance = received
            .checked_sub(sent)
            .ok_or_else(|| invalid(&address, format!("sent {sent} exceeds received {received}")))?;
        Ok(AddressLedger {
            first_seen: transactions.first().map(|t| t.timestamp),
            last_seen: transactions.last().map(|t| t.timestamp),
            address,
            transactions,
            received,
            sent,
            balance,
        })
    }

    /// Stored totals agree with a recomputation from the transactions.
    pub fn is_consistent(&self) -> bool {
        match AddressLedger::from_transactions(self.address.clone(), self.transactions.clone()) {
            Ok(fresh) => fresh == *self,
            Err(_) => false,
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        crate::jsonl::write_json(path, self)
    }

    /// Read a stored ledger and reject it if its totals do not match its
    /// transactions.
    pub fn read(path: &Path) -> Result<Self> {
        let ledger: AddressLedger = crate::jsonl::read_json(path)?;
        if !ledger.is_consistent() {
            return Err(invalid(
                &ledger.address,
                format!("{}: stored totals disagree with transactions", path.display()),
            ));
        }
        Ok(ledger)
    }
}

const SECONDS_PER_DAY: i64 = 86_400;

/// Inclusive active days between first and last transaction; a
/// single-day address reports 1. `None` for an empty ledger.
pub fn active_period(ledger: &AddressLedger) -> Option<u64> {
    let (first, last) = (ledger.first_seen?, ledger.last_seen?);
    let secs = (last - first).num_seconds().max(0);
    Some((secs / SECONDS_PER_DAY) as u64 + 1)
}
