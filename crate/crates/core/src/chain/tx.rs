use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

/// Integer amount in satoshis (1e-8 BTC).
pub type Satoshi = u64;

pub const SATOSHI_PER_BTC: Satoshi = 100_000_000;

/// Render satoshis as BTC with eight decimals.
pub fn format_btc(sat: Satoshi) -> String {
    format!("{}.{:08}", sat / SATOSHI_PER_BTC, sat % SATOSHI_PER_BTC)
}

/// 32-byte transaction hash as 64 lowercase hex characters.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Txid(String);

impl Txid {
    pub fn parse(s: &str) -> Result<Self, String> {
        if s.len() == 64 && s.bytes().all(|b| b.is_ascii_hexdigit()) {
            Ok(Txid(s.to_ascii_lowercase()))
        } else {
            Err(format!("txid must be 64 hex characters, got {s:?}"))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Txid {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        Txid::parse(&s)
    }
}

impl From<Txid> for String {
    fn from(t: Txid) -> String {
        t.0
    }
}

impl fmt::Display for Txid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One input or output. The address is kept as text because counterparties
/// may use script types this toolkit does not validate.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TxIo {
    pub address: String,
    pub value: Satoshi,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transaction {
    pub txid: Txid,
    pub timestamp: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub coinbase: bool,
    pub inputs: Vec<TxIo>,
    pub outputs: Vec<TxIo>,
}

impl Transaction {
    pub fn check(&self) -> Result<(), String> {
        if self.inputs.is_empty() && !self.coinbase {
            return Err(format!("{}: non-coinbase transaction without inputs", self.txid));
        }
        Ok(())
    }

    /// Sum of outputs paying `address`.
    pub fn received_by(&self, address: &str) -> Satoshi {
        self.outputs
            .iter()
            .filter(|o| o.address == address)
            .map(|o| o.value)
            .sum()
    }

    /// Sum of inputs spent from `address`.
    pub fn sent_by(&self, address: &str) -> Satoshi {
        self.inputs
            .iter()
            .filter(|i| i.address == address)
            .map(|i| i.value)
            .sum()
    }

    pub fn involves(&self, address: &str) -> bool {
        self.inputs.iter().chain(&self.outputs).any(|io| io.address == address)
    }
}
