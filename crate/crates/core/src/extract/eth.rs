use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha3::{Digest, Keccak256};

use super::alnum_runs;

const HEX_LEN: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EthReject {
    BadLength,
    BadHex,
    BadEip55,
}

impl EthReject {
    pub fn as_str(self) -> &'static str {
        match self {
            EthReject::BadLength => "bad-length",
            EthReject::BadHex => "bad-hex",
            EthReject::BadEip55 => "bad-eip55",
        }
    }
}

impl fmt::Display for EthReject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct EthAddress(String);

impl EthAddress {
    /// The address as found, prefix included when present.
    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// 40 lowercase hex digits.
    pub fn to_lower_hex(&self) -> String {
        strip_prefix(&self.0).to_ascii_lowercase()
    }
}

impl TryFrom<String> for EthAddress {
    type Error = EthReject;
    fn try_from(s: String) -> Result<Self, EthReject> {
        validate_eth(&s)
    }
}

impl From<EthAddress> for String {
    fn from(a: EthAddress) -> String {
        a.0
    }
}

impl fmt::Display for EthAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn strip_prefix(s: &str) -> &str {
    s.strip_prefix("0x").unwrap_or(s)
}

/// EIP-55 mixed-case form of 40 hex digits (any case), without prefix.
pub fn eip55_checksum(hex40: &str) -> String {
    let lower = hex40.to_ascii_lowercase();
    let hash = Keccak256::digest(lower.as_bytes());
    lower
        .chars()
        .enumerate()
        .map(|(i, c)| {
            let nibble = (hash[i / 2] >> if i % 2 == 0 { 4 } else { 0 }) & 0x0f;
            if c.is_ascii_alphabetic() && nibble >= 8 {
                c.to_ascii_uppercase()
            } else {
                c
            }
        })
        .collect()
}

/// Single-case hex is accepted as is; mixed case must match EIP-55.
pub fn validate_eth(candidate: &str) -> Result<EthAddress, EthReject> {
    let body = strip_prefix(candidate);
    if body.chars().count() != HEX_LEN {
        return Err(EthReject::BadLength);
    }
    if !body.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err(EthReject::BadHex);
    }
    let has_upper = body.bytes().any(|b| b.is_ascii_uppercase());
    let has_lower = body.bytes().any(|b| b.is_ascii_lowercase());
    if has_upper && has_lower && eip55_checksum(body) != body {
        return Err(EthReject::BadEip55);
    }
    Ok(EthAddress(candidate.to_string()))
}

/// Delimited `(0x)?[0-9a-fA-F]{40}` matches in document order, without
/// repeats.
pub fn find_eth_candidates(text: &str) -> Vec<String> {
    let mut seen = HashSet::new();
    alnum_runs(text)
        .filter(|r| {
            let body = match r.len() {
                40 => *r,
                42 if r.starts_with("0x") => &r[2..],
                _ => return false,
            };
            body.bytes().all(|b| b.is_ascii_hexdigit())
        })
        .filter(|r| seen.insert(*r))
        .map(str::to_string)
        .collect()
}
