use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::alnum_runs;
use super::base58;

pub const P2PKH_VERSION: u8 = 0x00;
pub const P2SH_VERSION: u8 = 0x05;

pub const MIN_CANDIDATE_LEN: usize = 25;
pub const MAX_CANDIDATE_LEN: usize = 39;

/// 1 version byte, 20 hash bytes, 4 checksum bytes.
const DECODED_LEN: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BtcReject {
    BadAlphabet,
    BadChecksum,
    BadVersion,
    BadLength,
}

impl BtcReject {
    pub fn as_str(self) -> &'static str {
        match self {
            BtcReject::BadAlphabet => "bad-alphabet",
            BtcReject::BadChecksum => "bad-checksum",
            BtcReject::BadVersion => "bad-version",
            BtcReject::BadLength => "bad-length",
        }
    }
}

impl fmt::Display for BtcReject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A Base58Check P2PKH or P2SH address.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct BtcAddress {
    text: String,
    #[serde(skip)]
    version: u8,
}

impl BtcAddress {
    pub fn parse(s: &str) -> Result<Self, BtcReject> {
        validate_btc(s)
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn version(&self) -> u8 {
        self.version
    }

    /// The 21-byte version + hash160 payload.
    pub fn payload(&self) -> Vec<u8> {
        let mut bytes = base58::decode(&self.text).expect("validated");
        bytes.truncate(DECODED_LEN - 4);
        bytes
    }
}

impl TryFrom<String> for BtcAddress {
    type Error = BtcReject;
    fn try_from(s: String) -> Result<Self, BtcReject> {
        validate_btc(&s)
    }
}

impl From<BtcAddress> for String {
    fn from(a: BtcAddress) -> String {
        a.text
    }
}

impl fmt::Display for BtcAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

/// Alphanumeric runs of 25 to 39 characters, delimited on both sides by
/// non-alphanumerics, in document order and without repeats.
pub fn find_btc_candidates(text: &str) -> Vec<String> {
    let mut seen = HashSet::new();
    alnum_runs(text)
        .filter(|r| (MIN_CANDIDATE_LEN..=MAX_CANDIDATE_LEN).contains(&r.len()))
        .filter(|r| seen.insert(*r))
        .map(str::to_string)
        .collect()
}

/// Accept iff the string is Base58, decodes to 25 bytes, carries a valid
/// double-SHA-256 checksum, and has version 0x00 or 0x05.
pub fn validate_btc(candidate: &str) -> Result<BtcAddress, BtcReject> {
    let bytes = base58::decode(candidate).map_err(|_| BtcReject::BadAlphabet)?;
    if bytes.len() != DECODED_LEN {
        return Err(BtcReject::BadLength);
    }
    let (payload, check) = bytes.split_at(DECODED_LEN - 4);
    if base58::checksum(payload) != check {
        return Err(BtcReject::BadChecksum);
    }
    let version = payload[0];
    if version != P2PKH_VERSION && version != P2SH_VERSION {
        return Err(BtcReject::BadVersion);
    }
    Ok(BtcAddress {
        text: candidate.to_string(),
        version,
    })
}
