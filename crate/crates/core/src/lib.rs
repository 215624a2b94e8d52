//! Batch forensics over offline onion-site snapshots.
//!
//! The pipeline ingests a snapshot corpus, extracts and validates payment
//! and email addresses, labels sites by illicit category, filters
//! owner-linked Bitcoin addresses, analyses their ledgers, and clusters
//! sites into campaigns.

pub mod chain;
pub mod classify;
pub mod cluster;
pub mod corpus;
pub mod data;
pub mod error;
pub mod extract;
pub mod html;
pub mod jsonl;
pub mod par;
pub mod ratelimit;
pub mod report;
#[cfg(test)]
mod testutil;
pub mod trace;

pub use error::{Error, Result};
