use std::collections::{BTreeMap, BTreeSet};

use crate::chain::Transaction;

/// Minimum participants for the CoinJoin pattern.
pub const MIN_MIX_PARTICIPANTS: usize = 3;

/// Approximate JoinMarket signature: at least `min` inputs from at least
/// `min` distinct addresses, and at least `min` outputs carrying exactly
/// the same non-zero value.
pub fn detect_mixing_with(tx: &Transaction, min: usize) -> bool {
    if tx.inputs.len() < min {
        return false;
    }
    let distinct: BTreeSet<&str> = tx.inputs.iter().map(|i| i.address.as_str()).collect();
    if distinct.len() < min {
        return false;
    }
    let mut by_value: BTreeMap<u64, usize> = BTreeMap::new();
    for o in tx.outputs.iter().filter(|o| o.value > 0) {
        *by_value.entry(o.value).or_default() += 1;
    }
    by_value.values().any(|&n| n >= min)
}

pub fn detect_mixing(tx: &Transaction) -> bool {
    detect_mixing_with(tx, MIN_MIX_PARTICIPANTS)
}
