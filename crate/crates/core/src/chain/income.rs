use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::illicit::IllicitAddressSet;
use super::ledger::{active_period, AddressLedger};
use super::tx::{Satoshi, Transaction, Txid};
use crate::classify::Category;
use crate::extract::BtcAddress;
use crate::par::Exec;

/// Some input and some output belong to the illicit set.
pub fn is_internal(tx: &Transaction, illicit: &BTreeSet<String>) -> bool {
    tx.inputs.iter().any(|i| illicit.contains(&i.address)) && tx.outputs.iter().any(|o| illicit.contains(&o.address))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AddressIncome {
    pub address: BtcAddress,
    pub categories: BTreeSet<Category>,
    pub sites: usize,
    /// Received in non-internal transactions.
    pub income: Satoshi,
    /// Number of non-internal transactions paying the address.
    pub incoming_txs: usize,
    /// Everything the ledger says the address received.
    pub gross_received: Satoshi,
    pub internal_txs: usize,
    pub active_days: Option<u64>,
    /// Below the reporting threshold; left out of the totals.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub dormant: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryIncome {
    pub category: Category,
    /// Multi-category income divided equally across categories.
    pub split: Satoshi,
    /// Full income of every address carrying the category.
    pub unsplit: Satoshi,
    pub addresses: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncomeReport {
    pub total: Satoshi,
    pub gross_received: Satoshi,
    /// Distinct internal transactions seen across all ledgers.
    pub internal_txs: usize,
    pub min_received: Satoshi,
    pub per_address: Vec<AddressIncome>,
    /// One row per illicit category, in category order.
    pub per_category: Vec<CategoryIncome>,
}

/// Divide `amount` across `n` parts; the first `amount % n` parts get one
/// extra satoshi so the parts always sum to `amount`.
pub fn equal_split(amount: Satoshi, n: usize) -> Vec<Satoshi> {
    if n == 0 {
        return Vec::new();
    }
    let n64 = n as Satoshi;
    let (q, r) = (amount / n64, amount % n64);
    (0..n64).map(|i| q + Satoshi::from(i < r)).collect()
}

/// Income of the illicit set: for each address, the outputs it receives in
/// transactions of its own ledger that are not internal. Addresses whose
/// gross receipts fall below `min_received` are flagged dormant and left
/// out of the totals.
pub fn estimate_income(
    illicit: &IllicitAddressSet,
    ledgers: &[AddressLedger],
    min_received: Satoshi,
    exec: Exec,
) -> IncomeReport {
    let members = illicit.address_strings();
    let by_addr: BTreeMap<&BtcAddress, &AddressLedger> = ledgers.iter().map(|l| (&l.address, l)).collect();
    let entries: Vec<_> = illicit.iter().collect();

    let rows: Vec<(AddressIncome, Vec<Txid>)> = exec.map(&entries, |(address, entry)| {
        let mut row = AddressIncome {
            address: (*address).clone(),
            categories: entry.categories.clone(),
            sites: entry.sites.len(),
            income: 0,
            incoming_txs: 0,
            gross_received: 0,
            internal_txs: 0,
            active_days: None,
            dormant: false,
        };
        let mut internal = Vec::new();
        if let Some(l) = by_addr.get(address) {
            row.gross_received = l.received;
            row.active_days = active_period(l);
            for tx in &l.transactions {
                if is_internal(tx, &members) {
                    row.internal_txs += 1;
                    internal.push(tx.txid.clone());
                    continue;
                }
                let got = tx.received_by(address.as_str());
                if got > 0 || tx.outputs.iter().any(|o| o.address == address.as_str()) {
                    row.income += got;
                    row.incoming_txs += 1;
                }
            }
        }
        row.dormant = row.gross_received < min_received;
        (row, internal)
    });

    let mut internal_ids = BTreeSet::new();
    let mut per_address = Vec::with_capacity(rows.len());
    for (row, ids) in rows {
        internal_ids.extend(ids);
        per_address.push(row);
    }

    let mut split: BTreeMap<Category, (Satoshi, Satoshi, usize)> = BTreeMap::new();
    let (mut total, mut gross) = (0, 0);
    for row in per_address.iter().filter(|r| !r.dormant) {
        total += row.income;
        gross += row.gross_received;
        for (c, part) in row.categories.iter().zip(equal_split(row.income, row.categories.len())) {
            let e = split.entry(*c).or_default();
            e.0 += part;
            e.1 += row.income;
            e.2 += 1;
        }
    }
    let per_category = Category::ILLICIT
        .iter()
        .map(|c| {
            let (s, u, n) = split.get(c).copied().unwrap_or_default();
            CategoryIncome {
                category: *c,
                split: s,
                unsplit: u,
                addresses: n,
            }
        })
        .collect();

    IncomeReport {
        total,
        gross_received: gross,
        internal_txs: internal_ids.len(),
        min_received,
        per_address,
        per_category,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiCategoryAddress {
    pub address: BtcAddress,
    pub categories: BTreeSet<Category>,
    pub received: Satoshi,
}

/// Addresses used by sites of two or more categories, ordered by category
/// count (descending), ledger receipts (descending), then address.
pub fn multi_category(illicit: &IllicitAddressSet, ledgers: &[AddressLedger]) -> Vec<MultiCategoryAddress> {
    let received: BTreeMap<&BtcAddress, Satoshi> = ledgers.iter().map(|l| (&l.address, l.received)).collect();
    let mut out: Vec<MultiCategoryAddress> = illicit
        .iter()
        .filter(|(_, e)| e.categories.len() >= 2)
        .map(|(a, e)| MultiCategoryAddress {
            address: a.clone(),
            categories: e.categories.clone(),
            received: received.get(a).copied().unwrap_or(0),
        })
        .collect();
    out.sort_by(|a, b| {
        b.categories
            .len()
            .cmp(&a.categories.len())
            .then(b.received.cmp(&a.received))
            .then_with(|| a.address.cmp(&b.address))
    });
    out
}
