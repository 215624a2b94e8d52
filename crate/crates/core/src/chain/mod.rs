//! Owner-linked payment addresses, their transaction histories, and the
//! income and activity statistics derived from them.
//!
//! Amounts are integer satoshis everywhere; [`format_btc`] is only used at
//! the reporting edge.

mod explorer;
mod illicit;
mod income;
mod ledger;
mod tx;

pub use explorer::{
    fetch_all, fetch_transactions, read_ledger_dir, write_ledger_dir, ExplorerAdapter, ExplorerError, FetchFailure,
    FixtureExplorer, HttpExplorer, RetryPolicy, TxPage,
};
pub use illicit::{
    filter_illicit_addresses, read_annotations, removal_reason, AddressAnnotation, FilterReport, IllicitAddressSet,
    IllicitEntry, IllicitRow, Removal, RemovalReason, Zone,
};
pub use income::{
    equal_split, estimate_income, is_internal, multi_category, AddressIncome, CategoryIncome, IncomeReport,
    MultiCategoryAddress,
};
pub use ledger::{active_period, AddressLedger};
pub use tx::{format_btc, Satoshi, Transaction, TxIo, Txid, SATOSHI_PER_BTC};

#[cfg(test)]
pub(crate) use ledger::tests as ledger_tests;
