use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::chain::{
    estimate_income, format_btc, multi_category, AddressLedger, IllicitAddressSet, IncomeReport, Satoshi,
};
use crate::classify::{Category, SiteLabel};
use crate::cluster::{vanity_groups, Campaign, PhaseTrace, VanityGroup};
use crate::corpus::OnionDomain;
use crate::error::{Error, Result};
use crate::extract::{AddressKind, AddressRecord};
use crate::par::Exec;

/// Stage outputs a report is built from; `None` marks a stage that has
/// not run.
#[derive(Debug, Clone, Default)]
pub struct RunArtifacts {
    /// Page count per site.
    pub site_pages: Option<BTreeMap<OnionDomain, usize>>,
    pub records: Option<Vec<AddressRecord>>,
    pub labels: Option<Vec<SiteLabel>>,
    pub illicit: Option<IllicitAddressSet>,
    pub ledgers: Option<Vec<AddressLedger>>,
    pub trace: Option<Vec<PhaseTrace>>,
    pub campaigns: Option<Vec<Campaign>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableOptions {
    pub top_n: usize,
    pub min_received: Satoshi,
    pub vanity_prefix: usize,
}

impl Default for TableOptions {
    fn default() -> Self {
        TableOptions {
            top_n: 10,
            min_received: 0,
            vanity_prefix: crate::cluster::DEFAULT_PREFIX_LEN,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryRow {
    pub category: String,
    pub onions: usize,
    pub pages: usize,
    pub btc_addresses: usize,
    pub illicit_addresses: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AddressRow {
    pub rank: usize,
    pub address: String,
    pub categories: String,
    pub sites: usize,
    pub incoming_txs: usize,
    pub btc_received: String,
    pub received_sat: Satoshi,
    pub active_days: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub phase: String,
    pub clusters: usize,
    pub clusters_with_btc: usize,
    pub onions: usize,
    pub campaign_onions: usize,
    pub btc_addresses: usize,
    pub emails: usize,
    pub ips: usize,
    pub registrants: usize,
    pub merges: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignRow {
    pub id: usize,
    pub sample_sites: String,
    pub sites: usize,
    pub categories: String,
    pub btc_addresses: usize,
    pub emails: usize,
    pub urls: usize,
    pub ips: usize,
    pub incoming_txs: usize,
    pub btc_received: String,
    pub received_sat: Satoshi,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub sites: usize,
    pub illicit_sites: usize,
    pub pages: usize,
    pub btc_addresses: usize,
    pub illicit_addresses: usize,
    pub unreviewed_addresses: usize,
    pub multi_category_addresses: usize,
    pub dormant_addresses: usize,
    pub internal_txs: usize,
    pub income_sat: Satoshi,
    pub income_btc: String,
    pub gross_received_sat: Satoshi,
    pub campaigns: usize,
    pub campaign_income_sat: Satoshi,
    pub campaign_income_btc: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tables {
    pub summary: Summary,
    pub categories: Vec<CategoryRow>,
    pub top_addresses: Vec<AddressRow>,
    pub phases: Vec<PhaseRow>,
    pub campaigns: Vec<CampaignRow>,
    pub income_by_category: Vec<crate::chain::CategoryIncome>,
    pub vanity_groups: Vec<VanityGroup>,
}

fn need<'a, T>(x: &'a Option<T>, stage: &'static str) -> Result<&'a T> {
    x.as_ref().ok_or(Error::StageNotRun(stage))
}

fn category_names(cats: &BTreeSet<Category>) -> String {
    cats.iter().map(|c| c.display_name()).collect::<Vec<_>>().join(", ")
}

pub const MULTI_ROW: &str = "Multi-Categories";
pub const TOTAL_ROW: &str = "Total";

/// Per-category site, page and address counts: one row per category in
/// category order, then a multi-category row and a total. Addresses seen
/// under two or more categories are counted only in the multi-category
/// row, so every column sums to its total.
pub fn category_table(
    site_pages: &BTreeMap<OnionDomain, usize>,
    labels: &[SiteLabel],
    records: &[AddressRecord],
    illicit: &IllicitAddressSet,
) -> Vec<CategoryRow> {
    let label: BTreeMap<&OnionDomain, Category> = labels.iter().map(|l| (&l.domain, l.category)).collect();
    let cat_of = |d: &OnionDomain| label.get(d).copied().unwrap_or(Category::Other);
    let mut rows: Vec<CategoryRow> = Category::ALL
        .iter()
        .map(|c| CategoryRow {
            category: c.display_name().to_string(),
            ..CategoryRow::default()
        })
        .collect();
    let mut multi = CategoryRow {
        category: MULTI_ROW.into(),
        ..CategoryRow::default()
    };

    for (d, pages) in site_pages {
        let r = &mut rows[cat_of(d).index()];
        r.onions += 1;
        r.pages += pages;
    }
    let mut addr_cats: BTreeMap<&str, BTreeSet<Category>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.kind == AddressKind::Btc && r.valid) {
        addr_cats.entry(&r.value).or_default().insert(cat_of(&r.domain));
    }
    for cats in addr_cats.values() {
        match cats.len() {
            1 => rows[cats.first().unwrap().index()].btc_addresses += 1,
            _ => multi.btc_addresses += 1,
        }
    }
    for (_, e) in illicit.iter() {
        match e.categories.len() {
            0 => {}
            1 => rows[e.categories.first().unwrap().index()].illicit_addresses += 1,
            _ => multi.illicit_addresses += 1,
        }
    }
    rows.push(multi);
    let total = rows.iter().fold(
        CategoryRow {
            category: TOTAL_ROW.into(),
            ..CategoryRow::default()
        },
        |mut t, r| {
            t.onions += r.onions;
            t.pages += r.pages;
            t.btc_addresses += r.btc_addresses;
            t.illicit_addresses += r.illicit_addresses;
            t
        },
    );
    rows.push(total);
    rows
}

/// Most profitable addresses by non-internal income.
pub fn address_table(income: &IncomeReport, top_n: usize) -> Vec<AddressRow> {
    let mut rows: Vec<_> = income.per_address.iter().filter(|a| !a.dormant).collect();
    rows.sort_by(|a, b| b.income.cmp(&a.income).then_with(|| a.address.cmp(&b.address)));
    rows.into_iter()
        .take(top_n)
        .enumerate()
        .map(|(i, a)| AddressRow {
            rank: i + 1,
            address: a.address.to_string(),
            categories: category_names(&a.categories),
            sites: a.sites,
            incoming_txs: a.incoming_txs,
            btc_received: format_btc(a.income),
            received_sat: a.income,
            active_days: a.active_days,
        })
        .collect()
}

pub fn phase_table(trace: &[PhaseTrace]) -> Vec<PhaseRow> {
    trace
        .iter()
        .map(|t| PhaseRow {
            phase: t.phase.title().to_string(),
            clusters: t.clusters,
            clusters_with_btc: t.clusters_with_btc,
            onions: t.clustered_sites,
            campaign_onions: t.campaign_sites,
            btc_addresses: t.btc_addresses,
            emails: t.emails,
            ips: t.ips,
            registrants: t.registrants,
            merges: t.merges,
        })
        .collect()
}

pub fn campaign_table(campaigns: &[Campaign], top_n: usize) -> Vec<CampaignRow> {
    campaigns
        .iter()
        .take(top_n)
        .map(|c| {
            let mut sample: Vec<&str> = c.sites.iter().take(2).map(|s| s.as_str()).collect();
            if c.sites.len() > 2 {
                sample.push("...");
            }
            CampaignRow {
                id: c.id,
                sample_sites: sample.join(", "),
                sites: c.sites.len(),
                categories: category_names(&c.categories),
                btc_addresses: c.btc_addresses.len(),
                emails: c.emails.len(),
                urls: c.urls.len(),
                ips: c.ips.len(),
                incoming_txs: c.incoming_txs,
                btc_received: format_btc(c.received),
                received_sat: c.received,
            }
        })
        .collect()
}

/// Build every table. Fails with [`Error::StageNotRun`] naming the first
/// stage whose output is missing.
pub fn emit_tables(art: &RunArtifacts, opts: &TableOptions) -> Result<Tables> {
    let site_pages = need(&art.site_pages, "ingest")?;
    let records = need(&art.records, "extract")?;
    let labels = need(&art.labels, "classify")?;
    let illicit = need(&art.illicit, "filter")?;
    let ledgers = need(&art.ledgers, "fetch-tx")?;
    let trace = need(&art.trace, "cluster")?;
    let campaigns = need(&art.campaigns, "cluster")?;

    let income = estimate_income(illicit, ledgers, opts.min_received, Exec::Sequential);
    let categories = category_table(site_pages, labels, records, illicit);
    let btc: BTreeSet<&str> = records
        .iter()
        .filter(|r| r.kind == AddressKind::Btc && r.valid)
        .map(|r| r.value.as_str())
        .collect();
    let campaign_income: Satoshi = campaigns.iter().map(|c| c.received).sum();
    let summary = Summary {
        sites: site_pages.len(),
        illicit_sites: labels.iter().filter(|l| l.category.is_illicit()).count(),
        pages: site_pages.values().sum(),
        btc_addresses: btc.len(),
        illicit_addresses: illicit.len(),
        unreviewed_addresses: illicit.iter().filter(|(_, e)| e.unreviewed).count(),
        multi_category_addresses: multi_category(illicit, ledgers).len(),
        dormant_addresses: income.per_address.iter().filter(|a| a.dormant).count(),
        internal_txs: income.internal_txs,
        income_sat: income.total,
        income_btc: format_btc(income.total),
        gross_received_sat: income.gross_received,
        campaigns: campaigns.len(),
        campaign_income_sat: campaign_income,
        campaign_income_btc: format_btc(campaign_income),
    };
    Ok(Tables {
        summary,
        categories,
        top_addresses: address_table(&income, opts.top_n),
        phases: phase_table(trace),
        campaigns: campaign_table(campaigns, opts.top_n),
        vanity_groups: vanity_groups(site_pages.keys(), opts.vanity_prefix),
        income_by_category: income.per_category,
    })
}

pub const CATEGORY_CSV: &str = "categories.csv";
pub const ADDRESS_CSV: &str = "top_addresses.csv";
pub const PHASE_CSV: &str = "phases.csv";
pub const CAMPAIGN_CSV: &str = "campaigns.csv";
pub const TABLES_JSON: &str = "tables.json";

fn output_error(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Output {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| output_error(path, e))?;
    }
    let bytes = w.into_inner().map_err(|e| output_error(path, e))?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Write the four CSV tables and `tables.json` into `dir`.
pub fn write_tables(dir: &Path, t: &Tables) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_csv(&dir.join(CATEGORY_CSV), &t.categories)?;
    write_csv(&dir.join(ADDRESS_CSV), &t.top_addresses)?;
    write_csv(&dir.join(PHASE_CSV), &t.phases)?;
    write_csv(&dir.join(CAMPAIGN_CSV), &t.campaigns)?;
    crate::jsonl::write_json(&dir.join(TABLES_JSON), t)
}
