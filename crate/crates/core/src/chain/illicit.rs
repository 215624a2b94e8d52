use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classify::{Category, SiteLabel};
use crate::corpus::OnionDomain;
use crate::error::Result;
use crate::extract::{AddressKind, AddressRecord, BtcAddress};
use crate::jsonl;

/// Where on a site an address appears.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Zone {
    /// An item offered for sale (e.g. a wallet listing).
    Listing,
    Forum,
    Payment,
    /// Not a payment address at all, e.g. an address-shaped hash.
    Other,
}

/// Analyst note about one address on one site.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AddressAnnotation {
    pub domain: OnionDomain,
    pub address: String,
    pub zone: Zone,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    /// The listed address has transacted with the site's payment address.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub prior_tx: bool,
}

pub fn read_annotations(path: &Path) -> Result<Vec<AddressAnnotation>> {
    jsonl::read(path)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RemovalReason {
    PrivateKeyListing,
    PriorTransaction,
    ForumPost,
    NotPayment,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Removal {
    pub domain: OnionDomain,
    pub address: BtcAddress,
    pub reason: RemovalReason,
}

/// Decision for one (site, address) pair; `None` keeps the address.
pub fn removal_reason(category: Category, annotation: Option<&AddressAnnotation>) -> Option<RemovalReason> {
    let a = annotation?;
    match a.zone {
        Zone::Listing if category == Category::PrivateKey => Some(RemovalReason::PrivateKeyListing),
        Zone::Listing if a.prior_tx => Some(RemovalReason::PriorTransaction),
        Zone::Forum => Some(RemovalReason::ForumPost),
        Zone::Other => Some(RemovalReason::NotPayment),
        Zone::Listing | Zone::Payment => None,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IllicitEntry {
    pub sites: BTreeSet<OnionDomain>,
    pub categories: BTreeSet<Category>,
    /// At least one retaining site had no annotation for this address.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub unreviewed: bool,
}

/// Owner-linked Bitcoin addresses of illicit sites.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IllicitAddressSet {
    entries: BTreeMap<BtcAddress, IllicitEntry>,
}

/// One line of the on-disk form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IllicitRow {
    pub address: BtcAddress,
    #[serde(flatten)]
    pub entry: IllicitEntry,
}

impl IllicitAddressSet {
    pub fn insert(&mut self, address: BtcAddress, site: OnionDomain, category: Category, unreviewed: bool) {
        let e = self.entries.entry(address).or_default();
        e.sites.insert(site);
        e.categories.insert(category);
        e.unreviewed |= unreviewed;
    }

    pub fn contains(&self, address: &str) -> bool {
        // BtcAddress orders by its text, so a borrowed lookup is not
        // available; parse instead.
        BtcAddress::parse(address).is_ok_and(|a| self.entries.contains_key(&a))
    }

    pub fn get(&self, address: &BtcAddress) -> Option<&IllicitEntry> {
        self.entries.get(address)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BtcAddress, &IllicitEntry)> {
        self.entries.iter()
    }

    pub fn addresses(&self) -> impl Iterator<Item = &BtcAddress> {
        self.entries.keys()
    }

    /// Plain-text membership set, convenient for transaction scans.
    pub fn address_strings(&self) -> BTreeSet<String> {
        self.entries.keys().map(|a| a.to_string()).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn rows(&self) -> Vec<IllicitRow> {
        self.entries
            .iter()
            .map(|(a, e)| IllicitRow {
                address: a.clone(),
                entry: e.clone(),
            })
            .collect()
    }

    pub fn from_rows(rows: impl IntoIterator<Item = IllicitRow>) -> Self {
        let mut set = IllicitAddressSet::default();
        for r in rows {
            let e = set.entries.entry(r.address).or_default();
            e.sites.extend(r.entry.sites);
            e.categories.extend(r.entry.categories);
            e.unreviewed |= r.entry.unreviewed;
        }
        set
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        jsonl::write(path, &self.rows())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(IllicitAddressSet::from_rows(jsonl::read::<IllicitRow>(path)?))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FilterReport {
    pub removed: Vec<Removal>,
    /// Annotation rows that match no extracted (site, address) pair.
    pub unmatched_annotations: usize,
}

/// Keep the valid Bitcoin addresses found on sites with an illicit label,
/// minus those the annotations tie to visitors, listings or non-payment
/// strings. Unannotated addresses are kept and flagged `unreviewed`.
pub fn filter_illicit_addresses(
    labels: &[SiteLabel],
    records: &[AddressRecord],
    annotations: &[AddressAnnotation],
) -> (IllicitAddressSet, FilterReport) {
    let label_of: BTreeMap<&OnionDomain, Category> = labels.iter().map(|l| (&l.domain, l.category)).collect();
    let notes: BTreeMap<(&OnionDomain, &str), &AddressAnnotation> = annotations
        .iter()
        .map(|a| ((&a.domain, a.address.as_str()), a))
        .collect();

    let mut pairs: BTreeSet<(OnionDomain, BtcAddress)> = BTreeSet::new();
    for r in records {
        if r.kind != AddressKind::Btc || !r.valid {
            continue;
        }
        if let Ok(a) = BtcAddress::parse(&r.value) {
            pairs.insert((r.domain.clone(), a));
        }
    }

    let mut set = IllicitAddressSet::default();
    let mut report = FilterReport::default();
    let mut matched = 0;
    for (domain, address) in pairs {
        let Some(&category) = label_of.get(&domain) else {
            continue;
        };
        if !category.is_illicit() {
            continue;
        }
        let note = notes.get(&(&domain, address.as_str())).copied();
        matched += note.is_some() as usize;
        match removal_reason(category, note) {
            Some(reason) => report.removed.push(Removal {
                domain,
                address,
                reason,
            }),
            None => set.insert(address, domain, category, note.is_none()),
        }
    }
    report.unmatched_annotations = notes.len() - matched;
    (set, report)
}
