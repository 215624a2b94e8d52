use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::OnionDomain;

pub const DEFAULT_PREFIX_LEN: usize = 7;

/// Onion names sharing a human-readable prefix. Report-only.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VanityGroup {
    /// Longest prefix common to every member.
    pub prefix: String,
    pub domains: Vec<OnionDomain>,
}

/// Group names by their first `prefix_len` characters and keep groups of
/// two or more.
pub fn vanity_groups<'a>(domains: impl IntoIterator<Item = &'a OnionDomain>, prefix_len: usize) -> Vec<VanityGroup> {
    let mut by_prefix: BTreeMap<&str, Vec<&OnionDomain>> = BTreeMap::new();
    for d in domains {
        let label = d.label();
        if prefix_len > 0 && label.len() >= prefix_len {
            by_prefix.entry(&label[..prefix_len]).or_default().push(d);
        }
    }
    by_prefix
        .into_values()
        .filter_map(|mut ds| {
            ds.sort();
            ds.dedup();
            if ds.len() < 2 {
                return None;
            }
            let first = ds[0].label();
            let common = ds
                .iter()
                .map(|d| first.bytes().zip(d.label().bytes()).take_while(|(a, b)| a == b).count())
                .min()
                .unwrap_or(0);
            Some(VanityGroup {
                prefix: first[..common].to_string(),
                domains: ds.into_iter().cloned().collect(),
            })
        })
        .collect()
}
