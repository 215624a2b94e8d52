use std::collections::BTreeSet;
use std::sync::OnceLock;

use regex::Regex;

use super::{OnionDomain, PageRecord};
use crate::html::PageText;

fn onion_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)[a-z0-9]+\.onion").unwrap())
}

fn scan(text: &str, out: &mut BTreeSet<OnionDomain>) {
    for m in onion_re().find_iter(text) {
        let followed_by_alnum = text[m.end()..]
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_alphanumeric());
        if followed_by_alnum {
            continue;
        }
        if let Ok(d) = OnionDomain::parse(m.as_str()) {
            out.insert(d);
        }
    }
}

/// Onion domains referenced from `href`/`src` attributes and visible text.
pub fn onion_links_in(text: &PageText) -> BTreeSet<OnionDomain> {
    let mut out = BTreeSet::new();
    for target in text.link_targets() {
        scan(target, &mut out);
    }
    for segment in &text.visible {
        scan(segment, &mut out);
    }
    out
}

pub fn extract_onion_links(page: &PageRecord) -> BTreeSet<OnionDomain> {
    onion_links_in(&PageText::parse(&page.html))
}
