use std::collections::{BTreeSet, HashSet, VecDeque};

use super::{extract_onion_links, Corpus, OnionDomain};

/// Source of page bytes for the crawler. The shipped implementation replays
/// a [`Corpus`]; a live fetcher can implement the same interface.
pub trait FetchAdapter {
    /// Paths known for `domain`, or empty when the domain is unreachable.
    fn paths(&self, domain: &OnionDomain) -> Vec<String>;

    fn get(&self, domain: &OnionDomain, path: &str) -> Option<Vec<u8>>;
}

impl FetchAdapter for Corpus {
    fn paths(&self, domain: &OnionDomain) -> Vec<String> {
        self.pages_of(domain).map(|p| p.path.clone()).collect()
    }

    fn get(&self, domain: &OnionDomain, path: &str) -> Option<Vec<u8>> {
        self.page(domain, path).map(|p| p.html.clone())
    }
}

/// FIFO queue of domains still to visit plus the visited set.
#[derive(Debug, Default, Clone)]
pub struct Frontier {
    queue: VecDeque<OnionDomain>,
    queued: HashSet<OnionDomain>,
    visited: Vec<OnionDomain>,
    seen: HashSet<OnionDomain>,
}

impl Frontier {
    /// Enqueue `domain` unless it is already queued or visited.
    pub fn push(&mut self, domain: OnionDomain) -> bool {
        if self.seen.contains(&domain) || self.queued.contains(&domain) {
            return false;
        }
        self.queued.insert(domain.clone());
        self.queue.push_back(domain);
        true
    }

    /// Move the next queued domain to the visited set.
    pub fn pop(&mut self) -> Option<OnionDomain> {
        let d = self.queue.pop_front()?;
        self.queued.remove(&d);
        self.seen.insert(d.clone());
        self.visited.push(d.clone());
        Some(d)
    }

    pub fn queue(&self) -> impl Iterator<Item = &OnionDomain> {
        self.queue.iter()
    }

    /// Visited domains in visit order.
    pub fn visited(&self) -> &[OnionDomain] {
        &self.visited
    }

    pub fn is_visited(&self, d: &OnionDomain) -> bool {
        self.seen.contains(d)
    }
}

/// Breadth-first replay of repeated link discovery until no new domain
/// appears. Seeds are enqueued in lexicographic order and the links found
/// on one domain are enqueued in lexicographic order. Only domains the
/// fetcher can serve are followed; seeds are always part of the result.
///
/// Returns domains in visit order.
pub fn crawl<F: FetchAdapter + ?Sized>(seeds: &BTreeSet<OnionDomain>, fetcher: &F) -> Vec<OnionDomain> {
    let mut frontier = Frontier::default();
    for s in seeds {
        frontier.push(s.clone());
    }
    while let Some(domain) = frontier.pop() {
        let mut found = BTreeSet::new();
        for path in fetcher.paths(&domain) {
            if let Some(html) = fetcher.get(&domain, &path) {
                let page = super::PageRecord {
                    domain: domain.clone(),
                    path,
                    html,
                    fetched_at: chrono::DateTime::UNIX_EPOCH,
                };
                found.extend(extract_onion_links(&page));
            }
        }
        for next in found {
            if !fetcher.paths(&next).is_empty() {
                frontier.push(next);
            }
        }
    }
    frontier.visited
}

/// Set of domains reachable from `seeds` through the corpus link graph,
/// seeds included.
pub fn frontier_crawl(seeds: &BTreeSet<OnionDomain>, corpus: &Corpus) -> BTreeSet<OnionDomain> {
    crawl(seeds, corpus).into_iter().collect()
}
