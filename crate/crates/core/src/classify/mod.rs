//! Site labelling in three phases: analyst ground truth, cosine similarity
//! against ground-truth pages, then TF-IDF keyword projection for the sites
//! still unlabeled.

mod category;
mod text;
mod tfidf;
mod vector;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, OnionDomain, PageKey};
use crate::error::Result;
use crate::html::PageText;
use crate::jsonl;
use crate::par::Exec;

pub use category::Category;
pub use text::{looks_english, preprocess, tokenize, TokenSequence, MIN_TOKEN_CHARS};
pub use tfidf::{build_feature_set, idf, tfidf_classify, tfidf_vectors, FeatureSet, TfIdfModel, KEYWORDS_PER_CATEGORY};
pub use vector::{cosine, TermVector};

pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Collapse page labels into one site label: no illicit label gives
/// `Other`, one distinct label is kept, two or more give `Shop`.
pub fn aggregate_site_label(page_labels: &[Category]) -> Category {
    let distinct: BTreeSet<Category> = page_labels.iter().copied().filter(|c| c.is_illicit()).collect();
    match distinct.len() {
        0 => Category::Other,
        1 => *distinct.iter().next().unwrap(),
        _ => Category::Shop,
    }
}

/// Highest score wins, ties go to the earlier category; below `threshold`
/// the result is `Other` (with the best score still reported).
pub fn pick_label(scores: &[(Category, f64)], threshold: f64) -> (Category, f64) {
    let mut best: Option<(Category, f64)> = None;
    for &(c, s) in scores {
        best = match best {
            None => Some((c, s)),
            Some((bc, bs)) if s > bs || (s == bs && c < bc) => Some((c, s)),
            keep => keep,
        };
    }
    match best {
        Some((c, s)) if s >= threshold => (c, s),
        Some((_, s)) => (Category::Other, s),
        None => (Category::Other, 0.0),
    }
}

/// One ground-truth row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruthRow {
    pub domain: OnionDomain,
    pub path: String,
    pub category: Category,
}

/// Analyst page labels. A page may carry several rows (multi-label).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundTruth {
    pages: BTreeMap<PageKey, BTreeSet<Category>>,
}

impl GroundTruth {
    /// Keep rows whose page exists in `corpus`; the rest are returned as
    /// warnings.
    pub fn from_rows(rows: impl IntoIterator<Item = GroundTruthRow>, corpus: &Corpus) -> (Self, Vec<String>) {
        let mut gt = GroundTruth::default();
        let mut warnings = Vec::new();
        for r in rows {
            let path = crate::corpus::normalize_path(&r.path);
            if corpus.page(&r.domain, &path).is_none() {
                warnings.push(format!("ground truth page {}{} not in corpus", r.domain, path));
                continue;
            }
            gt.pages
                .entry(PageKey { domain: r.domain, path })
                .or_default()
                .insert(r.category);
        }
        (gt, warnings)
    }

    pub fn load(path: &Path, corpus: &Corpus) -> Result<(Self, Vec<String>)> {
        let rows: Vec<GroundTruthRow> = jsonl::read(path)?;
        Ok(GroundTruth::from_rows(rows, corpus))
    }

    pub fn pages(&self) -> impl Iterator<Item = (&PageKey, &BTreeSet<Category>)> {
        self.pages.iter()
    }

    pub fn len(&self) -> usize {
        self.pages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pages.is_empty()
    }

    /// Site labels aggregated from page labels.
    pub fn site_labels(&self) -> BTreeMap<OnionDomain, Category> {
        let mut per_site: BTreeMap<OnionDomain, Vec<Category>> = BTreeMap::new();
        for (k, cats) in &self.pages {
            per_site
                .entry(k.domain.clone())
                .or_default()
                .extend(cats.iter().copied());
        }
        per_site
            .into_iter()
            .map(|(d, l)| (d, aggregate_site_label(&l)))
            .collect()
    }
}

/// Ground-truth pages as term-count vectors, grouped by illicit category.
#[derive(Debug, Clone, Default)]
pub struct ReferencePages {
    by_category: Vec<(Category, Vec<TermVector>)>,
}

impl ReferencePages {
    pub fn new(pages: impl IntoIterator<Item = (Category, TermVector)>) -> Self {
        let mut map: BTreeMap<Category, Vec<TermVector>> = BTreeMap::new();
        for (c, v) in pages {
            if c.is_illicit() {
                map.entry(c).or_default().push(v);
            }
        }
        ReferencePages {
            by_category: map.into_iter().collect(),
        }
    }

    /// Per-category maximum page-pair cosine.
    pub fn scores(&self, site_pages: &[TermVector]) -> Vec<(Category, f64)> {
        self.by_category
            .iter()
            .map(|(c, refs)| {
                let best = site_pages
                    .iter()
                    .flat_map(|p| refs.iter().map(move |r| cosine(p, r)))
                    .fold(0.0, f64::max);
                (*c, best)
            })
            .collect()
    }
}

/// Similarity phase for one site.
pub fn classify_by_similarity(site_pages: &[TermVector], refs: &ReferencePages, threshold: f64) -> (Category, f64) {
    pick_label(&refs.scores(site_pages), threshold)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelPhase {
    GroundTruth,
    Similarity,
    Tfidf,
    Unlabeled,
}

/// Final label of one site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteLabel {
    pub domain: OnionDomain,
    pub category: Category,
    pub phase: LabelPhase,
    /// Winning similarity (1.0 for ground truth); for unlabeled sites the
    /// best score from the last phase tried.
    pub score: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub non_english: bool,
}

#[derive(Debug, Clone)]
pub struct ClassifyConfig {
    pub threshold: f64,
    pub stopwords: BTreeSet<String>,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            threshold: DEFAULT_THRESHOLD,
            stopwords: crate::data::stopwords(),
        }
    }
}

struct SiteDoc {
    domain: OnionDomain,
    pages: Vec<TermVector>,
    tokens: Vec<String>,
    non_english: bool,
}

/// Label every site in the corpus.
///
/// Ground-truth sites keep their aggregated analyst label. Other sites go
/// through the similarity phase, and those it leaves as `Other` go through
/// the TF-IDF phase. A label assigned by an earlier phase is never revised.
pub fn classify_corpus(corpus: &Corpus, gt: &GroundTruth, cfg: &ClassifyConfig, exec: Exec) -> Result<Vec<SiteLabel>> {
    let tokens: Vec<(PageKey, TokenSequence, bool)> = exec.map(corpus.pages(), |p| {
        let text = PageText::parse(&p.html).visible_text();
        (p.key(), tokenize(&text, &cfg.stopwords), !looks_english(&text))
    });
    let by_key: BTreeMap<&PageKey, &TokenSequence> = tokens.iter().map(|(k, t, _)| (k, t)).collect();

    let mut category_docs: BTreeMap<Category, Vec<String>> = BTreeMap::new();
    let mut refs = Vec::new();
    for (key, cats) in gt.pages() {
        let toks = by_key[key];
        for c in cats {
            if c.is_illicit() {
                category_docs.entry(*c).or_default().extend(toks.iter().cloned());
                refs.push((*c, TermVector::from_tokens(toks)));
            }
        }
    }
    let refs = ReferencePages::new(refs);
    let model = build_feature_set(&category_docs)?;
    let gt_sites = gt.site_labels();

    let mut sites: Vec<SiteDoc> = Vec::new();
    for (key, toks, non_english) in &tokens {
        match sites.last_mut() {
            Some(s) if s.domain == key.domain => {
                s.pages.push(TermVector::from_tokens(toks));
                s.tokens.extend(toks.iter().cloned());
                s.non_english |= *non_english;
            }
            _ => sites.push(SiteDoc {
                domain: key.domain.clone(),
                pages: vec![TermVector::from_tokens(toks)],
                tokens: toks.clone(),
                non_english: *non_english,
            }),
        }
    }

    let labels = exec.map(&sites, |site| {
        if site.non_english {
            log::warn!("{}: page text does not look English; classifying as is", site.domain);
        }
        let label = |category, phase, score| SiteLabel {
            domain: site.domain.clone(),
            category,
            phase,
            score,
            non_english: site.non_english,
        };
        if let Some(c) = gt_sites.get(&site.domain) {
            return label(*c, LabelPhase::GroundTruth, 1.0);
        }
        let (c, s) = classify_by_similarity(&site.pages, &refs, cfg.threshold);
        if c.is_illicit() {
            return label(c, LabelPhase::Similarity, s);
        }
        let (c, s) = tfidf_classify(&model.site_vector(&site.tokens), &model, cfg.threshold);
        if c.is_illicit() {
            label(c, LabelPhase::Tfidf, s)
        } else {
            label(Category::Other, LabelPhase::Unlabeled, s)
        }
    });
    Ok(labels)
}

pub fn write_labels(path: &Path, labels: &[SiteLabel]) -> Result<()> {
    jsonl::write(path, labels)
}

pub fn read_labels(path: &Path) -> Result<Vec<SiteLabel>> {
    jsonl::read(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tv(pairs: &[(&str, f64)]) -> TermVector {
        TermVector::from_weights(pairs.iter().map(|(k, w)| (k.to_string(), *w)))
    }

    #[test]
    fn aggregation() {
        use Category::*;
        assert_eq!(aggregate_site_label(&[Drugs, Drugs, Other]), Drugs);
        assert_eq!(aggregate_site_label(&[Drugs, Weapons]), Shop);
        assert_eq!(aggregate_site_label(&[]), Other);
        assert_eq!(aggregate_site_label(&[Other, Other]), Other);
    }

    #[test]
    fn pick_label_rules() {
        use Category::*;
        assert_eq!(pick_label(&[(CloneCard, 0.7), (Shop, 0.6)], 0.5), (CloneCard, 0.7));
        assert_eq!(pick_label(&[(Shop, 0.6), (CloneCard, 0.6)], 0.5), (CloneCard, 0.6));
        assert_eq!(pick_label(&[(Drugs, 0.49)], 0.5), (Other, 0.49));
        assert_eq!(pick_label(&[(Drugs, 0.5)], 0.5), (Drugs, 0.5));
        assert_eq!(pick_label(&[], 0.5), (Other, 0.0));
    }

    #[test]
    fn similarity_uses_max_over_reference_pages() {
        let refs = ReferencePages::new(vec![
            (Category::CloneCard, tv(&[("cards", 1.0), ("paypal", 1.0)])),
            (Category::CloneCard, tv(&[("western", 1.0), ("union", 1.0)])),
            (Category::Drugs, tv(&[("drug", 1.0)])),
            (Category::Other, tv(&[("cards", 1.0), ("paypal", 1.0)])),
        ]);
        let site = vec![tv(&[("western", 1.0), ("union", 1.0)])];
        let (c, score) = classify_by_similarity(&site, &refs, 0.5);
        assert_eq!(c, Category::CloneCard);
        assert!((score - 1.0).abs() < 1e-12);
        let unrelated = vec![tv(&[("weather", 1.0)])];
        assert_eq!(classify_by_similarity(&unrelated, &refs, 0.5).0, Category::Other);
    }
}
