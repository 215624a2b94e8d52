use std::collections::{BTreeMap, BTreeSet};

use super::vector::{cosine, TermVector};
use super::{pick_label, Category};
use crate::error::{Error, Result};

pub const KEYWORDS_PER_CATEGORY: usize = 20;

/// Smoothed inverse document frequency: `ln(n_docs / df) + 1`.
pub fn idf(n_docs: usize, df: usize) -> f64 {
    (n_docs as f64 / df as f64).ln() + 1.0
}

/// Per-document `raw count * idf` vectors and the idf table, for any
/// number of documents.
pub fn tfidf_vectors<S: AsRef<str>>(docs: &[Vec<S>]) -> (BTreeMap<String, f64>, Vec<TermVector>) {
    let counts: Vec<TermVector> = docs.iter().map(|d| TermVector::from_tokens(d)).collect();
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    for c in &counts {
        for (w, _) in c.iter() {
            *df.entry(w.to_string()).or_default() += 1;
        }
    }
    let n = docs.len();
    let idf_table: BTreeMap<String, f64> = df.into_iter().map(|(w, d)| (w, idf(n, d))).collect();
    let vectors = counts
        .iter()
        .map(|c| TermVector::from_weights(c.iter().map(|(w, tf)| (w.to_string(), tf * idf_table[w]))))
        .collect();
    (idf_table, vectors)
}

/// Union of the per-category top keywords.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FeatureSet(BTreeSet<String>);

impl FeatureSet {
    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }
}

/// Category documents turned into TF-IDF vectors, their top keywords, and
/// the merged feature set.
#[derive(Debug, Clone)]
pub struct TfIdfModel {
    idf: BTreeMap<String, f64>,
    keywords: Vec<(Category, Vec<(String, f64)>)>,
    feature_set: FeatureSet,
    projected: Vec<(Category, TermVector)>,
}

/// Build the model from one token document per illicit category.
///
/// All twelve illicit categories must have a non-empty document.
pub fn build_feature_set(category_docs: &BTreeMap<Category, Vec<String>>) -> Result<TfIdfModel> {
    let present: Vec<Category> = Category::ILLICIT
        .iter()
        .copied()
        .filter(|c| category_docs.get(c).is_some_and(|d| !d.is_empty()))
        .collect();
    if present.len() < Category::ILLICIT.len() {
        let missing: Vec<&str> = Category::ILLICIT
            .iter()
            .filter(|c| !present.contains(c))
            .map(|c| c.as_str())
            .collect();
        return Err(Error::Config(format!(
            "TF-IDF needs a non-empty ground-truth document for all 12 categories; missing: {}",
            missing.join(", ")
        )));
    }
    let docs: Vec<&Vec<String>> = present.iter().map(|c| &category_docs[c]).collect();
    let docs: Vec<Vec<&str>> = docs.iter().map(|d| d.iter().map(String::as_str).collect()).collect();
    let (idf, vectors) = tfidf_vectors(&docs);

    let keywords: Vec<(Category, Vec<(String, f64)>)> = present
        .iter()
        .zip(&vectors)
        .map(|(c, v)| (*c, v.top_k(KEYWORDS_PER_CATEGORY)))
        .collect();
    let feature_set = FeatureSet(
        keywords
            .iter()
            .flat_map(|(_, k)| k.iter().map(|(w, _)| w.clone()))
            .collect(),
    );
    let projected = present
        .iter()
        .zip(&vectors)
        .map(|(c, v)| (*c, v.restrict(|w| feature_set.contains(w))))
        .collect();
    Ok(TfIdfModel {
        idf,
        keywords,
        feature_set,
        projected,
    })
}

impl TfIdfModel {
    pub fn feature_set(&self) -> &FeatureSet {
        &self.feature_set
    }

    pub fn keywords(&self) -> &[(Category, Vec<(String, f64)>)] {
        &self.keywords
    }

    /// Category vectors restricted to the feature set.
    pub fn category_vectors(&self) -> &[(Category, TermVector)] {
        &self.projected
    }

    pub fn idf(&self, word: &str) -> Option<f64> {
        self.idf.get(word).copied()
    }

    /// TF-IDF vector of a token sequence, projected onto the feature set.
    pub fn site_vector<S: AsRef<str>>(&self, tokens: &[S]) -> TermVector {
        let counts = TermVector::from_tokens(tokens);
        TermVector::from_weights(
            counts
                .iter()
                .filter(|(w, _)| self.feature_set.contains(w))
                .map(|(w, tf)| (w.to_string(), tf * self.idf[w])),
        )
    }

    /// Cosine of the projected site vector against every projected category
    /// vector.
    pub fn scores(&self, site: &TermVector) -> Vec<(Category, f64)> {
        self.projected.iter().map(|(c, v)| (*c, cosine(site, v))).collect()
    }
}

/// Label a site from its projected vector. Threshold and tie rules match
/// the similarity phase.
pub fn tfidf_classify(site: &TermVector, model: &TfIdfModel, threshold: f64) -> (Category, f64) {
    pick_label(&model.scores(site), threshold)
}
