use std::cmp::Ordering;
use std::collections::BTreeMap;

/// Sparse non-negative vector keyed by word.
///
/// Entries are sorted by word and zero weights are never stored, so the
/// dimension equals the number of distinct words.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TermVector {
    entries: Vec<(String, f64)>,
}

impl TermVector {
    /// Raw term counts.
    pub fn from_tokens<S: AsRef<str>>(tokens: &[S]) -> Self {
        let mut counts: BTreeMap<&str, f64> = BTreeMap::new();
        for t in tokens {
            *counts.entry(t.as_ref()).or_default() += 1.0;
        }
        TermVector {
            entries: counts.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        }
    }

    /// Weights from a map; zero and non-finite entries are dropped.
    ///
    /// Panics on a negative weight.
    pub fn from_weights<K: Into<String>>(weights: impl IntoIterator<Item = (K, f64)>) -> Self {
        let mut map: BTreeMap<String, f64> = BTreeMap::new();
        for (k, v) in weights {
            assert!(v >= 0.0 || v.is_nan(), "negative term weight {v}");
            *map.entry(k.into()).or_default() += v;
        }
        TermVector {
            entries: map.into_iter().filter(|(_, v)| *v > 0.0 && v.is_finite()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn get(&self, word: &str) -> f64 {
        self.entries
            .binary_search_by(|(k, _)| k.as_str().cmp(word))
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v * v).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &TermVector) -> f64 {
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < self.entries.len() && j < other.entries.len() {
            match self.entries[i].0.cmp(&other.entries[j].0) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => {
                    acc += self.entries[i].1 * other.entries[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    /// Multiply every weight by `k > 0`.
    pub fn scale(&self, k: f64) -> Self {
        assert!(k > 0.0, "scale factor must be positive");
        TermVector::from_weights(self.iter().map(|(w, v)| (w.to_string(), v * k)))
    }

    /// Keep only the dimensions named by `keep`.
    pub fn restrict<F: Fn(&str) -> bool>(&self, keep: F) -> Self {
        TermVector {
            entries: self.entries.iter().filter(|(k, _)| keep(k)).cloned().collect(),
        }
    }

    /// Weights of the `k` heaviest words, ties broken by word.
    pub fn top_k(&self, k: usize) -> Vec<(String, f64)> {
        let mut v = self.entries.clone();
        v.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        v.truncate(k);
        v
    }
}

/// Cosine similarity of two non-negative vectors, in `[0, 1]`; zero when
/// either vector is empty.
pub fn cosine(a: &TermVector, b: &TermVector) -> f64 {
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (a.dot(b) / (na * nb)).clamp(0.0, 1.0)
}
