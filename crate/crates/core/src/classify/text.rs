use std::collections::BTreeSet;

use crate::corpus::PageRecord;
use crate::html::PageText;

pub const MIN_TOKEN_CHARS: usize = 3;

/// Lowercase word tokens with punctuation, digits, stopwords and short
/// words removed.
pub type TokenSequence = Vec<String>;

/// Split on every non-alphabetic character, lowercase, then drop
/// stopwords and tokens shorter than three characters.
pub fn tokenize(text: &str, stopwords: &BTreeSet<String>) -> TokenSequence {
    text.split(|c: char| !c.is_alphabetic())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .filter(|w| w.chars().count() >= MIN_TOKEN_CHARS && !stopwords.contains(w))
        .collect()
}

/// Visible page text (scripts and styles excluded) as a token sequence.
pub fn preprocess(page: &PageRecord, stopwords: &BTreeSet<String>) -> TokenSequence {
    tokenize(&PageText::parse(&page.html).visible_text(), stopwords)
}

/// Crude language check: at least half of the alphabetic characters are
/// ASCII. Pages failing it are classified anyway, with a warning.
pub fn looks_english(text: &str) -> bool {
    let (ascii, total) = text
        .chars()
        .filter(|c| c.is_alphabetic())
        .fold((0usize, 0usize), |(a, t), c| (a + c.is_ascii() as usize, t + 1));
    total == 0 || ascii * 2 >= total
}
