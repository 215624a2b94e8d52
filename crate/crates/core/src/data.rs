//! Shipped word lists. Each can be replaced by a file on the command line.

use std::collections::BTreeSet;
use std::path::Path;

use crate::error::{Error, Result};

pub const STOPWORDS_EN: &str = include_str!("../data/stopwords_en.txt");
pub const TLDS: &str = include_str!("../data/tlds.txt");
pub const EXPLORER_DOMAINS: &str = include_str!("../data/explorer_domains.txt");

/// One lowercase entry per non-empty, non-`#` line.
pub fn parse_word_list(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

pub fn load_word_list(path: &Path) -> Result<BTreeSet<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let words = parse_word_list(&text);
    if words.is_empty() {
        return Err(Error::Config(format!("{} contains no entries", path.display())));
    }
    Ok(words)
}

/// Shipped list, or the file at `path` when given.
pub fn word_list_or(path: Option<&Path>, builtin: &str) -> Result<BTreeSet<String>> {
    match path {
        Some(p) => load_word_list(p),
        None => Ok(parse_word_list(builtin)),
    }
}

pub fn stopwords() -> BTreeSet<String> {
    parse_word_list(STOPWORDS_EN)
}

pub fn tlds() -> BTreeSet<String> {
    parse_word_list(TLDS)
}

pub fn explorer_domains() -> BTreeSet<String> {
    parse_word_list(EXPLORER_DOMAINS)
}
