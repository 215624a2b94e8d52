use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct EmailAddress {
    local: String,
    /// Lowercase hostname.
    domain: String,
}

impl EmailAddress {
    pub fn local(&self) -> &str {
        &self.local
    }

    pub fn domain(&self) -> &str {
        &self.domain
    }
}

impl fmt::Display for EmailAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.local, self.domain)
    }
}

impl TryFrom<String> for EmailAddress {
    type Error = EmailReject;
    fn try_from(s: String) -> Result<Self, EmailReject> {
        parse_syntax(&s)
    }
}

impl From<EmailAddress> for String {
    fn from(e: EmailAddress) -> String {
        e.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmailReject {
    BadSyntax,
    UnknownTld,
}

impl EmailReject {
    pub fn as_str(self) -> &'static str {
        match self {
            EmailReject::BadSyntax => "bad-syntax",
            EmailReject::UnknownTld => "unknown-tld",
        }
    }
}

impl fmt::Display for EmailReject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn email_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"[A-Za-z0-9._%+\-]+@[A-Za-z0-9](?:[A-Za-z0-9\-]*[A-Za-z0-9])?(?:\.[A-Za-z0-9](?:[A-Za-z0-9\-]*[A-Za-z0-9])?)*")
            .unwrap()
    })
}

fn valid_label(label: &str) -> bool {
    !label.is_empty()
        && label.len() <= 63
        && !label.starts_with('-')
        && !label.ends_with('-')
        && label.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-')
}

/// Syntax only: `local@host` with a dotted DNS hostname.
fn parse_syntax(s: &str) -> Result<EmailAddress, EmailReject> {
    let (local, domain) = s.rsplit_once('@').ok_or(EmailReject::BadSyntax)?;
    let local_ok = !local.is_empty()
        && local.len() <= 64
        && !local.starts_with('.')
        && !local.ends_with('.')
        && !local.contains("..")
        && local
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || b"._%+-".contains(&b));
    let domain = domain.to_ascii_lowercase();
    let labels: Vec<&str> = domain.split('.').collect();
    let domain_ok = domain.len() <= 253
        && labels.len() >= 2
        && labels.iter().all(|l| valid_label(l))
        && labels
            .last()
            .is_some_and(|tld| tld.bytes().any(|b| b.is_ascii_alphabetic()));
    if !(local_ok && domain_ok) {
        return Err(EmailReject::BadSyntax);
    }
    Ok(EmailAddress {
        local: local.to_string(),
        domain,
    })
}

/// Validate one address against the syntax rules and the TLD list.
pub fn validate_email(s: &str, known_tlds: &BTreeSet<String>) -> Result<EmailAddress, EmailReject> {
    let email = parse_syntax(s)?;
    let tld = email.domain.rsplit('.').next().unwrap_or_default();
    if !known_tlds.contains(tld) {
        return Err(EmailReject::UnknownTld);
    }
    Ok(email)
}

/// Every `x@y` match with its verdict, in document order, without repeats.
pub fn scan_emails(text: &str, known_tlds: &BTreeSet<String>) -> Vec<(String, Result<EmailAddress, EmailReject>)> {
    let mut seen = HashSet::new();
    email_re()
        .find_iter(text)
        .map(|m| m.as_str())
        .filter(|s| seen.insert(s.to_ascii_lowercase()))
        .map(|s| (s.to_string(), validate_email(s, known_tlds)))
        .collect()
}

/// Valid addresses only, deduplicated.
pub fn find_emails(text: &str, known_tlds: &BTreeSet<String>) -> Vec<EmailAddress> {
    let mut seen = HashSet::new();
    scan_emails(text, known_tlds)
        .into_iter()
        .filter_map(|(_, r)| r.ok())
        .filter(|e| seen.insert(e.clone()))
        .collect()
}
