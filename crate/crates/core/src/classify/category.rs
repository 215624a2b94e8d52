use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Illicit-activity labels in their canonical order, plus `Other`.
///
/// The declaration order is the tie-break order used by the classifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Category {
    InvestmentScams,
    PrivateKey,
    CloneCard,
    CounterfeitBills,
    Citizenship,
    Drugs,
    Hacker,
    Hitmen,
    SexualAbuse,
    Memberships,
    Weapons,
    /// Sites spanning several of the above.
    Shop,
    Other,
}

impl Category {
    /// The twelve illicit labels, `Other` excluded.
    pub const ILLICIT: [Category; 12] = [
        Category::InvestmentScams,
        Category::PrivateKey,
        Category::CloneCard,
        Category::CounterfeitBills,
        Category::Citizenship,
        Category::Drugs,
        Category::Hacker,
        Category::Hitmen,
        Category::SexualAbuse,
        Category::Memberships,
        Category::Weapons,
        Category::Shop,
    ];

    pub const ALL: [Category; 13] = [
        Category::InvestmentScams,
        Category::PrivateKey,
        Category::CloneCard,
        Category::CounterfeitBills,
        Category::Citizenship,
        Category::Drugs,
        Category::Hacker,
        Category::Hitmen,
        Category::SexualAbuse,
        Category::Memberships,
        Category::Weapons,
        Category::Shop,
        Category::Other,
    ];

    /// Zero-based position in the canonical order.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_illicit(self) -> bool {
        self != Category::Other
    }

    /// Identifier used in files.
    pub fn as_str(self) -> &'static str {
        match self {
            Category::InvestmentScams => "InvestmentScams",
            Category::PrivateKey => "PrivateKey",
            Category::CloneCard => "CloneCard",
            Category::CounterfeitBills => "CounterfeitBills",
            Category::Citizenship => "Citizenship",
            Category::Drugs => "Drugs",
            Category::Hacker => "Hacker",
            Category::Hitmen => "Hitmen",
            Category::SexualAbuse => "SexualAbuse",
            Category::Memberships => "Memberships",
            Category::Weapons => "Weapons",
            Category::Shop => "Shop",
            Category::Other => "Other",
        }
    }

    /// Human-readable name used in tables.
    pub fn display_name(self) -> &'static str {
        match self {
            Category::InvestmentScams => "Investment Scams",
            Category::PrivateKey => "Private Key",
            Category::CloneCard => "Clone Card",
            Category::CounterfeitBills => "Counterfeit Bills",
            Category::Citizenship => "Citizenship",
            Category::Drugs => "Drugs",
            Category::Hacker => "Hacker",
            Category::Hitmen => "Hitmen",
            Category::SexualAbuse => "Sexual Abuse",
            Category::Memberships => "Memberships",
            Category::Weapons => "Weapons",
            Category::Shop => "Shop",
            Category::Other => "Other",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = Error;

    /// Case, spaces, underscores and hyphens are ignored, so
    /// `"Clone Card"`, `"clone_card"` and `"CloneCard"` all parse.
    fn from_str(s: &str) -> Result<Self, Error> {
        let key: String = s
            .chars()
            .filter(|c| c.is_alphanumeric())
            .flat_map(char::to_lowercase)
            .collect();
        let c = match key.as_str() {
            "investmentscams" | "investmentscam" => Category::InvestmentScams,
            "privatekey" | "privatekeys" => Category::PrivateKey,
            "clonecard" | "clonedcard" | "clonecards" | "clonedcards" => Category::CloneCard,
            "counterfeitbills" | "counterfeit" => Category::CounterfeitBills,
            "citizenship" => Category::Citizenship,
            "drugs" => Category::Drugs,
            "hacker" | "hacking" => Category::Hacker,
            "hitmen" | "hitman" => Category::Hitmen,
            "sexualabuse" | "sexualabuses" => Category::SexualAbuse,
            "memberships" | "membership" => Category::Memberships,
            "weapons" => Category::Weapons,
            "shop" | "shops" => Category::Shop,
            "other" => Category::Other,
            _ => return Err(Error::Config(format!("unknown category {s:?}"))),
        };
        Ok(c)
    }
}

impl Serialize for Category {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Category {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
