use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderMode {
    Fixtures,
    Http,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    None,
    Fixtures,
    Http,
}

fn default_threshold() -> f64 {
    crate::classify::DEFAULT_THRESHOLD
}
fn default_provider() -> ProviderMode {
    ProviderMode::Fixtures
}
fn default_search() -> SearchMode {
    SearchMode::None
}
fn default_rate_limit() -> f64 {
    5.0
}
fn default_retries() -> u32 {
    3
}
fn default_timeout() -> u64 {
    30
}
fn default_public_threshold() -> usize {
    50
}
fn default_vanity() -> usize {
    crate::cluster::DEFAULT_PREFIX_LEN
}
fn default_top_n() -> usize {
    10
}
fn default_true() -> bool {
    true
}

/// Pipeline configuration, read from a TOML key-value file. Relative
/// paths are resolved against the file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub corpus_root: PathBuf,
    pub ground_truth: PathBuf,
    pub output_dir: PathBuf,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_provider")]
    pub provider: ProviderMode,
    /// Directory of `<address>.json` transaction fixtures.
    #[serde(default)]
    pub ledger_fixtures: Option<PathBuf>,
    #[serde(default)]
    pub base_url: Option<String>,
    /// Request starts per second for HTTP providers; 0 disables limiting.
    #[serde(default = "default_rate_limit")]
    pub rate_limit: f64,
    #[serde(default = "default_retries")]
    pub retries: u32,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default)]
    pub address_annotations: Option<PathBuf>,
    #[serde(default = "default_search")]
    pub search_provider: SearchMode,
    #[serde(default)]
    pub search_fixtures: Option<PathBuf>,
    #[serde(default)]
    pub search_url: Option<String>,
    #[serde(default)]
    pub trace_annotations: Option<PathBuf>,
    /// Extra surface facts in `{url, ip, registrant, addresses}` form.
    #[serde(default)]
    pub surface_facts: Option<PathBuf>,
    #[serde(default = "default_public_threshold")]
    pub public_threshold: usize,
    #[serde(default = "default_vanity")]
    pub vanity_prefix_len: usize,
    #[serde(default)]
    pub min_received: u64,
    #[serde(default = "default_top_n")]
    pub top_n: usize,
    #[serde(default)]
    pub stopwords: Option<PathBuf>,
    #[serde(default)]
    pub tlds: Option<PathBuf>,
    #[serde(default)]
    pub explorer_domains: Option<PathBuf>,
    #[serde(default = "default_true")]
    pub parallel: bool,
}

fn require_file(key: &str, p: &Path) -> Result<()> {
    if p.is_file() {
        Ok(())
    } else {
        Err(Error::Config(format!("{key}: {} is not a readable file", p.display())))
    }
}

fn require_dir(key: &str, p: &Path) -> Result<()> {
    if p.is_dir() {
        Ok(())
    } else {
        Err(Error::Config(format!("{key}: {} is not a directory", p.display())))
    }
}

impl RunConfig {
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.resolve(base);
        Ok(cfg)
    }

    /// Read, resolve and validate a config file. Returns the config and
    /// its verbatim text.
    pub fn load(path: &Path) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let cfg = RunConfig::parse(&text, base)?;
        cfg.validate()?;
        Ok((cfg, text))
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [&mut self.corpus_root, &mut self.ground_truth, &mut self.output_dir] {
            fix(p);
        }
        for p in [
            &mut self.ledger_fixtures,
            &mut self.address_annotations,
            &mut self.search_fixtures,
            &mut self.trace_annotations,
            &mut self.surface_facts,
            &mut self.stopwords,
            &mut self.tlds,
            &mut self.explorer_domains,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }

    /// Check every value and referenced input before any stage runs.
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::Config(format!(
                "threshold must be in [0, 1], got {}",
                self.threshold
            )));
        }
        if !self.rate_limit.is_finite() || self.rate_limit < 0.0 {
            return Err(Error::Config(format!(
                "rate_limit must be >= 0, got {}",
                self.rate_limit
            )));
        }
        if self.public_threshold == 0 {
            return Err(Error::Config("public_threshold must be at least 1".into()));
        }
        if self.vanity_prefix_len == 0 {
            return Err(Error::Config("vanity_prefix_len must be at least 1".into()));
        }
        if self.output_dir.as_os_str().is_empty() {
            return Err(Error::Config("output_dir is empty".into()));
        }
        require_dir("corpus_root", &self.corpus_root)?;
        require_file("ground_truth", &self.ground_truth)?;
        match self.provider {
            ProviderMode::Fixtures => match &self.ledger_fixtures {
                Some(d) => require_dir("ledger_fixtures", d)?,
                None => return Err(Error::Config("provider = \"fixtures\" needs ledger_fixtures".into())),
            },
            ProviderMode::Http => {
                let url = self.base_url.as_deref().unwrap_or_default();
                if url::Url::parse(url).is_err() {
                    return Err(Error::Config(format!(
                        "provider = \"http\" needs a valid base_url, got {url:?}"
                    )));
                }
            }
        }
        match self.search_provider {
            SearchMode::None => {}
            SearchMode::Fixtures => match &self.search_fixtures {
                Some(d) => require_dir("search_fixtures", d)?,
                None => {
                    return Err(Error::Config(
                        "search_provider = \"fixtures\" needs search_fixtures".into(),
                    ))
                }
            },
            SearchMode::Http => {
                if self.search_url.as_deref().unwrap_or_default().is_empty() {
                    return Err(Error::Config("search_provider = \"http\" needs search_url".into()));
                }
            }
        }
        for (key, p) in [
            ("address_annotations", &self.address_annotations),
            ("trace_annotations", &self.trace_annotations),
            ("surface_facts", &self.surface_facts),
            ("stopwords", &self.stopwords),
            ("tlds", &self.tlds),
            ("explorer_domains", &self.explorer_domains),
        ] {
            if let Some(p) = p {
                require_file(key, p)?;
            }
        }
        Ok(())
    }

    pub fn exec(&self) -> crate::par::Exec {
        if self.parallel {
            crate::par::Exec::Parallel
        } else {
            crate::par::Exec::Sequential
        }
    }
}
