use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use percent_encoding::{percent_decode_str, utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};
use serde::{Deserialize, Serialize};

use super::{normalize_path, Corpus, OnionDomain, PageRecord};
use crate::error::{Error, Result};
use crate::jsonl;
use crate::par::Exec;

const MANIFEST: &str = "manifest.jsonl";
const INDEX_STEM: &str = "index";

/// Characters kept verbatim in page file names. Everything else, `/`
/// included, is percent-encoded.
const FILE_NAME_SET: &AsciiSet = &NON_ALPHANUMERIC.remove(b'-').remove(b'_').remove(b'.').remove(b'~');

/// Non-fatal problems found while loading a snapshot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IngestWarning {
    NotOnionDirectory { path: PathBuf },
    UndecodableName { path: PathBuf },
    UnexpectedEntry { path: PathBuf },
    UnreadableFile { path: PathBuf, error: String },
    DuplicatePage { domain: String, path: String },
    EmptyPage { domain: String, path: String },
    ManifestRow { message: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub warnings: Vec<IngestWarning>,
}

impl IngestReport {
    pub fn skipped_directories(&self) -> Vec<&Path> {
        self.warnings
            .iter()
            .filter_map(|w| match w {
                IngestWarning::NotOnionDirectory { path } => Some(path.as_path()),
                _ => None,
            })
            .collect()
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestRow {
    domain: OnionDomain,
    path: String,
    fetched_at: DateTime<Utc>,
}

/// `"/"` maps to `index.html`; any other path is percent-encoded.
pub fn encode_page_file_name(path: &str) -> String {
    if path == "/" {
        format!("{INDEX_STEM}.html")
    } else {
        format!("{}.html", utf8_percent_encode(path, FILE_NAME_SET))
    }
}

/// Inverse of [`encode_page_file_name`]. `None` when the name is not an
/// `.html` file or does not decode to UTF-8.
pub fn decode_page_file_name(name: &str) -> Option<String> {
    let stem = name.strip_suffix(".html")?;
    if stem.is_empty() {
        return None;
    }
    if stem == INDEX_STEM {
        return Some("/".to_string());
    }
    let decoded = percent_decode_str(stem).decode_utf8().ok()?;
    Some(normalize_path(&decoded))
}

struct PageFile {
    domain: OnionDomain,
    path: String,
    file: PathBuf,
}

fn sorted_entries(dir: &Path) -> std::io::Result<Vec<fs::DirEntry>> {
    let mut entries = fs::read_dir(dir)?.collect::<std::io::Result<Vec<_>>>()?;
    entries.sort_by_key(|e| e.file_name());
    Ok(entries)
}

/// Load `<root>/<onion-domain>/<encoded-path>.html` files into a corpus.
///
/// Directories whose name is not an onion domain and files whose name does
/// not decode are skipped with a warning. Only an unreadable root is fatal.
pub fn ingest_snapshot(root: &Path, exec: Exec) -> Result<(Corpus, IngestReport)> {
    let mut report = IngestReport::default();
    let entries = sorted_entries(root).map_err(|e| Error::io(root, e))?;

    let mut fetched: HashMap<(OnionDomain, String), DateTime<Utc>> = HashMap::new();
    let manifest = root.join(MANIFEST);
    if manifest.is_file() {
        let (rows, warnings) = jsonl::read_lenient::<ManifestRow>(&manifest)?;
        report.warnings.extend(
            warnings
                .into_iter()
                .map(|message| IngestWarning::ManifestRow { message }),
        );
        for row in rows {
            fetched.insert((row.domain, normalize_path(&row.path)), row.fetched_at);
        }
    }

    let mut files = Vec::new();
    for entry in entries {
        let path = entry.path();
        let name = entry.file_name();
        if name == MANIFEST {
            continue;
        }
        if !path.is_dir() {
            report.warnings.push(IngestWarning::UnexpectedEntry { path });
            continue;
        }
        let domain = match name.to_str().map(OnionDomain::parse) {
            Some(Ok(d)) => d,
            _ => {
                log::warn!("skipping non-onion directory {}", path.display());
                report.warnings.push(IngestWarning::NotOnionDirectory { path });
                continue;
            }
        };
        let inner = sorted_entries(&path).map_err(|e| Error::io(&path, e))?;
        for f in inner {
            let fpath = f.path();
            if !fpath.is_file() {
                report.warnings.push(IngestWarning::UnexpectedEntry { path: fpath });
                continue;
            }
            match f.file_name().to_str().and_then(decode_page_file_name) {
                Some(page_path) => files.push(PageFile {
                    domain: domain.clone(),
                    path: page_path,
                    file: fpath,
                }),
                None => {
                    log::warn!("skipping undecodable file name {}", fpath.display());
                    report.warnings.push(IngestWarning::UndecodableName { path: fpath });
                }
            }
        }
    }

    let loaded = exec.map(&files, |pf| -> std::result::Result<PageRecord, IngestWarning> {
        let html = fs::read(&pf.file).map_err(|e| IngestWarning::UnreadableFile {
            path: pf.file.clone(),
            error: e.to_string(),
        })?;
        let fetched_at = fetched
            .get(&(pf.domain.clone(), pf.path.clone()))
            .copied()
            .or_else(|| {
                fs::metadata(&pf.file)
                    .and_then(|m| m.modified())
                    .ok()
                    .map(DateTime::<Utc>::from)
            })
            .unwrap_or(DateTime::UNIX_EPOCH);
        Ok(PageRecord {
            domain: pf.domain.clone(),
            path: pf.path.clone(),
            html,
            fetched_at,
        })
    });

    let mut pages = Vec::with_capacity(loaded.len());
    for r in loaded {
        match r {
            Ok(p) => pages.push(p),
            Err(w) => report.warnings.push(w),
        }
    }
    let (corpus, warnings) = Corpus::from_pages(pages);
    for w in &warnings {
        log::warn!("{w:?}");
    }
    report.warnings.extend(warnings);
    Ok((corpus, report))
}

/// Write a corpus back out in snapshot layout, with a manifest carrying the
/// fetch timestamps.
pub fn export_snapshot(corpus: &Corpus, root: &Path) -> Result<()> {
    fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
    let mut rows = Vec::with_capacity(corpus.len());
    for page in corpus.pages() {
        let dir = root.join(page.domain.as_str());
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let file = dir.join(encode_page_file_name(&page.path));
        fs::write(&file, &page.html).map_err(|e| Error::io(&file, e))?;
        rows.push(ManifestRow {
            domain: page.domain.clone(),
            path: page.path.clone(),
            fetched_at: page.fetched_at,
        });
    }
    jsonl::write(&root.join(MANIFEST), &rows)
}
