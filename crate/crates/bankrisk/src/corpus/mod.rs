//! News corpora: acquisition, on-disk storage and loading.
//!
//! Stored layout is `<root>/<sector>/<year>/<article-id>.json`, one article
//! per file with keys `sector`, `year`, `source_id`, `title`, `body`. The
//! article id is derived from the source id, so storing the same article
//! twice overwrites one file.

mod fetch;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use fetch::{
    acquire_articles, acquire_grid, Acquired, ArticleSource, DirectoryFetcher, FetchError, FetchWarning, GridOutcome,
    HttpFetcher, RawArticle,
};

const PROVENANCE_FILE: &str = "provenance.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Article {
    pub sector: String,
    pub year: i32,
    pub source_id: String,
    pub title: String,
    pub body: String,
}

impl Article {
    /// File stem used in the store.
    pub fn article_id(&self) -> String {
        let digest = Sha256::digest(self.source_id.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Title and body as one text for preprocessing.
    pub fn text(&self) -> String {
        format!("{}\n{}", self.title, self.body)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroupKey {
    pub sector: String,
    pub year: i32,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub fetcher: String,
    /// Seconds since the Unix epoch.
    pub retrieved_at: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    pub groups: BTreeMap<GroupKey, Vec<Article>>,
    pub provenance: Option<Provenance>,
}

impl Corpus {
    pub fn from_articles(articles: impl IntoIterator<Item = Article>, provenance: Option<Provenance>) -> Self {
        let mut groups: BTreeMap<GroupKey, Vec<Article>> = BTreeMap::new();
        for a in articles {
            groups
                .entry(GroupKey {
                    sector: a.sector.clone(),
                    year: a.year,
                })
                .or_default()
                .push(a);
        }
        Self { groups, provenance }
    }

    pub fn article_count(&self) -> usize {
        self.groups.values().map(Vec::len).sum()
    }

    pub fn articles(&self) -> impl Iterator<Item = &Article> {
        self.groups.values().flatten()
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("corpus root {0} does not exist")]
    MissingRoot(PathBuf),
    #[error("malformed article file {path}: {message}")]
    Malformed { path: PathBuf, message: String },
    #[error("source id {source_id:?} appears in both {first} and {second}")]
    DuplicateSource {
        source_id: String,
        first: PathBuf,
        second: PathBuf,
    },
    #[error("sector {0:?} cannot be used as a directory name")]
    BadSector(String),
    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io {
        path: path.into(),
        source,
    }
}

/// Boilerplate detection: a non-blank line present in at least `fraction`
/// of a group's articles is dropped from all of them. Groups smaller than
/// `min_group` are left alone, since in a group of one every line would
/// qualify.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Boilerplate {
    pub fraction: f64,
    pub min_group: usize,
}

impl Default for Boilerplate {
    fn default() -> Self {
        Self {
            fraction: 0.9,
            min_group: 3,
        }
    }
}

impl Boilerplate {
    pub const DISABLED: Boilerplate = Boilerplate {
        fraction: 1.0,
        min_group: usize::MAX,
    };

    /// Lines to strip from a group.
    pub fn lines(&self, articles: &[Article]) -> BTreeSet<String> {
        let n = articles.len();
        if n < self.min_group || n == 0 {
            return BTreeSet::new();
        }
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for a in articles {
            let distinct: BTreeSet<&str> = a.body.split('\n').filter(|l| !l.trim().is_empty()).collect();
            for l in distinct {
                *counts.entry(l).or_default() += 1;
            }
        }
        let needed = (self.fraction * n as f64 - 1e-9).ceil().max(1.0) as usize;
        counts
            .into_iter()
            .filter(|(_, c)| *c >= needed)
            .map(|(l, _)| l.to_string())
            .collect()
    }

    pub fn strip(&self, articles: &mut [Article]) -> usize {
        let lines = self.lines(articles);
        if lines.is_empty() {
            return 0;
        }
        for a in articles.iter_mut() {
            a.body = a
                .body
                .split('\n')
                .filter(|l| !lines.contains(*l))
                .collect::<Vec<_>>()
                .join("\n");
        }
        lines.len()
    }
}

fn check_component(sector: &str) -> Result<(), CorpusError> {
    let bad = sector.is_empty()
        || sector == "."
        || sector == ".."
        || sector.contains(['/', '\\'])
        || sector.chars().any(char::is_control);
    if bad {
        return Err(CorpusError::BadSector(sector.into()));
    }
    Ok(())
}

/// Write articles under `root`; returns the written paths in input order.
pub fn store_articles(root: &Path, articles: &[Article]) -> Result<Vec<PathBuf>, CorpusError> {
    let mut paths = Vec::with_capacity(articles.len());
    for a in articles {
        check_component(&a.sector)?;
        let dir = root.join(&a.sector).join(a.year.to_string());
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let path = dir.join(format!("{}.json", a.article_id()));
        let json = serde_json::to_string_pretty(a).expect("article serializes");
        fs::write(&path, json).map_err(io_err(&path))?;
        paths.push(path);
    }
    Ok(paths)
}

pub fn store_provenance(root: &Path, provenance: &Provenance) -> Result<(), CorpusError> {
    fs::create_dir_all(root).map_err(io_err(root))?;
    let path = root.join(PROVENANCE_FILE);
    let json = serde_json::to_string_pretty(provenance).expect("provenance serializes");
    fs::write(&path, json).map_err(io_err(&path))
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>, CorpusError> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        out.push(entry.map_err(io_err(dir))?.path());
    }
    out.sort();
    Ok(out)
}

fn read_article(path: &Path, sector: &str, year: i32) -> Result<Article, CorpusError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let article: Article = serde_json::from_str(&text).map_err(|e| CorpusError::Malformed {
        path: path.into(),
        message: e.to_string(),
    })?;
    if article.sector != sector || article.year != year {
        return Err(CorpusError::Malformed {
            path: path.into(),
            message: format!(
                "article says {}/{} but is stored under {sector}/{year}",
                article.sector, article.year
            ),
        });
    }
    Ok(article)
}

/// Load every stored article and strip boilerplate per group.
pub fn load_corpus(root: &Path, boilerplate: Boilerplate) -> Result<Corpus, CorpusError> {
    if !root.is_dir() {
        return Err(CorpusError::MissingRoot(root.into()));
    }
    let mut groups: BTreeMap<GroupKey, Vec<Article>> = BTreeMap::new();
    let mut seen: BTreeMap<String, PathBuf> = BTreeMap::new();
    for sector_dir in sorted_entries(root)? {
        if !sector_dir.is_dir() {
            continue;
        }
        let sector = sector_dir
            .file_name()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_string();
        for year_dir in sorted_entries(&sector_dir)? {
            if !year_dir.is_dir() {
                continue;
            }
            let year: i32 = year_dir
                .file_name()
                .and_then(|s| s.to_str())
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| CorpusError::Malformed {
                    path: year_dir.clone(),
                    message: "year directory name is not an integer".into(),
                })?;
            for file in sorted_entries(&year_dir)? {
                if file.extension().and_then(|e| e.to_str()) != Some("json") {
                    continue;
                }
                let article = read_article(&file, &sector, year)?;
                if let Some(first) = seen.insert(article.source_id.clone(), file.clone()) {
                    return Err(CorpusError::DuplicateSource {
                        source_id: article.source_id,
                        first,
                        second: file,
                    });
                }
                groups
                    .entry(GroupKey {
                        sector: sector.clone(),
                        year,
                    })
                    .or_default()
                    .push(article);
            }
        }
    }
    for articles in groups.values_mut() {
        boilerplate.strip(articles);
    }
    let provenance_path = root.join(PROVENANCE_FILE);
    let provenance = if provenance_path.is_file() {
        let text = fs::read_to_string(&provenance_path).map_err(io_err(&provenance_path))?;
        Some(serde_json::from_str(&text).map_err(|e| CorpusError::Malformed {
            path: provenance_path.clone(),
            message: e.to_string(),
        })?)
    } else {
        None
    };
    Ok(Corpus { groups, provenance })
}
