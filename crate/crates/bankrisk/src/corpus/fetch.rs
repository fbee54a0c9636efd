use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Article, Corpus, Provenance};

/// An article as a source returns it, before tagging with keyword and year.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawArticle {
    pub source_id: String,
    #[serde(default)]
    pub title: String,
    pub body: String,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FetchError {
    #[error("source {source_name} unreachable for {keyword}/{year} after {attempts} attempt(s): {message}")]
    Unreachable {
        source_name: String,
        keyword: String,
        year: i32,
        attempts: u32,
        message: String,
    },
    #[error("source {source_name} returned an unreadable listing for {keyword}/{year}: {message}")]
    BadListing {
        source_name: String,
        keyword: String,
        year: i32,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "warning", rename_all = "snake_case")]
pub enum FetchWarning {
    EmptyFetch { keyword: String, year: i32 },
}

/// Where articles come from. Implementations are called concurrently for
/// distinct (keyword, year) pairs.
pub trait ArticleSource: Sync {
    fn name(&self) -> &str;
    fn fetch(&self, keyword: &str, year: i32) -> Result<Vec<RawArticle>, FetchError>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct Acquired {
    pub articles: Vec<Article>,
    pub warning: Option<FetchWarning>,
}

/// Fetch, deduplicate by source id (first occurrence wins) and tag.
pub fn acquire_articles(keyword: &str, year: i32, source: &dyn ArticleSource) -> Result<Acquired, FetchError> {
    let raw = source.fetch(keyword, year)?;
    let mut seen = BTreeSet::new();
    let articles: Vec<Article> = raw
        .into_iter()
        .filter(|r| seen.insert(r.source_id.clone()))
        .map(|r| Article {
            sector: keyword.into(),
            year,
            source_id: r.source_id,
            title: r.title,
            body: r.body,
        })
        .collect();
    let warning = articles.is_empty().then(|| FetchWarning::EmptyFetch {
        keyword: keyword.into(),
        year,
    });
    Ok(Acquired { articles, warning })
}

#[derive(Debug, Clone, Default)]
pub struct GridOutcome {
    pub corpus: Corpus,
    pub warnings: Vec<FetchWarning>,
    pub errors: Vec<FetchError>,
}

/// Acquire every keyword × year pair with at most `parallelism` fetches in
/// flight. Results are assembled in grid order regardless of completion
/// order; a failed pair contributes no articles.
pub fn acquire_grid(
    source: &dyn ArticleSource,
    keywords: &[String],
    years: &[i32],
    parallelism: usize,
    retrieved_at: u64,
) -> GridOutcome {
    let pairs: Vec<(&str, i32)> = keywords
        .iter()
        .flat_map(|k| years.iter().map(move |y| (k.as_str(), *y)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .expect("thread pool");
    let results: Vec<Result<Acquired, FetchError>> = pool.install(|| {
        use rayon::prelude::*;
        pairs.par_iter().map(|(k, y)| acquire_articles(k, *y, source)).collect()
    });

    let mut out = GridOutcome::default();
    let mut articles = Vec::new();
    for r in results {
        match r {
            Ok(acq) => {
                out.warnings.extend(acq.warning);
                articles.extend(acq.articles);
            }
            Err(e) => out.errors.push(e),
        }
    }
    out.corpus = Corpus::from_articles(
        articles,
        Some(Provenance {
            fetcher: source.name().into(),
            retrieved_at,
        }),
    );
    out
}

/// Reads article files from `<root>/<keyword>/<year>/`. The keyword
/// directory is matched case-insensitively.
///
/// `.json` files hold a [`RawArticle`]; `.txt` files hold the title on the
/// first line and the body after it. If the directory has an `index.txt`,
/// only the files it lists are read, in listed order, and a file listed
/// twice yields one article.
#[derive(Debug, Clone)]
pub struct DirectoryFetcher {
    pub root: PathBuf,
}

impl DirectoryFetcher {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    fn keyword_dir(&self, keyword: &str) -> Option<PathBuf> {
        let exact = self.root.join(keyword);
        if exact.is_dir() {
            return Some(exact);
        }
        let entries = fs::read_dir(&self.root).ok()?;
        let mut matches: Vec<PathBuf> = entries
            .filter_map(Result::ok)
            .map(|e| e.path())
            .filter(|p| {
                p.is_dir()
                    && p.file_name()
                        .and_then(|n| n.to_str())
                        .is_some_and(|n| n.eq_ignore_ascii_case(keyword))
            })
            .collect();
        matches.sort();
        matches.into_iter().next()
    }

    fn error(&self, keyword: &str, year: i32, message: String) -> FetchError {
        FetchError::Unreachable {
            source_name: self.name().into(),
            keyword: keyword.into(),
            year,
            attempts: 1,
            message,
        }
    }

    fn read_file(&self, path: &Path, keyword: &str, year: i32) -> Result<RawArticle, FetchError> {
        let text =
            fs::read_to_string(path).map_err(|e| self.error(keyword, year, format!("{}: {e}", path.display())))?;
        let source_id = fs::canonicalize(path)
            .unwrap_or_else(|_| path.into())
            .display()
            .to_string();
        if path.extension().and_then(|e| e.to_str()) == Some("json") {
            let mut raw: RawArticle = serde_json::from_str(&text).map_err(|e| FetchError::BadListing {
                source_name: self.name().into(),
                keyword: keyword.into(),
                year,
                message: format!("{}: {e}", path.display()),
            })?;
            if raw.source_id.is_empty() {
                raw.source_id = source_id;
            }
            return Ok(raw);
        }
        let (title, body) = text.split_once('\n').unwrap_or((text.as_str(), ""));
        Ok(RawArticle {
            source_id,
            title: title.trim_end_matches('\r').into(),
            body: body.into(),
        })
    }
}

impl ArticleSource for DirectoryFetcher {
    fn name(&self) -> &str {
        "directory"
    }

    fn fetch(&self, keyword: &str, year: i32) -> Result<Vec<RawArticle>, FetchError> {
        if !self.root.is_dir() {
            return Err(self.error(keyword, year, format!("{} is not a directory", self.root.display())));
        }
        let Some(dir) = self.keyword_dir(keyword).map(|d| d.join(year.to_string())) else {
            return Ok(Vec::new());
        };
        if !dir.is_dir() {
            return Ok(Vec::new());
        }
        let index = dir.join("index.txt");
        let files: Vec<PathBuf> = if index.is_file() {
            fs::read_to_string(&index)
                .map_err(|e| self.error(keyword, year, format!("{}: {e}", index.display())))?
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(|l| dir.join(l))
                .collect()
        } else {
            let mut v: Vec<PathBuf> = fs::read_dir(&dir)
                .map_err(|e| self.error(keyword, year, format!("{}: {e}", dir.display())))?
                .filter_map(Result::ok)
                .map(|e| e.path())
                .filter(|p| p.is_file() && matches!(p.extension().and_then(|e| e.to_str()), Some("json") | Some("txt")))
                .collect();
            v.sort();
            v
        };
        files.iter().map(|f| self.read_file(f, keyword, year)).collect()
    }
}

/// Fetches a JSON listing (an array of [`RawArticle`]) from a URL built
/// from a template with `{keyword}` and `{year}` placeholders. Every request
/// is preceded by the politeness delay; failed requests are retried up to
/// `max_retries` times.
#[derive(Debug, Clone)]
pub struct HttpFetcher {
    pub url_template: String,
    pub delay: Duration,
    pub max_retries: u32,
    pub timeout: Duration,
}

impl HttpFetcher {
    pub fn new(url_template: impl Into<String>, delay: Duration, max_retries: u32) -> Self {
        Self {
            url_template: url_template.into(),
            delay,
            max_retries,
            timeout: Duration::from_secs(30),
        }
    }

    pub fn url(&self, keyword: &str, year: i32) -> String {
        let encoded: String = url::form_urlencoded::byte_serialize(keyword.as_bytes()).collect();
        self.url_template
            .replace("{keyword}", &encoded)
            .replace("{year}", &year.to_string())
    }
}

impl ArticleSource for HttpFetcher {
    fn name(&self) -> &str {
        "http"
    }

    fn fetch(&self, keyword: &str, year: i32) -> Result<Vec<RawArticle>, FetchError> {
        let url = self.url(keyword, year);
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(self.timeout))
            .build()
            .into();
        let attempts = self.max_retries + 1;
        let mut last = String::new();
        for _ in 0..attempts {
            thread::sleep(self.delay);
            let body = agent
                .get(&url)
                .call()
                .and_then(|mut resp| resp.body_mut().read_to_string());
            match body {
                Ok(text) => {
                    return serde_json::from_str(&text).map_err(|e| FetchError::BadListing {
                        source_name: self.name().into(),
                        keyword: keyword.into(),
                        year,
                        message: e.to_string(),
                    })
                }
                Err(e) => last = e.to_string(),
            }
        }
        Err(FetchError::Unreachable {
            source_name: self.name().into(),
            keyword: keyword.into(),
            year,
            attempts,
            message: format!("{url}: {last}"),
        })
    }
}
