//! News text normalization, the sentiment lexicon and corpus scoring.
//!
//! The normalization chain, applied in this order:
//!
//! 1. split on non-alphanumeric boundaries
//! 2. lowercase
//! 3. integer tokens below one million become English cardinal words,
//!    one token per word
//! 4. tokens that are neither purely alphabetic nor purely numeric are dropped
//! 5. stopwords removed
//! 6. each token lemmatized
//! 7. stopwords removed again, since a lemma may itself be a stopword
//!
//! Lexicon words go through steps 1–6, so dictionary entries and article
//! terms meet in the same normalized form.

mod lemma;
mod lexicon;
mod numbers;
mod score;

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use lemma::{Lemmatizer, BUNDLED_RULES};
pub use lexicon::{Category, CategorySet, Lexicon, LexiconError};
pub use numbers::{cardinal_vocabulary, number_to_words, NUMBER_WORD_LIMIT};
pub use score::{pos_to_neg_ratio, score_corpus, SentimentScore};

/// The English stoplist shipped with the crate, one word per line.
pub const BUNDLED_STOPWORDS: &str = include_str!("../../data/stopwords_en.txt");

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TextError {
    #[error("token is not a digit string")]
    NotDigits,
    #[error("malformed lemma rule on line {line}")]
    BadRule { line: usize },
    #[error("stopword entry {0:?} is not a lowercase alphabetic word")]
    BadStopword(String),
    #[error("cannot score an empty corpus")]
    EmptyCorpus,
}

/// Normalized terms, in document order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TermList {
    terms: Vec<String>,
}

impl TermList {
    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn extend(&mut self, other: TermList) {
        self.terms.extend(other.terms);
    }

    /// Space-joined terms; feeding this back through the normalizer yields
    /// the same list.
    pub fn joined(&self) -> String {
        self.terms.join(" ")
    }
}

impl<'a> IntoIterator for &'a TermList {
    type Item = &'a String;
    type IntoIter = core::slice::Iter<'a, String>;

    fn into_iter(self) -> Self::IntoIter {
        self.terms.iter()
    }
}

/// Stoplist plus lemmatizer; immutable once built and cheap to share.
#[derive(Debug, Clone)]
pub struct TextNormalizer {
    stopwords: BTreeSet<String>,
    lemmatizer: Lemmatizer,
}

impl TextNormalizer {
    /// Bundled stoplist and lemma table.
    pub fn bundled() -> Self {
        Self::new(BUNDLED_STOPWORDS, Lemmatizer::bundled()).expect("bundled stoplist is well formed")
    }

    pub fn new(stopword_lines: &str, lemmatizer: Lemmatizer) -> Result<Self, TextError> {
        let mut stopwords = BTreeSet::new();
        for line in stopword_lines.lines() {
            let word = line.trim();
            if word.is_empty() {
                continue;
            }
            if !word.chars().all(|c| c.is_alphabetic() && !c.is_uppercase()) {
                return Err(TextError::BadStopword(word.to_string()));
            }
            stopwords.insert(word.to_string());
        }
        Ok(Self { stopwords, lemmatizer })
    }

    pub fn is_stopword(&self, term: &str) -> bool {
        self.stopwords.contains(term)
    }

    pub fn lemmatizer(&self) -> &Lemmatizer {
        &self.lemmatizer
    }

    /// Steps 1–4 of the chain: lowercase alphabetic tokens, with integers
    /// spelled out.
    fn word_tokens(&self, raw: &str) -> Vec<String> {
        let mut out = Vec::new();
        for token in raw.split(|c: char| !c.is_alphanumeric()) {
            if token.is_empty() {
                continue;
            }
            let lower = token.to_lowercase();
            if lower.bytes().all(|b| b.is_ascii_digit()) {
                if let Ok(Some(words)) = number_to_words(&lower) {
                    out.extend(words.into_iter().map(String::from));
                }
                continue;
            }
            if lower.chars().all(char::is_alphabetic) {
                out.push(lower);
            }
        }
        out
    }

    /// Run the full normalization chain over raw text.
    pub fn preprocess(&self, raw: &str) -> TermList {
        let terms = self
            .word_tokens(raw)
            .into_iter()
            .filter(|t| !self.is_stopword(t))
            .map(|t| self.lemmatizer.lemmatize(&t))
            .filter(|t| !self.is_stopword(t))
            .collect();
        TermList { terms }
    }

    /// Normalize a dictionary word: the chain without stopword removal.
    /// `None` unless the word normalizes to exactly one term.
    pub fn normalize_term(&self, word: &str) -> Option<String> {
        let mut tokens = self.word_tokens(word);
        if tokens.len() != 1 {
            return None;
        }
        let token = tokens.pop()?;
        Some(self.lemmatizer.lemmatize(&token))
    }
}
