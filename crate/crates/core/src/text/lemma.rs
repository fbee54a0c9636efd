//! Rule-table lemmatizer: irregular forms plus ordered suffix rewrites.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::TextError;

/// The table shipped with the crate.
pub const BUNDLED_RULES: &str = include_str!("../../data/lemma_rules.txt");

const MIN_LEMMA_CHARS: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
struct SuffixRule {
    suffix: String,
    replacement: String,
}

impl SuffixRule {
    fn is_guard(&self) -> bool {
        self.suffix == self.replacement
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lemmatizer {
    exceptions: BTreeMap<String, String>,
    rules: Vec<SuffixRule>,
}

impl Lemmatizer {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_RULES).expect("bundled lemma table is well formed")
    }

    /// Parse a rule table (format documented at the top of the bundled file).
    pub fn parse(source: &str) -> Result<Self, TextError> {
        let mut exceptions = BTreeMap::new();
        let mut rules = Vec::new();
        for (idx, raw) in source.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || TextError::BadRule { line: idx + 1 };
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.as_slice() {
                ["=", form, lemma] => {
                    if exceptions.insert(form.to_string(), lemma.to_string()).is_some() {
                        return Err(bad());
                    }
                }
                [suffix, replacement] if *suffix != "=" => {
                    let replacement = if *replacement == "-" { "" } else { replacement };
                    if replacement != *suffix && replacement.len() >= suffix.len() {
                        return Err(bad());
                    }
                    rules.push(SuffixRule {
                        suffix: suffix.to_string(),
                        replacement: replacement.to_string(),
                    });
                }
                _ => return Err(bad()),
            }
        }
        Ok(Self { exceptions, rules })
    }

    fn step(&self, word: &str) -> Option<String> {
        if let Some(lemma) = self.exceptions.get(word) {
            return (lemma != word).then(|| lemma.clone());
        }
        for rule in &self.rules {
            let Some(stem) = word.strip_suffix(rule.suffix.as_str()) else {
                continue;
            };
            if rule.is_guard() {
                return None;
            }
            if stem.chars().count() + rule.replacement.chars().count() >= MIN_LEMMA_CHARS {
                let mut out = String::with_capacity(stem.len() + rule.replacement.len());
                out.push_str(stem);
                out.push_str(&rule.replacement);
                return Some(out);
            }
        }
        None
    }

    /// Apply rewrites until the word is a fixed point, so
    /// `lemmatize(lemmatize(w)) == lemmatize(w)`.
    pub fn lemmatize(&self, word: &str) -> String {
        let mut current = word.to_string();
        // every rewrite either comes from the irregular table or shortens the word
        for _ in 0..=word.len() + self.exceptions.len() {
            match self.step(&current) {
                Some(next) => current = next,
                None => break,
            }
        }
        current
    }

    pub fn exception_forms(&self) -> impl Iterator<Item = (&str, &str)> {
        self.exceptions.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}
