use alloc::collections::BTreeMap;
use alloc::string::String;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::TextNormalizer;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LexiconError {
    #[error("unknown lexicon category {0:?}")]
    UnknownCategory(String),
    #[error("lexicon has no usable entries")]
    EmptyLexicon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    Positive,
    Negative,
    Uncertainty,
    Litigious,
}

impl Category {
    pub const ALL: [Category; 4] = [
        Category::Positive,
        Category::Negative,
        Category::Uncertainty,
        Category::Litigious,
    ];

    fn bit(self) -> u8 {
        1 << self as u8
    }

    pub fn name(self) -> &'static str {
        match self {
            Category::Positive => "Positive",
            Category::Negative => "Negative",
            Category::Uncertainty => "Uncertainty",
            Category::Litigious => "Litigious",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Category {
    type Err = LexiconError;

    /// Case-insensitive; accepts the common "Litiguous" misspelling.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "positive" => Ok(Category::Positive),
            "negative" => Ok(Category::Negative),
            "uncertainty" => Ok(Category::Uncertainty),
            "litigious" | "litiguous" => Ok(Category::Litigious),
            _ => Err(LexiconError::UnknownCategory(s.into())),
        }
    }
}

/// Small bit set over [`Category`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CategorySet(u8);

impl CategorySet {
    pub fn insert(&mut self, c: Category) {
        self.0 |= c.bit();
    }

    pub fn contains(self, c: Category) -> bool {
        self.0 & c.bit() != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: CategorySet) -> CategorySet {
        CategorySet(self.0 | other.0)
    }

    pub fn iter(self) -> impl Iterator<Item = Category> {
        Category::ALL.into_iter().filter(move |c| self.contains(*c))
    }
}

impl FromIterator<Category> for CategorySet {
    fn from_iter<I: IntoIterator<Item = Category>>(iter: I) -> Self {
        let mut set = CategorySet::default();
        for c in iter {
            set.insert(c);
        }
        set
    }
}

/// Normalized term → categories. Keys are in the same form that
/// [`TextNormalizer::preprocess`] produces.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lexicon {
    entries: BTreeMap<String, CategorySet>,
    skipped: usize,
}

impl Lexicon {
    /// Build from raw (word, categories) rows. Words are normalized; rows
    /// that collide after normalization merge their categories. Words that
    /// do not normalize to a single term, and rows with no category, are
    /// skipped and counted.
    pub fn from_rows<I, S>(rows: I, normalizer: &TextNormalizer) -> Result<Self, LexiconError>
    where
        I: IntoIterator<Item = (S, CategorySet)>,
        S: AsRef<str>,
    {
        let mut entries: BTreeMap<String, CategorySet> = BTreeMap::new();
        let mut skipped = 0;
        for (word, categories) in rows {
            let key = match normalizer.normalize_term(word.as_ref()) {
                Some(key) if !categories.is_empty() => key,
                _ => {
                    skipped += 1;
                    continue;
                }
            };
            let slot = entries.entry(key).or_default();
            *slot = slot.union(categories);
        }
        if entries.is_empty() {
            return Err(LexiconError::EmptyLexicon);
        }
        Ok(Self { entries, skipped })
    }

    pub fn categories(&self, term: &str) -> CategorySet {
        self.entries.get(term).copied().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Source rows that did not produce an entry.
    pub fn skipped(&self) -> usize {
        self.skipped
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, CategorySet)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn set(cs: &[Category]) -> CategorySet {
        cs.iter().copied().collect()
    }

    #[test]
    fn uppercase_plural_normalizes() {
        let n = TextNormalizer::bundled();
        let lex = Lexicon::from_rows(vec![("ACHIEVES", set(&[Category::Positive]))], &n).unwrap();
        assert_eq!(lex.len(), 1);
        assert_eq!(lex.categories("achieve"), set(&[Category::Positive]));
    }

    #[test]
    fn case_collisions_merge() {
        let n = TextNormalizer::bundled();
        let lex = Lexicon::from_rows(
            vec![
                ("good", set(&[Category::Positive])),
                ("GOOD", set(&[Category::Positive])),
                ("Losses", set(&[Category::Negative])),
                ("loss", set(&[Category::Litigious])),
            ],
            &n,
        )
        .unwrap();
        assert_eq!(lex.len(), 2);
        assert_eq!(lex.categories("loss"), set(&[Category::Negative, Category::Litigious]));
    }

    #[test]
    fn empty_lexicon_is_an_error() {
        let n = TextNormalizer::bundled();
        let rows: [(&str, CategorySet); 0] = [];
        assert_eq!(Lexicon::from_rows(rows, &n), Err(LexiconError::EmptyLexicon));
        assert_eq!(
            Lexicon::from_rows([("a b", set(&[Category::Negative]))], &n),
            Err(LexiconError::EmptyLexicon)
        );
    }

    #[test]
    fn category_names() {
        assert_eq!("negative".parse::<Category>(), Ok(Category::Negative));
        assert_eq!("Litiguous".parse::<Category>(), Ok(Category::Litigious));
        assert!(matches!(
            "Happy".parse::<Category>(),
            Err(LexiconError::UnknownCategory(_))
        ));
    }
}
