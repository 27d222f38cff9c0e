//! Words, word lists and trailing-star wildcard patterns.
//!
//! Every module compares words by exact string equality after
//! [`normalize_word`]; there is no stemming or lemmatization.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::io::{BufRead, Write};
use std::path::Path;

use indexmap::IndexSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A normalized word: lowercase, trimmed, non-empty and free of whitespace.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Word(String);

impl Word {
    pub fn new(raw: &str) -> Result<Self> {
        normalize_word(raw)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Word {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl std::borrow::Borrow<str> for Word {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Word {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        normalize_word(&s)
    }
}

impl From<Word> for String {
    fn from(w: Word) -> String {
        w.0
    }
}

/// Trims and lowercases `raw`.
///
/// Fails with [`Error::InvalidWord`] when nothing is left after trimming or
/// when the word contains interior whitespace (multi-word expressions are
/// not supported).
pub fn normalize_word(raw: &str) -> Result<Word> {
    let trimmed = raw.trim();
    if trimmed.is_empty() || trimmed.chars().any(char::is_whitespace) {
        return Err(Error::InvalidWord(raw.to_string()));
    }
    let mut lower = trimmed.to_lowercase();
    // A handful of code points lowercase to sequences that lowercase again
    // differently; iterate to the fixed point so normalization is idempotent.
    loop {
        let again = lower.to_lowercase();
        if again == lower {
            break;
        }
        lower = again;
    }
    Ok(Word(lower))
}

/// A word-list entry: an exact word or a stem followed by a single `*`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WildcardPattern {
    stem: String,
    trailing_star: bool,
}

impl WildcardPattern {
    pub fn parse(raw: &str) -> Result<Self> {
        let trimmed = raw.trim();
        let (body, star) = match trimmed.strip_suffix('*') {
            Some(body) => (body, true),
            None => (trimmed, false),
        };
        if body.contains('*') || (star && body.trim().is_empty()) {
            return Err(Error::InvalidPattern(raw.to_string()));
        }
        let stem = normalize_word(body)?;
        Ok(WildcardPattern {
            stem: stem.0,
            trailing_star: star,
        })
    }

    pub fn exact(word: &Word) -> Self {
        WildcardPattern {
            stem: word.0.clone(),
            trailing_star: false,
        }
    }

    pub fn stem(&self) -> &str {
        &self.stem
    }

    pub fn is_wildcard(&self) -> bool {
        self.trailing_star
    }

    pub fn matches(&self, word: &str) -> bool {
        if self.trailing_star {
            word.starts_with(&self.stem)
        } else {
            word == self.stem
        }
    }
}

impl fmt::Display for WildcardPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.trailing_star {
            write!(f, "{}*", self.stem)
        } else {
            f.write_str(&self.stem)
        }
    }
}

/// A named, insertion-ordered, duplicate-free list of words.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordList {
    pub name: String,
    words: IndexSet<Word>,
}

impl WordList {
    pub fn new(name: impl Into<String>) -> Self {
        WordList {
            name: name.into(),
            words: IndexSet::new(),
        }
    }

    pub fn from_words<I: IntoIterator<Item = Word>>(name: impl Into<String>, words: I) -> Self {
        WordList {
            name: name.into(),
            words: words.into_iter().collect(),
        }
    }

    /// Normalizes each string; fails on the first invalid word.
    pub fn from_strs<I, S>(name: impl Into<String>, words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let words = words
            .into_iter()
            .map(|s| normalize_word(s.as_ref()))
            .collect::<Result<IndexSet<_>>>()?;
        Ok(WordList {
            name: name.into(),
            words,
        })
    }

    /// Returns true if the word was not already present.
    pub fn insert(&mut self, word: Word) -> bool {
        self.words.insert(word)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &Word> + '_ {
        self.words.iter()
    }

    pub fn get(&self, index: usize) -> Option<&Word> {
        self.words.get_index(index)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Words of `self` that are not in `other`, in `self` order.
    pub fn difference(&self, other: &WordList) -> WordList {
        WordList::from_words(
            self.name.clone(),
            self.iter().filter(|w| !other.contains(w.as_str())).cloned(),
        )
    }

    /// Words of `self` that are also in `other`, in `self` order.
    pub fn intersection(&self, other: &WordList) -> WordList {
        WordList::from_words(
            self.name.clone(),
            self.iter().filter(|w| other.contains(w.as_str())).cloned(),
        )
    }

    /// `self` followed by the words of `other` not already present.
    pub fn union(&self, other: &WordList) -> WordList {
        let mut out = self.clone();
        out.words.extend(other.iter().cloned());
        out
    }

    pub fn sorted(&self) -> WordList {
        let mut words: Vec<Word> = self.words.iter().cloned().collect();
        words.sort();
        WordList::from_words(self.name.clone(), words)
    }

    pub fn to_set(&self) -> BTreeSet<&str> {
        self.iter().map(Word::as_str).collect()
    }

    /// Reads a plain word list (no wildcards allowed).
    pub fn read<R: BufRead>(name: impl Into<String>, reader: R) -> Result<Self> {
        let patterns = read_patterns(reader)?;
        let mut list = WordList::new(name);
        for (line, pattern) in patterns {
            if pattern.is_wildcard() {
                return Err(Error::parse(line, format!("unexpected wildcard {pattern}")));
            }
            list.insert(Word(pattern.stem));
        }
        Ok(list)
    }

    /// Reads a word-list file, naming the list after the file stem.
    pub fn read_path(path: &Path) -> Result<Self> {
        let file = fs::File::open(path)?;
        WordList::read(file_stem(path), std::io::BufReader::new(file))
    }

    pub fn write<W: Write>(&self, mut writer: W) -> Result<()> {
        for w in self.iter() {
            writeln!(writer, "{w}")?;
        }
        Ok(())
    }

    pub fn write_path(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write(&mut buf)?;
        fs::write(path, buf)?;
        Ok(())
    }
}

impl<'a> IntoIterator for &'a WordList {
    type Item = &'a Word;
    type IntoIter = indexmap::set::Iter<'a, Word>;

    fn into_iter(self) -> Self::IntoIter {
        self.words.iter()
    }
}

pub(crate) fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Parses a word-list file into patterns, with 1-based line numbers.
///
/// Blank lines and lines starting with `#` are skipped.
pub fn read_patterns<R: BufRead>(reader: R) -> Result<Vec<(usize, WildcardPattern)>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let entry = line.trim();
        if entry.is_empty() || entry.starts_with('#') {
            continue;
        }
        let pattern = WildcardPattern::parse(entry).map_err(|e| Error::parse(idx + 1, e.to_string()))?;
        out.push((idx + 1, pattern));
    }
    Ok(out)
}

/// Result of resolving wildcard patterns against a dictionary.
#[derive(Clone, Debug)]
pub struct WildcardExpansion {
    pub words: WordList,
    /// Starred patterns that matched no dictionary entry; they are dropped.
    pub unmatched: Vec<WildcardPattern>,
}

/// Replaces starred patterns with every dictionary word sharing the stem.
///
/// Exact patterns are kept even when the dictionary lacks them. Matches of a
/// starred pattern are emitted in lexicographic order.
pub fn expand_wildcards(patterns: &[WildcardPattern], dictionary: &WordList) -> WildcardExpansion {
    let sorted: BTreeSet<&str> = dictionary.iter().map(Word::as_str).collect();
    let mut words = WordList::new(dictionary.name.clone());
    let mut unmatched = Vec::new();
    for pattern in patterns {
        if !pattern.is_wildcard() {
            words.insert(Word(pattern.stem.clone()));
            continue;
        }
        let mut hit = false;
        for w in sorted
            .range(pattern.stem.as_str()..)
            .take_while(|w| w.starts_with(pattern.stem.as_str()))
        {
            hit = true;
            words.insert(Word((*w).to_string()));
        }
        if !hit {
            log::warn!("wildcard pattern {pattern} matched no dictionary entry");
            unmatched.push(pattern.clone());
        }
    }
    WildcardExpansion { words, unmatched }
}
