//! Word-level synonym networks (WordNet/OdeNet exports) and their
//! neighborhood expansion.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::expansion::{Expander, Expansion};
use crate::word::{normalize_word, Word, WordList};

/// Undirected word graph without self-loops.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SynonymGraph {
    adjacency: BTreeMap<Word, BTreeSet<Word>>,
    name: String,
}

impl SynonymGraph {
    pub fn new(name: impl Into<String>) -> Self {
        SynonymGraph {
            adjacency: BTreeMap::new(),
            name: name.into(),
        }
    }

    /// Self-loops are ignored.
    pub fn add_edge(&mut self, a: Word, b: Word) {
        if a == b {
            return;
        }
        self.adjacency.entry(a.clone()).or_default().insert(b.clone());
        self.adjacency.entry(b).or_default().insert(a);
    }

    pub fn neighbors(&self, word: &str) -> Option<&BTreeSet<Word>> {
        self.adjacency.get(word)
    }

    pub fn degree(&self, word: &str) -> usize {
        self.adjacency.get(word).map_or(0, BTreeSet::len)
    }

    pub fn word_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.values().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn words(&self) -> impl Iterator<Item = &Word> + '_ {
        self.adjacency.keys()
    }

    /// Parses `word_a<TAB>word_b` lines; `#` starts a comment line.
    pub fn read<R: BufRead>(name: impl Into<String>, reader: R) -> Result<Self> {
        let mut graph = SynonymGraph::new(name);
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut fields = line.split('\t');
            let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(Error::parse(lineno, "expected word_a<TAB>word_b"));
            };
            let a = normalize_word(a).map_err(|e| Error::parse(lineno, e.to_string()))?;
            let b = normalize_word(b).map_err(|e| Error::parse(lineno, e.to_string()))?;
            graph.add_edge(a, b);
        }
        Ok(graph)
    }

    pub fn read_path(path: &Path) -> Result<Self> {
        let file = fs::File::open(path)?;
        SynonymGraph::read(crate::word::file_stem(path), BufReader::new(file))
    }

    /// Writes each edge once, `a < b`, sorted.
    pub fn write<W: Write>(&self, mut writer: W) -> Result<()> {
        for (a, neighbors) in &self.adjacency {
            for b in neighbors.range::<Word, _>((std::ops::Bound::Excluded(a), std::ops::Bound::Unbounded)) {
                writeln!(writer, "{a}\t{b}")?;
            }
        }
        Ok(())
    }
}

/// Union of the seeds' neighbors, seeds removed.
pub fn expand_synonym(graph: &SynonymGraph, seeds: &WordList) -> Expansion {
    let mut words = Vec::new();
    let mut unmatched = WordList::new(seeds.name.clone());
    for seed in seeds {
        match graph.adjacency.get(seed) {
            Some(n) => words.extend(n.iter().cloned()),
            None => {
                unmatched.insert(seed.clone());
            }
        }
    }
    Expansion::new(seeds, words, unmatched)
}

impl Expander for SynonymGraph {
    fn id(&self) -> &str {
        "synonym"
    }

    fn expand(&self, seeds: &WordList) -> Result<Expansion> {
        Ok(expand_synonym(self, seeds))
    }

    fn universe(&self) -> WordList {
        WordList::from_words(self.name.clone(), self.adjacency.keys().cloned())
    }
}
