//! The common result type of every expansion method, and the [`Expander`]
//! trait the evaluation harness drives.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::word::{Word, WordList};

/// Outcome of expanding a seed list: `L = seeds ∪ new_words`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Expansion {
    pub seeds: WordList,
    /// `W`: retrieved words, seeds excluded, sorted.
    pub new_words: WordList,
    /// Seeds that could not be mapped onto the resource.
    pub unmatched: WordList,
}

impl Expansion {
    pub(crate) fn new(seeds: &WordList, mut new_words: Vec<Word>, unmatched: WordList) -> Self {
        new_words.sort();
        new_words.dedup();
        new_words.retain(|w| !seeds.contains(w.as_str()));
        Expansion {
            seeds: seeds.clone(),
            new_words: WordList::from_words(seeds.name.clone(), new_words),
            unmatched,
        }
    }

    /// The expansion of a list none of whose seeds could be mapped.
    pub fn not_expandable(seeds: &WordList) -> Self {
        Expansion {
            seeds: seeds.clone(),
            new_words: WordList::new(seeds.name.clone()),
            unmatched: seeds.clone(),
        }
    }

    /// `L = S ∪ W`, seeds first.
    pub fn expanded(&self) -> WordList {
        self.seeds.union(&self.new_words)
    }

    /// At least one seed was found in the resource.
    pub fn is_expandable(&self) -> bool {
        self.unmatched.len() < self.seeds.len()
    }
}

/// A lexicon expansion method bound to its resource.
pub trait Expander: Send + Sync {
    fn id(&self) -> &str;

    fn expand(&self, seeds: &WordList) -> Result<Expansion>;

    /// Candidate words the null baseline samples from: node labels for graph
    /// methods, the vocabulary for embedding methods.
    fn universe(&self) -> WordList;
}
