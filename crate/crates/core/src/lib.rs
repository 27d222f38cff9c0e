//! Lexicon expansion from seed words.
//!
//! Seed lists are grown into thematic lexica through three kinds of
//! resources:
//!
//! * a multilingual colexification network ([`colex`]),
//! * a synonym network exported from WordNet-like resources ([`synonym`]),
//! * pretrained word embeddings, per seed or via the seed centroid
//!   ([`embedding`]).
//!
//! [`eval`] scores expansions against gold lexica with random seed
//! sampling and length-matched null baselines, [`annotation`] estimates
//! precision from human relevance labels, and [`text`] scores documents
//! by lexicon frequency.
//!
//! Numeric code is generic over the scalar type (see [`scalar`]); the
//! aliases below fix it to `f64`.

pub mod annotation;
pub mod colex;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod expansion;
pub mod scalar;
pub mod synonym;
pub mod text;
pub mod word;

pub use colex::{build_colex_graph, expand_colex, BilingualDictionary, ColexExpander, ColexGraph};
pub use error::{Error, Result};
pub use eval::{
    baseline_null, combine, confusion, coverage, prf, random_seed_experiment, CombineMode, CombinedExpander,
    Confusion, EvalReport, ExperimentConfig, SeedSelection,
};
pub use expansion::{Expander, Expansion};
pub use scalar::{RealScalar, Scalar};
pub use synonym::{expand_synonym, SynonymGraph};
pub use word::{expand_wildcards, normalize_word, WildcardPattern, Word, WordList};

pub type EmbeddingSpace = embedding::EmbeddingSpace<f64>;
pub type EmbeddingSpace32 = embedding::EmbeddingSpace<f32>;
pub type EmbeddingExpander = embedding::EmbeddingExpander<f64>;
pub type Metrics = eval::Metrics<f64>;
pub type ScoreSeries = text::ScoreSeries<f64>;
pub type Correlation = text::Correlation<f64>;
pub type PrecisionEstimate = annotation::PrecisionEstimate<f64>;
