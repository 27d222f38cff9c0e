//! Pretrained word vectors restricted to a frequency-ranked vocabulary, and
//! the two embedding expansion modes: per-seed cosine threshold and cosine
//! to the seed centroid.
//!
//! The textual vector format is the one used by GloVe and by word2vec/
//! FastText `.vec` files: an optional `count dim` header, then one
//! `word v1 ... vd` line per word. Stored vectors are used as given; cosine
//! similarity takes care of the norms.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expansion::{Expander, Expansion};
use crate::scalar::RealScalar;
use crate::word::{normalize_word, Word, WordList};

pub const DEFAULT_TOP_N: usize = 25_000;
pub const DEFAULT_TAU: f64 = 0.5;

/// Words ranked by corpus frequency, most frequent first.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FrequencyRanking {
    words: Vec<Word>,
}

impl FrequencyRanking {
    /// Later duplicates are dropped.
    pub fn new<I: IntoIterator<Item = Word>>(words: I) -> Self {
        let mut seen = HashSet::new();
        FrequencyRanking {
            words: words.into_iter().filter(|w| seen.insert(w.clone())).collect(),
        }
    }

    /// One word per line; blank and `#` lines are skipped. Only the first
    /// whitespace-separated field is used, so `word count` files work too.
    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut words = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let Some(first) = line.split_whitespace().next() else {
                continue;
            };
            if first.starts_with('#') {
                continue;
            }
            words.push(normalize_word(first).map_err(|e| Error::parse(idx + 1, e.to_string()))?);
        }
        Ok(FrequencyRanking::new(words))
    }

    pub fn read_path(path: &Path) -> Result<Self> {
        FrequencyRanking::read(BufReader::new(fs::File::open(path)?))
    }

    pub fn top(&self, n: usize) -> &[Word] {
        &self.words[..n.min(self.words.len())]
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Dense vectors for a fixed vocabulary.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingSpace<F> {
    vocabulary: Vec<Word>,
    index: HashMap<Word, usize>,
    matrix: Vec<F>,
    norms: Vec<F>,
    dim: usize,
}

impl<F: RealScalar> EmbeddingSpace<F> {
    /// Builds a space from `(word, vector)` rows. Duplicate words keep their
    /// first vector.
    pub fn from_rows<I>(rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Word, Vec<F>)>,
    {
        let mut space = EmbeddingSpace {
            vocabulary: Vec::new(),
            index: HashMap::new(),
            matrix: Vec::new(),
            norms: Vec::new(),
            dim: 0,
        };
        for (word, vector) in rows {
            if space.vocabulary.is_empty() {
                space.dim = vector.len();
            }
            if vector.len() != space.dim || vector.is_empty() {
                return Err(Error::parse(
                    space.vocabulary.len() + 1,
                    format!("expected {} components, found {}", space.dim, vector.len()),
                ));
            }
            if vector.iter().any(|x| !x.is_finite()) {
                return Err(Error::parse(space.vocabulary.len() + 1, "non-finite component"));
            }
            if space.index.contains_key(&word) {
                continue;
            }
            space.index.insert(word.clone(), space.vocabulary.len());
            space.vocabulary.push(word);
            space.norms.push(norm(&vector));
            space.matrix.extend(vector);
        }
        if space.vocabulary.is_empty() {
            return Err(Error::NoData("embedding space is empty".into()));
        }
        Ok(space)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocabulary.is_empty()
    }

    pub fn vocabulary(&self) -> &[Word] {
        &self.vocabulary
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn vector(&self, word: &str) -> Option<&[F]> {
        self.index.get(word).map(|&i| self.row(i))
    }

    fn row(&self, i: usize) -> &[F] {
        &self.matrix[i * self.dim..(i + 1) * self.dim]
    }

    /// Words whose cosine to `query` is at least `tau`, skipping `exclude`
    /// and zero vectors.
    fn scan(&self, query: &[F], tau: F, exclude: &WordList) -> Vec<Word> {
        let query_norm = norm(query);
        (0..self.vocabulary.len())
            .into_par_iter()
            .filter(|&i| {
                let n = self.norms[i];
                if n == F::zero() || exclude.contains(self.vocabulary[i].as_str()) {
                    return false;
                }
                dot(self.row(i), query) / (n * query_norm) >= tau
            })
            .map(|i| self.vocabulary[i].clone())
            .collect()
    }

    fn split_seeds<'a>(&self, seeds: &'a WordList) -> (Vec<&'a Word>, WordList) {
        let mut matched = Vec::new();
        let mut unmatched = WordList::new(seeds.name.clone());
        for s in seeds {
            if self.contains(s.as_str()) {
                matched.push(s);
            } else {
                unmatched.insert(s.clone());
            }
        }
        (matched, unmatched)
    }
}

/// Reads a textual vector file, keeping only words among the `top_n` most
/// frequent of `ranking`. Rows come out in ranking order.
///
/// Every line is checked for the expected number of components, including
/// lines that are not kept.
pub fn load_embeddings<F: RealScalar, R: BufRead>(
    reader: R,
    ranking: &FrequencyRanking,
    top_n: usize,
) -> Result<EmbeddingSpace<F>> {
    let keep: HashMap<&Word, usize> = ranking.top(top_n).iter().enumerate().map(|(i, w)| (w, i)).collect();
    let mut dim: Option<usize> = None;
    let mut rows: Vec<(usize, Word, Vec<F>)> = Vec::new();
    let mut seen = HashSet::new();

    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let mut fields = line.split_whitespace();
        let Some(head) = fields.next() else {
            continue;
        };
        let rest: Vec<&str> = fields.collect();

        if idx == 0 && rest.len() == 1 {
            if let (Ok(_count), Ok(d)) = (head.parse::<usize>(), rest[0].parse::<usize>()) {
                dim = Some(d);
                continue;
            }
        }
        let d = *dim.get_or_insert(rest.len());
        if rest.len() != d || d == 0 {
            return Err(Error::parse(lineno, format!("expected {d} components, found {}", rest.len())));
        }
        let Ok(word) = normalize_word(head) else {
            continue;
        };
        let Some(&rank) = keep.get(&word) else {
            continue;
        };
        if !seen.insert(word.clone()) {
            continue;
        }
        let vector = rest
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .map(F::from_f64_lossy)
                    .ok_or_else(|| Error::parse(lineno, format!("invalid component {s:?}")))
            })
            .collect::<Result<Vec<F>>>()?;
        rows.push((rank, word, vector));
    }
    if rows.is_empty() {
        return Err(Error::NoData(
            "no word of the vector file is among the ranked vocabulary".into(),
        ));
    }
    rows.sort_by_key(|(rank, _, _)| *rank);
    EmbeddingSpace::from_rows(rows.into_iter().map(|(_, w, v)| (w, v)))
}

pub fn load_embeddings_path<F: RealScalar>(
    path: &Path,
    ranking: &FrequencyRanking,
    top_n: usize,
) -> Result<EmbeddingSpace<F>> {
    load_embeddings(BufReader::new(fs::File::open(path)?), ranking, top_n)
}

fn dot<F: RealScalar>(u: &[F], v: &[F]) -> F {
    u.iter().zip(v).fold(F::zero(), |acc, (a, b)| acc + *a * *b)
}

fn norm<F: RealScalar>(u: &[F]) -> F {
    dot(u, u).sqrt()
}

/// Cosine similarity `u·v / (‖u‖‖v‖)`.
pub fn cosine<F: RealScalar>(u: &[F], v: &[F]) -> Result<F> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch(u.len(), v.len()));
    }
    let (nu, nv) = (norm(u), norm(v));
    if nu == F::zero() || nv == F::zero() {
        return Err(Error::DegenerateVector);
    }
    Ok(dot(u, v) / (nu * nv))
}

fn check_tau<F: RealScalar>(tau: F) -> Result<()> {
    if tau > F::zero() && tau <= F::one() {
        Ok(())
    } else {
        Err(Error::InvalidArgument("tau must lie in (0, 1]".into()))
    }
}

/// Every non-seed word within cosine `tau` of at least one matched seed.
pub fn expand_threshold<F: RealScalar>(space: &EmbeddingSpace<F>, seeds: &WordList, tau: F) -> Result<Expansion> {
    check_tau(tau)?;
    let (matched, unmatched) = space.split_seeds(seeds);
    let mut words = Vec::new();
    for seed in matched {
        let v = space.vector(seed.as_str()).expect("matched seed has a vector");
        if norm(v) == F::zero() {
            continue;
        }
        words.extend(space.scan(v, tau, seeds));
    }
    Ok(Expansion::new(seeds, words, unmatched))
}

/// Every non-seed word within cosine `tau` of the sum of the matched seed
/// vectors. The sum has the direction of the mean, so cosine is unaffected
/// by the choice.
pub fn expand_centroid<F: RealScalar>(space: &EmbeddingSpace<F>, seeds: &WordList, tau: F) -> Result<Expansion> {
    check_tau(tau)?;
    let (matched, unmatched) = space.split_seeds(seeds);
    if matched.is_empty() {
        return Err(Error::NotExpandable);
    }
    let mut centroid = vec![F::zero(); space.dim];
    for seed in &matched {
        for (c, x) in centroid.iter_mut().zip(space.vector(seed.as_str()).expect("matched")) {
            *c = *c + *x;
        }
    }
    if norm(&centroid) == F::zero() {
        return Err(Error::DegenerateVector);
    }
    let words = space.scan(&centroid, tau, seeds);
    Ok(Expansion::new(seeds, words, unmatched))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmbeddingMode {
    Threshold,
    Centroid,
}

impl std::str::FromStr for EmbeddingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "threshold" => Ok(EmbeddingMode::Threshold),
            "centroid" => Ok(EmbeddingMode::Centroid),
            other => Err(Error::InvalidArgument(format!("unknown embedding mode {other:?}"))),
        }
    }
}

/// An embedding space bound to a mode and a threshold.
#[derive(Clone, Debug)]
pub struct EmbeddingExpander<F> {
    space: Arc<EmbeddingSpace<F>>,
    mode: EmbeddingMode,
    tau: F,
    id: String,
}

impl<F: RealScalar> EmbeddingExpander<F> {
    pub fn new(space: Arc<EmbeddingSpace<F>>, mode: EmbeddingMode, tau: F) -> Result<Self> {
        check_tau(tau)?;
        let id = match mode {
            EmbeddingMode::Threshold => "embedding-threshold",
            EmbeddingMode::Centroid => "embedding-centroid",
        };
        Ok(EmbeddingExpander {
            space,
            mode,
            tau,
            id: id.to_string(),
        })
    }
}

impl<F: RealScalar> Expander for EmbeddingExpander<F> {
    fn id(&self) -> &str {
        &self.id
    }

    fn expand(&self, seeds: &WordList) -> Result<Expansion> {
        match self.mode {
            EmbeddingMode::Threshold => expand_threshold(&self.space, seeds, self.tau),
            EmbeddingMode::Centroid => match expand_centroid(&self.space, seeds, self.tau) {
                Err(Error::NotExpandable) => Ok(Expansion::not_expandable(seeds)),
                other => other,
            },
        }
    }

    fn universe(&self) -> WordList {
        WordList::from_words("vocabulary", self.space.vocabulary.iter().cloned())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn w(s: &str) -> Word {
        Word::new(s).unwrap()
    }

    fn wl(words: &[&str]) -> WordList {
        WordList::from_strs("s", words).unwrap()
    }

    fn space(rows: &[(&str, &[f64])]) -> EmbeddingSpace<f64> {
        EmbeddingSpace::from_rows(rows.iter().map(|(s, v)| (w(s), v.to_vec()))).unwrap()
    }

    #[test]
    fn cosine_basics() {
        let x = [0.3, -1.2, 4.0];
        assert_relative_eq!(cosine(&x, &x).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        // 32 / sqrt(14 * 77)
        assert_relative_eq!(
            cosine(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap(),
            0.974_631_846_197_076_2,
            epsilon = 1e-15
        );
        assert!(matches!(cosine(&[0.0, 0.0], &[1.0, 0.0]), Err(Error::DegenerateVector)));
        let c32 = cosine::<f32>(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert_relative_eq!(c32, 0.974_631_8, epsilon = 1e-6);
    }

    #[test]
    fn header_and_intersection() {
        let file = "2 4\nhappy 1 0 0 0\nsad 0 1 0 0\n";
        let ranking = FrequencyRanking::new([w("sad"), w("happy"), w("other")]);
        let s: EmbeddingSpace<f64> = load_embeddings(file.as_bytes(), &ranking, 10).unwrap();
        assert_eq!(s.dim(), 4);
        assert_eq!(s.vocabulary(), &[w("sad"), w("happy")]);

        let file = "a 1 0\nb 0 1\nc 1 1\nd 2 2\ne 3 1\n";
        let ranking = FrequencyRanking::new([w("e"), w("a"), w("c"), w("zzz")]);
        let s: EmbeddingSpace<f64> = load_embeddings(file.as_bytes(), &ranking, 25_000).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.vector("c").unwrap(), &[1.0, 1.0]);
        let s: EmbeddingSpace<f64> = load_embeddings(file.as_bytes(), &ranking, 2).unwrap();
        assert_eq!(s.vocabulary(), &[w("e"), w("a")]);
    }

    #[test]
    fn load_errors() {
        let ranking = FrequencyRanking::new([w("a")]);
        let err = load_embeddings::<f64, _>("a 1 2\nb 1\n".as_bytes(), &ranking, 5).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = load_embeddings::<f64, _>("x 1 2\n".as_bytes(), &ranking, 5).unwrap_err();
        assert!(matches!(err, Error::NoData(_)));
        let err = load_embeddings::<f64, _>("a 1 nan\n".as_bytes(), &ranking, 5).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn threshold_expansion() {
        let s = space(&[("seed", &[1.0, 0.0]), ("near", &[0.6, 0.8]), ("far", &[-0.6, 0.8])]);
        let e = expand_threshold(&s, &wl(&["seed"]), 0.5).unwrap();
        assert_eq!(e.new_words, wl(&["near"]));
        let e = expand_threshold(&s, &wl(&["seed"]), 1.0).unwrap();
        assert!(e.new_words.is_empty());
        let e = expand_threshold(&s, &wl(&["missing"]), 0.5).unwrap();
        assert!(!e.is_expandable());
        assert!(expand_threshold(&s, &wl(&["seed"]), 0.0).is_err());
    }

    #[test]
    fn centroid_matches_threshold_for_one_seed() {
        let s = space(&[
            ("a", &[1.0, 0.2, 0.1]),
            ("b", &[0.9, 0.3, -0.1]),
            ("c", &[-1.0, 0.1, 0.0]),
            ("d", &[0.5, 0.5, 0.5]),
        ]);
        for seed in ["a", "b", "c", "d"] {
            let seeds = wl(&[seed]);
            assert_eq!(
                expand_centroid(&s, &seeds, 0.5).unwrap().new_words,
                expand_threshold(&s, &seeds, 0.5).unwrap().new_words
            );
        }
    }

    #[test]
    fn centroid_errors() {
        let s = space(&[("up", &[1.0, 2.0]), ("down", &[-1.0, -2.0]), ("x", &[1.0, 0.0])]);
        assert!(matches!(expand_centroid(&s, &wl(&["up", "down"]), 0.5), Err(Error::DegenerateVector)));
        assert!(matches!(expand_centroid(&s, &wl(&["nope"]), 0.5), Err(Error::NotExpandable)));
        let ex = EmbeddingExpander::new(Arc::new(s), EmbeddingMode::Centroid, 0.5).unwrap();
        assert!(!ex.expand(&wl(&["nope"])).unwrap().is_expandable());
    }

    #[test]
    fn generic_over_f32() {
        let s: EmbeddingSpace<f32> =
            EmbeddingSpace::from_rows([(w("a"), vec![1.0f32, 0.0]), (w("b"), vec![0.8, 0.6])]).unwrap();
        assert_eq!(expand_threshold(&s, &wl(&["a"]), 0.7f32).unwrap().new_words, wl(&["b"]));
    }
}
