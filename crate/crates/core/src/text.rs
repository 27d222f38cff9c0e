//! Dictionary-based document scoring and score correlation.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annotation::percentile;
use crate::error::{Error, Result};
use crate::eval::stream_rng;
use crate::scalar::RealScalar;
use crate::word::{normalize_word, Word, WordList};

/// Lowercased runs of alphabetic characters. Nothing is filtered, stop
/// words included.
pub fn tokenize(text: &str) -> Vec<Word> {
    text.split(|c: char| !c.is_alphabetic())
        .filter(|t| !t.is_empty())
        .filter_map(|t| normalize_word(t).ok())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub tokens: Vec<Word>,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        let text = text.into();
        let tokens = tokenize(&text);
        Document {
            id: id.into(),
            text,
            tokens,
        }
    }
}

#[derive(Deserialize)]
struct JsonDoc {
    id: serde_json::Value,
    text: String,
}

/// Loads a corpus from a directory of `.txt` files (id = file stem, sorted)
/// or from a JSON-lines file of `{"id": ..., "text": ...}` objects.
pub fn load_corpus(path: &Path) -> Result<Vec<Document>> {
    if path.is_dir() {
        let mut files: Vec<_> = fs::read_dir(path)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "txt"))
            .collect();
        files.sort();
        return files
            .iter()
            .map(|p| Ok(Document::new(crate::word::file_stem(p), fs::read_to_string(p)?)))
            .collect();
    }
    let reader = BufReader::new(fs::File::open(path)?);
    let mut docs = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: JsonDoc = serde_json::from_str(&line).map_err(|e| Error::parse(idx + 1, e.to_string()))?;
        let id = match doc.id {
            serde_json::Value::String(s) => s,
            other => other.to_string(),
        };
        docs.push(Document::new(id, doc.text));
    }
    Ok(docs)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoreMode {
    /// Lexicon hits divided by the document length.
    #[default]
    Relative,
    /// Raw hit count.
    Raw,
}

pub fn doc_score<F: RealScalar>(doc: &Document, lexicon: &WordList, mode: ScoreMode) -> Result<F> {
    if doc.tokens.is_empty() {
        return Err(Error::EmptyDocument(doc.id.clone()));
    }
    let hits = F::from_count(doc.tokens.iter().filter(|t| lexicon.contains(t.as_str())).count());
    Ok(match mode {
        ScoreMode::Relative => hits / F::from_count(doc.tokens.len()),
        ScoreMode::Raw => hits,
    })
}

/// Per-document scores keyed by document id.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreSeries<F> {
    pub scores: BTreeMap<String, F>,
}

impl<F: RealScalar> ScoreSeries<F> {
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn from_pairs<I: IntoIterator<Item = (String, F)>>(pairs: I) -> Self {
        ScoreSeries {
            scores: pairs.into_iter().collect(),
        }
    }
}

pub fn score_corpus<F: RealScalar>(docs: &[Document], lexicon: &WordList, mode: ScoreMode) -> Result<ScoreSeries<F>> {
    let scores = docs
        .par_iter()
        .map(|d| Ok((d.id.clone(), doc_score(d, lexicon, mode)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScoreSeries::from_pairs(scores))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorrelationKind {
    #[default]
    Pearson,
    Spearman,
}

impl std::str::FromStr for CorrelationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pearson" => Ok(CorrelationKind::Pearson),
            "spearman" => Ok(CorrelationKind::Spearman),
            other => Err(Error::InvalidArgument(format!("unknown correlation {other:?}"))),
        }
    }
}

/// Pearson correlation of paired samples, computed on centered values.
pub fn pearson<F: RealScalar>(x: &[F], y: &[F]) -> Result<F> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(Error::InsufficientData("need at least two pairs".into()));
    }
    let n = F::from_count(x.len());
    let mx = x.iter().copied().sum::<F>() / n;
    let my = y.iter().copied().sum::<F>() / n;
    let (mut sxy, mut sxx, mut syy) = (F::zero(), F::zero(), F::zero());
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (*a - mx, *b - my);
        sxy = sxy + dx * dy;
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
    }
    if sxx == F::zero() || syy == F::zero() {
        return Err(Error::UndefinedCorrelation);
    }
    let r = sxy / (sxx.sqrt() * syy.sqrt());
    Ok(r.max(-F::one()).min(F::one()))
}

/// Ranks starting at 1, ties sharing their average rank.
pub fn ranks<F: RealScalar>(x: &[F]) -> Vec<F> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].partial_cmp(&x[b]).expect("finite scores"));
    let mut out = vec![F::zero(); x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let avg = F::from_f64_lossy((i + j) as f64 / 2.0 + 1.0);
        for &k in &order[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

pub fn spearman<F: RealScalar>(x: &[F], y: &[F]) -> Result<F> {
    pearson(&ranks(x), &ranks(y))
}

fn coefficient<F: RealScalar>(x: &[F], y: &[F], kind: CorrelationKind) -> Result<F> {
    match kind {
        CorrelationKind::Pearson => pearson(x, y),
        CorrelationKind::Spearman => spearman(x, y),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Correlation<F> {
    pub kind: CorrelationKind,
    pub r: F,
    pub ci95: (F, F),
    pub documents: usize,
    pub bootstrap_reps: usize,
    /// Resamples that were constant in either series and were skipped.
    pub degenerate_resamples: usize,
}

/// Correlation of two score series over the same documents, with a
/// document-level bootstrap percentile interval.
pub fn correlate<F: RealScalar>(
    a: &ScoreSeries<F>,
    b: &ScoreSeries<F>,
    bootstrap_reps: usize,
    rng_seed: u64,
    kind: CorrelationKind,
) -> Result<Correlation<F>> {
    if !a.scores.keys().eq(b.scores.keys()) {
        return Err(Error::IdMismatch);
    }
    if a.len() < 3 {
        return Err(Error::InsufficientData("need at least three documents".into()));
    }
    if bootstrap_reps == 0 {
        return Err(Error::InvalidArgument("bootstrap repetitions must be at least 1".into()));
    }
    let x: Vec<F> = a.scores.values().copied().collect();
    let y: Vec<F> = b.scores.values().copied().collect();
    let r = coefficient(&x, &y, kind)?;

    let mut rng = stream_rng(rng_seed, 0);
    let n = x.len();
    let mut stats = Vec::with_capacity(bootstrap_reps);
    let mut degenerate = 0;
    let (mut bx, mut by) = (vec![F::zero(); n], vec![F::zero(); n]);
    for _ in 0..bootstrap_reps {
        for k in 0..n {
            let i = rng.random_range(0..n);
            bx[k] = x[i];
            by[k] = y[i];
        }
        match coefficient(&bx, &by, kind) {
            Ok(v) => stats.push(v),
            Err(Error::UndefinedCorrelation) => degenerate += 1,
            Err(e) => return Err(e),
        }
    }
    if stats.is_empty() {
        return Err(Error::InsufficientData("every bootstrap resample was constant".into()));
    }
    stats.sort_by(|p, q| p.partial_cmp(q).expect("finite"));
    Ok(Correlation {
        kind,
        r,
        ci95: (percentile(&stats, 0.025), percentile(&stats, 0.975)),
        documents: n,
        bootstrap_reps,
        degenerate_resamples: degenerate,
    })
}
