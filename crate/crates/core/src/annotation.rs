//! Relevance annotations of expanded lexica: sampling words for raters,
//! Cohen's kappa, and bootstrap estimates of precision.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{csv_err, sample_words, stream_rng};
use crate::scalar::RealScalar;
use crate::word::{normalize_word, Word, WordList};

pub const DEFAULT_SAMPLE_SIZE: usize = 300;
/// Lists at most this long are annotated in full.
pub const FULL_ANNOTATION_LIMIT: usize = 2_000;
pub const DEFAULT_BOOTSTRAP_REPS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Relevant,
    Irrelevant,
}

impl std::str::FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "relevant" | "accept" | "accepted" | "1" | "yes" => Ok(Label::Relevant),
            "irrelevant" | "reject" | "rejected" | "0" | "no" => Ok(Label::Irrelevant),
            other => Err(Error::InvalidArgument(format!("unknown label {other:?}"))),
        }
    }
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Relevant => "relevant",
            Label::Irrelevant => "irrelevant",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AcceptanceRule {
    /// Every rater labeled the word relevant.
    #[default]
    Unanimous,
    /// Strictly more than half of the raters labeled it relevant.
    Majority,
}

/// Per-word labels from several raters.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationSet {
    items: BTreeMap<Word, Vec<(String, Label)>>,
}

impl AnnotationSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// A rater labeling the same word twice keeps the latest label.
    pub fn add(&mut self, word: Word, rater: impl Into<String>, label: Label) {
        let rater = rater.into();
        let labels = self.items.entry(word).or_default();
        match labels.iter_mut().find(|(r, _)| *r == rater) {
            Some(slot) => slot.1 = label,
            None => labels.push((rater, label)),
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = &Word> + '_ {
        self.items.keys()
    }

    pub fn labels(&self, word: &str) -> Option<&[(String, Label)]> {
        self.items.get(word).map(Vec::as_slice)
    }

    pub fn raters(&self) -> BTreeSet<&str> {
        self.items
            .values()
            .flat_map(|v| v.iter().map(|(r, _)| r.as_str()))
            .collect()
    }

    pub fn is_accepted(&self, word: &str, rule: AcceptanceRule) -> Result<bool> {
        let labels = self.items.get(word).map(Vec::as_slice).unwrap_or(&[]);
        if labels.len() < 2 {
            return Err(Error::InsufficientLabels {
                word: word.to_string(),
                labels: labels.len(),
            });
        }
        let relevant = labels.iter().filter(|(_, l)| *l == Label::Relevant).count();
        Ok(match rule {
            AcceptanceRule::Unanimous => relevant == labels.len(),
            AcceptanceRule::Majority => 2 * relevant > labels.len(),
        })
    }

    /// Acceptance flag of every word, in word order.
    pub fn accepted(&self, rule: AcceptanceRule) -> Result<Vec<(Word, bool)>> {
        self.items
            .keys()
            .map(|w| Ok((w.clone(), self.is_accepted(w.as_str(), rule)?)))
            .collect()
    }

    /// Words two raters both labeled, with their labels, in word order.
    pub fn paired(&self, rater_a: &str, rater_b: &str) -> (Vec<Label>, Vec<Label>) {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for labels in self.items.values() {
            let la = labels.iter().find(|(r, _)| r == rater_a);
            let lb = labels.iter().find(|(r, _)| r == rater_b);
            if let (Some((_, x)), Some((_, y))) = (la, lb) {
                a.push(*x);
                b.push(*y);
            }
        }
        (a, b)
    }

    /// CSV with header `word,rater,label`.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut set = AnnotationSet::new();
        for (idx, record) in rdr.records().enumerate() {
            let line = idx + 2;
            let record = record.map_err(|e| Error::parse(line, e.to_string()))?;
            if record.len() != 3 {
                return Err(Error::parse(line, "expected word,rater,label"));
            }
            let word = normalize_word(&record[0]).map_err(|e| Error::parse(line, e.to_string()))?;
            let label = record[2].parse().map_err(|e: Error| Error::parse(line, e.to_string()))?;
            set.add(word, &record[1], label);
        }
        Ok(set)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["word", "rater", "label"]).map_err(csv_err)?;
        for (word, labels) in &self.items {
            for (rater, label) in labels {
                w.write_record([word.as_str(), rater, label.as_str()]).map_err(csv_err)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Words to hand to raters: the whole list when it has at most `n` or at
/// most [`FULL_ANNOTATION_LIMIT`] words, otherwise a uniform sample of `n`.
pub fn sample_for_annotation(lexicon: &WordList, n: usize, rng_seed: u64) -> Result<WordList> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample size must be at least 1".into()));
    }
    if lexicon.len() <= n || lexicon.len() <= FULL_ANNOTATION_LIMIT {
        return Ok(lexicon.clone());
    }
    Ok(sample_words(lexicon, n, &mut stream_rng(rng_seed, 0)))
}

/// Cohen's kappa `(p_o - p_e) / (1 - p_e)` for two binary labelings.
pub fn cohen_kappa<F: RealScalar>(a: &[Label], b: &[Label]) -> Result<F> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(Error::InsufficientData("no items to compare".into()));
    }
    let n = F::from_count(a.len());
    let count = |xs: &[Label]| F::from_count(xs.iter().filter(|&&l| l == Label::Relevant).count());
    let agree = F::from_count(a.iter().zip(b).filter(|(x, y)| x == y).count());
    let p_o = agree / n;
    let (ra, rb) = (count(a) / n, count(b) / n);
    let p_e = ra * rb + (F::one() - ra) * (F::one() - rb);
    if p_e == F::one() {
        return Err(Error::UndefinedKappa);
    }
    Ok((p_o - p_e) / (F::one() - p_e))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairwiseKappa {
    pub rater_a: String,
    pub rater_b: String,
    pub shared_items: usize,
    /// `None` when undefined for this pair.
    pub kappa: Option<f64>,
}

/// Kappa for every rater pair sharing at least one item; not pooled.
pub fn pairwise_kappa(set: &AnnotationSet) -> Vec<PairwiseKappa> {
    let raters: Vec<&str> = set.raters().into_iter().collect();
    let mut out = Vec::new();
    for (i, a) in raters.iter().enumerate() {
        for b in &raters[i + 1..] {
            let (la, lb) = set.paired(a, b);
            if la.is_empty() {
                continue;
            }
            out.push(PairwiseKappa {
                rater_a: a.to_string(),
                rater_b: b.to_string(),
                shared_items: la.len(),
                kappa: cohen_kappa::<f64>(&la, &lb).ok(),
            });
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrecisionEstimate<F> {
    pub estimate: F,
    pub ci95: (F, F),
    pub annotated: usize,
    pub accepted: usize,
}

/// Percentile with linear interpolation between order statistics.
pub fn percentile<F: RealScalar>(sorted: &[F], q: f64) -> F {
    assert!(!sorted.is_empty(), "percentile of an empty sample");
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = F::from_f64_lossy(pos - lo as f64);
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Mean of a 0/1 flag vector and its bootstrap 95% percentile interval.
pub fn bootstrap_proportion<F: RealScalar, R: Rng + ?Sized>(
    flags: &[bool],
    reps: usize,
    rng: &mut R,
) -> Result<(F, (F, F))> {
    if flags.is_empty() {
        return Err(Error::InsufficientData("no annotated words".into()));
    }
    if reps == 0 {
        return Err(Error::InvalidArgument("bootstrap repetitions must be at least 1".into()));
    }
    let n = flags.len();
    let hits = flags.iter().filter(|&&f| f).count();
    let estimate = F::from_count(hits) / F::from_count(n);
    let mut stats: Vec<F> = (0..reps)
        .map(|_| {
            let k = (0..n).filter(|_| flags[rng.random_range(0..n)]).count();
            F::from_count(k) / F::from_count(n)
        })
        .collect();
    stats.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    Ok((estimate, (percentile(&stats, 0.025), percentile(&stats, 0.975))))
}

/// Share of annotated words accepted, with a bootstrap 95% interval.
pub fn adjusted_precision<F: RealScalar>(
    annotations: &AnnotationSet,
    bootstrap_reps: usize,
    rng_seed: u64,
    rule: AcceptanceRule,
) -> Result<PrecisionEstimate<F>> {
    let flags: Vec<bool> = annotations.accepted(rule)?.into_iter().map(|(_, a)| a).collect();
    let (estimate, ci95) = bootstrap_proportion(&flags, bootstrap_reps, &mut stream_rng(rng_seed, 0))?;
    Ok(PrecisionEstimate {
        estimate,
        ci95,
        annotated: flags.len(),
        accepted: flags.iter().filter(|&&f| f).count(),
    })
}
