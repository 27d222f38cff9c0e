//! Evaluation of expansion methods against gold lexica.
//!
//! Seeds are drawn from a gold list, expanded, and the retrieved words
//! `W = L \ S` are scored against the gold list. Each repetition is paired
//! with a length-matched null baseline sampled from the method's candidate
//! universe.
//!
//! Randomness is derived per repetition from `(rng_seed, stream)` so any
//! repetition can be replayed in isolation and results do not depend on
//! thread scheduling.

use std::collections::HashSet;
use std::io::Write;
use std::sync::Arc;

use rand::seq::index;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expansion::{Expander, Expansion};
use crate::scalar::Scalar;
use crate::word::{Word, WordList};

pub const DEFAULT_REPETITIONS: usize = 50;
pub const DEFAULT_BASELINE_REPETITIONS: usize = 1000;
pub const DEFAULT_FRACTIONS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

/// Deterministic RNG for one `(seed, stream)` pair.
pub fn stream_rng(rng_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    rng.set_stream(stream);
    rng
}

/// Which gold words count as false negatives.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FalseNegativeRule {
    /// `FN = original \ (W ∪ S)`: seeds were given, not retrieved.
    #[default]
    ExcludeSeeds,
    /// `FN = original \ W`, seeds included.
    Literal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Confusion {
    pub true_positives: WordList,
    pub false_positives: WordList,
    pub false_negatives: WordList,
}

impl Confusion {
    pub fn tp(&self) -> usize {
        self.true_positives.len()
    }

    pub fn fp(&self) -> usize {
        self.false_positives.len()
    }

    pub fn fn_count(&self) -> usize {
        self.false_negatives.len()
    }
}

/// Confusion sets of an expansion against a gold list, seeds excluded from
/// false negatives.
pub fn confusion(original: &WordList, seeds: &WordList, expanded: &WordList) -> Confusion {
    confusion_with(original, seeds, expanded, FalseNegativeRule::ExcludeSeeds)
}

pub fn confusion_with(
    original: &WordList,
    seeds: &WordList,
    expanded: &WordList,
    rule: FalseNegativeRule,
) -> Confusion {
    if seeds.iter().any(|s| !original.contains(s.as_str())) {
        log::debug!("seed list {:?} contains words outside the gold list", seeds.name);
    }
    let retrieved = expanded.difference(seeds);
    let true_positives = retrieved.intersection(original);
    let false_positives = retrieved.difference(original);
    let false_negatives = WordList::from_words(
        original.name.clone(),
        original.iter().filter(|w| {
            !retrieved.contains(w.as_str())
                && (rule == FalseNegativeRule::Literal || !seeds.contains(w.as_str()))
        }).cloned(),
    );
    Confusion {
        true_positives,
        false_positives,
        false_negatives,
    }
}

/// Precision, recall and F1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics<F> {
    pub precision: F,
    pub recall: F,
    pub f1: F,
}

impl<F: Scalar> Metrics<F> {
    /// Zero denominators give zero.
    pub fn from_counts(tp: usize, fp: usize, fn_count: usize) -> Self {
        let ratio = |num: usize, den: usize| {
            if den == 0 {
                F::zero()
            } else {
                F::from_count(num) / F::from_count(den)
            }
        };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_count);
        let sum = precision.clone() + recall.clone();
        let f1 = if sum == F::zero() {
            F::zero()
        } else {
            (F::one() + F::one()) * precision.clone() * recall.clone() / sum
        };
        Metrics { precision, recall, f1 }
    }
}

pub fn prf<F: Scalar>(c: &Confusion) -> Metrics<F> {
    Metrics::from_counts(c.tp(), c.fp(), c.fn_count())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedSelection {
    /// Random subsets of `⌈fraction · |original|⌉` words.
    Fraction(f64),
    /// A fixed, expert-chosen seed list; evaluated once.
    Explicit(WordList),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub method: String,
    pub seeds: SeedSelection,
    pub repetitions: usize,
    pub rng_seed: u64,
    pub baseline_repetitions: usize,
    #[serde(default)]
    pub false_negatives: FalseNegativeRule,
}

impl ExperimentConfig {
    pub fn fraction(method: impl Into<String>, fraction: f64, rng_seed: u64) -> Self {
        ExperimentConfig {
            method: method.into(),
            seeds: SeedSelection::Fraction(fraction),
            repetitions: DEFAULT_REPETITIONS,
            rng_seed,
            baseline_repetitions: DEFAULT_BASELINE_REPETITIONS,
            false_negatives: FalseNegativeRule::ExcludeSeeds,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let SeedSelection::Fraction(f) = self.seeds {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::InvalidArgument(format!("seed fraction {f} outside (0, 1)")));
            }
        }
        if self.repetitions == 0 {
            return Err(Error::InvalidArgument("repetitions must be at least 1".into()));
        }
        Ok(())
    }
}

/// Number of seeds drawn for a fraction of a list; rounds up.
pub fn seed_count(fraction: f64, list_len: usize) -> usize {
    // Guard against 0.3 * 10 = 3.0000000000000004 rounding up to 4.
    let raw = fraction * list_len as f64;
    let rounded = raw.round();
    if (raw - rounded).abs() < 1e-9 {
        rounded as usize
    } else {
        raw.ceil() as usize
    }
}

/// Uniform sample of `k` words without replacement, in list order.
pub fn sample_words<R: Rng + ?Sized>(list: &WordList, k: usize, rng: &mut R) -> WordList {
    let mut picked = index::sample(rng, list.len(), k).into_vec();
    picked.sort_unstable();
    WordList::from_words(
        list.name.clone(),
        picked.into_iter().map(|i| list.get(i).expect("index in range").clone()),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineStats {
    pub repetitions: usize,
    pub mean: Metrics<f64>,
    /// Sample standard deviation of the per-draw metrics.
    pub sd: Metrics<f64>,
}

impl BaselineStats {
    pub fn precision_standard_error(&self) -> f64 {
        self.sd.precision / (self.repetitions as f64).sqrt()
    }
}

/// Length-matched null model: `reps` uniform samples of `target_size` words
/// from `universe \ seeds`, each scored as if it were `W`.
pub fn baseline_null<R: Rng + ?Sized>(
    universe: &WordList,
    target_size: usize,
    original: &WordList,
    seeds: &WordList,
    reps: usize,
    rule: FalseNegativeRule,
    rng: &mut R,
) -> Result<BaselineStats> {
    if reps == 0 {
        return Err(Error::InvalidArgument("baseline repetitions must be at least 1".into()));
    }
    let candidates: Vec<&Word> = universe.iter().filter(|w| !seeds.contains(w.as_str())).collect();
    if target_size > candidates.len() {
        return Err(Error::InfeasibleSample {
            requested: target_size,
            available: candidates.len(),
        });
    }
    let hit: Vec<bool> = candidates.iter().map(|w| original.contains(w.as_str())).collect();
    let gold_total = match rule {
        FalseNegativeRule::ExcludeSeeds => original.iter().filter(|w| !seeds.contains(w.as_str())).count(),
        FalseNegativeRule::Literal => original.len(),
    };

    let mut draws = Vec::with_capacity(reps);
    for _ in 0..reps {
        let tp = index::sample(rng, candidates.len(), target_size)
            .iter()
            .filter(|&i| hit[i])
            .count();
        draws.push(Metrics::<f64>::from_counts(tp, target_size - tp, gold_total - tp));
    }
    let p = Stat::of(draws.iter().map(|m| m.precision));
    let r = Stat::of(draws.iter().map(|m| m.recall));
    let f = Stat::of(draws.iter().map(|m| m.f1));
    Ok(BaselineStats {
        repetitions: reps,
        mean: Metrics {
            precision: p.mean,
            recall: r.mean,
            f1: f.mean,
        },
        sd: Metrics {
            precision: p.sd,
            recall: r.sd,
            f1: f.sd,
        },
    })
}

/// Mean and sample standard deviation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub sd: f64,
}

impl Stat {
    /// Sums in iteration order; an empty input gives zeros.
    pub fn of<I: IntoIterator<Item = f64>>(values: I) -> Self {
        let values: Vec<f64> = values.into_iter().collect();
        if values.is_empty() {
            return Stat { mean: 0.0, sd: 0.0 };
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let sd = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Stat { mean, sd }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepetitionTrace {
    pub index: usize,
    pub seeds: WordList,
    pub expandable: bool,
    pub unmatched_seeds: usize,
    /// `|W|`
    pub new_words: usize,
    /// `|L| = |S ∪ W|`
    pub expanded_size: usize,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_count: usize,
    pub metrics: Metrics<f64>,
    pub baseline: Option<BaselineStats>,
}

/// Means over expandable repetitions only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub repetitions: usize,
    pub expandable_repetitions: usize,
    pub precision: Stat,
    pub recall: Stat,
    pub f1: Stat,
    pub expanded_size: Stat,
    pub new_words: Stat,
    pub baseline_precision: Stat,
    pub baseline_recall: Stat,
    pub baseline_f1: Stat,
}

impl Aggregate {
    pub fn from_traces(traces: &[RepetitionTrace]) -> Self {
        let ok: Vec<&RepetitionTrace> = traces.iter().filter(|t| t.expandable).collect();
        let base: Vec<&BaselineStats> = ok.iter().filter_map(|t| t.baseline.as_ref()).collect();
        Aggregate {
            repetitions: traces.len(),
            expandable_repetitions: ok.len(),
            precision: Stat::of(ok.iter().map(|t| t.metrics.precision)),
            recall: Stat::of(ok.iter().map(|t| t.metrics.recall)),
            f1: Stat::of(ok.iter().map(|t| t.metrics.f1)),
            expanded_size: Stat::of(ok.iter().map(|t| t.expanded_size as f64)),
            new_words: Stat::of(ok.iter().map(|t| t.new_words as f64)),
            baseline_precision: Stat::of(base.iter().map(|b| b.mean.precision)),
            baseline_recall: Stat::of(base.iter().map(|b| b.mean.recall)),
            baseline_f1: Stat::of(base.iter().map(|b| b.mean.f1)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub list: String,
    pub original_size: usize,
    pub config: ExperimentConfig,
    pub repetitions: Vec<RepetitionTrace>,
    pub aggregate: Aggregate,
}

impl EvalReport {
    /// Expandable in at least one repetition.
    pub fn is_covered(&self) -> bool {
        self.repetitions.iter().any(|t| t.expandable)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Scores one expansion, with its baseline drawn from `rng`.
fn evaluate_once<R: Rng + ?Sized>(
    index: usize,
    original: &WordList,
    expansion: &Expansion,
    universe: &WordList,
    cfg: &ExperimentConfig,
    rng: &mut R,
) -> RepetitionTrace {
    let expanded = expansion.expanded();
    let c = confusion_with(original, &expansion.seeds, &expanded, cfg.false_negatives);
    let expandable = expansion.is_expandable();
    let baseline = if expandable {
        match baseline_null(
            universe,
            expansion.new_words.len(),
            original,
            &expansion.seeds,
            cfg.baseline_repetitions,
            cfg.false_negatives,
            rng,
        ) {
            Ok(b) => Some(b),
            Err(e) => {
                log::warn!("baseline skipped for repetition {index}: {e}");
                None
            }
        }
    } else {
        None
    };
    RepetitionTrace {
        index,
        seeds: expansion.seeds.clone(),
        expandable,
        unmatched_seeds: expansion.unmatched.len(),
        new_words: expansion.new_words.len(),
        expanded_size: expanded.len(),
        tp: c.tp(),
        fp: c.fp(),
        fn_count: c.fn_count(),
        metrics: prf(&c),
        baseline,
    }
}

/// Runs the seed-sampling protocol of `cfg` for one gold list.
///
/// Repetition `k` draws its seeds from stream `2k` and its baseline from
/// stream `2k + 1` of `cfg.rng_seed`.
pub fn random_seed_experiment(
    original: &WordList,
    expander: &dyn Expander,
    cfg: &ExperimentConfig,
) -> Result<EvalReport> {
    cfg.validate()?;
    let universe = expander.universe();
    let repetitions = match &cfg.seeds {
        SeedSelection::Fraction(f) => {
            let k = seed_count(*f, original.len());
            if k == 0 {
                return Err(Error::InvalidArgument(format!(
                    "fraction {f} of {} words selects no seed",
                    original.len()
                )));
            }
            let k = k.min(original.len());
            (0..cfg.repetitions)
                .into_par_iter()
                .map(|rep| -> Result<RepetitionTrace> {
                    let mut rng = stream_rng(cfg.rng_seed, 2 * rep as u64);
                    let seeds = sample_words(original, k, &mut rng);
                    let expansion = expander.expand(&seeds)?;
                    let mut rng = stream_rng(cfg.rng_seed, 2 * rep as u64 + 1);
                    Ok(evaluate_once(rep, original, &expansion, &universe, cfg, &mut rng))
                })
                .collect::<Result<Vec<_>>>()?
        }
        SeedSelection::Explicit(seeds) => {
            let expansion = expander.expand(seeds)?;
            let mut rng = stream_rng(cfg.rng_seed, 1);
            vec![evaluate_once(0, original, &expansion, &universe, cfg, &mut rng)]
        }
    };
    let aggregate = Aggregate::from_traces(&repetitions);
    Ok(EvalReport {
        list: original.name.clone(),
        original_size: original.len(),
        config: cfg.clone(),
        repetitions,
        aggregate,
    })
}

/// Runs `random_seed_experiment` once per fraction.
pub fn fraction_sweep(
    original: &WordList,
    expander: &dyn Expander,
    base: &ExperimentConfig,
    fractions: &[f64],
) -> Result<Vec<EvalReport>> {
    fractions
        .iter()
        .map(|&f| {
            let cfg = ExperimentConfig {
                seeds: SeedSelection::Fraction(f),
                ..base.clone()
            };
            random_seed_experiment(original, expander, &cfg)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CombineMode {
    Union,
    Intersection,
}

impl std::str::FromStr for CombineMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "union" => Ok(CombineMode::Union),
            "intersection" => Ok(CombineMode::Intersection),
            other => Err(Error::InvalidArgument(format!("unknown combine mode {other:?}"))),
        }
    }
}

/// Union or intersection of the retrieved parts of several lexica; `seeds`
/// are removed first and put back in front of the result.
pub fn combine(lexica: &[WordList], seeds: &WordList, mode: CombineMode) -> Result<WordList> {
    if lexica.len() < 2 {
        return Err(Error::InvalidArgument("combine needs at least two lexica".into()));
    }
    let parts: Vec<WordList> = lexica.iter().map(|l| l.difference(seeds)).collect();
    let mut words: Vec<Word> = match mode {
        CombineMode::Union => {
            let mut seen = HashSet::new();
            parts
                .iter()
                .flat_map(|p| p.iter())
                .filter(|w| seen.insert(w.as_str()))
                .cloned()
                .collect()
        }
        CombineMode::Intersection => parts[0]
            .iter()
            .filter(|w| parts[1..].iter().all(|p| p.contains(w.as_str())))
            .cloned()
            .collect(),
    };
    words.sort();
    Ok(seeds.union(&WordList::from_words(seeds.name.clone(), words)))
}

/// Several expanders combined by union or intersection of their results.
///
/// A union is expandable when any member is; an intersection only when some
/// seed is matched by every member.
pub struct CombinedExpander {
    members: Vec<Arc<dyn Expander>>,
    mode: CombineMode,
}

impl CombinedExpander {
    pub fn new(members: Vec<Arc<dyn Expander>>, mode: CombineMode) -> Result<Self> {
        if members.len() < 2 {
            return Err(Error::InvalidArgument("combine needs at least two methods".into()));
        }
        Ok(CombinedExpander { members, mode })
    }
}

impl Expander for CombinedExpander {
    fn id(&self) -> &str {
        match self.mode {
            CombineMode::Union => "union",
            CombineMode::Intersection => "intersection",
        }
    }

    fn expand(&self, seeds: &WordList) -> Result<Expansion> {
        let results = self
            .members
            .iter()
            .map(|m| m.expand(seeds))
            .collect::<Result<Vec<_>>>()?;
        let lexica: Vec<WordList> = results.iter().map(Expansion::expanded).collect();
        let combined = combine(&lexica, seeds, self.mode)?;
        let unmatched = seeds.iter().filter(|s| {
            let mut missing = results.iter().map(|r| r.unmatched.contains(s.as_str()));
            match self.mode {
                CombineMode::Union => missing.all(|m| m),
                CombineMode::Intersection => missing.any(|m| m),
            }
        });
        let unmatched = WordList::from_words(seeds.name.clone(), unmatched.cloned());
        Ok(Expansion::new(seeds, combined.difference(seeds).iter().cloned().collect(), unmatched))
    }

    fn universe(&self) -> WordList {
        let universes: Vec<WordList> = self.members.iter().map(|m| m.universe()).collect();
        let mut out = universes[0].clone();
        for u in &universes[1..] {
            out = match self.mode {
                CombineMode::Union => out.union(u),
                CombineMode::Intersection => out.intersection(u),
            };
        }
        out
    }
}

/// Fraction of gold lists expandable in at least one repetition.
pub fn coverage(reports: &[EvalReport]) -> f64 {
    if reports.is_empty() {
        return 0.0;
    }
    reports.iter().filter(|r| r.is_covered()).count() as f64 / reports.len() as f64
}

/// Means across several gold lists, aggregated two ways.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ListAggregate {
    pub lists: usize,
    pub coverage: f64,
    /// Mean over lists of each list's repetition mean.
    pub by_list: MeanRow,
    /// Mean over all expandable repetitions of all lists.
    pub pooled: MeanRow,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanRow {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub baseline_precision: f64,
    pub baseline_recall: f64,
    pub baseline_f1: f64,
    pub expanded_size: f64,
}

impl MeanRow {
    fn of(aggs: &[Aggregate]) -> Self {
        MeanRow {
            precision: Stat::of(aggs.iter().map(|a| a.precision.mean)).mean,
            recall: Stat::of(aggs.iter().map(|a| a.recall.mean)).mean,
            f1: Stat::of(aggs.iter().map(|a| a.f1.mean)).mean,
            baseline_precision: Stat::of(aggs.iter().map(|a| a.baseline_precision.mean)).mean,
            baseline_recall: Stat::of(aggs.iter().map(|a| a.baseline_recall.mean)).mean,
            baseline_f1: Stat::of(aggs.iter().map(|a| a.baseline_f1.mean)).mean,
            expanded_size: Stat::of(aggs.iter().map(|a| a.expanded_size.mean)).mean,
        }
    }
}

impl ListAggregate {
    pub fn from_reports(reports: &[EvalReport]) -> Self {
        let per_list: Vec<Aggregate> = reports
            .iter()
            .filter(|r| r.aggregate.expandable_repetitions > 0)
            .map(|r| r.aggregate.clone())
            .collect();
        let all: Vec<RepetitionTrace> = reports.iter().flat_map(|r| r.repetitions.iter().cloned()).collect();
        ListAggregate {
            lists: reports.len(),
            coverage: coverage(reports),
            by_list: MeanRow::of(&per_list),
            pooled: MeanRow::of(&[Aggregate::from_traces(&all)]),
        }
    }
}

/// One CSV row per report with the columns of a results table.
pub fn write_summary_csv<W: Write>(reports: &[EvalReport], writer: W) -> Result<()> {
    let mut out = csv_writer(writer);
    let header = [
        "list", "method", "seeds", "repetitions", "expandable", "precision", "recall", "f1",
        "precision_bl", "recall_bl", "f1_bl", "mean_size",
    ];
    out.write_record(header).map_err(csv_err)?;
    for r in reports {
        let a = &r.aggregate;
        let seeds = match &r.config.seeds {
            SeedSelection::Fraction(f) => format!("{f}"),
            SeedSelection::Explicit(l) => l.name.clone(),
        };
        out.write_record([
            r.list.clone(),
            r.config.method.clone(),
            seeds,
            a.repetitions.to_string(),
            a.expandable_repetitions.to_string(),
            fmt4(a.precision.mean),
            fmt4(a.recall.mean),
            fmt4(a.f1.mean),
            fmt4(a.baseline_precision.mean),
            fmt4(a.baseline_recall.mean),
            fmt4(a.baseline_f1.mean),
            format!("{:.2}", a.expanded_size.mean),
        ])
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

fn fmt4(v: f64) -> String {
    format!("{v:.4}")
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().from_writer(w)
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::InvalidArgument(format!("csv: {other:?}")),
    }
}
