use std::fs;
use std::io;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use lexpand_core::annotation::{
    self, adjusted_precision, pairwise_kappa, sample_for_annotation, AcceptanceRule, AnnotationSet,
};
use lexpand_core::eval::{self, write_summary_csv, FalseNegativeRule, ListAggregate};
use lexpand_core::text::{correlate, load_corpus, score_corpus, CorrelationKind, ScoreMode};
use lexpand_core::word::read_patterns;
use lexpand_core::{
    build_colex_graph, combine, expand_wildcards, BilingualDictionary, ColexGraph, CombineMode, EvalReport,
    ExperimentConfig, SeedSelection, WildcardPattern, WordList,
};
use serde::Serialize;
use serde_json::json;

use crate::resources::{MethodParams, ResourceArgs};
use crate::service::{router, AppState};
use crate::session::SessionStore;

#[derive(Parser, Debug)]
#[command(name = "lexpand", version, about = "Seed-word lexicon expansion and evaluation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a colexification graph bundle from bilingual dictionaries into English.
    BuildGraph(BuildGraphArgs),
    /// Add a translated label map to an existing graph bundle.
    Translate(TranslateArgs),
    /// Resolve trailing-star wildcard entries against a dictionary.
    Dewildcard(DewildcardArgs),
    /// Expand a seed list.
    Expand(ExpandArgs),
    /// Evaluate a method against gold word lists.
    Eval(EvalArgs),
    /// Score documents by lexicon frequency and correlate with a reference lexicon.
    Score(ScoreArgs),
    /// Annotation sampling and agreement statistics.
    #[command(subcommand)]
    Annotate(AnnotateCommand),
    /// Run the local HTTP service for the curation UI.
    Serve(ServeArgs),
}

#[derive(Args, Debug)]
pub struct BuildGraphArgs {
    /// Directory of `src-en.tsv` dictionaries.
    #[arg(long)]
    pub input_dir: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = lexpand_core::colex::DEFAULT_MIN_LANGUAGES)]
    pub min_languages: usize,
    /// `LANG=PATH` of an English→LANG dictionary; repeatable.
    #[arg(long)]
    pub translate: Vec<String>,
}

#[derive(Args, Debug)]
pub struct TranslateArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// English→LANG dictionary TSV.
    #[arg(long)]
    pub dict: PathBuf,
    #[arg(long)]
    pub lang: String,
    /// Output bundle directory; defaults to rewriting `--graph`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DewildcardArgs {
    #[arg(long)]
    pub patterns: PathBuf,
    #[arg(long)]
    pub dictionary: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct MethodArgs {
    /// colex | synonym | embedding | embedding-threshold | embedding-centroid | union | intersection
    #[arg(long)]
    pub method: String,
    /// Query language of the colexification graph.
    #[arg(long, default_value = "en")]
    pub lang: String,
    #[arg(long, default_value_t = lexpand_core::embedding::DEFAULT_TAU)]
    pub tau: f64,
    /// Embedding mode when `--method embedding`: threshold | centroid.
    #[arg(long, default_value = "threshold")]
    pub mode: String,
    /// Member methods of a union or intersection, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub members: Vec<String>,
    #[command(flatten)]
    pub resources: ResourceArgs,
}

impl MethodArgs {
    pub fn method_id(&self) -> anyhow::Result<String> {
        Ok(match self.method.as_str() {
            "embedding" => match self.mode.as_str() {
                "threshold" => "embedding-threshold".into(),
                "centroid" => "embedding-centroid".into(),
                other => bail!("unknown embedding mode {other:?}"),
            },
            other => other.to_string(),
        })
    }

    pub fn params(&self) -> MethodParams {
        MethodParams {
            lang: self.lang.clone(),
            tau: self.tau,
            members: self.members.clone(),
        }
    }
}

#[derive(Args, Debug)]
pub struct ExpandArgs {
    #[command(flatten)]
    pub method: MethodArgs,
    #[arg(long)]
    pub seeds: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// JSON sidecar path; defaults to `<out>.json`.
    #[arg(long)]
    pub sidecar: Option<PathBuf>,
    /// Saved expansions to combine with `--method union|intersection`.
    #[arg(long, num_args = 1..)]
    pub inputs: Vec<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[command(flatten)]
    pub method: MethodArgs,
    /// Gold word lists; repeatable.
    #[arg(long, num_args = 1.., required = true)]
    pub gold: Vec<PathBuf>,
    /// Dictionary used to resolve wildcard entries in gold lists.
    #[arg(long)]
    pub dictionary: Option<PathBuf>,
    /// Seed fractions, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "seeds")]
    pub fraction: Vec<f64>,
    /// Fixed seed list (expert seeds) instead of random fractions.
    #[arg(long)]
    pub seeds: Option<PathBuf>,
    #[arg(long, default_value_t = eval::DEFAULT_REPETITIONS)]
    pub reps: usize,
    #[arg(long, default_value_t = eval::DEFAULT_BASELINE_REPETITIONS)]
    pub baseline_reps: usize,
    #[arg(long, default_value_t = 0)]
    pub rng_seed: u64,
    /// Count seeds missing from W as false negatives.
    #[arg(long, alias = "strict-eq4")]
    pub literal_fn: bool,
    #[arg(long)]
    pub out_json: PathBuf,
    #[arg(long)]
    pub out_csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ScoreArgs {
    /// JSON-lines file or directory of .txt files.
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub lexicon: PathBuf,
    /// Reference lexicon to correlate against.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(long)]
    pub out_csv: PathBuf,
    #[arg(long)]
    pub out_json: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub bootstrap_reps: usize,
    #[arg(long, default_value_t = 0)]
    pub rng_seed: u64,
    /// Raw hit counts instead of relative frequencies.
    #[arg(long)]
    pub raw: bool,
    #[arg(long)]
    pub spearman: bool,
    /// Drop documents without tokens instead of failing.
    #[arg(long)]
    pub skip_empty: bool,
}

#[derive(Subcommand, Debug)]
pub enum AnnotateCommand {
    /// Sample words of a lexicon for raters.
    Sample {
        #[arg(long)]
        lexicon: PathBuf,
        #[arg(long, default_value_t = annotation::DEFAULT_SAMPLE_SIZE)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        rng_seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Inter-rater agreement and adjusted precision of an annotation CSV.
    Stats {
        #[arg(long)]
        annotations: PathBuf,
        #[arg(long, default_value_t = annotation::DEFAULT_BOOTSTRAP_REPS)]
        bootstrap_reps: usize,
        #[arg(long, default_value_t = 0)]
        rng_seed: u64,
        /// Accept by majority instead of unanimity.
        #[arg(long)]
        majority: bool,
        /// Gold list for the lower-bound precision of the annotated words.
        #[arg(long)]
        gold: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: SocketAddr,
    /// Directory of session decision logs.
    #[arg(long, default_value = "sessions")]
    pub sessions: PathBuf,
    #[command(flatten)]
    pub resources: ResourceArgs,
}

/// Maps an error to the process exit code: 2 for unreadable or malformed
/// input, 3 for inputs without usable data, 1 otherwise.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<lexpand_core::Error>() {
            return match e {
                lexpand_core::Error::NoData(_) => 3,
                lexpand_core::Error::Io(io) if io.kind() == io::ErrorKind::NotFound => 2,
                e if e.is_parse_error() => 2,
                _ => 1,
            };
        }
        if let Some(io) = cause.downcast_ref::<io::Error>() {
            if io.kind() == io::ErrorKind::NotFound {
                return 2;
            }
        }
    }
    1
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::BuildGraph(a) => build_graph(&a),
        Command::Translate(a) => translate(&a),
        Command::Dewildcard(a) => dewildcard(&a),
        Command::Expand(a) => expand(&a),
        Command::Eval(a) => evaluate(&a),
        Command::Score(a) => score(&a),
        Command::Annotate(a) => annotate(a),
        Command::Serve(a) => serve(a),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s).with_context(|| format!("writing {}", path.display()))
}

fn read_list(path: &Path) -> anyhow::Result<WordList> {
    WordList::read_path(path).with_context(|| format!("reading word list {}", path.display()))
}

fn build_graph(a: &BuildGraphArgs) -> anyhow::Result<()> {
    let mut files: Vec<PathBuf> = fs::read_dir(&a.input_dir)
        .with_context(|| format!("reading {}", a.input_dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "tsv"))
        .collect();
    files.sort();
    let dicts = files
        .iter()
        .map(|p| BilingualDictionary::read_path(p).with_context(|| format!("reading {}", p.display())))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let mut graph = build_colex_graph(&dicts, a.min_languages)?;
    for spec in &a.translate {
        let (lang, path) = spec
            .split_once('=')
            .with_context(|| format!("--translate expects LANG=PATH, got {spec:?}"))?;
        let dict = BilingualDictionary::read(io::BufReader::new(fs::File::open(path)?), "en", lang)?;
        graph = graph.translate_labels(&dict, lang);
    }
    graph.write_bundle(&a.out)?;
    eprintln!(
        "graph: {} nodes, {} edges, languages {:?}",
        graph.node_count(),
        graph.edge_count(),
        graph.languages().collect::<Vec<_>>()
    );
    Ok(())
}

fn translate(a: &TranslateArgs) -> anyhow::Result<()> {
    let graph = ColexGraph::read_bundle(&a.graph)?;
    let dict = BilingualDictionary::read(io::BufReader::new(fs::File::open(&a.dict)?), "en", &a.lang)?;
    let graph = graph.translate_labels(&dict, &a.lang);
    graph.write_bundle(a.out.as_ref().unwrap_or(&a.graph))?;
    Ok(())
}

fn read_gold(path: &Path, dictionary: Option<&WordList>) -> anyhow::Result<WordList> {
    let text = fs::read(path).with_context(|| format!("reading gold list {}", path.display()))?;
    let patterns: Vec<WildcardPattern> = read_patterns(text.as_slice())
        .with_context(|| format!("parsing {}", path.display()))?
        .into_iter()
        .map(|(_, p)| p)
        .collect();
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    match dictionary {
        Some(dict) => Ok(expand_wildcards(&patterns, dict).words.with_name(name)),
        None => {
            if let Some(p) = patterns.iter().find(|p| p.is_wildcard()) {
                return Err(lexpand_core::Error::InvalidPattern(format!(
                    "{p} in {} (pass --dictionary to resolve wildcards)",
                    path.display()
                ))
                .into());
            }
            Ok(WordList::from_words(name, patterns.iter().map(|p| lexpand_core::Word::new(p.stem()).expect("normalized"))))
        }
    }
}

fn dewildcard(a: &DewildcardArgs) -> anyhow::Result<()> {
    let dict = read_list(&a.dictionary)?;
    let text = fs::read(&a.patterns)?;
    let patterns: Vec<WildcardPattern> = read_patterns(text.as_slice())?.into_iter().map(|(_, p)| p).collect();
    let out = expand_wildcards(&patterns, &dict);
    for p in &out.unmatched {
        eprintln!("unmatched wildcard: {p}");
    }
    out.words.write_path(&a.out)?;
    Ok(())
}

fn expand(a: &ExpandArgs) -> anyhow::Result<()> {
    let seeds = read_list(&a.seeds)?;
    let method = a.method.method_id()?;
    let sidecar_path = a
        .sidecar
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.json", a.out.display())));

    if !a.inputs.is_empty() {
        let mode: CombineMode = method.parse()?;
        let lexica = a.inputs.iter().map(|p| read_list(p)).collect::<anyhow::Result<Vec<_>>>()?;
        let combined = combine(&lexica, &seeds, mode)?;
        combined.write_path(&a.out)?;
        write_json(
            &sidecar_path,
            &json!({
                "method": method,
                "inputs": a.inputs,
                "seed_count": seeds.len(),
                "new_word_count": combined.len() - combined.intersection(&seeds).len(),
                "expanded_size": combined.len(),
            }),
        )?;
        return Ok(());
    }

    let resources = a.method.resources.load()?;
    let expander = resources.expander(&method, &a.method.params())?;
    let expansion = expander.expand(&seeds)?;
    let expandable = expansion.is_expandable();
    let out = if expandable {
        expansion.expanded()
    } else {
        WordList::new(seeds.name.clone())
    };
    out.write_path(&a.out)?;
    write_json(
        &sidecar_path,
        &json!({
            "method": method,
            "params": a.method.params(),
            "expandable": expandable,
            "seed_count": seeds.len(),
            "unmatched_seeds": expansion.unmatched.iter().collect::<Vec<_>>(),
            "new_word_count": expansion.new_words.len(),
            "expanded_size": out.len(),
        }),
    )?;
    if !expandable {
        eprintln!("no seed could be mapped onto the resource; the list is not expandable");
    }
    Ok(())
}

#[derive(Serialize)]
struct EvalOutput {
    method: String,
    rng_seed: u64,
    summary: Vec<FractionSummary>,
    reports: Vec<EvalReport>,
}

#[derive(Serialize)]
struct FractionSummary {
    seeds: String,
    #[serde(flatten)]
    aggregate: ListAggregate,
}

fn evaluate(a: &EvalArgs) -> anyhow::Result<()> {
    let dictionary = a.dictionary.as_deref().map(read_list).transpose()?;
    let golds = a
        .gold
        .iter()
        .map(|p| read_gold(p, dictionary.as_ref()))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let method = a.method.method_id()?;
    let resources = a.method.resources.load()?;
    let expander = resources.expander(&method, &a.method.params())?;

    let selections: Vec<(String, SeedSelection)> = match &a.seeds {
        Some(p) => {
            let s = read_list(p)?;
            vec![(s.name.clone(), SeedSelection::Explicit(s))]
        }
        None if a.fraction.is_empty() => vec![("0.3".into(), SeedSelection::Fraction(0.3))],
        None => a.fraction.iter().map(|f| (f.to_string(), SeedSelection::Fraction(*f))).collect(),
    };

    let mut reports = Vec::new();
    let mut summary = Vec::new();
    for (label, selection) in selections {
        let cfg = ExperimentConfig {
            method: method.clone(),
            seeds: selection,
            repetitions: a.reps,
            rng_seed: a.rng_seed,
            baseline_repetitions: a.baseline_reps,
            false_negatives: if a.literal_fn {
                FalseNegativeRule::Literal
            } else {
                FalseNegativeRule::ExcludeSeeds
            },
        };
        let batch = golds
            .iter()
            .map(|g| lexpand_core::random_seed_experiment(g, expander.as_ref(), &cfg))
            .collect::<lexpand_core::Result<Vec<_>>>()?;
        summary.push(FractionSummary {
            seeds: label,
            aggregate: ListAggregate::from_reports(&batch),
        });
        reports.extend(batch);
    }
    if let Some(csv) = &a.out_csv {
        let mut buf = Vec::new();
        write_summary_csv(&reports, &mut buf)?;
        fs::write(csv, buf)?;
    }
    write_json(
        &a.out_json,
        &EvalOutput {
            method,
            rng_seed: a.rng_seed,
            summary,
            reports,
        },
    )
}

fn score(a: &ScoreArgs) -> anyhow::Result<()> {
    let mut docs = load_corpus(&a.corpus).with_context(|| format!("loading corpus {}", a.corpus.display()))?;
    if a.skip_empty {
        docs.retain(|d| !d.tokens.is_empty());
    }
    let mode = if a.raw { ScoreMode::Raw } else { ScoreMode::Relative };
    let lexicon = read_list(&a.lexicon)?;
    let scores = score_corpus::<f64>(&docs, &lexicon, mode)?;
    let reference = match &a.reference {
        Some(p) => Some(score_corpus::<f64>(&docs, &read_list(p)?, mode)?),
        None => None,
    };

    let mut w = csv::Writer::from_writer(Vec::new());
    match &reference {
        Some(_) => w.write_record(["id", "score", "reference"])?,
        None => w.write_record(["id", "score"])?,
    }
    for (id, s) in &scores.scores {
        let mut row = vec![id.clone(), s.to_string()];
        if let Some(r) = &reference {
            row.push(r.scores[id].to_string());
        }
        w.write_record(&row)?;
    }
    fs::write(&a.out_csv, w.into_inner()?)?;

    if let (Some(reference), Some(out)) = (&reference, &a.out_json) {
        let kind = if a.spearman {
            CorrelationKind::Spearman
        } else {
            CorrelationKind::Pearson
        };
        let c = correlate(&scores, reference, a.bootstrap_reps, a.rng_seed, kind)?;
        write_json(
            out,
            &json!({
                "lexicon": a.lexicon,
                "reference": a.reference,
                "mode": mode,
                "rng_seed": a.rng_seed,
                "correlation": c,
            }),
        )?;
    } else if a.out_json.is_some() {
        bail!("--out-json needs --reference");
    }
    Ok(())
}

fn annotate(cmd: AnnotateCommand) -> anyhow::Result<()> {
    match cmd {
        AnnotateCommand::Sample { lexicon, n, rng_seed, out } => {
            let lexicon = read_list(&lexicon)?;
            sample_for_annotation(&lexicon, n, rng_seed)?.write_path(&out)?;
            Ok(())
        }
        AnnotateCommand::Stats {
            annotations,
            bootstrap_reps,
            rng_seed,
            majority,
            gold,
            out,
        } => {
            let set = AnnotationSet::read_csv(
                fs::File::open(&annotations).with_context(|| format!("reading {}", annotations.display()))?,
            )?;
            let rule = if majority {
                AcceptanceRule::Majority
            } else {
                AcceptanceRule::Unanimous
            };
            let estimate = adjusted_precision::<f64>(&set, bootstrap_reps, rng_seed, rule)?;
            let lower_bound = match gold {
                Some(g) => {
                    let gold = read_list(&g)?;
                    let hits = set.words().filter(|w| gold.contains(w.as_str())).count();
                    Some(hits as f64 / set.len() as f64)
                }
                None => None,
            };
            let report = json!({
                "rule": rule,
                "rng_seed": rng_seed,
                "pairwise_kappa": pairwise_kappa(&set),
                "adjusted_precision": estimate,
                "lower_bound_precision": lower_bound,
            });
            match out {
                Some(p) => write_json(&p, &report),
                None => {
                    println!("{}", serde_json::to_string_pretty(&report)?);
                    Ok(())
                }
            }
        }
    }
}

fn serve(a: ServeArgs) -> anyhow::Result<()> {
    let resources = a.resources.load()?;
    let sessions = SessionStore::open(&a.sessions)?;
    log::info!("{} session(s) restored from {}", sessions.len(), a.sessions.display());
    let app = router(Arc::new(AppState { resources, sessions }));
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(a.addr).await?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, app).await?;
        Ok(())
    })
}
