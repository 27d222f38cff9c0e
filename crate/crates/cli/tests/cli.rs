use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lexpand_core::eval::Aggregate;
use lexpand_core::EvalReport;

fn lexpand(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lexpand")).args(args).output().unwrap()
}

fn put(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::create_dir_all(p.parent().unwrap()).unwrap();
    fs::write(&p, body).unwrap();
    p.display().to_string()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

const SYNONYMS: &str = "happy\tglad\nhappy\tcheerful\nglad\tjoyful\nsad\tunhappy\njoyful\telated\ntable\tdesk\n";

#[test]
fn missing_input_exits_2() {
    let d = tempfile::tempdir().unwrap();
    let syn = put(d.path(), "syn.tsv", SYNONYMS);
    let out = lexpand(&[
        "eval", "--method", "synonym", "--synonyms", &syn, "--gold", &path(d.path(), "nope.txt"),
        "--out-json", &path(d.path(), "o.json"),
    ]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn malformed_embeddings_exit_2() {
    let d = tempfile::tempdir().unwrap();
    let vec = put(d.path(), "v.txt", "happy 0.1 0.2\nglad 0.3\n");
    let rank = put(d.path(), "r.txt", "happy\nglad\n");
    let seeds = put(d.path(), "s.txt", "happy\n");
    let out = lexpand(&[
        "expand", "--method", "embedding", "--embeddings", &vec, "--ranking", &rank, "--seeds", &seeds,
        "--out", &path(d.path(), "o.txt"),
    ]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn empty_dictionary_dir_exits_3() {
    let d = tempfile::tempdir().unwrap();
    fs::create_dir(d.path().join("dicts")).unwrap();
    let out = lexpand(&["build-graph", "--input-dir", &path(d.path(), "dicts"), "--out", &path(d.path(), "g")]);
    assert_eq!(code(&out), 3);
}

#[test]
fn non_english_target_is_a_parse_error() {
    let d = tempfile::tempdir().unwrap();
    put(d.path(), "dicts/es-de.tsv", "mano\thand\nmano\tarm\n");
    let out = lexpand(&["build-graph", "--input-dir", &path(d.path(), "dicts"), "--out", &path(d.path(), "g")]);
    assert_eq!(code(&out), 2);
}

#[test]
fn wildcards_need_a_dictionary() {
    let d = tempfile::tempdir().unwrap();
    let syn = put(d.path(), "syn.tsv", SYNONYMS);
    let gold = put(d.path(), "gold.txt", "happ*\nglad\n");
    let out = lexpand(&[
        "eval", "--method", "synonym", "--synonyms", &syn, "--gold", &gold, "--out-json", &path(d.path(), "o.json"),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn unpaired_embedding_flags_exit_1() {
    let d = tempfile::tempdir().unwrap();
    let vec = put(d.path(), "v.txt", "happy 0.1 0.2\n");
    let seeds = put(d.path(), "s.txt", "happy\n");
    let out = lexpand(&["expand", "--method", "embedding", "--embeddings", &vec, "--seeds", &seeds, "--out", &path(d.path(), "o")]);
    assert_eq!(code(&out), 1);
}

#[test]
fn unknown_flag_exits_2() {
    assert_eq!(code(&lexpand(&["expand", "--bogus"])), 2);
}

#[test]
fn graph_build_translate_and_expand() {
    let d = tempfile::tempdir().unwrap();
    put(d.path(), "dicts/es-en.tsv", "mano\thand\nmano\tarm\ndedo\tfinger\ndedo\ttoe\n");
    put(d.path(), "dicts/fr-en.tsv", "main\thand\nmain\tarm\ndoigt\tfinger\n");
    let en_de = put(d.path(), "en-de.tsv", "hand\thand\narm\tarm\nfinger\tfinger\n");
    let g = path(d.path(), "graph");
    let out = lexpand(&["build-graph", "--input-dir", &path(d.path(), "dicts"), "--out", &g]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = lexpand(&["translate", "--graph", &g, "--dict", &en_de, "--lang", "de"]);
    assert!(out.status.success());
    assert!(Path::new(&g).join("labels.de.tsv").exists());

    let seeds = put(d.path(), "s.txt", "hand\n");
    let o = path(d.path(), "x.txt");
    let out = lexpand(&["expand", "--method", "colex", "--graph", &g, "--lang", "de", "--seeds", &seeds, "--out", &o]);
    assert!(out.status.success());
    assert_eq!(fs::read_to_string(&o).unwrap(), "hand\narm\n");

    // Unknown language.
    let out = lexpand(&["expand", "--method", "colex", "--graph", &g, "--lang", "it", "--seeds", &seeds, "--out", &o]);
    assert_eq!(code(&out), 1);
}

#[test]
fn not_expandable_writes_empty_list() {
    let d = tempfile::tempdir().unwrap();
    let syn = put(d.path(), "syn.tsv", SYNONYMS);
    let seeds = put(d.path(), "s.txt", "zebra\nquux\n");
    let o = path(d.path(), "x.txt");
    let out = lexpand(&["expand", "--method", "synonym", "--synonyms", &syn, "--seeds", &seeds, "--out", &o]);
    assert!(out.status.success());
    assert_eq!(fs::read_to_string(&o).unwrap(), "");
    let side: serde_json::Value = serde_json::from_str(&fs::read_to_string(format!("{o}.json")).unwrap()).unwrap();
    assert_eq!(side["expandable"], false);
    assert_eq!(side["unmatched_seeds"], serde_json::json!(["zebra", "quux"]));
}

#[test]
fn combine_saved_lists() {
    let d = tempfile::tempdir().unwrap();
    let seeds = put(d.path(), "s.txt", "happy\n");
    let a = put(d.path(), "a.txt", "happy\nglad\njoyful\n");
    let b = put(d.path(), "b.txt", "happy\njoyful\ncheerful\n");
    let o = path(d.path(), "x.txt");
    let out = lexpand(&["expand", "--method", "intersection", "--seeds", &seeds, "--inputs", &a, &b, "--out", &o]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_to_string(&o).unwrap(), "happy\njoyful\n");
}

fn eval_fixture(d: &Path) -> (String, String) {
    let syn = put(d, "syn.tsv", SYNONYMS);
    let gold = put(d, "gold.txt", "happy\nglad\ncheerful\njoyful\nelated\n");
    (syn, gold)
}

#[test]
fn eval_report_round_trips_and_aggregates_recompute() {
    let d = tempfile::tempdir().unwrap();
    let (syn, gold) = eval_fixture(d.path());
    let json = path(d.path(), "e.json");
    let csv = path(d.path(), "e.csv");
    let out = lexpand(&[
        "eval", "--method", "synonym", "--synonyms", &syn, "--gold", &gold, "--fraction", "0.2,0.6", "--reps", "8",
        "--baseline-reps", "50", "--rng-seed", "17", "--out-json", &json, "--out-csv", &csv,
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    let reports: Vec<EvalReport> = serde_json::from_value(v["reports"].clone()).unwrap();
    assert_eq!(reports.len(), 2);
    for r in &reports {
        assert_eq!(r.repetitions.len(), 8);
        assert_eq!(Aggregate::from_traces(&r.repetitions), r.aggregate);
        for t in &r.repetitions {
            assert_eq!(t.seeds.len(), if r.config.seeds == lexpand_core::SeedSelection::Fraction(0.2) { 1 } else { 3 });
            assert_eq!(t.tp + t.fp, t.new_words);
        }
    }
    let csv = fs::read_to_string(&csv).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.starts_with("list,method,seeds,"));
}

#[test]
fn strict_rule_counts_unrecovered_seeds() {
    let d = tempfile::tempdir().unwrap();
    let (syn, gold) = eval_fixture(d.path());
    let seeds = put(d.path(), "expert.txt", "happy\n");
    let run = |extra: &[&str]| -> serde_json::Value {
        let json = path(d.path(), "e.json");
        let mut args = vec![
            "eval", "--method", "synonym", "--synonyms", &syn, "--gold", &gold, "--seeds", &seeds, "--baseline-reps", "10",
            "--out-json", &json,
        ];
        args.extend_from_slice(extra);
        assert!(lexpand(&args).status.success());
        serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap()
    };
    // W = {glad, cheerful}; gold minus seeds has 4 words.
    let lenient = run(&[]);
    let strict = run(&["--literal-fn"]);
    let t0 = &lenient["reports"][0]["repetitions"][0];
    let t1 = &strict["reports"][0]["repetitions"][0];
    assert_eq!((t0["tp"].as_u64(), t0["fn"].as_u64()), (Some(2), Some(2)));
    assert_eq!((t1["tp"].as_u64(), t1["fn"].as_u64()), (Some(2), Some(3)));
}

fn put_corpus(d: &Path) -> String {
    put(
        d,
        "corpus.jsonl",
        "{\"id\": \"a\", \"text\": \"happy happy day\"}\n{\"id\": \"b\", \"text\": \"a sad day\"}\n{\"id\": \"c\", \"text\": \"glad and happy\"}\n{\"id\": \"d\", \"text\": \"...\"}\n",
    )
}

#[test]
fn score_relative_and_empty_documents() {
    let d = tempfile::tempdir().unwrap();
    let corpus = put_corpus(d.path());
    let lex = put(d.path(), "lex.txt", "happy\nglad\n");
    let csv = path(d.path(), "s.csv");
    let out = lexpand(&["score", "--corpus", &corpus, "--lexicon", &lex, "--out-csv", &csv]);
    assert_eq!(code(&out), 1, "document d has no tokens");

    let out = lexpand(&["score", "--corpus", &corpus, "--lexicon", &lex, "--out-csv", &csv, "--skip-empty"]);
    assert!(out.status.success());
    let body = fs::read_to_string(&csv).unwrap();
    let expected = format!("id,score\na,{}\nb,0\nc,{}\n", 2.0 / 3.0, 2.0 / 3.0);
    assert_eq!(body, expected);

    let out = lexpand(&["score", "--corpus", &corpus, "--lexicon", &lex, "--out-csv", &csv, "--skip-empty", "--raw"]);
    assert!(out.status.success());
    assert_eq!(fs::read_to_string(&csv).unwrap(), "id,score\na,2\nb,0\nc,2\n");
}

#[test]
fn score_correlation_identical_lexica() {
    let d = tempfile::tempdir().unwrap();
    let corpus = put_corpus(d.path());
    let lex = put(d.path(), "lex.txt", "happy\nsad\n");
    let json = path(d.path(), "c.json");
    let out = lexpand(&[
        "score", "--corpus", &corpus, "--lexicon", &lex, "--reference", &lex, "--out-csv", &path(d.path(), "s.csv"),
        "--out-json", &json, "--skip-empty", "--bootstrap-reps", "100",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["correlation"]["r"], 1.0);
    assert_eq!(v["correlation"]["documents"], 3);
}

#[test]
fn annotate_sample_and_stats() {
    let d = tempfile::tempdir().unwrap();
    // Lists up to 2,000 words are annotated whole; larger ones are sampled.
    let small = put(d.path(), "small.txt", "a\nb\nc\n");
    let s0 = path(d.path(), "s0.txt");
    assert!(lexpand(&["annotate", "sample", "--lexicon", &small, "--n", "2", "--out", &s0]).status.success());
    assert_eq!(fs::read_to_string(&s0).unwrap(), "a\nb\nc\n");
    let lex: String = (0..2100).map(|i| format!("w{i}\n")).collect();
    let lex = put(d.path(), "lex.txt", &lex);
    let s1 = path(d.path(), "s1.txt");
    let s2 = path(d.path(), "s2.txt");
    for s in [&s1, &s2] {
        assert!(lexpand(&["annotate", "sample", "--lexicon", &lex, "--n", "5", "--rng-seed", "4", "--out", s]).status.success());
    }
    assert_eq!(fs::read_to_string(&s1).unwrap(), fs::read_to_string(&s2).unwrap());
    assert_eq!(fs::read_to_string(&s1).unwrap().lines().count(), 5);

    let csv = put(
        d.path(),
        "ann.csv",
        "word,rater,label\nw1,a,relevant\nw1,b,relevant\nw2,a,relevant\nw2,b,irrelevant\nw3,a,irrelevant\nw3,b,irrelevant\nw4,a,relevant\nw4,b,relevant\n",
    );
    let gold = put(d.path(), "gold.txt", "w1\n");
    let out_path = path(d.path(), "stats.json");
    let out = lexpand(&["annotate", "stats", "--annotations", &csv, "--bootstrap-reps", "500", "--gold", &gold, "--out", &out_path]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(v["adjusted_precision"]["estimate"], 0.5);
    assert_eq!(v["adjusted_precision"]["accepted"], 2);
    assert_eq!(v["lower_bound_precision"], 0.25);
    assert_eq!(v["pairwise_kappa"][0]["kappa"], 0.5);

    // A word with a single label cannot be judged.
    let csv = put(d.path(), "bad.csv", "word,rater,label\nw1,a,relevant\n");
    let out = lexpand(&["annotate", "stats", "--annotations", &csv]);
    assert_eq!(code(&out), 1);
}

#[test]
fn dewildcard_reports_unmatched() {
    let d = tempfile::tempdir().unwrap();
    let pats = put(d.path(), "p.txt", "# list\nhapp*\nzzz*\nglad\n");
    let dict = put(d.path(), "dict.txt", "happy\nhappiness\nsad\n");
    let o: PathBuf = d.path().join("o.txt");
    let out = lexpand(&["dewildcard", "--patterns", &pats, "--dictionary", &dict, "--out", o.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(fs::read_to_string(&o).unwrap(), "happiness\nhappy\nglad\n");
    assert!(String::from_utf8_lossy(&out.stderr).contains("zzz*"));
}
