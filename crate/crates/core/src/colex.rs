//! Colexification network: construction from bilingual dictionaries,
//! label translation, and neighborhood expansion of seed words.
//!
//! Concepts are identified by their English label. Two concepts are linked
//! when at least `min_languages` distinct languages have a word translating
//! to both. Homographs within English therefore collapse into one node.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expansion::{Expander, Expansion};
use crate::word::{file_stem, normalize_word, Word, WordList};

pub const PIVOT_LANG: &str = "en";
pub const DEFAULT_MIN_LANGUAGES: usize = 2;
pub const BUNDLE_VERSION: &str = "lexpand-colex-bundle 1";

pub type NodeId = u32;

/// Word translations from one language into another.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BilingualDictionary {
    pub source_lang: String,
    pub target_lang: String,
    pub entries: BTreeMap<Word, BTreeSet<Word>>,
}

impl BilingualDictionary {
    pub fn new(source_lang: impl Into<String>, target_lang: impl Into<String>) -> Self {
        BilingualDictionary {
            source_lang: source_lang.into(),
            target_lang: target_lang.into(),
            entries: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, source: Word, target: Word) {
        self.entries.entry(source).or_default().insert(target);
    }

    /// Convenience constructor for tests and fixtures.
    pub fn from_pairs<'a, I>(source_lang: &str, target_lang: &str, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut d = BilingualDictionary::new(source_lang, target_lang);
        for (s, t) in pairs {
            d.insert(normalize_word(s)?, normalize_word(t)?);
        }
        Ok(d)
    }

    /// Parses `source<TAB>target` lines.
    ///
    /// A leading comment `# langs: <source> <target>` overrides the language
    /// pair passed in by the caller.
    pub fn read<R: BufRead>(reader: R, source_lang: &str, target_lang: &str) -> Result<Self> {
        let mut dict = BilingualDictionary::new(source_lang, target_lang);
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(comment) = trimmed.strip_prefix('#') {
                if let Some(langs) = comment.trim().strip_prefix("langs:") {
                    let mut parts = langs.split_whitespace();
                    match (parts.next(), parts.next(), parts.next()) {
                        (Some(s), Some(t), None) => {
                            dict.source_lang = s.to_string();
                            dict.target_lang = t.to_string();
                        }
                        _ => return Err(Error::parse(lineno, "malformed langs header")),
                    }
                }
                continue;
            }
            let mut fields = line.split('\t');
            let (Some(s), Some(t), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(Error::parse(lineno, "expected source<TAB>target"));
            };
            let s = normalize_word(s).map_err(|e| Error::parse(lineno, e.to_string()))?;
            let t = normalize_word(t).map_err(|e| Error::parse(lineno, e.to_string()))?;
            dict.insert(s, t);
        }
        if dict.entries.is_empty() {
            return Err(Error::NoData("bilingual dictionary has no entries".into()));
        }
        Ok(dict)
    }

    /// Reads a dictionary whose language pair is given by a `# langs:`
    /// header or, failing that, by a file name of the form `src-tgt.tsv`.
    pub fn read_path(path: &Path) -> Result<Self> {
        let stem = file_stem(path);
        let (src, tgt) = stem.split_once(['-', '_']).unwrap_or(("", ""));
        let file = fs::File::open(path)?;
        let dict = BilingualDictionary::read(BufReader::new(file), src, tgt)?;
        if dict.source_lang.is_empty() || dict.target_lang.is_empty() {
            return Err(Error::parse(
                0,
                format!("{}: cannot determine language pair", path.display()),
            ));
        }
        Ok(dict)
    }
}

/// Undirected weighted concept graph with per-language label maps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColexGraph {
    labels: Vec<Word>,
    edges: BTreeMap<(NodeId, NodeId), u32>,
    adjacency: Vec<BTreeSet<NodeId>>,
    label_maps: BTreeMap<String, BTreeMap<Word, BTreeSet<NodeId>>>,
}

fn ordered(a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Builds the colexification network from dictionaries into English.
///
/// Each language votes at most once for a concept pair, however many of its
/// words colexify the pair. Dictionaries sharing a source language are
/// treated as one language.
pub fn build_colex_graph(dictionaries: &[BilingualDictionary], min_languages: usize) -> Result<ColexGraph> {
    if dictionaries.is_empty() {
        return Err(Error::NoData("no bilingual dictionaries".into()));
    }
    if min_languages == 0 {
        return Err(Error::InvalidArgument("min_languages must be positive".into()));
    }
    let mut per_language: BTreeMap<&str, BTreeSet<(&Word, &Word)>> = BTreeMap::new();
    for dict in dictionaries {
        if dict.target_lang != PIVOT_LANG {
            return Err(Error::LanguageMismatch {
                expected: PIVOT_LANG.into(),
                found: dict.target_lang.clone(),
            });
        }
        let pairs = per_language.entry(dict.source_lang.as_str()).or_default();
        for targets in dict.entries.values() {
            let targets: Vec<&Word> = targets.iter().collect();
            for (i, a) in targets.iter().enumerate() {
                for b in &targets[i + 1..] {
                    pairs.insert((a, b));
                }
            }
        }
    }

    let mut votes: BTreeMap<(&Word, &Word), u32> = BTreeMap::new();
    for pairs in per_language.values() {
        for pair in pairs {
            *votes.entry(*pair).or_default() += 1;
        }
    }
    votes.retain(|_, v| *v as usize >= min_languages);
    if votes.is_empty() {
        return Err(Error::NoData(format!(
            "no concept pair is colexified by at least {min_languages} languages"
        )));
    }

    let labels: Vec<Word> = votes
        .keys()
        .flat_map(|(a, b)| [*a, *b])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .cloned()
        .collect();
    let index: HashMap<&Word, NodeId> = labels
        .iter()
        .enumerate()
        .map(|(i, w)| (w, i as NodeId))
        .collect();
    let edges = votes
        .into_iter()
        .map(|((a, b), w)| (ordered(index[a], index[b]), w))
        .collect();
    Ok(ColexGraph::from_parts(labels, edges))
}

impl ColexGraph {
    fn from_parts(labels: Vec<Word>, edges: BTreeMap<(NodeId, NodeId), u32>) -> Self {
        let mut adjacency = vec![BTreeSet::new(); labels.len()];
        for &(a, b) in edges.keys() {
            adjacency[a as usize].insert(b);
            adjacency[b as usize].insert(a);
        }
        let en = labels
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), BTreeSet::from([i as NodeId])))
            .collect();
        ColexGraph {
            labels,
            edges,
            adjacency,
            label_maps: BTreeMap::from([(PIVOT_LANG.to_string(), en)]),
        }
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn label(&self, node: NodeId) -> Option<&Word> {
        self.labels.get(node as usize)
    }

    pub fn node(&self, en_label: &str) -> Option<NodeId> {
        self.labels
            .binary_search_by(|w| w.as_str().cmp(en_label))
            .ok()
            .map(|i| i as NodeId)
    }

    /// Edges as `((a, b), weight)` with `a < b`, in sorted order.
    pub fn edges(&self) -> impl Iterator<Item = ((NodeId, NodeId), u32)> + '_ {
        self.edges.iter().map(|(k, v)| (*k, *v))
    }

    pub fn weight(&self, a: NodeId, b: NodeId) -> Option<u32> {
        self.edges.get(&ordered(a, b)).copied()
    }

    pub fn neighbors(&self, node: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.adjacency[node as usize].iter().copied()
    }

    pub fn languages(&self) -> impl Iterator<Item = &str> + '_ {
        self.label_maps.keys().map(String::as_str)
    }

    pub fn label_map(&self, lang: &str) -> Option<&BTreeMap<Word, BTreeSet<NodeId>>> {
        self.label_maps.get(lang)
    }

    /// Nodes a word maps to in `lang`.
    pub fn lookup(&self, lang: &str, word: &str) -> Result<Option<&BTreeSet<NodeId>>> {
        let map = self
            .label_maps
            .get(lang)
            .ok_or_else(|| Error::LanguageUnavailable(lang.to_string()))?;
        Ok(map.get(word))
    }

    /// Adds a label map for `lang` by translating every English label.
    ///
    /// A foreign word translating several English labels maps to all of the
    /// corresponding nodes. The edge structure is untouched.
    pub fn translate_labels(mut self, dict_en_to_x: &BilingualDictionary, lang: &str) -> Self {
        let mut map: BTreeMap<Word, BTreeSet<NodeId>> = BTreeMap::new();
        for (id, label) in self.labels.iter().enumerate() {
            if let Some(translations) = dict_en_to_x.entries.get(label) {
                for t in translations {
                    map.entry(t.clone()).or_default().insert(id as NodeId);
                }
            }
        }
        self.label_maps.insert(lang.to_string(), map);
        self
    }

    /// Writes `VERSION`, `nodes.tsv`, `edges.tsv` and one `labels.<lang>.tsv`
    /// per language into `dir`.
    pub fn write_bundle(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("VERSION"), format!("{BUNDLE_VERSION}\n"))?;

        let mut nodes = Vec::new();
        writeln!(nodes, "id\ten_label")?;
        for (i, w) in self.labels.iter().enumerate() {
            writeln!(nodes, "{i}\t{w}")?;
        }
        fs::write(dir.join("nodes.tsv"), nodes)?;

        let mut edges = Vec::new();
        writeln!(edges, "id_a\tid_b\tweight")?;
        for ((a, b), w) in &self.edges {
            writeln!(edges, "{a}\t{b}\t{w}")?;
        }
        fs::write(dir.join("edges.tsv"), edges)?;

        for (lang, map) in &self.label_maps {
            let mut out = Vec::new();
            writeln!(out, "word\tnode_id")?;
            for (word, ids) in map {
                for id in ids {
                    writeln!(out, "{word}\t{id}")?;
                }
            }
            fs::write(dir.join(format!("labels.{lang}.tsv")), out)?;
        }
        Ok(())
    }

    pub fn read_bundle(dir: &Path) -> Result<Self> {
        let version = fs::read_to_string(dir.join("VERSION"))?;
        if version.trim() != BUNDLE_VERSION {
            return Err(Error::parse(1, format!("unsupported bundle version {:?}", version.trim())));
        }

        let mut labels = Vec::new();
        for (lineno, fields) in tsv_rows(&dir.join("nodes.tsv"), 2)? {
            let id: usize = parse_field(&fields[0], lineno)?;
            if id != labels.len() {
                return Err(Error::parse(lineno, "node ids must be dense and ordered"));
            }
            labels.push(normalize_word(&fields[1]).map_err(|e| Error::parse(lineno, e.to_string()))?);
        }
        if labels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::parse(0, "node labels must be sorted and unique"));
        }

        let mut edges = BTreeMap::new();
        for (lineno, fields) in tsv_rows(&dir.join("edges.tsv"), 3)? {
            let a: NodeId = parse_field(&fields[0], lineno)?;
            let b: NodeId = parse_field(&fields[1], lineno)?;
            let w: u32 = parse_field(&fields[2], lineno)?;
            if a == b || w == 0 || a as usize >= labels.len() || b as usize >= labels.len() {
                return Err(Error::parse(lineno, "invalid edge"));
            }
            edges.insert(ordered(a, b), w);
        }

        let mut graph = ColexGraph::from_parts(labels, edges);
        let mut entries: Vec<_> = fs::read_dir(dir)?.collect::<std::io::Result<_>>()?;
        entries.sort_by_key(|e| e.file_name());
        for entry in entries {
            let name = entry.file_name().to_string_lossy().into_owned();
            let Some(lang) = name.strip_prefix("labels.").and_then(|s| s.strip_suffix(".tsv")) else {
                continue;
            };
            let mut map: BTreeMap<Word, BTreeSet<NodeId>> = BTreeMap::new();
            for (lineno, fields) in tsv_rows(&entry.path(), 2)? {
                let word = normalize_word(&fields[0]).map_err(|e| Error::parse(lineno, e.to_string()))?;
                let id: NodeId = parse_field(&fields[1], lineno)?;
                if id as usize >= graph.labels.len() {
                    return Err(Error::parse(lineno, "label refers to unknown node"));
                }
                map.entry(word).or_default().insert(id);
            }
            if lang == PIVOT_LANG && &map != graph.label_maps.get(PIVOT_LANG).expect("pivot map") {
                return Err(Error::parse(0, "labels.en.tsv disagrees with nodes.tsv"));
            }
            graph.label_maps.insert(lang.to_string(), map);
        }
        Ok(graph)
    }
}

fn tsv_rows(path: &Path, width: usize) -> Result<Vec<(usize, Vec<String>)>> {
    let file = fs::File::open(path)?;
    let mut rows = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if idx == 0 || line.is_empty() {
            continue;
        }
        let fields: Vec<String> = line.split('\t').map(str::to_string).collect();
        if fields.len() != width {
            return Err(Error::parse(idx + 1, format!("expected {width} tab-separated fields")));
        }
        rows.push((idx + 1, fields));
    }
    Ok(rows)
}

fn parse_field<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse().map_err(|_| Error::parse(line, format!("invalid number {s:?}")))
}

/// Expands seeds with all their neighbors in the colexification network.
///
/// Seeds that map to several nodes expand through all of them.
pub fn expand_colex(graph: &ColexGraph, seeds: &WordList, lang: &str) -> Result<Expansion> {
    let map = graph
        .label_maps
        .get(lang)
        .ok_or_else(|| Error::LanguageUnavailable(lang.to_string()))?;

    let mut neighbors = BTreeSet::new();
    let mut unmatched = WordList::new(seeds.name.clone());
    for seed in seeds {
        match map.get(seed) {
            Some(nodes) => {
                for &n in nodes {
                    neighbors.extend(graph.neighbors(n));
                }
            }
            None => {
                unmatched.insert(seed.clone());
            }
        }
    }

    // Neighbor labels in the query language.
    let mut words = Vec::new();
    if lang == PIVOT_LANG {
        words.extend(neighbors.iter().map(|&n| graph.labels[n as usize].clone()));
    } else {
        for (word, nodes) in map {
            if nodes.iter().any(|n| neighbors.contains(n)) {
                words.push(word.clone());
            }
        }
    }
    Ok(Expansion::new(seeds, words, unmatched))
}

/// A colexification network bound to a query language.
#[derive(Clone, Debug)]
pub struct ColexExpander {
    graph: Arc<ColexGraph>,
    lang: String,
    id: String,
}

impl ColexExpander {
    pub fn new(graph: Arc<ColexGraph>, lang: &str) -> Result<Self> {
        if !graph.label_maps.contains_key(lang) {
            return Err(Error::LanguageUnavailable(lang.to_string()));
        }
        Ok(ColexExpander {
            graph,
            lang: lang.to_string(),
            id: "colex".to_string(),
        })
    }

    pub fn graph(&self) -> &ColexGraph {
        &self.graph
    }
}

impl Expander for ColexExpander {
    fn id(&self) -> &str {
        &self.id
    }

    fn expand(&self, seeds: &WordList) -> Result<Expansion> {
        expand_colex(&self.graph, seeds, &self.lang)
    }

    fn universe(&self) -> WordList {
        let map = &self.graph.label_maps[&self.lang];
        WordList::from_words(format!("colex-{}", self.lang), map.keys().cloned())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wl(words: &[&str]) -> WordList {
        WordList::from_strs("s", words).unwrap()
    }

    fn two_language_graph() -> ColexGraph {
        let grc = BilingualDictionary::from_pairs(
            "grc",
            "en",
            [("pharmacon", "medicine"), ("pharmacon", "poison")],
        )
        .unwrap();
        let xx = BilingualDictionary::from_pairs("xx", "en", [("gift", "medicine"), ("gift", "poison")]).unwrap();
        build_colex_graph(&[grc, xx], 2).unwrap()
    }

    #[test]
    fn pharmacon_edge_has_weight_two() {
        let g = two_language_graph();
        let (m, p) = (g.node("medicine").unwrap(), g.node("poison").unwrap());
        assert_eq!(g.weight(m, p), Some(2));
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn single_vote_is_pruned() {
        let only = BilingualDictionary::from_pairs("grc", "en", [("pharmacon", "medicine"), ("pharmacon", "poison")])
            .unwrap();
        let extra = BilingualDictionary::from_pairs("xx", "en", [("a", "b"), ("a", "c"), ("d", "b"), ("d", "c")])
            .unwrap();
        let g = build_colex_graph(&[only.clone(), extra], 2);
        assert!(matches!(g, Err(Error::NoData(_))));
        let g = build_colex_graph(&[only], 1).unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn a_language_votes_once_per_pair() {
        let xx = BilingualDictionary::from_pairs(
            "xx",
            "en",
            [("w1", "a"), ("w1", "b"), ("w2", "a"), ("w2", "b")],
        )
        .unwrap();
        let g = build_colex_graph(std::slice::from_ref(&xx), 1).unwrap();
        assert_eq!(g.weight(0, 1), Some(1));
        // split across two files, same language
        let (mut d1, mut d2) = (BilingualDictionary::new("xx", "en"), BilingualDictionary::new("xx", "en"));
        d1.entries.insert(Word::new("w1").unwrap(), xx.entries[&Word::new("w1").unwrap()].clone());
        d2.entries.insert(Word::new("w2").unwrap(), xx.entries[&Word::new("w2").unwrap()].clone());
        let g = build_colex_graph(&[d1, d2], 2);
        assert!(g.is_err());
    }

    #[test]
    fn errors() {
        assert!(matches!(build_colex_graph(&[], 2), Err(Error::NoData(_))));
        let de = BilingualDictionary::from_pairs("en", "de", [("a", "b")]).unwrap();
        assert!(matches!(build_colex_graph(&[de], 2), Err(Error::LanguageMismatch { .. })));
        let g = two_language_graph();
        assert!(matches!(expand_colex(&g, &wl(&["x"]), "de"), Err(Error::LanguageUnavailable(_))));
    }

    #[test]
    fn merry_neighborhood() {
        let l1 = BilingualDictionary::from_pairs(
            "l1",
            "en",
            [("x", "merry"), ("x", "happy"), ("y", "merry"), ("y", "festive")],
        )
        .unwrap();
        let l2 = l1.clone();
        let mut l2 = l2;
        l2.source_lang = "l2".into();
        let g = build_colex_graph(&[l1, l2], 2).unwrap();
        let e = expand_colex(&g, &wl(&["merry"]), "en").unwrap();
        assert_eq!(e.new_words.to_set(), ["festive", "happy"].into_iter().collect());
        assert!(e.unmatched.is_empty());
        // a seed adjacent to another seed is not retrieved
        let e = expand_colex(&g, &wl(&["merry", "happy"]), "en").unwrap();
        assert_eq!(e.new_words.to_set(), ["festive"].into_iter().collect());
        assert_eq!(e.expanded().len(), 3);
    }

    #[test]
    fn translated_labels_multimap() {
        let l1 = BilingualDictionary::from_pairs("l1", "en", [("x", "arm"), ("x", "poor"), ("y", "merry"), ("y", "poor")])
            .unwrap();
        let mut l2 = l1.clone();
        l2.source_lang = "l2".into();
        let g = build_colex_graph(&[l1, l2], 2).unwrap();
        let edges_before: Vec<_> = g.edges().collect();
        let en_de = BilingualDictionary::from_pairs(
            "en",
            "de",
            [("arm", "arm"), ("poor", "arm"), ("merry", "fröhlich")],
        )
        .unwrap();
        let g = g.translate_labels(&en_de, "de");
        let map = g.label_map("de").unwrap();
        let arm: BTreeSet<_> = ["arm", "poor"].iter().map(|w| g.node(w).unwrap()).collect();
        assert_eq!(map[&Word::new("arm").unwrap()], arm);
        assert_eq!(map[&Word::new("fröhlich").unwrap()], BTreeSet::from([g.node("merry").unwrap()]));
        assert_eq!(g.edges().collect::<Vec<_>>(), edges_before);

        let e = expand_colex(&g, &wl(&["fröhlich"]), "de").unwrap();
        assert_eq!(e.new_words.to_set(), ["arm"].into_iter().collect());
        let e = expand_colex(&g, &wl(&["arm", "unbekannt"]), "de").unwrap();
        assert_eq!(e.new_words.to_set(), ["fröhlich"].into_iter().collect());
        assert_eq!(e.unmatched.to_set(), ["unbekannt"].into_iter().collect());
    }

    #[test]
    fn all_unmatched_is_not_expandable() {
        let g = two_language_graph();
        let e = expand_colex(&g, &wl(&["zebra"]), "en").unwrap();
        assert!(!e.is_expandable());
        assert_eq!(e.expanded(), wl(&["zebra"]));
    }

    #[test]
    fn bundle_round_trip() {
        let en_de = BilingualDictionary::from_pairs("en", "de", [("poison", "gift")]).unwrap();
        let g = two_language_graph().translate_labels(&en_de, "de");
        let dir = tempfile::tempdir().unwrap();
        g.write_bundle(dir.path()).unwrap();
        let back = ColexGraph::read_bundle(dir.path()).unwrap();
        assert_eq!(back, g);
        let dir2 = tempfile::tempdir().unwrap();
        back.write_bundle(dir2.path()).unwrap();
        for f in ["VERSION", "nodes.tsv", "edges.tsv", "labels.en.tsv", "labels.de.tsv"] {
            assert_eq!(
                fs::read(dir.path().join(f)).unwrap(),
                fs::read(dir2.path().join(f)).unwrap(),
                "{f}"
            );
        }
    }

    #[test]
    fn reads_dictionary_tsv() {
        let d = BilingualDictionary::read("# langs: grc en\npharmacon\tmedicine\nPharmacon\tpoison\n".as_bytes(), "", "")
            .unwrap();
        assert_eq!(d.source_lang, "grc");
        assert_eq!(d.entries[&Word::new("pharmacon").unwrap()].len(), 2);
        let err = BilingualDictionary::read("a\tb\nbroken\n".as_bytes(), "x", "en").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }
}
