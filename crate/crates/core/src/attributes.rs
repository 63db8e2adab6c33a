//! Attribute schema built from hypernym chains.
//!
//! Every lemma is linked to the top-most ancestors of its hypernym chains
//! (intermediate nodes dropped). Roots with at least `threshold` hyponyms
//! become attributes; lemmas whose roots all fall short are filed under the
//! lexicographer file they came from instead.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::lexicon::LexDatabase;

/// Longest multiword lemma, in tokens, that queries try to match.
pub const MAX_NGRAM_CAP: usize = 3;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchemaError {
    #[error("hypernym cycle: {}", .0.join(" -> "))]
    CycleDetected(Vec<String>),
    #[error("threshold must be at least 1")]
    ZeroThreshold,
    #[error("empty lexical database")]
    EmptyDatabase,
    #[error("schema parse error on line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HypernymGraph {
    pub nodes: BTreeSet<String>,
    pub edges: BTreeMap<String, BTreeSet<String>>,
    /// Hypernym targets that are not a member of any loaded synset.
    pub dangling_roots: BTreeSet<String>,
}

impl HypernymGraph {
    /// Builds a graph from explicit edges and runs the cycle check.
    pub fn from_edges<I, S>(members: I, edges: BTreeMap<String, BTreeSet<String>>) -> Result<Self, SchemaError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut nodes: BTreeSet<String> = members.into_iter().map(Into::into).collect();
        nodes.extend(edges.keys().cloned());
        let dangling_roots: BTreeSet<String> = edges
            .values()
            .flatten()
            .filter(|t| !nodes.contains(*t))
            .cloned()
            .collect();
        nodes.extend(dangling_roots.iter().cloned());
        let graph = HypernymGraph {
            nodes,
            edges,
            dangling_roots,
        };
        graph.check_acyclic()?;
        Ok(graph)
    }

    fn check_acyclic(&self) -> Result<(), SchemaError> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            Open,
            Done,
        }
        let mut marks: BTreeMap<&str, Mark> = BTreeMap::new();
        for start in self.edges.keys() {
            if marks.contains_key(start.as_str()) {
                continue;
            }
            // iterative DFS; the stack holds (node, remaining successors)
            let mut path: Vec<&str> = vec![start];
            let mut stack = vec![self.successors(start)];
            marks.insert(start, Mark::Open);
            while let Some(iter) = stack.last_mut() {
                match iter.next() {
                    Some(next) => match marks.get(next) {
                        Some(Mark::Done) => {}
                        Some(Mark::Open) => {
                            let from = path.iter().position(|n| *n == next).unwrap_or(0);
                            let mut cycle: Vec<String> = path[from..].iter().map(|s| s.to_string()).collect();
                            cycle.push(next.to_string());
                            return Err(SchemaError::CycleDetected(cycle));
                        }
                        None => {
                            marks.insert(next, Mark::Open);
                            path.push(next);
                            stack.push(self.successors(next));
                        }
                    },
                    None => {
                        stack.pop();
                        if let Some(done) = path.pop() {
                            marks.insert(done, Mark::Done);
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn successors<'a>(&'a self, node: &str) -> Box<dyn Iterator<Item = &'a str> + 'a> {
        match self.edges.get(node) {
            Some(t) => Box::new(t.iter().map(String::as_str)),
            None => Box::new(std::iter::empty()),
        }
    }

    /// Distinct lemmas that appear as a hypernym of something.
    pub fn hypernym_lemmas(&self) -> BTreeSet<&str> {
        self.edges.values().flatten().map(String::as_str).collect()
    }
}

/// Collects `@` and `@i` targets per lemma across every synset holding it.
pub fn build_graph(db: &LexDatabase) -> Result<HypernymGraph, SchemaError> {
    if db.synset_count() == 0 {
        return Err(SchemaError::EmptyDatabase);
    }
    let mut members = BTreeSet::new();
    let mut edges: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (_, synset) in db.iter_synsets() {
        let targets: Vec<&str> = synset.hypernym_targets().map(|p| p.target_lemma.as_str()).collect();
        for lemma in &synset.lemmas {
            members.insert(lemma.clone());
            if !targets.is_empty() {
                let entry = edges.entry(lemma.clone()).or_default();
                entry.extend(targets.iter().map(|t| t.to_string()));
            }
        }
    }
    let dangling: BTreeSet<String> = edges
        .values()
        .flatten()
        .filter(|t| !members.contains(*t))
        .cloned()
        .collect();
    let mut nodes = members;
    nodes.extend(dangling.iter().cloned());
    let graph = HypernymGraph {
        nodes,
        edges,
        dangling_roots: dangling,
    };
    graph.check_acyclic()?;
    Ok(graph)
}

/// Maps every node to the set of top-most ancestors reachable from it.
/// A node without hypernyms is its own root.
pub fn collapse_chains(graph: &HypernymGraph) -> BTreeMap<String, BTreeSet<String>> {
    let mut memo: BTreeMap<&str, BTreeSet<String>> = BTreeMap::new();
    for node in &graph.nodes {
        roots_of(graph, node, &mut memo);
    }
    memo.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn roots_of<'a>(graph: &'a HypernymGraph, start: &'a str, memo: &mut BTreeMap<&'a str, BTreeSet<String>>) {
    // post-order over an explicit stack; the graph is already known acyclic
    let mut stack: Vec<(&'a str, bool)> = vec![(start, false)];
    while let Some((node, expanded)) = stack.pop() {
        if memo.contains_key(node) {
            continue;
        }
        let parents = graph.edges.get(node).filter(|p| !p.is_empty());
        match parents {
            None => {
                memo.insert(node, BTreeSet::from([node.to_string()]));
            }
            Some(parents) if expanded => {
                let mut roots = BTreeSet::new();
                for p in parents {
                    roots.extend(memo[p.as_str()].iter().cloned());
                }
                memo.insert(node, roots);
            }
            Some(parents) => {
                stack.push((node, true));
                for p in parents {
                    if !memo.contains_key(p.as_str()) {
                        stack.push((p.as_str(), false));
                    }
                }
            }
        }
    }
}

/// Number of distinct lemmas, other than the root itself, that collapse onto
/// each root. Roots nobody collapses onto are reported with 0.
pub fn count_hyponyms(roots: &BTreeMap<String, BTreeSet<String>>) -> BTreeMap<String, usize> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for (lemma, rs) in roots {
        for r in rs {
            let c = counts.entry(r.clone()).or_insert(0);
            if r != lemma {
                *c += 1;
            }
        }
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AttributeKind {
    HypernymRoot,
    FileName,
}

impl AttributeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AttributeKind::HypernymRoot => "hypernym_root",
            AttributeKind::FileName => "file_name",
        }
    }
}

impl FromStr for AttributeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "hypernym_root" => Ok(AttributeKind::HypernymRoot),
            "file_name" => Ok(AttributeKind::FileName),
            other => Err(format!("unknown attribute kind {:?}", other)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Attribute {
    pub name: String,
    pub kind: AttributeKind,
}

/// Counts produced by [`build_schema`] before and after thresholding.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SchemaStats {
    pub lemmas: usize,
    /// Distinct lemmas that occur as somebody's hypernym.
    pub hypernym_lemmas: usize,
    /// Roots with at least one hyponym, before the threshold is applied.
    pub candidate_roots: usize,
    pub selected_roots: usize,
    pub file_attributes: usize,
    pub dangling_roots: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeSchema {
    attributes: Vec<Attribute>,
    word_map: BTreeMap<String, Vec<usize>>,
    threshold: usize,
    max_ngram: usize,
}

impl AttributeSchema {
    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    pub fn threshold(&self) -> usize {
        self.threshold
    }

    pub fn max_ngram(&self) -> usize {
        self.max_ngram
    }

    pub fn word_map(&self) -> &BTreeMap<String, Vec<usize>> {
        &self.word_map
    }

    pub fn attribute_indices(&self, lemma: &str) -> Option<&[usize]> {
        self.word_map.get(lemma).map(|v| v.as_slice())
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }

    pub fn count_of(&self, kind: AttributeKind) -> usize {
        self.attributes.iter().filter(|a| a.kind == kind).count()
    }

    pub fn zero_vector(&self) -> FeatureVector {
        FeatureVector::zeros(self.len())
    }

    /// Vectorizes a normalized token sequence.
    ///
    /// Lemmas are matched greedily longest-first, unigrams up to
    /// `max_ngram`-token underscore joins, left to right without overlap.
    pub fn query<S: AsRef<str>>(&self, tokens: &[S]) -> FeatureVector {
        let mut counts = vec![0u32; self.len()];
        let mut i = 0;
        while i < tokens.len() {
            let mut matched = 0;
            for n in (1..=self.max_ngram.min(tokens.len() - i)).rev() {
                let key = if n == 1 {
                    tokens[i].as_ref().to_string()
                } else {
                    tokens[i..i + n].iter().map(AsRef::as_ref).collect::<Vec<_>>().join("_")
                };
                if let Some(idx) = self.word_map.get(&key) {
                    for &a in idx {
                        counts[a] += 1;
                    }
                    matched = n;
                    break;
                }
            }
            i += matched.max(1);
        }
        FeatureVector(counts)
    }
}

impl fmt::Display for AttributeSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "# attributes={} threshold={} max_ngram={}",
            self.len(),
            self.threshold,
            self.max_ngram
        )?;
        for a in &self.attributes {
            writeln!(f, "{}\t{}", a.name, a.kind.as_str())?;
        }
        for (lemma, idx) in &self.word_map {
            let list: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
            writeln!(f, "{}\t{}", lemma, list.join(","))?;
        }
        Ok(())
    }
}

impl FromStr for AttributeSchema {
    type Err = SchemaError;

    fn from_str(text: &str) -> Result<Self, SchemaError> {
        let err = |line: usize, reason: String| SchemaError::Parse { line, reason };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| err(1, "missing header".into()))?;
        let mut fields = BTreeMap::new();
        for part in header.trim_start_matches('#').split_whitespace() {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| err(1, format!("bad header field {:?}", part)))?;
            let v: usize = v.parse().map_err(|_| err(1, format!("bad number {:?}", v)))?;
            fields.insert(k, v);
        }
        let get = |k: &str| {
            fields
                .get(k)
                .copied()
                .ok_or_else(|| err(1, format!("header lacks {}", k)))
        };
        let n = get("attributes")?;
        let threshold = get("threshold")?;
        let max_ngram = get("max_ngram")?;
        let mut attributes = Vec::with_capacity(n);
        let mut word_map = BTreeMap::new();
        for (i, line) in lines {
            let (left, right) = line
                .split_once('\t')
                .ok_or_else(|| err(i + 1, "expected a tab-separated pair".into()))?;
            if attributes.len() < n {
                let kind = right.parse().map_err(|e| err(i + 1, e))?;
                attributes.push(Attribute {
                    name: left.to_string(),
                    kind,
                });
            } else {
                let idx = right
                    .split(',')
                    .map(|s| match s.parse::<usize>() {
                        Ok(v) if v < n => Ok(v),
                        _ => Err(err(i + 1, format!("bad attribute index {:?}", s))),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                word_map.insert(left.to_string(), idx);
            }
        }
        if attributes.len() != n {
            return Err(err(0, format!("expected {} attributes, found {}", n, attributes.len())));
        }
        Ok(AttributeSchema {
            attributes,
            word_map,
            threshold,
            max_ngram,
        })
    }
}

/// Builds the attribute schema for `db` at the given hyponym threshold.
pub fn build_schema(db: &LexDatabase, threshold: usize) -> Result<AttributeSchema, SchemaError> {
    build_schema_with_stats(db, threshold).map(|(s, _)| s)
}

pub fn build_schema_with_stats(
    db: &LexDatabase,
    threshold: usize,
) -> Result<(AttributeSchema, SchemaStats), SchemaError> {
    if threshold == 0 {
        return Err(SchemaError::ZeroThreshold);
    }
    let graph = build_graph(db)?;
    let roots = collapse_chains(&graph);
    let counts = count_hyponyms(&roots);

    let selected: BTreeSet<&str> = counts
        .iter()
        .filter(|(_, &c)| c >= threshold)
        .map(|(r, _)| r.as_str())
        .collect();
    let mut file_names: Vec<&str> = db.file_names().iter().map(String::as_str).collect();
    file_names.sort_unstable();

    let mut attributes: Vec<Attribute> = selected
        .iter()
        .map(|r| Attribute {
            name: r.to_string(),
            kind: AttributeKind::HypernymRoot,
        })
        .collect();
    let root_index: BTreeMap<&str, usize> = selected.iter().enumerate().map(|(i, r)| (*r, i)).collect();
    let file_index: BTreeMap<&str, usize> = file_names
        .iter()
        .enumerate()
        .map(|(i, f)| (*f, selected.len() + i))
        .collect();
    attributes.extend(file_names.iter().map(|f| Attribute {
        name: f.to_string(),
        kind: AttributeKind::FileName,
    }));

    let mut word_map: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    let lemma_files = db.lemma_files();
    for (lemma, files) in &lemma_files {
        let qualifying: Vec<usize> = roots[*lemma]
            .iter()
            .filter_map(|r| root_index.get(r.as_str()).copied())
            .collect();
        let idx = if qualifying.is_empty() {
            files.iter().map(|f| file_index[f]).collect()
        } else {
            qualifying
        };
        word_map.insert(lemma.to_string(), idx);
    }
    // qualifying roots outside the loaded files still count when mentioned
    for r in &selected {
        word_map.entry(r.to_string()).or_insert_with(|| vec![root_index[r]]);
    }

    let max_ngram = word_map
        .keys()
        .map(|w| w.split('_').filter(|p| !p.is_empty()).count().max(1))
        .max()
        .unwrap_or(1)
        .min(MAX_NGRAM_CAP);

    let stats = SchemaStats {
        lemmas: lemma_files.len(),
        hypernym_lemmas: graph.hypernym_lemmas().len(),
        candidate_roots: counts.values().filter(|&&c| c > 0).count(),
        selected_roots: selected.len(),
        file_attributes: file_names.len(),
        dangling_roots: graph.dangling_roots.len(),
    };
    Ok((
        AttributeSchema {
            attributes,
            word_map,
            threshold,
            max_ngram,
        },
        stats,
    ))
}

/// Fixed-length non-negative count vector, one slot per schema attribute.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FeatureVector(pub Vec<u32>);

impl FeatureVector {
    pub fn zeros(len: usize) -> Self {
        FeatureVector(vec![0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&c| c as u64).sum()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }
}

impl From<Vec<u32>> for FeatureVector {
    fn from(v: Vec<u32>) -> Self {
        FeatureVector(v)
    }
}

impl std::ops::Index<usize> for FeatureVector {
    type Output = u32;

    fn index(&self, i: usize) -> &u32 {
        &self.0[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::build_database;

    fn edges(pairs: &[(&str, &str)]) -> BTreeMap<String, BTreeSet<String>> {
        let mut m: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (a, b) in pairs {
            m.entry(a.to_string()).or_default().insert(b.to_string());
        }
        m
    }

    #[test]
    fn rejects_cycles() {
        let e = edges(&[("a", "b"), ("b", "a")]);
        match HypernymGraph::from_edges(["a", "b"], e) {
            Err(SchemaError::CycleDetected(path)) => {
                assert_eq!(path.first(), path.last());
                assert_eq!(path.len(), 3);
            }
            other => panic!("unexpected {:?}", other),
        }
        let e = edges(&[("a", "a")]);
        assert!(HypernymGraph::from_edges(["a"], e).is_err());
    }

    #[test]
    fn build_graph_rejects_cycles_from_files() {
        let db = build_database(&[("noun.x", "{ a, b,@ (x) } { b, a,@ (y) }")]).unwrap();
        assert!(matches!(build_graph(&db), Err(SchemaError::CycleDetected(_))));
    }

    #[test]
    fn no_pointers_no_edges() {
        let db = build_database(&[("noun.x", "{ a, b, (x) }")]).unwrap();
        let g = build_graph(&db).unwrap();
        assert!(g.edges.is_empty());
        assert_eq!(g.nodes.len(), 2);
    }

    #[test]
    fn chain_counts() {
        let g = HypernymGraph::from_edges(["a", "b", "c"], edges(&[("a", "b"), ("b", "c")])).unwrap();
        let roots = collapse_chains(&g);
        assert_eq!(roots["a"], BTreeSet::from(["c".to_string()]));
        let counts = count_hyponyms(&roots);
        assert_eq!(counts["c"], 2);
        assert_eq!(counts.get("a"), None);
    }

    #[test]
    fn isolated_lemma_is_its_own_root() {
        let g = HypernymGraph::from_edges(["x"], BTreeMap::new()).unwrap();
        let roots = collapse_chains(&g);
        assert_eq!(roots["x"], BTreeSet::from(["x".to_string()]));
        assert_eq!(count_hyponyms(&roots)["x"], 0);
    }

    #[test]
    fn multiple_hypernyms_follow_all_paths() {
        let g = HypernymGraph::from_edges(["a", "b", "c"], edges(&[("a", "b"), ("a", "c"), ("b", "d")])).unwrap();
        let roots = collapse_chains(&g);
        assert_eq!(roots["a"], BTreeSet::from(["c".to_string(), "d".to_string()]));
        assert!(g.dangling_roots.contains("d"));
    }

    fn toy_db() -> LexDatabase {
        build_database(&[
            ("noun.animal", "{ dog, canine,@ (d) } { cat, feline,@ (c) } { canine, carnivore,@ (x) } { feline, carnivore,@ (y) } { sea_lion, carnivore,@ (z) }"),
            ("noun.food", "{ dog, food,@ (hot dog) } { bread, (b) } { hot_dog_bun, bread,@ (hb) }"),
        ])
        .unwrap()
    }

    #[test]
    fn schema_partitions_roots_and_files() {
        let (schema, stats) = build_schema_with_stats(&toy_db(), 3).unwrap();
        let names: Vec<&str> = schema.attributes().iter().map(|a| a.name.as_str()).collect();
        assert_eq!(names, vec!["carnivore", "noun.animal", "noun.food"]);
        // dog reaches carnivore (qualifies) and food (does not)
        assert_eq!(schema.attribute_indices("dog"), Some(&[0][..]));
        assert_eq!(schema.attribute_indices("bread"), Some(&[2][..]));
        assert_eq!(schema.attribute_indices("carnivore"), Some(&[0][..]));
        assert_eq!(schema.max_ngram(), 3);
        assert_eq!(stats.selected_roots, 1);
        assert_eq!(stats.candidate_roots, 3);
    }

    #[test]
    fn lemma_in_two_files_falls_back_to_both() {
        let schema = build_schema(&toy_db(), 100).unwrap();
        assert_eq!(schema.count_of(AttributeKind::HypernymRoot), 0);
        assert_eq!(schema.attribute_indices("dog"), Some(&[0, 1][..]));
    }

    #[test]
    fn query_longest_match() {
        let schema = build_schema(&toy_db(), 3).unwrap();
        let v = schema.query(&["sea", "lion", "eats", "hot", "dog", "bun", "dog"]);
        // sea_lion -> carnivore, hot_dog_bun -> noun.food, dog -> carnivore
        assert_eq!(v.0, vec![2, 0, 1]);
        assert_eq!(schema.query::<&str>(&[]).0, vec![0, 0, 0]);
    }

    #[test]
    fn zero_threshold_rejected() {
        assert_eq!(build_schema(&toy_db(), 0), Err(SchemaError::ZeroThreshold));
    }

    #[test]
    fn serialized_schema_parses_back() {
        let schema = build_schema(&toy_db(), 3).unwrap();
        let text = schema.to_string();
        assert!(text.starts_with("# attributes=3 threshold=3 max_ngram=3\ncarnivore\thypernym_root\n"));
        let back: AttributeSchema = text.parse().unwrap();
        assert_eq!(back, schema);
        assert!("# attributes=2 threshold=1 max_ngram=1\na\tfile_name\n"
            .parse::<AttributeSchema>()
            .is_err());
    }
}
