//! Unpruned random decision tree.
//!
//! At each node the attributes are visited in a seeded random order. The
//! best information-gain split among the first `k` is taken; when none of
//! them gains anything, further attributes are examined until one does. An
//! impure node whose attributes all tie at zero gain is still split on the
//! first attribute that separates its rows, so trees always grow until
//! leaves are pure or hold identical vectors.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{argmax, check_len, parse_err, Classifier, ClassifyError, LabeledDataset, ModelLines};
use crate::attributes::FeatureVector;

const GAIN_EPS: f64 = 1e-12;

/// `floor(log2(len)) + 1`.
pub fn default_k(schema_len: usize) -> usize {
    if schema_len == 0 {
        return 1;
    }
    (usize::BITS - 1 - schema_len.leading_zeros()) as usize + 1
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    /// Rows with `v[attribute] <= threshold` go to `left`, the rest to `right`.
    Split {
        attribute: usize,
        threshold: u32,
        left: usize,
        right: usize,
    },
    /// Training rows per class that reached this leaf.
    Leaf { counts: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomTree {
    /// Preorder; node 0 is the root.
    nodes: Vec<Node>,
    k_features: usize,
    schema_len: usize,
    class_labels: Vec<String>,
}

impl RandomTree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn k_features(&self) -> usize {
        self.k_features
    }

    pub fn schema_len(&self) -> usize {
        self.schema_len
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 1,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn leaf_for(&self, v: &FeatureVector) -> &[usize] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { counts } => return counts,
                Node::Split {
                    attribute,
                    threshold,
                    left,
                    right,
                } => i = if v[*attribute] <= *threshold { *left } else { *right },
            }
        }
    }

    pub(crate) fn write_nodes(&self, out: &mut String) {
        for node in &self.nodes {
            match node {
                Node::Split {
                    attribute,
                    threshold,
                    right,
                    ..
                } => out.push_str(&format!("S\t{}\t{}\t{}\n", attribute, threshold, right)),
                Node::Leaf { counts } => {
                    let c: Vec<String> = counts.iter().map(|c| c.to_string()).collect();
                    out.push_str(&format!("L\t{}\n", c.join(" ")));
                }
            }
        }
    }

    pub(crate) fn read_nodes(
        lines: &mut ModelLines<'_>,
        count: usize,
        k_features: usize,
        schema_len: usize,
        class_labels: Vec<String>,
    ) -> Result<RandomTree, ClassifyError> {
        let mut nodes = Vec::with_capacity(count);
        for i in 0..count {
            let (n, line) = lines.next_line()?;
            let parts: Vec<&str> = line.split('\t').collect();
            let num = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| parse_err(n, format!("bad number {:?}", s)))
            };
            let node = match parts.as_slice() {
                ["S", a, t, r] => {
                    let attribute = num(a)?;
                    let right = num(r)?;
                    if attribute >= schema_len || right <= i + 1 || right >= count {
                        return Err(parse_err(n, "split points outside the tree"));
                    }
                    Node::Split {
                        attribute,
                        threshold: t.parse().map_err(|_| parse_err(n, "bad threshold"))?,
                        left: i + 1,
                        right,
                    }
                }
                ["L", counts] => {
                    let counts = counts
                        .split(' ')
                        .filter(|s| !s.is_empty())
                        .map(num)
                        .collect::<Result<Vec<_>, _>>()?;
                    if counts.len() != class_labels.len() {
                        return Err(parse_err(n, "leaf count length differs from class count"));
                    }
                    Node::Leaf { counts }
                }
                _ => return Err(parse_err(n, "expected a split or leaf line")),
            };
            nodes.push(node);
        }
        if nodes.is_empty() {
            return Err(parse_err(0, "tree without nodes"));
        }
        Ok(RandomTree {
            nodes,
            k_features,
            schema_len,
            class_labels,
        })
    }
}

impl Classifier for RandomTree {
    fn class_labels(&self) -> &[String] {
        &self.class_labels
    }

    fn predict_index(&self, v: &FeatureVector) -> Result<usize, ClassifyError> {
        check_len(self.schema_len, v)?;
        Ok(argmax(self.leaf_for(v)))
    }
}

fn entropy(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / t;
            -p * p.log2()
        })
        .sum()
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    attribute: usize,
    threshold: u32,
    gain: f64,
}

struct Builder<'a> {
    data: &'a LabeledDataset,
    n_classes: usize,
    k: usize,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    /// Best split of `rows` on one attribute, or None when every row holds
    /// the same value there.
    fn best_on(&self, rows: &[usize], attribute: usize, parent_h: f64) -> Option<Candidate> {
        let mut pairs: Vec<(u32, usize)> = rows
            .iter()
            .map(|&r| {
                let (v, c) = &self.data.rows()[r];
                (v[attribute], *c)
            })
            .collect();
        pairs.sort_unstable();
        if pairs.first()?.0 == pairs.last()?.0 {
            return None;
        }
        let total = pairs.len();
        let mut right = vec![0usize; self.n_classes];
        for &(_, c) in &pairs {
            right[c] += 1;
        }
        let mut left = vec![0usize; self.n_classes];
        let mut best: Option<Candidate> = None;
        for i in 0..total - 1 {
            let (val, c) = pairs[i];
            left[c] += 1;
            right[c] -= 1;
            if pairs[i + 1].0 == val {
                continue;
            }
            let nl = i + 1;
            let nr = total - nl;
            let h = (nl as f64 * entropy(&left, nl) + nr as f64 * entropy(&right, nr)) / total as f64;
            let gain = parent_h - h;
            if best.is_none_or(|b| gain > b.gain + GAIN_EPS) {
                // count <= midpoint is the same as count <= floor(midpoint)
                let threshold = ((val as u64 + pairs[i + 1].0 as u64) / 2) as u32;
                best = Some(Candidate {
                    attribute,
                    threshold,
                    gain,
                });
            }
        }
        best
    }

    fn choose(&mut self, rows: &[usize], counts: &[usize]) -> Option<Candidate> {
        let parent_h = entropy(counts, rows.len());
        let mut order: Vec<usize> = (0..self.data.schema_len()).collect();
        order.shuffle(&mut self.rng);
        let mut best: Option<Candidate> = None;
        let mut fallback: Option<Candidate> = None;
        for (examined, &a) in order.iter().enumerate() {
            if examined >= self.k && best.is_some_and(|b| b.gain > GAIN_EPS) {
                break;
            }
            if let Some(c) = self.best_on(rows, a, parent_h) {
                fallback.get_or_insert(c);
                if best.is_none_or(|b| c.gain > b.gain + GAIN_EPS) {
                    best = Some(c);
                }
            }
        }
        match best {
            Some(b) if b.gain > GAIN_EPS => Some(b),
            _ => fallback,
        }
    }

    fn grow(&mut self, rows: Vec<usize>) -> usize {
        let mut counts = vec![0usize; self.n_classes];
        for &r in &rows {
            counts[self.data.rows()[r].1] += 1;
        }
        let id = self.nodes.len();
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let split = if pure { None } else { self.choose(&rows, &counts) };
        let Some(split) = split else {
            self.nodes.push(Node::Leaf { counts });
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = rows
            .into_iter()
            .partition(|&i| self.data.rows()[i].0[split.attribute] <= split.threshold);
        self.nodes.push(Node::Leaf { counts: Vec::new() });
        let left = self.grow(l);
        let right = self.grow(r);
        self.nodes[id] = Node::Split {
            attribute: split.attribute,
            threshold: split.threshold,
            left,
            right,
        };
        id
    }
}

/// Grows one unpruned tree on every row of `data`.
pub fn train_random_tree(data: &LabeledDataset, k: usize, seed: u64) -> Result<RandomTree, ClassifyError> {
    let all: Vec<usize> = (0..data.len()).collect();
    train_on_rows(data, &all, k, seed)
}

/// Grows a tree on the given row indices (repeats allowed, as in a bootstrap
/// sample).
pub(crate) fn train_on_rows(
    data: &LabeledDataset,
    rows: &[usize],
    k: usize,
    seed: u64,
) -> Result<RandomTree, ClassifyError> {
    if data.is_empty() || rows.is_empty() {
        return Err(ClassifyError::EmptyDataset);
    }
    if k == 0 {
        return Err(ClassifyError::InvalidParameter("k must be at least 1".into()));
    }
    let k = k.min(data.schema_len());
    let mut builder = Builder {
        data,
        n_classes: data.class_labels().len(),
        k,
        rng: ChaCha8Rng::seed_from_u64(seed),
        nodes: Vec::new(),
    };
    builder.grow(rows.to_vec());
    Ok(RandomTree {
        nodes: builder.nodes,
        k_features: k,
        schema_len: data.schema_len(),
        class_labels: data.class_labels().to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rows(spec: &[(&[u32], &'static str)]) -> LabeledDataset {
        let len = spec[0].0.len();
        LabeledDataset::new(len, spec.iter().map(|(v, l)| (FeatureVector(v.to_vec()), *l)).collect()).unwrap()
    }

    fn train_accuracy(t: &RandomTree, d: &LabeledDataset) -> f64 {
        let ok = d
            .rows()
            .iter()
            .filter(|(v, c)| t.predict_index(v).unwrap() == *c)
            .count();
        ok as f64 / d.len() as f64
    }

    #[test]
    fn default_k_values() {
        assert_eq!(default_k(1), 1);
        assert_eq!(default_k(2), 2);
        assert_eq!(default_k(7), 3);
        assert_eq!(default_k(8), 4);
        assert_eq!(default_k(262), 9);
    }

    #[test]
    fn pure_data_is_one_leaf() {
        let d = rows(&[(&[1, 2], "a"), (&[3, 0], "a")]);
        let t = train_random_tree(&d, 2, 1).unwrap();
        assert_eq!(t.nodes(), &[Node::Leaf { counts: vec![2] }]);
    }

    #[test]
    fn separable_data_is_fit_exactly() {
        let d = rows(&[
            (&[0, 5, 1], "a"),
            (&[1, 4, 0], "a"),
            (&[4, 0, 1], "b"),
            (&[5, 1, 0], "b"),
            (&[2, 2, 9], "c"),
        ]);
        let t = train_random_tree(&d, 3, 42).unwrap();
        assert_eq!(train_accuracy(&t, &d), 1.0);
    }

    #[test]
    fn xor_needs_zero_gain_split() {
        let d = rows(&[(&[0, 0], "a"), (&[1, 1], "a"), (&[0, 1], "b"), (&[1, 0], "b")]);
        for seed in 0..5 {
            let t = train_random_tree(&d, 1, seed).unwrap();
            assert_eq!(train_accuracy(&t, &d), 1.0);
        }
    }

    #[test]
    fn conflicting_identical_rows_make_a_mixed_leaf() {
        let d = rows(&[(&[1], "a"), (&[1], "b"), (&[1], "b")]);
        let t = train_random_tree(&d, 1, 0).unwrap();
        assert_eq!(t.nodes(), &[Node::Leaf { counts: vec![1, 2] }]);
        assert_eq!(t.predict(&FeatureVector(vec![1])).unwrap(), "b");
    }

    #[test]
    fn seeded_runs_are_identical() {
        let d = rows(&[
            (&[0, 5, 1, 2], "a"),
            (&[1, 4, 0, 3], "b"),
            (&[4, 0, 1, 1], "a"),
            (&[5, 1, 0, 0], "b"),
        ]);
        assert_eq!(
            train_random_tree(&d, 1, 9).unwrap(),
            train_random_tree(&d, 1, 9).unwrap()
        );
    }

    #[test]
    fn threshold_is_midpoint_floor() {
        let d = rows(&[(&[1], "a"), (&[4], "b")]);
        let t = train_random_tree(&d, 1, 0).unwrap();
        assert!(matches!(
            t.nodes()[0],
            Node::Split {
                attribute: 0,
                threshold: 2,
                ..
            }
        ));
    }

    #[test]
    fn errors() {
        let empty = LabeledDataset::new::<&str>(1, vec![]).unwrap();
        assert_eq!(train_random_tree(&empty, 1, 0), Err(ClassifyError::EmptyDataset));
        let d = rows(&[(&[1], "a")]);
        assert!(train_random_tree(&d, 0, 0).is_err());
    }

    proptest! {
        #[test]
        fn consistent_data_is_fit_exactly(
            raw in prop::collection::btree_map(prop::collection::vec(0u32..4, 5), 0usize..3, 1..40),
            k in 1usize..6,
            seed in any::<u64>(),
        ) {
            let labels = ["a", "b", "c"];
            let d = LabeledDataset::new(5, raw.into_iter().map(|(v, c)| (FeatureVector(v), labels[c])).collect()).unwrap();
            let t = train_random_tree(&d, k, seed).unwrap();
            prop_assert_eq!(train_accuracy(&t, &d), 1.0);
        }
    }
}
