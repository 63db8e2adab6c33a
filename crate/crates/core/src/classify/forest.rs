use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::tree::train_on_rows;
use super::{
    argmax, check_len, default_k, parse_err, Classifier, ClassifyError, LabeledDataset, ModelLines, RandomTree,
};
use crate::attributes::FeatureVector;

const HEADER: &str = "streamprep-forest\t1";
const BOOTSTRAP_SALT: u64 = 0xB007_57A9_0000_0001;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of tree `index`: splitmix64 of `seed + index * golden-ratio`.
/// The bootstrap sample of that tree is drawn from `tree_seed ^ BOOTSTRAP_SALT`.
pub fn tree_seed(seed: u64, index: usize) -> u64 {
    splitmix64(seed.wrapping_add((index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Attributes examined per node; `None` means [`default_k`].
    pub k_features: Option<usize>,
    pub seed: u64,
    /// Train each tree on a bootstrap sample. Turning this off trains every
    /// tree on the full set, which is only useful in tests.
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 10,
            k_features: None,
            seed: 1,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomForest {
    trees: Vec<RandomTree>,
    k_features: usize,
    seed: u64,
    bootstrap: bool,
    schema_len: usize,
    class_labels: Vec<String>,
}

impl RandomForest {
    pub fn trees(&self) -> &[RandomTree] {
        &self.trees
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn k_features(&self) -> usize {
        self.k_features
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Votes per class for `v`.
    pub fn votes(&self, v: &FeatureVector) -> Result<Vec<usize>, ClassifyError> {
        check_len(self.schema_len, v)?;
        let mut votes = vec![0usize; self.class_labels.len()];
        for t in &self.trees {
            votes[argmax(t.leaf_for(v))] += 1;
        }
        Ok(votes)
    }
}

impl Classifier for RandomForest {
    fn class_labels(&self) -> &[String] {
        &self.class_labels
    }

    fn predict_index(&self, v: &FeatureVector) -> Result<usize, ClassifyError> {
        Ok(argmax(&self.votes(v)?))
    }
}

/// Trains `n_trees` random trees, each on its own seeded bootstrap sample of
/// `|data|` rows drawn with replacement. Trees are grown in parallel.
pub fn train_random_forest(data: &LabeledDataset, params: &ForestParams) -> Result<RandomForest, ClassifyError> {
    if data.is_empty() {
        return Err(ClassifyError::EmptyDataset);
    }
    if params.n_trees == 0 {
        return Err(ClassifyError::InvalidParameter("forest needs at least one tree".into()));
    }
    let k = params.k_features.unwrap_or_else(|| default_k(data.schema_len()));
    if k == 0 {
        return Err(ClassifyError::InvalidParameter("k must be at least 1".into()));
    }
    let n = data.len();
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|i| {
            let s = tree_seed(params.seed, i);
            let rows: Vec<usize> = if params.bootstrap {
                let mut rng = ChaCha8Rng::seed_from_u64(s ^ BOOTSTRAP_SALT);
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            train_on_rows(data, &rows, k, s)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RandomForest {
        trees,
        k_features: k.min(data.schema_len()),
        seed: params.seed,
        bootstrap: params.bootstrap,
        schema_len: data.schema_len(),
        class_labels: data.class_labels().to_vec(),
    })
}

impl fmt::Display for RandomForest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", HEADER)?;
        writeln!(f, "labels\t{}", self.class_labels.join("\t"))?;
        writeln!(f, "schema_len\t{}", self.schema_len)?;
        writeln!(f, "k_features\t{}", self.k_features)?;
        writeln!(f, "seed\t{}", self.seed)?;
        writeln!(f, "bootstrap\t{}", self.bootstrap)?;
        writeln!(f, "trees\t{}", self.trees.len())?;
        for (i, t) in self.trees.iter().enumerate() {
            writeln!(f, "tree\t{}\t{}", i, t.nodes().len())?;
            let mut body = String::new();
            t.write_nodes(&mut body);
            f.write_str(&body)?;
        }
        Ok(())
    }
}

impl FromStr for RandomForest {
    type Err = ClassifyError;

    fn from_str(text: &str) -> Result<Self, ClassifyError> {
        let mut lines = ModelLines::new(text);
        let (n, header) = lines.next_line()?;
        if header != HEADER {
            return Err(parse_err(n, "not a forest model"));
        }
        let (_, labels) = lines.field("labels")?;
        let class_labels: Vec<String> = labels.split('\t').map(str::to_string).collect();
        let schema_len: usize = lines.parsed("schema_len")?;
        let k_features: usize = lines.parsed("k_features")?;
        let seed: u64 = lines.parsed("seed")?;
        let bootstrap: bool = lines.parsed("bootstrap")?;
        let count: usize = lines.parsed("trees")?;
        let mut trees = Vec::with_capacity(count);
        for i in 0..count {
            let (n, rest) = lines.field("tree")?;
            let (idx, nodes) = rest
                .split_once('\t')
                .ok_or_else(|| parse_err(n, "tree line needs index and node count"))?;
            if idx.parse::<usize>().ok() != Some(i) {
                return Err(parse_err(n, "trees out of order"));
            }
            let nodes: usize = nodes.parse().map_err(|_| parse_err(n, "bad node count"))?;
            trees.push(RandomTree::read_nodes(
                &mut lines,
                nodes,
                k_features,
                schema_len,
                class_labels.clone(),
            )?);
        }
        Ok(RandomForest {
            trees,
            k_features,
            seed,
            bootstrap,
            schema_len,
            class_labels,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::train_random_tree;

    fn blobs(seed: u64) -> LabeledDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        for (c, label) in ["a", "b", "c"].iter().enumerate() {
            for _ in 0..30 {
                let mut v = vec![0u32; 6];
                v[2 * c] = rng.gen_range(1..4);
                v[2 * c + 1] = rng.gen_range(0..3);
                v[(2 * c + 2) % 6] = rng.gen_range(0..2);
                rows.push((FeatureVector(v), *label));
            }
        }
        LabeledDataset::new(6, rows).unwrap()
    }

    #[test]
    fn degenerate_forest_is_one_tree() {
        let d = blobs(3);
        let params = ForestParams {
            n_trees: 1,
            k_features: Some(6),
            seed: 11,
            bootstrap: false,
        };
        let f = train_random_forest(&d, &params).unwrap();
        let t = train_random_tree(&d, 6, tree_seed(11, 0)).unwrap();
        assert_eq!(f.trees()[0], t);
        for (v, _) in d.rows() {
            assert_eq!(f.predict_index(v).unwrap(), t.predict_index(v).unwrap());
        }
    }

    #[test]
    fn vote_ties_go_to_first_label() {
        assert_eq!(argmax(&[2, 1]), 0);
        assert_eq!(argmax(&[1, 1]), 0);
        assert_eq!(argmax(&[0, 1, 1]), 1);
    }

    #[test]
    fn majority_vote_from_trees() {
        let d = blobs(5);
        let f = train_random_forest(&d, &ForestParams::default()).unwrap();
        assert_eq!(f.n_trees(), 10);
        let v = &d.rows()[0].0;
        let votes = f.votes(v).unwrap();
        assert_eq!(votes.iter().sum::<usize>(), 10);
        assert_eq!(f.predict_index(v).unwrap(), argmax(&votes));
    }

    #[test]
    fn seeded_training_is_reproducible() {
        let d = blobs(1);
        let p = ForestParams {
            seed: 99,
            ..ForestParams::default()
        };
        let a = train_random_forest(&d, &p).unwrap();
        let b = train_random_forest(&d, &p).unwrap();
        assert_eq!(a.to_string(), b.to_string());
        let back: RandomForest = a.to_string().parse().unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn forest_not_worse_than_one_tree_on_training_data() {
        let mut wins = 0;
        for seed in 0..10 {
            let d = blobs(100 + seed);
            let f = train_random_forest(
                &d,
                &ForestParams {
                    seed,
                    ..ForestParams::default()
                },
            )
            .unwrap();
            let t = train_random_tree(&d, default_k(6), seed).unwrap();
            let acc = |m: &dyn Classifier| {
                d.rows()
                    .iter()
                    .filter(|(v, c)| m.predict_index(v).unwrap() == *c)
                    .count()
            };
            if acc(&f) >= acc(&t) {
                wins += 1;
            }
        }
        assert!(wins >= 9, "forest matched the single tree on only {} of 10 seeds", wins);
    }

    #[test]
    fn parameter_errors() {
        let d = blobs(0);
        let p = ForestParams {
            n_trees: 0,
            ..ForestParams::default()
        };
        assert!(matches!(
            train_random_forest(&d, &p),
            Err(ClassifyError::InvalidParameter(_))
        ));
        let empty = LabeledDataset::new::<&str>(2, vec![]).unwrap();
        assert_eq!(
            train_random_forest(&empty, &ForestParams::default()),
            Err(ClassifyError::EmptyDataset)
        );
    }
}
