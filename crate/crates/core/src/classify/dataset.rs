use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{check_len, ClassifyError};
use crate::attributes::FeatureVector;

/// Training or test rows with labels stored as indices into `class_labels`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledDataset {
    schema_len: usize,
    rows: Vec<(FeatureVector, usize)>,
    class_labels: Vec<String>,
}

impl LabeledDataset {
    /// The label universe is the sorted set of labels present in `rows`.
    pub fn new<L: Into<String>>(schema_len: usize, rows: Vec<(FeatureVector, L)>) -> Result<Self, ClassifyError> {
        let rows: Vec<(FeatureVector, String)> = rows.into_iter().map(|(v, l)| (v, l.into())).collect();
        let labels: BTreeSet<&str> = rows.iter().map(|(_, l)| l.as_str()).collect();
        let labels: Vec<String> = labels.into_iter().map(str::to_string).collect();
        Self::with_labels(schema_len, labels, rows)
    }

    /// Uses an explicit label universe; rows must only carry labels from it.
    pub fn with_labels<L: Into<String>>(
        schema_len: usize,
        class_labels: Vec<String>,
        rows: Vec<(FeatureVector, L)>,
    ) -> Result<Self, ClassifyError> {
        let mut indexed = Vec::with_capacity(rows.len());
        for (v, l) in rows {
            check_len(schema_len, &v)?;
            let l = l.into();
            let idx = class_labels
                .iter()
                .position(|c| *c == l)
                .ok_or(ClassifyError::UnknownLabel(l))?;
            indexed.push((v, idx));
        }
        Ok(LabeledDataset {
            schema_len,
            rows: indexed,
            class_labels,
        })
    }

    pub fn schema_len(&self) -> usize {
        self.schema_len
    }

    pub fn class_labels(&self) -> &[String] {
        &self.class_labels
    }

    pub fn rows(&self) -> &[(FeatureVector, usize)] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn label_of(&self, row: usize) -> &str {
        &self.class_labels[self.rows[row].1]
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_labels.len()];
        for (_, c) in &self.rows {
            counts[*c] += 1;
        }
        counts
    }

    /// Same universe, rows picked by index (repeats allowed).
    pub fn subset(&self, indices: &[usize]) -> LabeledDataset {
        LabeledDataset {
            schema_len: self.schema_len,
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            class_labels: self.class_labels.clone(),
        }
    }

    /// Stratified split: within every class, a seeded shuffle puts
    /// `round(n * train_fraction)` rows into the training side.
    pub fn stratified_split(&self, train_fraction: f64, seed: u64) -> (LabeledDataset, LabeledDataset) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut train = Vec::new();
        let mut test = Vec::new();
        for class in 0..self.class_labels.len() {
            let mut idx: Vec<usize> = (0..self.rows.len()).filter(|&i| self.rows[i].1 == class).collect();
            idx.shuffle(&mut rng);
            let cut = ((idx.len() as f64) * train_fraction).round() as usize;
            train.extend_from_slice(&idx[..cut.min(idx.len())]);
            test.extend_from_slice(&idx[cut.min(idx.len())..]);
        }
        train.sort_unstable();
        test.sort_unstable();
        (self.subset(&train), self.subset(&test))
    }
}
