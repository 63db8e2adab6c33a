//! Naive Bayes, random tree and random forest classifiers over count vectors,
//! plus confusion-matrix evaluation.

mod dataset;
mod forest;
mod metrics;
mod naive_bayes;
mod tree;

pub use dataset::LabeledDataset;
pub use forest::{train_random_forest, tree_seed, ForestParams, RandomForest};
pub use metrics::{evaluate, evaluate_model, EvaluationReport};
pub use naive_bayes::{predict_nb, train_nb, NBModel};
pub use tree::{default_k, train_random_tree, Node, RandomTree};

use thiserror::Error;

use crate::attributes::FeatureVector;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifyError {
    #[error("dataset has no rows")]
    EmptyDataset,
    #[error("class {0:?} has no training rows")]
    EmptyClass(String),
    #[error("vector length {found} does not match schema length {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("label {0:?} is not in the model's label universe")]
    UnknownLabel(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("model parse error on line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// A trained model that maps a vector to one of its class labels.
pub trait Classifier {
    fn class_labels(&self) -> &[String];

    /// Index into [`Classifier::class_labels`] of the predicted class.
    fn predict_index(&self, v: &FeatureVector) -> Result<usize, ClassifyError>;

    fn predict(&self, v: &FeatureVector) -> Result<&str, ClassifyError> {
        let i = self.predict_index(v)?;
        Ok(&self.class_labels()[i])
    }
}

/// Index of the largest value; ties go to the lowest index.
pub(crate) fn argmax<T: PartialOrd + Copy>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn check_len(expected: usize, v: &FeatureVector) -> Result<(), ClassifyError> {
    if v.len() != expected {
        return Err(ClassifyError::LengthMismatch {
            expected,
            found: v.len(),
        });
    }
    Ok(())
}

/// Line reader shared by the model text formats.
pub(crate) struct ModelLines<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> ModelLines<'a> {
    pub(crate) fn new(text: &'a str) -> Self {
        ModelLines {
            lines: text.lines().enumerate(),
        }
    }

    pub(crate) fn next_line(&mut self) -> Result<(usize, &'a str), ClassifyError> {
        self.lines
            .next()
            .map(|(i, l)| (i + 1, l))
            .ok_or_else(|| ClassifyError::Parse {
                line: 0,
                reason: "unexpected end of model".into(),
            })
    }

    /// Reads `key<TAB>value` and checks the key.
    pub(crate) fn field(&mut self, key: &str) -> Result<(usize, &'a str), ClassifyError> {
        let (n, line) = self.next_line()?;
        match line.split_once('\t') {
            Some((k, v)) if k == key => Ok((n, v)),
            _ => Err(parse_err(n, format!("expected field {:?}", key))),
        }
    }

    pub(crate) fn parsed<T: std::str::FromStr>(&mut self, key: &str) -> Result<T, ClassifyError> {
        let (n, v) = self.field(key)?;
        v.parse()
            .map_err(|_| parse_err(n, format!("bad value {:?} for {}", v, key)))
    }
}

pub(crate) fn parse_err(line: usize, reason: impl Into<String>) -> ClassifyError {
    ClassifyError::Parse {
        line,
        reason: reason.into(),
    }
}
