use std::fmt;

use super::{Classifier, ClassifyError, LabeledDataset};
use crate::attributes::FeatureVector;

/// Confusion matrix indexed `[actual][predicted]` with accuracy and Cohen's
/// kappa derived from it.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub class_labels: Vec<String>,
    pub confusion: Vec<Vec<u64>>,
    pub correct: u64,
    pub total: u64,
    pub accuracy: f64,
    pub kappa: f64,
}

impl EvaluationReport {
    pub fn from_confusion(class_labels: Vec<String>, confusion: Vec<Vec<u64>>) -> Result<Self, ClassifyError> {
        let n = class_labels.len();
        if confusion.len() != n || confusion.iter().any(|r| r.len() != n) {
            return Err(ClassifyError::InvalidParameter(format!(
                "confusion matrix must be {}x{}",
                n, n
            )));
        }
        let total: u64 = confusion.iter().flatten().sum();
        if total == 0 {
            return Err(ClassifyError::EmptyDataset);
        }
        let correct: u64 = (0..n).map(|i| confusion[i][i]).sum();
        let rows: Vec<u64> = confusion.iter().map(|r| r.iter().sum()).collect();
        let cols: Vec<u64> = (0..n).map(|j| confusion.iter().map(|r| r[j]).sum()).collect();
        // chance agreement as an exact integer ratio before the division
        let chance: u128 = rows.iter().zip(&cols).map(|(&r, &c)| r as u128 * c as u128).sum();
        let t2 = total as u128 * total as u128;
        let kappa = if chance == t2 {
            1.0
        } else {
            // (po - pe) / (1 - pe) = (correct * total - chance) / (total^2 - chance)
            (correct as f64 * total as f64 - chance as f64) / (t2 - chance) as f64
        };
        Ok(EvaluationReport {
            class_labels,
            confusion,
            correct,
            total,
            accuracy: correct as f64 / total as f64,
            kappa,
        })
    }

    pub fn actual_counts(&self) -> Vec<u64> {
        self.confusion.iter().map(|r| r.iter().sum()).collect()
    }
}

fn column_name(i: usize) -> String {
    let mut name = String::new();
    let mut i = i + 1;
    while i > 0 {
        i -= 1;
        name.insert(0, (b'a' + (i % 26) as u8) as char);
        i /= 26;
    }
    name
}

impl fmt::Display for EvaluationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .confusion
            .iter()
            .flatten()
            .map(|c| c.to_string().len())
            .max()
            .unwrap_or(1)
            .max(column_name(self.class_labels.len().saturating_sub(1)).len())
            + 1;
        for i in 0..self.class_labels.len() {
            write!(f, "{:>w$}", column_name(i), w = width)?;
        }
        writeln!(f, "   <-- classified as")?;
        for (i, row) in self.confusion.iter().enumerate() {
            for c in row {
                write!(f, "{:>w$}", c, w = width)?;
            }
            writeln!(f, " | {:>w$} = {}", column_name(i), self.class_labels[i], w = width - 1)?;
        }
        writeln!(f, "accuracy\t{:.4}\t({}/{})", self.accuracy, self.correct, self.total)?;
        writeln!(f, "kappa\t{:.4}", self.kappa)
    }
}

/// Scores `predict` on every row of `test`. Predicted labels must belong to
/// `class_labels`, as must every label in `test`.
pub fn evaluate<F, S>(
    class_labels: &[String],
    test: &LabeledDataset,
    mut predict: F,
) -> Result<EvaluationReport, ClassifyError>
where
    F: FnMut(&FeatureVector) -> Result<S, ClassifyError>,
    S: AsRef<str>,
{
    if test.is_empty() {
        return Err(ClassifyError::EmptyDataset);
    }
    let index = |l: &str| {
        class_labels
            .iter()
            .position(|c| c == l)
            .ok_or_else(|| ClassifyError::UnknownLabel(l.to_string()))
    };
    let n = class_labels.len();
    let mut confusion = vec![vec![0u64; n]; n];
    for (row, (v, _)) in test.rows().iter().enumerate() {
        let actual = index(test.label_of(row))?;
        let predicted = index(predict(v)?.as_ref())?;
        confusion[actual][predicted] += 1;
    }
    EvaluationReport::from_confusion(class_labels.to_vec(), confusion)
}

pub fn evaluate_model<M: Classifier + ?Sized>(
    model: &M,
    test: &LabeledDataset,
) -> Result<EvaluationReport, ClassifyError> {
    evaluate(model.class_labels(), test, |v| model.predict(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("c{}", i)).collect()
    }

    #[test]
    fn perfect_diagonal() {
        let r = EvaluationReport::from_confusion(labels(3), vec![vec![3, 0, 0], vec![0, 2, 0], vec![0, 0, 5]]).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.kappa, 1.0);
    }

    #[test]
    fn chance_level_agreement_is_zero() {
        let r = EvaluationReport::from_confusion(labels(2), vec![vec![1, 1], vec![1, 1]]).unwrap();
        assert_eq!(r.accuracy, 0.5);
        assert_eq!(r.kappa, 0.0);
    }

    #[test]
    fn single_class_kappa_is_one() {
        let r = EvaluationReport::from_confusion(labels(1), vec![vec![4]]).unwrap();
        assert_eq!(r.kappa, 1.0);
    }

    #[test]
    fn evaluate_counts_rows() {
        let test = LabeledDataset::new(
            1,
            vec![
                (FeatureVector(vec![0]), "c0"),
                (FeatureVector(vec![1]), "c1"),
                (FeatureVector(vec![1]), "c0"),
            ],
        )
        .unwrap();
        let r = evaluate(&labels(2), &test, |v| Ok(if v[0] == 0 { "c0" } else { "c1" })).unwrap();
        assert_eq!(r.confusion, vec![vec![1, 1], vec![0, 1]]);
        assert_eq!(r.actual_counts(), vec![2, 1]);
        assert_eq!(r.correct, 2);
        let err = evaluate(&labels(2), &test, |_| Ok("zz")).unwrap_err();
        assert_eq!(err, ClassifyError::UnknownLabel("zz".into()));
        let err = evaluate(&labels(1), &test, |_| Ok("c0")).unwrap_err();
        assert_eq!(err, ClassifyError::UnknownLabel("c1".into()));
        let empty = LabeledDataset::new::<&str>(1, vec![]).unwrap();
        assert_eq!(
            evaluate(&labels(1), &empty, |_| Ok("c0")),
            Err(ClassifyError::EmptyDataset)
        );
    }

    #[test]
    fn table_layout() {
        let r = EvaluationReport::from_confusion(vec!["art".into(), "politics".into()], vec![vec![12, 3], vec![1, 10]])
            .unwrap();
        let text = r.to_string();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "  a  b   <-- classified as");
        assert_eq!(lines[1], " 12  3 |  a = art");
        assert_eq!(lines[2], "  1 10 |  b = politics");
        assert!(lines[3].starts_with("accuracy\t0.8462"));
    }

    #[test]
    fn column_names_roll_over() {
        assert_eq!(column_name(0), "a");
        assert_eq!(column_name(25), "z");
        assert_eq!(column_name(26), "aa");
    }
}
