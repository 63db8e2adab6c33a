use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::{argmax, check_len, parse_err, Classifier, ClassifyError, LabeledDataset, ModelLines};
use crate::attributes::FeatureVector;

const HEADER: &str = "streamprep-nb\t1";

/// Multinomial Naive Bayes with additive smoothing.
#[derive(Debug, Clone, PartialEq)]
pub struct NBModel {
    class_labels: Vec<String>,
    priors: Vec<f64>,
    /// Per class, P(attribute | class) for every attribute.
    likelihoods: Vec<Vec<f64>>,
    alpha: f64,
}

impl NBModel {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn schema_len(&self) -> usize {
        self.likelihoods.first().map_or(0, Vec::len)
    }

    pub fn prior(&self, label: &str) -> Option<f64> {
        let i = self.class_labels.iter().position(|l| l == label)?;
        Some(self.priors[i])
    }

    pub fn likelihoods(&self, label: &str) -> Option<&[f64]> {
        let i = self.class_labels.iter().position(|l| l == label)?;
        Some(&self.likelihoods[i])
    }

    fn log_scores(&self, v: &FeatureVector) -> Vec<f64> {
        self.priors
            .iter()
            .zip(&self.likelihoods)
            .map(|(p, lik)| {
                p.ln()
                    + v.as_slice()
                        .iter()
                        .zip(lik)
                        .filter(|(&c, _)| c > 0)
                        .map(|(&c, l)| c as f64 * l.ln())
                        .sum::<f64>()
            })
            .collect()
    }
}

/// Class frequencies as priors; P(a|c) = (alpha + n_ac) / (alpha * len + n_c).
pub fn train_nb(data: &LabeledDataset, alpha: f64) -> Result<NBModel, ClassifyError> {
    if data.is_empty() {
        return Err(ClassifyError::EmptyDataset);
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(ClassifyError::InvalidParameter(format!(
            "alpha must be positive, got {}",
            alpha
        )));
    }
    let n_classes = data.class_labels().len();
    let len = data.schema_len();
    let mut totals = vec![vec![0u64; len]; n_classes];
    let mut rows = vec![0usize; n_classes];
    for (v, c) in data.rows() {
        rows[*c] += 1;
        for (t, &x) in totals[*c].iter_mut().zip(v.as_slice()) {
            *t += x as u64;
        }
    }
    if let Some(empty) = rows.iter().position(|&r| r == 0) {
        return Err(ClassifyError::EmptyClass(data.class_labels()[empty].clone()));
    }
    let n = data.len() as f64;
    let priors = rows.iter().map(|&r| r as f64 / n).collect();
    let likelihoods = totals
        .iter()
        .map(|t| {
            let sum: u64 = t.iter().sum();
            let denom = alpha * len as f64 + sum as f64;
            t.iter().map(|&x| (alpha + x as f64) / denom).collect()
        })
        .collect();
    Ok(NBModel {
        class_labels: data.class_labels().to_vec(),
        priors,
        likelihoods,
        alpha,
    })
}

/// Most probable label and the normalized posterior over all labels.
pub fn predict_nb(m: &NBModel, v: &FeatureVector) -> Result<(String, BTreeMap<String, f64>), ClassifyError> {
    check_len(m.schema_len(), v)?;
    let scores = m.log_scores(v);
    let best = argmax(&scores);
    let max = scores[best];
    let exp: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let z: f64 = exp.iter().sum();
    let posterior = m
        .class_labels
        .iter()
        .zip(exp)
        .map(|(l, e)| (l.clone(), e / z))
        .collect();
    Ok((m.class_labels[best].clone(), posterior))
}

impl Classifier for NBModel {
    fn class_labels(&self) -> &[String] {
        &self.class_labels
    }

    fn predict_index(&self, v: &FeatureVector) -> Result<usize, ClassifyError> {
        check_len(self.schema_len(), v)?;
        Ok(argmax(&self.log_scores(v)))
    }
}

impl fmt::Display for NBModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", HEADER)?;
        writeln!(f, "alpha\t{}", self.alpha)?;
        writeln!(f, "schema_len\t{}", self.schema_len())?;
        writeln!(f, "classes\t{}", self.class_labels.len())?;
        for ((label, prior), lik) in self.class_labels.iter().zip(&self.priors).zip(&self.likelihoods) {
            let lik: Vec<String> = lik.iter().map(|p| p.to_string()).collect();
            writeln!(f, "class\t{}\t{}\t{}", label, prior, lik.join(" "))?;
        }
        Ok(())
    }
}

impl FromStr for NBModel {
    type Err = ClassifyError;

    fn from_str(text: &str) -> Result<Self, ClassifyError> {
        let mut lines = ModelLines::new(text);
        let (n, header) = lines.next_line()?;
        if header != HEADER {
            return Err(parse_err(n, "not a naive bayes model"));
        }
        let alpha: f64 = lines.parsed("alpha")?;
        let len: usize = lines.parsed("schema_len")?;
        let classes: usize = lines.parsed("classes")?;
        let mut class_labels = Vec::new();
        let mut priors = Vec::new();
        let mut likelihoods = Vec::new();
        for _ in 0..classes {
            let (n, rest) = lines.field("class")?;
            let parts: Vec<&str> = rest.split('\t').collect();
            if parts.len() != 3 {
                return Err(parse_err(n, "class line needs label, prior and likelihoods"));
            }
            let prior = parts[1].parse().map_err(|_| parse_err(n, "bad prior"))?;
            let lik = parts[2]
                .split(' ')
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<f64>().map_err(|_| parse_err(n, "bad likelihood")))
                .collect::<Result<Vec<_>, _>>()?;
            if lik.len() != len {
                return Err(parse_err(n, "likelihood count differs from schema_len"));
            }
            class_labels.push(parts[0].to_string());
            priors.push(prior);
            likelihoods.push(lik);
        }
        Ok(NBModel {
            class_labels,
            priors,
            likelihoods,
            alpha,
        })
    }
}
