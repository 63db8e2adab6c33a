//! Tweet normalization, tokenization and the first two duplicate stages.

use std::collections::{BTreeMap, HashSet};

use crate::attributes::{AttributeSchema, FeatureVector};

pub const STAGE_READ: &str = "read";
pub const STAGE_TEXT_DUPLICATES: &str = "stage1_text_duplicates";
pub const STAGE_UNCLASSIFIED: &str = "stage2_unclassified";
pub const STAGE_CROSS_CLASS: &str = "stage3_cross_class";

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn is_kept_punct(c: char) -> bool {
    matches!(c, '_' | '-' | '\'')
}

fn is_url(token: &str) -> bool {
    let lower = token.to_lowercase();
    lower.starts_with("http://") || lower.starts_with("https://") || lower.starts_with("www.")
}

fn is_mention(token: &str) -> bool {
    let mut chars = token.chars();
    chars.next() == Some('@') && chars.next().is_some_and(is_word_char)
}

fn normalize_token(token: &str) -> Option<String> {
    if is_mention(token) {
        return Some("user".to_string());
    }
    if is_url(token) {
        return Some("url".to_string());
    }
    let lower = token.to_lowercase();
    let trimmed = lower.trim_matches(|c: char| !c.is_alphanumeric() && !is_kept_punct(c));
    if trimmed.is_empty() {
        None
    } else if is_url(trimmed) {
        Some("url".to_string())
    } else {
        Some(trimmed.to_string())
    }
}

/// Replaces mentions with `user` and links with `url`, lowercases, and strips
/// edge punctuation other than `_`, `-` and `'`. Hashtags keep their word.
pub fn normalize_tweet(raw: &str) -> String {
    raw.split_whitespace()
        .filter_map(normalize_token)
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn tokenize(normalized: &str) -> Vec<String> {
    normalized.split_whitespace().map(str::to_string).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TweetRecord {
    pub raw: String,
    pub normalized: String,
    pub tokens: Vec<String>,
    pub class_label: String,
}

impl TweetRecord {
    pub fn new(raw: impl Into<String>, class_label: impl Into<String>) -> Self {
        let raw = raw.into();
        let normalized = normalize_tweet(&raw);
        let tokens = tokenize(&normalized);
        TweetRecord {
            raw,
            normalized,
            tokens,
            class_label: class_label.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StageCount {
    pub kept: usize,
    pub dropped: usize,
}

impl StageCount {
    pub fn input(&self) -> usize {
        self.kept + self.dropped
    }
}

/// Keeps the first record of every (class, normalized text) pair.
pub fn stage1_dedup(records: Vec<TweetRecord>) -> (Vec<TweetRecord>, StageCount) {
    let total = records.len();
    let mut seen = HashSet::new();
    let kept: Vec<TweetRecord> = records
        .into_iter()
        .filter(|r| seen.insert((r.class_label.clone(), r.normalized.clone())))
        .collect();
    let count = StageCount {
        kept: kept.len(),
        dropped: total - kept.len(),
    };
    (kept, count)
}

/// Drops rows whose vector matched no attribute.
pub fn stage2_drop_unclassified(
    rows: Vec<(TweetRecord, FeatureVector)>,
) -> (Vec<(TweetRecord, FeatureVector)>, StageCount) {
    let total = rows.len();
    let kept: Vec<_> = rows.into_iter().filter(|(_, v)| !v.is_zero()).collect();
    let count = StageCount {
        kept: kept.len(),
        dropped: total - kept.len(),
    };
    (kept, count)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub record: TweetRecord,
    pub vector: Option<FeatureVector>,
}

/// All tweets of one class, as read from one corpus file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDataset {
    pub class_label: String,
    pub rows: Vec<Row>,
    /// Stage name to counts, in the order the stages ran.
    pub stage_counts: Vec<(String, StageCount)>,
}

impl ClassDataset {
    pub fn from_lines<I, S>(class_label: &str, lines: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let rows: Vec<Row> = lines
            .into_iter()
            .map(|l| Row {
                record: TweetRecord::new(l, class_label),
                vector: None,
            })
            .collect();
        let n = rows.len();
        ClassDataset {
            class_label: class_label.to_string(),
            rows,
            stage_counts: vec![(STAGE_READ.to_string(), StageCount { kept: n, dropped: 0 })],
        }
    }

    pub fn stage(&self, name: &str) -> Option<StageCount> {
        self.stage_counts.iter().find(|(n, _)| n == name).map(|(_, c)| *c)
    }

    pub fn record_stage(&mut self, name: &str, count: StageCount) {
        self.stage_counts.push((name.to_string(), count));
    }

    pub fn dedup_text(mut self) -> Self {
        let records = self.rows.into_iter().map(|r| r.record).collect();
        let (kept, count) = stage1_dedup(records);
        self.rows = kept.into_iter().map(|record| Row { record, vector: None }).collect();
        self.record_stage(STAGE_TEXT_DUPLICATES, count);
        self
    }

    /// Sets every row's vector to the schema query of its tokens.
    pub fn vectorize(mut self, schema: &AttributeSchema) -> Self {
        for row in &mut self.rows {
            row.vector = Some(schema.query(&row.record.tokens));
        }
        self
    }

    /// Stage 2; rows never vectorized count as unclassified.
    pub fn drop_unclassified(mut self) -> Self {
        let pairs: Vec<(TweetRecord, FeatureVector)> = self
            .rows
            .into_iter()
            .map(|r| (r.record, r.vector.unwrap_or_default()))
            .collect();
        let (kept, count) = stage2_drop_unclassified(pairs);
        self.rows = kept
            .into_iter()
            .map(|(record, v)| Row {
                record,
                vector: Some(v),
            })
            .collect();
        self.record_stage(STAGE_UNCLASSIFIED, count);
        self
    }

    pub fn vectors(&self) -> impl Iterator<Item = (&TweetRecord, &FeatureVector)> {
        self.rows
            .iter()
            .filter_map(|r| r.vector.as_ref().map(|v| (&r.record, v)))
    }
}

/// Stage 1, vectorization and stage 2 over one class.
pub fn vectorize_dataset(ds: ClassDataset, schema: &AttributeSchema) -> ClassDataset {
    ds.dedup_text().vectorize(schema).drop_unclassified()
}

/// Sums stage counts across classes, keeping first-seen stage order.
pub fn total_stage_counts<'a, I>(datasets: I) -> Vec<(String, StageCount)>
where
    I: IntoIterator<Item = &'a ClassDataset>,
{
    let mut order = Vec::new();
    let mut sums: BTreeMap<String, StageCount> = BTreeMap::new();
    for ds in datasets {
        for (name, c) in &ds.stage_counts {
            let e = sums.entry(name.clone()).or_insert_with(|| {
                order.push(name.clone());
                StageCount::default()
            });
            e.kept += c.kept;
            e.dropped += c.dropped;
        }
    }
    order
        .into_iter()
        .map(|n| {
            let c = sums[&n];
            (n, c)
        })
        .collect()
}
