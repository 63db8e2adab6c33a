//! Seeded synthetic data: a small lexicographer database with one file per
//! class, tweet corpora drawn from it, and raw class objects for benchmarks.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::attributes::FeatureVector;
use crate::dedup::ClassObject;
use crate::error::{Error, Result};
use crate::lexicon::LexDatabase;

pub const DEMO_CLASSES: [&str; 5] = ["art", "business", "lifestyle", "politics", "technology"];

/// Threshold that keeps every full-size synthetic root and drops the small ones.
pub const DEMO_THRESHOLD: usize = 5;

const SYLLABLES: [&str; 12] = ["ka", "lo", "mi", "ne", "ru", "so", "ti", "va", "be", "du", "fe", "go"];

/// Words that never appear in a synthetic lexicon file.
pub const FILLER_WORDS: [&str; 32] = [
    "the", "a", "and", "just", "really", "today", "new", "great", "so", "is", "this", "that", "my", "our", "with",
    "for", "on", "at", "about", "more", "check", "out", "look", "very", "again", "now", "what", "some", "we", "you",
    "all", "here",
];

pub fn lexicon_file_name(class: &str) -> String {
    format!("noun.{}", class)
}

/// Shape of each class's hierarchy. Every full root gets
/// `mids_per_root * (1 + leaves_per_mid)` hyponyms; the one small root gets
/// `small_root_words`, which should stay under the threshold in use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconShape {
    pub roots_per_class: usize,
    pub mids_per_root: usize,
    pub leaves_per_mid: usize,
    pub small_root_words: usize,
}

impl Default for LexiconShape {
    fn default() -> Self {
        LexiconShape {
            roots_per_class: 6,
            mids_per_root: 3,
            leaves_per_mid: 3,
            small_root_words: 2,
        }
    }
}

fn pseudo_word(prefix: &str, mut n: usize) -> String {
    let mut w = prefix.to_string();
    for _ in 0..3 {
        w.push_str(SYLLABLES[n % SYLLABLES.len()]);
        n /= SYLLABLES.len();
    }
    w
}

/// One lexicographer file per class, named `noun.<class>`. Lemmas are
/// pseudo-words prefixed with the class name, so vocabularies never overlap.
pub fn generate_lexicon<S: AsRef<str>>(classes: &[S], shape: &LexiconShape) -> Vec<(String, String)> {
    classes
        .iter()
        .map(|class| {
            let class = class.as_ref();
            let mut next = 0usize;
            let mut word = || {
                next += 1;
                pseudo_word(class, next - 1)
            };
            let mut text = String::new();
            for r in 0..shape.roots_per_class {
                let root = word();
                writeln!(text, "{{ {}, (top concept {} of {}) }}", root, r, class).unwrap();
                for _ in 0..shape.mids_per_root {
                    let mid = word();
                    writeln!(text, "{{ {}, {},@ (a kind of {}) }}", mid, root, root).unwrap();
                    for _ in 0..shape.leaves_per_mid {
                        let leaf = word();
                        writeln!(text, "{{ {}, {},@ (a kind of {}) }}", leaf, mid, mid).unwrap();
                    }
                }
            }
            let small = word();
            writeln!(text, "{{ {}, (a rarely used {} concept) }}", small, class).unwrap();
            for _ in 0..shape.small_root_words {
                let w = word();
                writeln!(text, "{{ {}, {},@ (a kind of {}) }}", w, small, small).unwrap();
            }
            (lexicon_file_name(class), text)
        })
        .collect()
}

pub fn write_files(dir: impl AsRef<Path>, files: &[(String, String)]) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (name, text) in files {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSpec {
    pub classes: Vec<String>,
    pub tweets_per_class: usize,
    /// Share of each class's lines copied verbatim from other classes.
    pub cross_class_rate: f64,
    /// Share of lines with no lexicon word at all.
    pub noise_rate: f64,
    /// Share of lines repeating an earlier line of the same class, with
    /// changed case and punctuation.
    pub text_duplicate_rate: f64,
    pub words_per_tweet: (usize, usize),
    pub seed: u64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            classes: DEMO_CLASSES.iter().map(|c| c.to_string()).collect(),
            tweets_per_class: 1000,
            cross_class_rate: 0.10,
            noise_rate: 0.05,
            text_duplicate_rate: 0.05,
            words_per_tweet: (1, 4),
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticCorpus {
    /// Class label and its lines, in class order.
    pub classes: Vec<(String, Vec<String>)>,
    /// Per class, how many lines are noise (no lexicon words). Noise lines
    /// are never repeated or copied across classes.
    pub noise_lines: BTreeMap<String, usize>,
    /// Per class, how many lines were copied in from other classes.
    pub cross_class_copies: BTreeMap<String, usize>,
}

impl SyntheticCorpus {
    /// Writes `<label>.txt` per class.
    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<()> {
        let files: Vec<(String, String)> = self
            .classes
            .iter()
            .map(|(label, lines)| {
                let mut text = lines.join("\n");
                text.push('\n');
                (format!("{}.txt", label), text)
            })
            .collect();
        write_files(dir, &files)
    }

    pub fn line_count(&self) -> usize {
        self.classes.iter().map(|(_, l)| l.len()).sum()
    }
}

fn decorate(rng: &mut ChaCha8Rng, word: &str) -> String {
    match rng.gen_range(0..10) {
        0 => word.to_uppercase(),
        1 => format!("{}!", word),
        2 => format!("#{}", word),
        3 => {
            let mut c = word.chars();
            c.next()
                .map(|f| f.to_uppercase().chain(c).collect())
                .unwrap_or_default()
        }
        _ => word.to_string(),
    }
}

fn tweet(rng: &mut ChaCha8Rng, vocab: &[&str], fillers: &[&str], n_words: usize) -> String {
    let mut parts: Vec<String> = Vec::new();
    for _ in 0..n_words {
        parts.push(vocab.choose(rng).expect("vocabulary not empty").to_string());
    }
    for _ in 0..rng.gen_range(2..6) {
        parts.push(fillers.choose(rng).expect("fillers not empty").to_string());
    }
    parts.shuffle(rng);
    let mut parts: Vec<String> = parts.iter().map(|w| decorate(rng, w)).collect();
    if rng.gen_bool(0.3) {
        parts.insert(0, format!("@user{}", rng.gen_range(0..1000)));
    }
    if rng.gen_bool(0.2) {
        parts.push(format!("https://t.example/{}", rng.gen_range(0..100_000)));
    }
    parts.join(" ")
}

/// Draws each class's vocabulary from the lemmas of its `noun.<class>` file
/// in `db`. Filler words that happen to be lexicon lemmas are left out.
pub fn generate_corpus(db: &LexDatabase, spec: &CorpusSpec) -> Result<SyntheticCorpus> {
    let (lo, hi) = spec.words_per_tweet;
    if lo == 0 || hi < lo {
        return Err(Error::Config("words_per_tweet must satisfy 1 <= lo <= hi".into()));
    }
    let lemma_files = db.lemma_files();
    let fillers: Vec<&str> = FILLER_WORDS
        .iter()
        .copied()
        .filter(|w| !lemma_files.contains_key(w))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    // each class's own lines, and the indices of those that are not noise
    let mut own: Vec<(Vec<String>, Vec<usize>)> = Vec::new();
    let mut noise_lines = BTreeMap::new();
    let copies = (spec.tweets_per_class as f64 * spec.cross_class_rate).round() as usize;
    let copies = if spec.classes.len() > 1 {
        copies.min(spec.tweets_per_class)
    } else {
        0
    };
    for class in &spec.classes {
        let file = lexicon_file_name(class);
        let synsets = db
            .synsets(&file)
            .ok_or_else(|| Error::Config(format!("lexicon has no file {}", file)))?;
        let vocab: BTreeSet<&str> = synsets
            .iter()
            .flat_map(|s| s.lemmas.iter().map(String::as_str))
            .collect();
        let vocab: Vec<&str> = vocab.into_iter().collect();
        if vocab.is_empty() {
            return Err(Error::Config(format!("{} has no lemmas", file)));
        }
        let n = spec.tweets_per_class - copies;
        let mut lines: Vec<String> = Vec::with_capacity(spec.tweets_per_class);
        let mut topical: Vec<usize> = Vec::new();
        let mut noise = 0;
        for _ in 0..n {
            let r: f64 = rng.gen();
            if r < spec.noise_rate {
                noise += 1;
                let words = rng.gen_range(3..8);
                let t: Vec<&str> = (0..words).map(|_| *fillers.choose(&mut rng).unwrap()).collect();
                lines.push(t.join(" "));
                continue;
            }
            if r < spec.noise_rate + spec.text_duplicate_rate && !topical.is_empty() {
                let src = &lines[*topical.choose(&mut rng).unwrap()];
                lines.push(format!("{}!!", src.to_uppercase()));
            } else {
                let k = rng.gen_range(lo..=hi);
                lines.push(tweet(&mut rng, &vocab, &fillers, k));
            }
            topical.push(lines.len() - 1);
        }
        noise_lines.insert(class.clone(), noise);
        own.push((lines, topical));
    }

    let mut classes = Vec::with_capacity(spec.classes.len());
    let mut cross_class_copies = BTreeMap::new();
    for (i, class) in spec.classes.iter().enumerate() {
        let mut lines = own[i].0.clone();
        for _ in 0..copies {
            let mut j = rng.gen_range(0..spec.classes.len() - 1);
            if j >= i {
                j += 1;
            }
            let (src, topical) = &own[j];
            if let Some(&k) = topical.choose(&mut rng) {
                lines.push(src[k].clone());
            }
        }
        cross_class_copies.insert(class.clone(), lines.len() - own[i].0.len());
        classes.push((class.clone(), lines));
    }
    Ok(SyntheticCorpus {
        classes,
        noise_lines,
        cross_class_copies,
    })
}

/// Raw class objects for dedup benchmarks: `rows` vectors spread evenly over
/// `classes`, with `dup_rate` of each class's rows copied from another class.
/// Row payloads are the row ordinals.
pub fn bench_objects(
    rows: usize,
    classes: usize,
    schema_len: usize,
    dup_rate: f64,
    seed: u64,
) -> Vec<ClassObject<u32>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let per_class = rows / classes.max(1);
    let mut vectors: Vec<Vec<FeatureVector>> = (0..classes)
        .map(|_| {
            (0..per_class)
                .map(|_| FeatureVector((0..schema_len).map(|_| rng.gen_range(0..4)).collect()))
                .collect()
        })
        .collect();
    if classes > 1 {
        let dups = (per_class as f64 * dup_rate) as usize;
        for i in 0..classes {
            for d in 0..dups {
                let mut j = rng.gen_range(0..classes - 1);
                if j >= i {
                    j += 1;
                }
                let v = vectors[j][rng.gen_range(0..per_class)].clone();
                vectors[i][d] = v;
            }
        }
    }
    let mut ordinal = 0u32;
    vectors
        .into_iter()
        .enumerate()
        .map(|(c, vs)| {
            let rows: Vec<(FeatureVector, u32)> = vs
                .into_iter()
                .map(|v| {
                    ordinal += 1;
                    (v, ordinal - 1)
                })
                .collect();
            ClassObject::single(format!("class{:02}", c), rows)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attributes::build_schema;
    use crate::lexicon::build_database;

    #[test]
    fn lexicon_roots_and_fallback() {
        let files = generate_lexicon(&["art", "politics"], &LexiconShape::default());
        let db = build_database(&files).unwrap();
        assert_eq!(db.file_names(), &["noun.art", "noun.politics"]);
        let schema = build_schema(&db, DEMO_THRESHOLD).unwrap();
        // six full roots per class plus one file attribute per class
        assert_eq!(schema.len(), 14);
        assert!(schema.index_of("noun.art").is_some());
        let small = pseudo_word("art", 6 * 13);
        let idx = schema.attribute_indices(&small).unwrap();
        assert_eq!(schema.attributes()[idx[0]].name, "noun.art");
    }

    #[test]
    fn corpus_is_seeded_and_sized() {
        let db = build_database(&generate_lexicon(&DEMO_CLASSES, &LexiconShape::default())).unwrap();
        let spec = CorpusSpec {
            tweets_per_class: 200,
            ..CorpusSpec::default()
        };
        let a = generate_corpus(&db, &spec).unwrap();
        let b = generate_corpus(&db, &spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.line_count(), 1000);
        assert!(a.cross_class_copies.values().all(|&c| c == 20));
        assert!(a.noise_lines.values().all(|&n| n > 0));
        let other = generate_corpus(&db, &CorpusSpec { seed: 8, ..spec }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn missing_class_file_is_an_error() {
        let db = build_database(&generate_lexicon(&["art"], &LexiconShape::default())).unwrap();
        let spec = CorpusSpec {
            classes: vec!["art".into(), "music".into()],
            ..CorpusSpec::default()
        };
        assert!(generate_corpus(&db, &spec).is_err());
    }

    #[test]
    fn bench_objects_shape() {
        let objs = bench_objects(1000, 4, 8, 0.1, 3);
        assert_eq!(objs.len(), 4);
        assert!(objs.iter().all(|o| o.row_count() <= 250 && o.row_count() > 200));
    }
}
