//! The full batch run: lexicon to schema, corpus to vectors, three dedup
//! stages, CSV/ARFF output, then a forest and a Naive Bayes model scored on a
//! held-out split. Each step is also exposed on its own for the subcommands.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use crate::attributes::{build_schema_with_stats, AttributeKind, AttributeSchema, FeatureVector, SchemaStats};
use crate::classify::{
    evaluate_model, train_nb, train_random_forest, EvaluationReport, ForestParams, LabeledDataset, NBModel,
    RandomForest,
};
use crate::config::PipelineConfig;
use crate::corpus::{read_corpus, read_lexicon_dir, Corpus};
use crate::dedup::ClassObject;
use crate::error::{Error, Result};
use crate::runtime::parallel_dedup;
use crate::table::{read_csv, write_arff, write_csv, LabeledRow};
use crate::tweets::{total_stage_counts, vectorize_dataset, ClassDataset, StageCount, STAGE_CROSS_CLASS};

pub const SCHEMA_FILE: &str = "schema.tsv";
pub const VECTORS_FILE: &str = "vectors.csv";
pub const DATASET_FILE: &str = "dataset.csv";
pub const ARFF_FILE: &str = "dataset.arff";
pub const FOREST_FILE: &str = "forest.model";
pub const NB_FILE: &str = "nb.model";
pub const EVALUATION_FILE: &str = "evaluation.txt";
pub const MANIFEST_FILE: &str = "manifest.txt";

pub const TRAIN_FRACTION: f64 = 0.8;
pub const NB_ALPHA: f64 = 1.0;
pub const RELATION: &str = "tweets";

/// Stage names used in errors and manifest timings.
pub mod stage {
    pub const BUILD_DATABASE: &str = "build_database";
    pub const BUILD_SCHEMA: &str = "build_schema";
    pub const READ_CORPUS: &str = "read_corpus";
    pub const VECTORIZE: &str = "vectorize";
    pub const DEDUP: &str = "dedup";
    pub const WRITE_DATASET: &str = "write_dataset";
    pub const TRAIN: &str = "train";
    pub const EVALUATE: &str = "evaluate";
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelScore {
    pub accuracy: f64,
    pub kappa: f64,
}

impl From<&EvaluationReport> for ModelScore {
    fn from(r: &EvaluationReport) -> Self {
        ModelScore {
            accuracy: r.accuracy,
            kappa: r.kappa,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationSummary {
    pub train_rows: usize,
    pub test_rows: usize,
    pub forest: ModelScore,
    pub naive_bayes: ModelScore,
}

/// What a run did. Timings are kept apart from everything else because they
/// are the only part that changes between identical runs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub config: PipelineConfig,
    pub schema: SchemaStats,
    pub schema_len: usize,
    /// Corpus-wide stage counts in run order, ending with stage 3.
    pub stages: Vec<(String, StageCount)>,
    pub skipped_lines: usize,
    pub cross_class_duplicates: usize,
    pub final_rows: BTreeMap<String, usize>,
    pub evaluation: Option<EvaluationSummary>,
    pub timings: Vec<(&'static str, Duration)>,
}

impl RunManifest {
    pub fn input_rows(&self) -> usize {
        self.stages.first().map_or(0, |(_, c)| c.input())
    }

    pub fn final_row_count(&self) -> usize {
        self.final_rows.values().sum()
    }

    /// Share of read tweets that did not reach the final dataset.
    pub fn discard_fraction(&self) -> f64 {
        let input = self.input_rows();
        if input == 0 {
            0.0
        } else {
            (input - self.final_row_count()) as f64 / input as f64
        }
    }

    /// `key=value` lines. `timing.*` lines come last and only when asked for.
    pub fn render(&self, with_timings: bool) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: &dyn std::fmt::Display| writeln!(out, "{}={}", k, v).unwrap();
        for (k, v) in self.config.key_values() {
            kv(&format!("config.{}", k), &v);
        }
        kv("schema.attributes", &self.schema_len);
        kv("schema.lemmas", &self.schema.lemmas);
        kv("schema.hypernym_lemmas", &self.schema.hypernym_lemmas);
        kv("schema.candidate_roots", &self.schema.candidate_roots);
        kv("schema.selected_roots", &self.schema.selected_roots);
        kv("schema.file_attributes", &self.schema.file_attributes);
        kv("schema.dangling_roots", &self.schema.dangling_roots);
        kv("corpus.skipped_lines", &self.skipped_lines);
        for (name, c) in &self.stages {
            kv(&format!("stage.{}.input", name), &c.input());
            kv(&format!("stage.{}.kept", name), &c.kept);
            kv(&format!("stage.{}.dropped", name), &c.dropped);
        }
        kv("dedup.cross_class_vectors", &self.cross_class_duplicates);
        for (label, n) in &self.final_rows {
            kv(&format!("rows.{}", label), n);
        }
        kv("rows.total", &self.final_row_count());
        kv("discard_fraction", &format!("{:.6}", self.discard_fraction()));
        match &self.evaluation {
            Some(e) => {
                kv("eval.train_rows", &e.train_rows);
                kv("eval.test_rows", &e.test_rows);
                kv("eval.forest.accuracy", &format!("{:.6}", e.forest.accuracy));
                kv("eval.forest.kappa", &format!("{:.6}", e.forest.kappa));
                kv("eval.naive_bayes.accuracy", &format!("{:.6}", e.naive_bayes.accuracy));
                kv("eval.naive_bayes.kappa", &format!("{:.6}", e.naive_bayes.kappa));
            }
            None => kv("eval", &"skipped"),
        }
        if with_timings {
            for (name, d) in &self.timings {
                kv(&format!("timing.{}.ms", name), &format!("{:.3}", d.as_secs_f64() * 1e3));
            }
        }
        out
    }
}

struct Clock(Vec<(&'static str, Duration)>);

impl Clock {
    fn time<T>(&mut self, name: &'static str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f().map_err(|e| e.in_stage(name));
        self.0.push((name, start.elapsed()));
        out
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn build_index(lexicon_dir: &Path, threshold: usize) -> Result<(AttributeSchema, SchemaStats)> {
    let db = read_lexicon_dir(lexicon_dir).map_err(|e| e.in_stage(stage::BUILD_DATABASE))?;
    build_schema_with_stats(&db, threshold).map_err(|e| Error::from(e).in_stage(stage::BUILD_SCHEMA))
}

pub fn write_schema(schema: &AttributeSchema, path: &Path) -> Result<()> {
    write_text(path, &schema.to_string())
}

pub fn read_schema(path: &Path) -> Result<AttributeSchema> {
    Ok(read_text(path)?.parse()?)
}

/// Stage 1, vectorization and stage 2 for every class.
pub fn preprocess(corpus: Corpus, schema: &AttributeSchema) -> Vec<ClassDataset> {
    corpus
        .datasets
        .into_iter()
        .map(|ds| vectorize_dataset(ds, schema))
        .collect()
}

/// Labeled vectors of the preprocessed classes, in class then row order.
pub fn preprocessed_rows(datasets: &[ClassDataset]) -> Vec<(FeatureVector, String)> {
    datasets
        .iter()
        .flat_map(|d| d.vectors().map(|(r, v)| (v.clone(), r.class_label.clone())))
        .collect()
}

/// One class object per label; repeated vectors within a class collapse.
pub fn class_objects(rows: Vec<(FeatureVector, String)>) -> Vec<ClassObject<()>> {
    let mut by_label: BTreeMap<String, Vec<(FeatureVector, ())>> = BTreeMap::new();
    for (v, l) in rows {
        by_label.entry(l).or_default().push((v, ()));
    }
    by_label
        .into_iter()
        .map(|(l, rows)| ClassObject::single(l, rows))
        .collect()
}

/// Stage 3 over labeled rows. Returns the surviving rows in label then
/// vector order, the stage count, and the number of cross-class vectors.
pub fn dedup_rows(rows: Vec<(FeatureVector, String)>, workers: usize) -> Result<(Vec<LabeledRow>, StageCount, usize)> {
    let input = rows.len();
    if input == 0 {
        return Ok((Vec::new(), StageCount::default(), 0));
    }
    let result = parallel_dedup(class_objects(rows), workers)?;
    let cross = result.duplicates().len();
    let out: Vec<(FeatureVector, String)> = result.into_rows().into_iter().map(|(l, v, ())| (v, l)).collect();
    let count = StageCount {
        kept: out.len(),
        dropped: input - out.len(),
    };
    Ok((out, count, cross))
}

pub fn labeled_dataset(schema_len: usize, rows: &[(FeatureVector, String)]) -> Result<LabeledDataset> {
    Ok(LabeledDataset::new(
        schema_len,
        rows.iter().map(|(v, l)| (v.clone(), l.as_str())).collect(),
    )?)
}

pub fn forest_params(cfg: &PipelineConfig) -> ForestParams {
    ForestParams {
        n_trees: cfg.n_trees,
        k_features: cfg.k_features,
        seed: cfg.seed,
        bootstrap: true,
    }
}

/// The stratified 80/20 split seeded with the run seed.
pub fn split(data: &LabeledDataset, seed: u64) -> (LabeledDataset, LabeledDataset) {
    data.stratified_split(TRAIN_FRACTION, seed)
}

pub fn train_models(train: &LabeledDataset, cfg: &PipelineConfig) -> Result<(RandomForest, NBModel)> {
    let forest = train_random_forest(train, &forest_params(cfg))?;
    let nb = train_nb(train, NB_ALPHA)?;
    Ok((forest, nb))
}

pub fn evaluation_text(forest: &EvaluationReport, nb: &EvaluationReport) -> String {
    format!("== random_forest ==\n{}\n== naive_bayes ==\n{}", forest, nb)
}

/// Scores both models on `test`; `None` when the test side is empty.
pub fn evaluate_models(
    forest: &RandomForest,
    nb: &NBModel,
    test: &LabeledDataset,
) -> Result<Option<(EvaluationReport, EvaluationReport)>> {
    if test.is_empty() {
        return Ok(None);
    }
    Ok(Some((evaluate_model(forest, test)?, evaluate_model(nb, test)?)))
}

pub fn read_dataset_csv(path: &Path) -> Result<(Vec<String>, Vec<LabeledRow>)> {
    let t = read_csv(path)?;
    Ok((t.columns, t.rows))
}

/// Paths of every artifact of a run rooted at `out`.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub dir: PathBuf,
}

impl Artifacts {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Artifacts { dir: dir.into() }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }
}

/// Runs everything and writes schema, dataset, models, evaluation and
/// manifest into `cfg.output_dir`. The first failing stage aborts the run
/// and is named in the error.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunManifest> {
    cfg.validate()?;
    let out = Artifacts::new(&cfg.output_dir);
    create_dir(&out.dir)?;
    let mut clock = Clock(Vec::new());

    let db = clock.time(stage::BUILD_DATABASE, || read_lexicon_dir(&cfg.lexicon_dir))?;
    let (schema, stats) = clock.time(stage::BUILD_SCHEMA, || {
        let (schema, stats) = build_schema_with_stats(&db, cfg.threshold)?;
        write_schema(&schema, &out.path(SCHEMA_FILE))?;
        Ok((schema, stats))
    })?;
    drop(db);
    if schema.count_of(AttributeKind::HypernymRoot) == 0 {
        log::warn!("threshold {} leaves only file-name attributes", cfg.threshold);
    }

    let corpus = clock.time(stage::READ_CORPUS, || read_corpus(&cfg.corpus_dir))?;
    let skipped_lines = corpus.skipped.len();
    let datasets = clock.time(stage::VECTORIZE, || Ok(preprocess(corpus, &schema)))?;
    let mut stages = total_stage_counts(&datasets);
    let rows = preprocessed_rows(&datasets);
    drop(datasets);

    let (rows, stage3, cross) = clock.time(stage::DEDUP, || dedup_rows(rows, cfg.workers))?;
    stages.push((STAGE_CROSS_CLASS.to_string(), stage3));
    let mut final_rows: BTreeMap<String, usize> = BTreeMap::new();
    for (_, l) in &rows {
        *final_rows.entry(l.clone()).or_default() += 1;
    }

    clock.time(stage::WRITE_DATASET, || {
        write_csv(&rows, &schema, out.path(DATASET_FILE))?;
        if cfg.arff && !rows.is_empty() {
            write_arff(&rows, &schema, RELATION, out.path(ARFF_FILE))?;
        }
        Ok(())
    })?;

    let evaluation = if rows.is_empty() {
        log::warn!("no rows survived deduplication; skipping training");
        None
    } else {
        let data = labeled_dataset(schema.len(), &rows).map_err(|e| e.in_stage(stage::TRAIN))?;
        let (train, test) = split(&data, cfg.seed);
        let (forest, nb) = clock.time(stage::TRAIN, || {
            let models = train_models(&train, cfg)?;
            write_text(&out.path(FOREST_FILE), &models.0.to_string())?;
            write_text(&out.path(NB_FILE), &models.1.to_string())?;
            Ok(models)
        })?;
        clock.time(stage::EVALUATE, || {
            Ok(match evaluate_models(&forest, &nb, &test)? {
                Some((rf, bayes)) => {
                    write_text(&out.path(EVALUATION_FILE), &evaluation_text(&rf, &bayes))?;
                    Some(EvaluationSummary {
                        train_rows: train.len(),
                        test_rows: test.len(),
                        forest: (&rf).into(),
                        naive_bayes: (&bayes).into(),
                    })
                }
                None => {
                    log::warn!("test split is empty; skipping evaluation");
                    None
                }
            })
        })?
    };

    let manifest = RunManifest {
        config: cfg.clone(),
        schema: stats,
        schema_len: schema.len(),
        stages,
        skipped_lines,
        cross_class_duplicates: cross,
        final_rows,
        evaluation,
        timings: clock.0,
    };
    write_text(&out.path(MANIFEST_FILE), &manifest.render(true))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::build_database;
    use crate::synth::{generate_corpus, generate_lexicon, write_files, CorpusSpec, LexiconShape, DEMO_THRESHOLD};

    fn setup(dir: &Path, tweets: usize) -> PipelineConfig {
        let spec = CorpusSpec {
            tweets_per_class: tweets,
            ..CorpusSpec::default()
        };
        let lex = generate_lexicon(&spec.classes, &LexiconShape::default());
        let db = build_database(&lex).unwrap();
        write_files(dir.join("lexicon"), &lex).unwrap();
        generate_corpus(&db, &spec)
            .unwrap()
            .write_to(dir.join("corpus"))
            .unwrap();
        PipelineConfig {
            lexicon_dir: dir.join("lexicon"),
            corpus_dir: dir.join("corpus"),
            threshold: DEMO_THRESHOLD,
            workers: 2,
            output_dir: dir.join("out"),
            arff: true,
            ..PipelineConfig::default()
        }
    }

    #[test]
    fn counts_telescope() {
        let dir = tempfile::tempdir().unwrap();
        let m = run_pipeline(&setup(dir.path(), 120)).unwrap();
        for w in m.stages.windows(2) {
            assert_eq!(w[0].1.kept, w[1].1.input(), "{} -> {}", w[0].0, w[1].0);
        }
        assert_eq!(m.stages.len(), 4);
        assert_eq!(m.input_rows(), 600);
        assert!(m.final_row_count() > 0);
        assert_eq!(m.stages.last().unwrap().1.kept, m.final_row_count());
        for f in [
            SCHEMA_FILE,
            DATASET_FILE,
            ARFF_FILE,
            FOREST_FILE,
            NB_FILE,
            EVALUATION_FILE,
            MANIFEST_FILE,
        ] {
            assert!(dir.path().join("out").join(f).is_file(), "{}", f);
        }
        let text = m.render(false);
        assert!(text.contains("stage.stage3_cross_class.kept="));
        assert!(!text.contains("timing."));
    }

    #[test]
    fn high_threshold_keeps_only_file_attributes() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = PipelineConfig {
            threshold: 10_000,
            ..setup(dir.path(), 60)
        };
        let m = run_pipeline(&cfg).unwrap();
        assert_eq!(m.schema.selected_roots, 0);
        assert_eq!(m.schema_len, 5);
        assert!(m.final_row_count() > 0);
    }

    #[test]
    fn failing_stage_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = setup(dir.path(), 10);
        fs::write(cfg.lexicon_dir.join("noun.broken"), "{ open, ").unwrap();
        match run_pipeline(&cfg) {
            Err(Error::Stage { stage, .. }) => assert_eq!(stage, stage::BUILD_DATABASE),
            other => panic!("unexpected {:?}", other.map(|m| m.render(false))),
        }
    }
}
