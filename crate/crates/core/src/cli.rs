//! Command-line front end. Subcommands that run one step read and write the
//! same files `run` leaves in `--out`, so they can be chained by hand:
//! `build-index`, `preprocess`, `dedup`, `train`, `evaluate`.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bench::{bench_dedup, BenchSettings};
use crate::classify::{NBModel, RandomForest};
use crate::config::{ConfigLayer, PipelineConfig, WORKERS_ENV};
use crate::corpus::read_corpus;
use crate::error::{Error, Result};
use crate::lexicon::build_database;
use crate::pipeline::{self, Artifacts};
use crate::synth::{generate_corpus, generate_lexicon, write_files, CorpusSpec, LexiconShape};
use crate::table::{column_names, write_arff, write_csv};
use crate::tweets::total_stage_counts;

#[derive(Debug, Parser)]
#[command(
    name = "streamprep",
    version,
    about = "Hypernym-attribute preprocessing and classification of tweet corpora"
)]
pub struct Cli {
    /// More log output (-v info, -vv debug). RUST_LOG also works.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse the lexicon and write the attribute schema to <out>/schema.tsv
    BuildIndex(Settings),
    /// Normalize, vectorize and drop text duplicates and no-hit tweets; writes <out>/vectors.csv
    Preprocess(Settings),
    /// Remove cross-class duplicate vectors; writes <out>/dataset.csv
    Dedup(Settings),
    /// Train the forest and Naive Bayes on the 80% split of <out>/dataset.csv
    Train(Settings),
    /// Score the trained models on the 20% split
    Evaluate(Settings),
    /// All of the above in one go, plus <out>/manifest.txt
    Run(Settings),
    /// Time stage-3 dedup on synthetic class objects
    Bench(BenchArgs),
    /// Write a synthetic lexicon and corpus to --lexicon-dir and --corpus-dir
    Generate(GenerateArgs),
}

#[derive(Debug, Args, Clone, Default)]
struct Settings {
    /// key=value file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    lexicon_dir: Option<PathBuf>,
    #[arg(long)]
    corpus_dir: Option<PathBuf>,
    /// Minimum hyponym count for a hypernym root to become an attribute
    #[arg(long)]
    threshold: Option<usize>,
    /// Dedup worker threads [env: STREAMPREP_WORKERS]
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Trees in the random forest
    #[arg(long)]
    trees: Option<usize>,
    /// Attributes tried per tree node
    #[arg(long)]
    k_features: Option<usize>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write <out>/dataset.arff
    #[arg(long)]
    arff: bool,
}

impl Settings {
    fn resolve(&self) -> Result<PipelineConfig> {
        let file = self.config.as_ref().map(ConfigLayer::from_file).transpose()?;
        let env = ConfigLayer::from_env_value(std::env::var(WORKERS_ENV).ok().as_deref())?;
        let flags = ConfigLayer {
            lexicon_dir: self.lexicon_dir.clone(),
            corpus_dir: self.corpus_dir.clone(),
            threshold: self.threshold,
            workers: self.workers,
            seed: self.seed,
            n_trees: self.trees,
            k_features: self.k_features,
            output_dir: self.out.clone(),
            arff: self.arff.then_some(true),
        };
        let cfg = PipelineConfig::resolve(file.as_ref(), &env, &flags);
        cfg.validate_numbers()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[command(flatten)]
    settings: Settings,
    /// Comma-separated row counts
    #[arg(long, value_delimiter = ',', default_values_t = [10_000usize, 100_000])]
    sizes: Vec<usize>,
    /// Comma-separated worker counts
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 4])]
    worker_counts: Vec<usize>,
    /// Timed runs per cell; the median is reported (at least 3)
    #[arg(long, default_value_t = 3)]
    runs: usize,
    #[arg(long, default_value_t = 8)]
    classes: usize,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[command(flatten)]
    settings: Settings,
    #[arg(long, default_value_t = 1000)]
    tweets_per_class: usize,
    /// Share of each class copied from other classes
    #[arg(long, default_value_t = 0.1)]
    cross_class_rate: f64,
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

fn require_dir(dir: &Path) -> Result<()> {
    if dir.is_dir() {
        Ok(())
    } else {
        Err(Error::MissingDirectory(dir.to_path_buf()))
    }
}

fn stage_lines(stages: &[(String, crate::tweets::StageCount)]) -> String {
    stages
        .iter()
        .map(|(n, c)| format!("{}\tinput={}\tkept={}\tdropped={}\n", n, c.input(), c.kept, c.dropped))
        .collect()
}

fn build_index(cfg: &PipelineConfig) -> Result<()> {
    require_dir(&cfg.lexicon_dir)?;
    let (schema, stats) = pipeline::build_index(&cfg.lexicon_dir, cfg.threshold)?;
    create_dir(&cfg.output_dir)?;
    let path = cfg.output_dir.join(pipeline::SCHEMA_FILE);
    pipeline::write_schema(&schema, &path)?;
    println!(
        "{}: {} attributes ({} hypernym roots of {} candidates, {} file names)",
        path.display(),
        schema.len(),
        stats.selected_roots,
        stats.candidate_roots,
        stats.file_attributes
    );
    Ok(())
}

fn preprocess(cfg: &PipelineConfig) -> Result<()> {
    let out = Artifacts::new(&cfg.output_dir);
    let schema = pipeline::read_schema(&out.path(pipeline::SCHEMA_FILE))?;
    let corpus = read_corpus(&cfg.corpus_dir).map_err(|e| e.in_stage(pipeline::stage::READ_CORPUS))?;
    let datasets = pipeline::preprocess(corpus, &schema);
    let stages = stage_lines(&total_stage_counts(&datasets));
    write_csv(
        &pipeline::preprocessed_rows(&datasets),
        &schema,
        out.path(pipeline::VECTORS_FILE),
    )?;
    write_text(&out.path("preprocess.txt"), &stages)?;
    print!("{}", stages);
    Ok(())
}

fn dedup(cfg: &PipelineConfig) -> Result<()> {
    let out = Artifacts::new(&cfg.output_dir);
    let schema = pipeline::read_schema(&out.path(pipeline::SCHEMA_FILE))?;
    let vectors = out.path(pipeline::VECTORS_FILE);
    let (columns, rows) = pipeline::read_dataset_csv(&vectors)?;
    if columns != column_names(&schema) {
        return Err(Error::Csv {
            path: vectors,
            line: 1,
            reason: "header does not match the schema".into(),
        });
    }
    let (rows, count, cross) =
        pipeline::dedup_rows(rows, cfg.workers).map_err(|e| e.in_stage(pipeline::stage::DEDUP))?;
    write_csv(&rows, &schema, out.path(pipeline::DATASET_FILE))?;
    if cfg.arff && !rows.is_empty() {
        write_arff(&rows, &schema, pipeline::RELATION, out.path(pipeline::ARFF_FILE))?;
    }
    println!(
        "stage3_cross_class\tinput={}\tkept={}\tdropped={}\tcross_class_vectors={}",
        count.input(),
        count.kept,
        count.dropped,
        cross
    );
    Ok(())
}

fn load_split(cfg: &PipelineConfig) -> Result<(crate::classify::LabeledDataset, crate::classify::LabeledDataset)> {
    let out = Artifacts::new(&cfg.output_dir);
    let (columns, rows) = pipeline::read_dataset_csv(&out.path(pipeline::DATASET_FILE))?;
    let data = pipeline::labeled_dataset(columns.len(), &rows)?;
    Ok(pipeline::split(&data, cfg.seed))
}

fn train(cfg: &PipelineConfig) -> Result<()> {
    let out = Artifacts::new(&cfg.output_dir);
    let (train, _) = load_split(cfg)?;
    let (forest, nb) = pipeline::train_models(&train, cfg).map_err(|e| e.in_stage(pipeline::stage::TRAIN))?;
    write_text(&out.path(pipeline::FOREST_FILE), &forest.to_string())?;
    write_text(&out.path(pipeline::NB_FILE), &nb.to_string())?;
    println!(
        "trained {} trees (k={}) and naive bayes on {} rows",
        forest.n_trees(),
        forest.k_features(),
        train.len()
    );
    Ok(())
}

fn evaluate(cfg: &PipelineConfig) -> Result<()> {
    let out = Artifacts::new(&cfg.output_dir);
    let (_, test) = load_split(cfg)?;
    let forest: RandomForest = read_text(&out.path(pipeline::FOREST_FILE))?.parse()?;
    let nb: NBModel = read_text(&out.path(pipeline::NB_FILE))?.parse()?;
    match pipeline::evaluate_models(&forest, &nb, &test).map_err(|e| e.in_stage(pipeline::stage::EVALUATE))? {
        Some((rf, bayes)) => {
            let text = pipeline::evaluation_text(&rf, &bayes);
            write_text(&out.path(pipeline::EVALUATION_FILE), &text)?;
            print!("{}", text);
        }
        None => println!("test split is empty; nothing to evaluate"),
    }
    Ok(())
}

fn generate(args: &GenerateArgs, cfg: &PipelineConfig) -> Result<()> {
    let spec = CorpusSpec {
        tweets_per_class: args.tweets_per_class,
        cross_class_rate: args.cross_class_rate,
        seed: cfg.seed,
        ..CorpusSpec::default()
    };
    let lexicon = generate_lexicon(&spec.classes, &LexiconShape::default());
    let db = build_database(&lexicon)?;
    let corpus = generate_corpus(&db, &spec)?;
    write_files(&cfg.lexicon_dir, &lexicon)?;
    corpus.write_to(&cfg.corpus_dir)?;
    println!(
        "wrote {} lexicon files to {} and {} tweets to {}",
        lexicon.len(),
        cfg.lexicon_dir.display(),
        corpus.line_count(),
        cfg.corpus_dir.display()
    );
    Ok(())
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::BuildIndex(s) => build_index(&s.resolve()?),
        Command::Preprocess(s) => preprocess(&s.resolve()?),
        Command::Dedup(s) => dedup(&s.resolve()?),
        Command::Train(s) => train(&s.resolve()?),
        Command::Evaluate(s) => evaluate(&s.resolve()?),
        Command::Run(s) => {
            let m = pipeline::run_pipeline(&s.resolve()?)?;
            print!("{}", m.render(true));
            Ok(())
        }
        Command::Bench(b) => {
            let cfg = b.settings.resolve()?;
            let settings = BenchSettings {
                sizes: b.sizes,
                worker_counts: b.worker_counts,
                runs: b.runs,
                classes: b.classes,
                seed: cfg.seed,
                ..BenchSettings::default()
            };
            print!("{}", bench_dedup(&settings)?);
            Ok(())
        }
        Command::Generate(g) => {
            let cfg = g.settings.resolve()?;
            generate(&g, &cfg)
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code: 0 success, 1 usage, 2 bad input, 3 internal.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .try_init();
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e);
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_1() {
        assert_eq!(run(["streamprep", "frobnicate"]), 1);
        assert_eq!(run(["streamprep", "run", "--threshold", "many"]), 1);
        assert_eq!(run(["streamprep", "--help"]), 0);
    }

    #[test]
    fn data_errors_exit_2() {
        assert_eq!(run(["streamprep", "build-index", "--lexicon-dir", "/no/such/dir"]), 2);
        assert_eq!(run(["streamprep", "run", "--threshold", "0"]), 2);
    }
}
