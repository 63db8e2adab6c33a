//! Generates a synthetic lexicon and corpus, then runs the whole pipeline
//! and prints the manifest.
//!
//!     cargo run --release --example full_pipeline -- /tmp/streamprep-demo

use std::path::PathBuf;

use streamprep::config::PipelineConfig;
use streamprep::lexicon::build_database;
use streamprep::pipeline::run_pipeline;
use streamprep::synth::{generate_corpus, generate_lexicon, write_files, CorpusSpec, LexiconShape, DEMO_THRESHOLD};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("streamprep-demo"));

    let spec = CorpusSpec::default();
    let lexicon = generate_lexicon(&spec.classes, &LexiconShape::default());
    write_files(root.join("lexicon"), &lexicon)?;
    generate_corpus(&build_database(&lexicon)?, &spec)?.write_to(root.join("corpus"))?;

    let cfg = PipelineConfig {
        lexicon_dir: root.join("lexicon"),
        corpus_dir: root.join("corpus"),
        output_dir: root.join("out"),
        threshold: DEMO_THRESHOLD,
        arff: true,
        ..PipelineConfig::default()
    };
    let manifest = run_pipeline(&cfg)?;
    print!("{}", manifest.render(true));
    println!("{:.1}% of tweets discarded", manifest.discard_fraction() * 100.0);
    println!("outputs in {}", cfg.output_dir.display());
    Ok(())
}
