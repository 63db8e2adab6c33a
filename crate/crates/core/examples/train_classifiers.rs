//! Trains a single random tree, a forest and Naive Bayes on a deduplicated
//! synthetic corpus and compares them on a held-out split.

use streamprep::attributes::build_schema;
use streamprep::classify::{
    evaluate_model, train_nb, train_random_forest, train_random_tree, Classifier, ForestParams,
};
use streamprep::corpus::Corpus;
use streamprep::lexicon::build_database;
use streamprep::pipeline::{dedup_rows, labeled_dataset, preprocess};
use streamprep::synth::{generate_corpus, generate_lexicon, CorpusSpec, LexiconShape, DEMO_THRESHOLD};
use streamprep::tweets::ClassDataset;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = CorpusSpec::default();
    let db = build_database(&generate_lexicon(&spec.classes, &LexiconShape::default()))?;
    let schema = build_schema(&db, DEMO_THRESHOLD)?;
    let synthetic = generate_corpus(&db, &spec)?;
    let corpus = Corpus {
        datasets: synthetic
            .classes
            .iter()
            .map(|(label, lines)| ClassDataset::from_lines(label, lines))
            .collect(),
        skipped: Vec::new(),
    };

    let rows = streamprep::pipeline::preprocessed_rows(&preprocess(corpus, &schema));
    let (rows, _, _) = dedup_rows(rows, 2)?;
    let data = labeled_dataset(schema.len(), &rows)?;
    let (train, test) = data.stratified_split(0.8, 1);
    println!(
        "{} rows, {} attributes; train {} test {}",
        data.len(),
        schema.len(),
        train.len(),
        test.len()
    );

    let tree = train_random_tree(&train, schema.len(), 1)?;
    let forest = train_random_forest(&train, &ForestParams::default())?;
    let nb = train_nb(&train, 1.0)?;
    println!("tree: {} leaves, depth {}", tree.leaf_count(), tree.depth());

    let models: [(&str, &dyn Classifier); 3] =
        [("random tree", &tree), ("random forest", &forest), ("naive bayes", &nb)];
    for (name, model) in models {
        let on_train = evaluate_model(model, &train)?;
        let on_test = evaluate_model(model, &test)?;
        println!(
            "{:<14} train {:.4}  test {:.4}  kappa {:.4}",
            name, on_train.accuracy, on_test.accuracy, on_test.kappa
        );
    }
    Ok(())
}
