//! Normalizes a few tweets, turns them into attribute counts, and shows
//! what stage 1 and stage 2 drop.

use streamprep::attributes::build_schema;
use streamprep::lexicon::build_database;
use streamprep::tweets::{vectorize_dataset, ClassDataset};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let db = build_database(&[("noun.person", include_str!("../tests/fixtures/noun.person"))])?;
    let schema = build_schema(&db, 5)?;
    let names: Vec<&str> = schema.attributes().iter().map(|a| a.name.as_str()).collect();
    println!("attributes: {:?}", names);

    let lines = [
        "@hermes Zeus and Hera again!! http://olympus.example",
        "@apollo ZEUS and hera AGAIN https://x.example",
        "Morpheus keeps the dalai lama awake",
        "The Dalai_Lama met a cowgirl and a clog_dancer",
        "nothing to see today",
    ];
    let ds = ClassDataset::from_lines("mythology", lines);
    let ds = vectorize_dataset(ds, &schema);
    for (record, v) in ds.vectors() {
        println!("{:?} {:<45} <- {}", v.as_slice(), record.normalized, record.raw);
    }
    for (stage, c) in &ds.stage_counts {
        println!("{:<24} kept {:>2} dropped {:>2}", stage, c.kept, c.dropped);
    }
    Ok(())
}
