//! Writes labeled vectors as CSV and ARFF and reads the CSV back.
//!
//!     cargo run --example export_csv_arff -- /tmp/export

use std::path::PathBuf;

use streamprep::attributes::{build_schema, FeatureVector};
use streamprep::lexicon::build_database;
use streamprep::table::{read_csv, write_arff, write_csv};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(std::env::temp_dir);
    std::fs::create_dir_all(&dir)?;
    let db = build_database(&[("noun.person", include_str!("../tests/fixtures/noun.person"))])?;
    let schema = build_schema(&db, 5)?;

    let rows: Vec<(FeatureVector, String)> = [
        (vec![2, 0, 0], "mythology"),
        (vec![0, 1, 1], "society"),
        (vec![1, 0, 3], "society"),
    ]
    .into_iter()
    .map(|(v, l)| (FeatureVector(v), l.to_string()))
    .collect();

    let csv = dir.join("example.csv");
    let arff = dir.join("example.arff");
    write_csv(&rows, &schema, &csv)?;
    write_arff(&rows, &schema, "tweets", &arff)?;
    print!(
        "{}\n{}",
        std::fs::read_to_string(&csv)?,
        std::fs::read_to_string(&arff)?
    );

    assert_eq!(read_csv(&csv)?.rows, rows);
    println!("wrote {} and {}", csv.display(), arff.display());
    Ok(())
}
