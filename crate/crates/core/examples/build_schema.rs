//! Collapses hypernym chains and builds the attribute schema at a threshold.
//!
//!     cargo run --example build_schema -- 5

use streamprep::attributes::{build_graph, build_schema_with_stats, collapse_chains, count_hyponyms};
use streamprep::lexicon::build_database;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let threshold: usize = std::env::args().nth(1).map(|t| t.parse()).transpose()?.unwrap_or(5);
    let db = build_database(&[("noun.person", include_str!("../tests/fixtures/noun.person"))])?;

    let roots = collapse_chains(&build_graph(&db)?);
    let mut counts: Vec<(String, usize)> = count_hyponyms(&roots).into_iter().filter(|(_, c)| *c > 0).collect();
    counts.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    println!("hyponyms per root:");
    for (root, n) in &counts {
        println!("  {:>3} {}", n, root);
    }

    let (schema, stats) = build_schema_with_stats(&db, threshold)?;
    println!("\n{:?}\n", stats);
    print!("{}", schema);
    Ok(())
}
