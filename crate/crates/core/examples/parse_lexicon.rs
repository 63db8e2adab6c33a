//! Parses a lexicographer file and lists its synsets and hypernym pointers.
//!
//!     cargo run --example parse_lexicon [path/to/noun.person]

use std::path::Path;

use streamprep::lexicon::{build_database, parse_lex_file};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (name, text) = match std::env::args().nth(1) {
        Some(path) => {
            let name = Path::new(&path).file_name().unwrap().to_string_lossy().to_string();
            (name, std::fs::read_to_string(&path)?)
        }
        None => (
            "noun.person".to_string(),
            include_str!("../tests/fixtures/noun.person").to_string(),
        ),
    };

    let synsets = parse_lex_file(&text, &name)?;
    println!("{}: {} synsets", name, synsets.len());
    for s in &synsets {
        let hypernyms: Vec<String> = s
            .hypernym_targets()
            .map(|p| format!("{}{}", p.symbol.as_str(), p.target_lemma))
            .collect();
        println!("  {:<40} -> {}", s.lemmas.join(", "), hypernyms.join(" "));
    }

    let db = build_database(&[(name.as_str(), text.as_str())])?;
    println!("pointers into files that are not loaded:");
    for (id, p) in db.dangling_pointers() {
        println!("  {} --{}--> {}", db.synset(id).lemmas[0], p.symbol.as_str(), p);
    }
    Ok(())
}
