//! The noun.person excerpt in tests/fixtures, end to end through parsing,
//! chain collapse, the schema and tweet vectorization.

use std::collections::BTreeSet;

use streamprep::attributes::{build_graph, build_schema_with_stats, collapse_chains, count_hyponyms, AttributeKind};
use streamprep::lexicon::{build_database, parse_lex_file, LexDatabase, PointerSymbol};
use streamprep::tweets::{normalize_tweet, tokenize};

const EXCERPT: &str = include_str!("fixtures/noun.person");

fn db() -> LexDatabase {
    build_database(&[("noun.person", EXCERPT)]).unwrap()
}

#[test]
fn twenty_one_synsets() {
    let synsets = parse_lex_file(EXCERPT, "noun.person").unwrap();
    assert_eq!(synsets.len(), 21);
    let zeus = &synsets[0];
    assert_eq!(zeus.lemmas, vec!["zeus"]);
    assert_eq!(zeus.raw_lemmas, vec!["Zeus"]);
    let p = &zeus.pointers[0];
    assert_eq!(
        (p.target_lemma.as_str(), &p.symbol),
        ("greek_deity", &PointerSymbol::InstanceHypernym)
    );
    assert!(zeus.gloss.starts_with("(Greek mythology) the supreme god"));
}

#[test]
fn reserialized_synsets_parse_the_same() {
    let synsets = parse_lex_file(EXCERPT, "noun.person").unwrap();
    let text: String = synsets.iter().map(|s| format!("{}\n", s)).collect();
    assert_eq!(parse_lex_file(&text, "noun.person").unwrap(), synsets);
}

#[test]
fn greek_gods_collapse_to_supernatural_being() {
    let db = db();
    let roots = collapse_chains(&build_graph(&db).unwrap());
    let top = BTreeSet::from(["supernatural_being".to_string()]);
    for god in ["zeus", "hera", "here", "greek_deity", "deity", "god"] {
        assert_eq!(roots[god], top, "{}", god);
    }
    assert_eq!(count_hyponyms(&roots)["supernatural_being"], 10);
}

#[test]
fn schema_and_vector_at_threshold_six() {
    let (schema, stats) = build_schema_with_stats(&db(), 6).unwrap();
    let names: Vec<&str> = schema.attributes().iter().map(|a| a.name.as_str()).collect();
    assert_eq!(names, ["supernatural_being", "noun.person"]);
    assert_eq!(schema.count_of(AttributeKind::FileName), 1);
    assert_eq!(stats.selected_roots, 1);
    assert_eq!(stats.dangling_roots, 17);
    let tokens = tokenize(&normalize_tweet("@someone Zeus loves Hera! http://t.co/x"));
    assert_eq!(tokens, ["user", "zeus", "loves", "hera", "url"]);
    assert_eq!(schema.query(&tokens).as_slice(), &[2, 0]);
}

#[test]
fn five_ladies_make_woman_a_root_at_five() {
    let (schema, _) = build_schema_with_stats(&db(), 5).unwrap();
    let names: Vec<&str> = schema.attributes().iter().map(|a| a.name.as_str()).collect();
    assert_eq!(names, ["supernatural_being", "woman", "noun.person"]);
    assert_eq!(schema.query(&["madam", "zeus", "hera"]).as_slice(), &[2, 1, 0]);
}

#[test]
fn huge_threshold_leaves_file_names_only() {
    let (schema, _) = build_schema_with_stats(&db(), 2500).unwrap();
    assert_eq!(schema.len(), 1);
    assert_eq!(schema.attributes()[0].name, "noun.person");
    assert_eq!(schema.query(&["zeus"]).as_slice(), &[1]);
}
