//! Cross-class duplicate elimination on three tiny classes, checked against
//! the brute-force oracle.

use streamprep::attributes::FeatureVector;
use streamprep::dedup::{oracle_dedup, pair_ends_inward, recursive_duplicate_elimination, ClassObject};

fn class(label: &str, vectors: &[[u32; 3]]) -> ClassObject<&'static str> {
    ClassObject::single(label, vectors.iter().map(|v| (FeatureVector(v.to_vec()), "tweet")))
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let objects = vec![
        class("art", &[[1, 0, 0], [2, 0, 0], [0, 0, 1]]),
        class("business", &[[0, 1, 0], [1, 0, 0], [0, 2, 1]]),
        class("politics", &[[0, 0, 1], [0, 0, 2], [0, 1, 0]]),
    ];
    println!("first round pairs: {:?}", pair_ends_inward(objects.len()));

    let expected = oracle_dedup(&objects)?;
    let result = recursive_duplicate_elimination(objects)?;
    assert_eq!(result, expected);

    println!("removed as label-ambiguous:");
    for v in result.duplicates() {
        println!("  {:?}", v.as_slice());
    }
    for (label, partition) in result.partitions() {
        let kept: Vec<&[u32]> = partition.keys().map(|v| v.as_slice()).collect();
        println!("{:<9} keeps {:?}", label, kept);
    }
    Ok(())
}
