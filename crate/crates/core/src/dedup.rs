//! Recursive cross-class duplicate elimination.
//!
//! Each class starts as its own [`ClassObject`]. A round pairs the object
//! list ends-inward (first with last, second with second-to-last, the middle
//! one passing through when the count is odd), merges each pair while moving
//! vectors seen under two labels into the merged duplicate set, then sweeps
//! every merged object against every other object's duplicate set. Rounds
//! repeat until one object is left.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::attributes::FeatureVector;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DedupError {
    #[error("class objects share labels: {0:?}")]
    OverlappingClassLabels(Vec<String>),
    #[error("class label {0:?} appears in more than one input object")]
    DuplicateClassLabel(String),
    #[error("no class objects given")]
    NoObjects,
    #[error("invalid class object: {0}")]
    InvalidObject(String),
}

pub type Partition<R> = BTreeMap<FeatureVector, R>;

/// Surviving vectors per class label plus the duplicates found so far.
///
/// A vector never sits in two partitions of one object, and never in a
/// partition and the duplicate set at once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassObject<R> {
    partitions: BTreeMap<String, Partition<R>>,
    duplicates: BTreeSet<FeatureVector>,
}

impl<R> ClassObject<R> {
    /// One class from its rows. Repeated vectors keep the first row.
    pub fn single<I>(label: impl Into<String>, rows: I) -> Self
    where
        I: IntoIterator<Item = (FeatureVector, R)>,
    {
        let mut partition = Partition::new();
        for (v, r) in rows {
            partition.entry(v).or_insert(r);
        }
        ClassObject {
            partitions: BTreeMap::from([(label.into(), partition)]),
            duplicates: BTreeSet::new(),
        }
    }

    pub fn from_parts(
        partitions: BTreeMap<String, Partition<R>>,
        duplicates: BTreeSet<FeatureVector>,
    ) -> Result<Self, DedupError> {
        let mut seen: BTreeSet<&FeatureVector> = BTreeSet::new();
        for (label, part) in &partitions {
            for v in part.keys() {
                if duplicates.contains(v) {
                    return Err(DedupError::InvalidObject(format!(
                        "vector {:?} of {:?} is also a duplicate",
                        v.0, label
                    )));
                }
                if !seen.insert(v) {
                    return Err(DedupError::InvalidObject(format!(
                        "vector {:?} sits in two partitions",
                        v.0
                    )));
                }
            }
        }
        Ok(ClassObject { partitions, duplicates })
    }

    pub fn partitions(&self) -> &BTreeMap<String, Partition<R>> {
        &self.partitions
    }

    pub fn duplicates(&self) -> &BTreeSet<FeatureVector> {
        &self.duplicates
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.partitions.keys().map(String::as_str)
    }

    pub fn row_count(&self) -> usize {
        self.partitions.values().map(BTreeMap::len).sum()
    }

    pub fn into_parts(self) -> (BTreeMap<String, Partition<R>>, BTreeSet<FeatureVector>) {
        (self.partitions, self.duplicates)
    }

    /// Rows in label order, then vector order.
    pub fn into_rows(self) -> Vec<(String, FeatureVector, R)> {
        let mut out = Vec::with_capacity(self.row_count());
        for (label, part) in self.partitions {
            for (v, r) in part {
                out.push((label.clone(), v, r));
            }
        }
        out
    }

    fn contains_vector(&self, v: &FeatureVector) -> bool {
        self.partitions.values().any(|p| p.contains_key(v))
    }

    /// Drops every partition vector found in `dups`.
    pub(crate) fn strip(&mut self, dups: &BTreeSet<FeatureVector>) {
        if dups.is_empty() {
            return;
        }
        for part in self.partitions.values_mut() {
            if part.len() <= dups.len() {
                part.retain(|v, _| !dups.contains(v));
            } else {
                for d in dups {
                    part.remove(d);
                }
            }
        }
    }

    /// Splits out the duplicate set, leaving an empty one behind.
    pub(crate) fn take_duplicates(&mut self) -> BTreeSet<FeatureVector> {
        std::mem::take(&mut self.duplicates)
    }

    pub(crate) fn set_duplicates(&mut self, dups: BTreeSet<FeatureVector>) {
        self.duplicates = dups;
    }
}

/// Merges two objects with disjoint labels. Vectors present under a label of
/// each side, and vectors either side already knows as duplicates, end up in
/// the merged duplicate set and out of every partition.
pub fn remove_inter_class_duplicates<R>(x: ClassObject<R>, y: ClassObject<R>) -> Result<ClassObject<R>, DedupError> {
    let overlap: Vec<String> = x
        .partitions
        .keys()
        .filter(|l| y.partitions.contains_key(*l))
        .cloned()
        .collect();
    if !overlap.is_empty() {
        return Err(DedupError::OverlappingClassLabels(overlap));
    }
    let (mut big, small) = if x.row_count() >= y.row_count() { (x, y) } else { (y, x) };
    let mut duplicates = std::mem::take(&mut big.duplicates);
    duplicates.extend(small.duplicates.iter().cloned());
    for part in small.partitions.values() {
        for v in part.keys() {
            if big.contains_vector(v) {
                duplicates.insert(v.clone());
            }
        }
    }
    big.partitions.extend(small.partitions);
    big.strip(&duplicates);
    big.duplicates = duplicates;
    Ok(big)
}

/// Removes from `x` every vector listed in `other`'s duplicate set.
pub fn remove_class_duplicates<R>(mut x: ClassObject<R>, other: &ClassObject<R>) -> ClassObject<R> {
    x.strip(&other.duplicates);
    x
}

/// Ends-inward pairing for one round: `(i, n - 1 - i)` pairs and the
/// pass-through middle index when `n` is odd.
pub fn pair_ends_inward(n: usize) -> (Vec<(usize, usize)>, Option<usize>) {
    let pairs = (0..n / 2).map(|i| (i, n - 1 - i)).collect();
    let middle = (n % 2 == 1).then_some(n / 2);
    (pairs, middle)
}

pub(crate) fn check_labels<R>(objects: &[ClassObject<R>]) -> Result<(), DedupError> {
    if objects.is_empty() {
        return Err(DedupError::NoObjects);
    }
    let mut seen = BTreeSet::new();
    for o in objects {
        for l in o.labels() {
            if !seen.insert(l) {
                return Err(DedupError::DuplicateClassLabel(l.to_string()));
            }
        }
    }
    Ok(())
}

/// Sequential reference implementation of the recursive elimination.
pub fn recursive_duplicate_elimination<R: Clone>(objects: Vec<ClassObject<R>>) -> Result<ClassObject<R>, DedupError> {
    check_labels(&objects)?;
    let mut current = objects;
    while current.len() > 1 {
        let (pairs, middle) = pair_ends_inward(current.len());
        let mut slots: Vec<Option<ClassObject<R>>> = current.into_iter().map(Some).collect();
        let mut merged = Vec::with_capacity(pairs.len() + 1);
        for (a, b) in pairs {
            let x = slots[a].take().expect("pair index used once");
            let y = slots[b].take().expect("pair index used once");
            merged.push(remove_inter_class_duplicates(x, y)?);
        }
        if let Some(m) = middle {
            merged.push(slots[m].take().expect("middle index used once"));
        }
        let dup_sets: Vec<BTreeSet<FeatureVector>> = merged.iter().map(|o| o.duplicates.clone()).collect();
        current = merged
            .into_iter()
            .enumerate()
            .map(|(i, mut obj)| {
                for (j, dups) in dup_sets.iter().enumerate() {
                    if i != j {
                        obj.strip(dups);
                    }
                }
                obj
            })
            .collect();
    }
    Ok(current.pop().expect("at least one object"))
}

/// Direct definition of the result: a vector survives only when exactly one
/// input class holds it and no input object lists it as a duplicate.
pub fn oracle_dedup<R: Clone>(objects: &[ClassObject<R>]) -> Result<ClassObject<R>, DedupError> {
    check_labels(objects)?;
    let mut holders: BTreeMap<&FeatureVector, usize> = BTreeMap::new();
    let mut duplicates: BTreeSet<FeatureVector> = BTreeSet::new();
    for o in objects {
        duplicates.extend(o.duplicates.iter().cloned());
        for part in o.partitions.values() {
            for v in part.keys() {
                *holders.entry(v).or_insert(0) += 1;
            }
        }
    }
    for (v, n) in &holders {
        if *n > 1 {
            duplicates.insert((*v).clone());
        }
    }
    let mut partitions = BTreeMap::new();
    for o in objects {
        for (label, part) in &o.partitions {
            let kept: Partition<R> = part
                .iter()
                .filter(|(v, _)| !duplicates.contains(*v))
                .map(|(v, r)| (v.clone(), r.clone()))
                .collect();
            partitions.insert(label.clone(), kept);
        }
    }
    Ok(ClassObject { partitions, duplicates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(x: u32) -> FeatureVector {
        FeatureVector(vec![x])
    }

    fn obj(label: &str, vs: &[u32]) -> ClassObject<()> {
        ClassObject::single(label, vs.iter().map(|&x| (v(x), ())))
    }

    fn vecs(o: &ClassObject<()>, label: &str) -> Vec<u32> {
        o.partitions()[label].keys().map(|f| f.0[0]).collect()
    }

    fn dups(o: &ClassObject<()>) -> Vec<u32> {
        o.duplicates().iter().map(|f| f.0[0]).collect()
    }

    #[test]
    fn merge_moves_shared_vectors_to_duplicates() {
        let z = remove_inter_class_duplicates(obj("A", &[1, 2]), obj("B", &[2, 3])).unwrap();
        assert_eq!(vecs(&z, "A"), vec![1]);
        assert_eq!(vecs(&z, "B"), vec![3]);
        assert_eq!(dups(&z), vec![2]);
    }

    #[test]
    fn merge_disjoint_keeps_everything() {
        let z = remove_inter_class_duplicates(obj("A", &[1]), obj("B", &[2])).unwrap();
        assert_eq!(vecs(&z, "A"), vec![1]);
        assert_eq!(vecs(&z, "B"), vec![2]);
        assert!(z.duplicates().is_empty());
    }

    #[test]
    fn merge_applies_inherited_duplicates() {
        let x = ClassObject::from_parts(
            BTreeMap::from([("A".to_string(), Partition::from([(v(1), ())]))]),
            BTreeSet::from([v(3)]),
        )
        .unwrap();
        let z = remove_inter_class_duplicates(x, obj("B", &[3, 4])).unwrap();
        assert_eq!(vecs(&z, "B"), vec![4]);
        assert_eq!(dups(&z), vec![3]);
    }

    #[test]
    fn merge_rejects_shared_labels() {
        assert_eq!(
            remove_inter_class_duplicates(obj("A", &[1]), obj("A", &[2])),
            Err(DedupError::OverlappingClassLabels(vec!["A".into()]))
        );
    }

    #[test]
    fn sweep_uses_other_duplicates_only() {
        let other = remove_inter_class_duplicates(obj("B", &[2]), obj("C", &[2])).unwrap();
        let x = remove_class_duplicates(obj("A", &[1, 2]), &other);
        assert_eq!(vecs(&x, "A"), vec![1]);
        assert!(x.duplicates().is_empty());
        let x = remove_class_duplicates(obj("A", &[1, 2]), &obj("D", &[1]));
        assert_eq!(vecs(&x, "A"), vec![1, 2]);
        let x = remove_class_duplicates(obj("A", &[]), &other);
        assert!(vecs(&x, "A").is_empty());
    }

    #[test]
    fn from_parts_checks_invariants() {
        let bad = ClassObject::<()>::from_parts(
            BTreeMap::from([
                ("A".to_string(), Partition::from([(v(1), ())])),
                ("B".to_string(), Partition::from([(v(1), ())])),
            ]),
            BTreeSet::new(),
        );
        assert!(matches!(bad, Err(DedupError::InvalidObject(_))));
        let bad = ClassObject::<()>::from_parts(
            BTreeMap::from([("A".to_string(), Partition::from([(v(1), ())]))]),
            BTreeSet::from([v(1)]),
        );
        assert!(matches!(bad, Err(DedupError::InvalidObject(_))));
    }

    #[test]
    fn within_class_repeats_keep_first_row() {
        let o = ClassObject::single("A", [(v(1), "first"), (v(1), "second")]);
        assert_eq!(o.partitions()["A"][&v(1)], "first");
    }

    #[test]
    fn pairing_for_five() {
        assert_eq!(pair_ends_inward(5), (vec![(0, 4), (1, 3)], Some(2)));
        assert_eq!(pair_ends_inward(2), (vec![(0, 1)], None));
        assert_eq!(pair_ends_inward(1), (vec![], Some(0)));
    }

    #[test]
    fn oracle_three_classes() {
        let out = oracle_dedup(&[obj("A", &[1, 2]), obj("B", &[2]), obj("C", &[2, 3])]).unwrap();
        assert_eq!(vecs(&out, "A"), vec![1]);
        assert!(vecs(&out, "B").is_empty());
        assert_eq!(vecs(&out, "C"), vec![3]);
        assert_eq!(dups(&out), vec![2]);
    }

    #[test]
    fn oracle_edge_cases() {
        let input = [obj("A", &[1]), obj("B", &[2])];
        let out = oracle_dedup(&input).unwrap();
        assert_eq!(vecs(&out, "A"), vec![1]);
        assert_eq!(vecs(&out, "B"), vec![2]);
        let out = oracle_dedup(&[obj("A", &[1, 2]), obj("B", &[1, 2])]).unwrap();
        assert_eq!(out.row_count(), 0);
        assert_eq!(dups(&out), vec![1, 2]);
    }

    #[test]
    fn single_object_is_unchanged() {
        let o = obj("A", &[1, 2]);
        assert_eq!(recursive_duplicate_elimination(vec![o.clone()]).unwrap(), o);
    }

    #[test]
    fn five_classes_match_oracle() {
        let input = vec![
            obj("a", &[1, 2, 9]),
            obj("b", &[2, 3]),
            obj("c", &[3, 4, 9]),
            obj("d", &[5]),
            obj("e", &[1, 6]),
        ];
        let expected = oracle_dedup(&input).unwrap();
        let got = recursive_duplicate_elimination(input).unwrap();
        assert_eq!(got, expected);
        assert_eq!(dups(&got), vec![1, 2, 3, 9]);
    }

    #[test]
    fn label_errors() {
        assert_eq!(
            recursive_duplicate_elimination(vec![obj("A", &[1]), obj("A", &[2])]),
            Err(DedupError::DuplicateClassLabel("A".into()))
        );
        assert_eq!(
            recursive_duplicate_elimination::<()>(vec![]),
            Err(DedupError::NoObjects)
        );
    }

    fn instance() -> impl Strategy<Value = Vec<ClassObject<()>>> {
        prop::collection::vec(prop::collection::vec(0u32..40, 0..30), 1..8).prop_map(|classes| {
            classes
                .iter()
                .enumerate()
                .map(|(i, vs)| obj(&format!("c{}", i), vs))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn recursion_matches_oracle(objects in instance()) {
            let expected = oracle_dedup(&objects).unwrap();
            let got = recursive_duplicate_elimination(objects).unwrap();
            prop_assert_eq!(got, expected);
        }

        #[test]
        fn result_is_a_fixed_point(objects in instance()) {
            let once = recursive_duplicate_elimination(objects).unwrap();
            let twice = recursive_duplicate_elimination(vec![once.clone()]).unwrap();
            prop_assert_eq!(&once, &twice);
            let mut seen = BTreeSet::new();
            for part in once.partitions().values() {
                for v in part.keys() {
                    prop_assert!(seen.insert(v.clone()));
                    prop_assert!(!once.duplicates().contains(v));
                }
            }
        }
    }
}
