//! CSV and ARFF emission of labeled feature vectors.
//!
//! The CSV dialect is fixed: comma separator, `\n` line ends, no quoting, a
//! header of attribute names followed by a final `class` column. Attribute
//! names are reduced to `[a-z0-9_.-]` so no field ever needs quoting.

use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::attributes::{AttributeSchema, FeatureVector};
use crate::error::{Error, Result};

pub const CLASS_COLUMN: &str = "class";

/// A feature vector and its class label.
pub type LabeledRow = (FeatureVector, String);

/// Lowercases and replaces anything outside `[a-z0-9_.-]` with `_`.
pub fn sanitize_name(name: &str) -> String {
    let s: String = name
        .to_lowercase()
        .chars()
        .map(|c| match c {
            'a'..='z' | '0'..='9' | '_' | '.' | '-' => c,
            _ => '_',
        })
        .collect();
    if s.is_empty() {
        "_".to_string()
    } else {
        s
    }
}

/// Sanitized, unique column names in schema order. Collisions after
/// sanitizing get a `_2`, `_3`, ... suffix.
pub fn column_names(schema: &AttributeSchema) -> Vec<String> {
    let mut used: HashSet<String> = HashSet::from([CLASS_COLUMN.to_string()]);
    schema
        .attributes()
        .iter()
        .map(|a| {
            let base = sanitize_name(&a.name);
            let mut name = base.clone();
            let mut n = 2;
            while !used.insert(name.clone()) {
                name = format!("{}_{}", base, n);
                n += 1;
            }
            name
        })
        .collect()
}

fn check_label(label: &str) -> Result<()> {
    let bad = label.is_empty()
        || label
            .chars()
            .any(|c| matches!(c, ',' | '\n' | '\r' | '{' | '}' | '\'' | '"' | '%') || c.is_whitespace());
    if bad {
        return Err(Error::InvalidLabel(label.to_string()));
    }
    Ok(())
}

fn write_rows(out: &mut String, rows: &[(FeatureVector, String)], len: usize) -> Result<()> {
    for (v, label) in rows {
        if v.len() != len {
            return Err(Error::LengthMismatch {
                expected: len,
                found: v.len(),
            });
        }
        check_label(label)?;
        for c in v.as_slice() {
            write!(out, "{},", c).expect("writing to a String");
        }
        out.push_str(label);
        out.push('\n');
    }
    Ok(())
}

pub fn csv_string(rows: &[(FeatureVector, String)], schema: &AttributeSchema) -> Result<String> {
    let mut out = String::new();
    for name in column_names(schema) {
        out.push_str(&name);
        out.push(',');
    }
    out.push_str(CLASS_COLUMN);
    out.push('\n');
    write_rows(&mut out, rows, schema.len())?;
    Ok(out)
}

pub fn write_csv(rows: &[(FeatureVector, String)], schema: &AttributeSchema, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = csv_string(rows, schema)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvTable {
    pub columns: Vec<String>,
    pub rows: Vec<(FeatureVector, String)>,
}

pub fn parse_csv(text: &str, path: &Path) -> Result<CsvTable> {
    let err = |line: usize, reason: String| Error::Csv {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let mut lines = text.split_terminator('\n');
    let header = lines.next().ok_or_else(|| err(1, "missing header".into()))?;
    let mut columns: Vec<String> = header.split(',').map(str::to_string).collect();
    if columns.pop().as_deref() != Some(CLASS_COLUMN) {
        return Err(err(1, "last column must be \"class\"".into()));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != columns.len() + 1 {
            return Err(err(
                i + 2,
                format!("expected {} fields, found {}", columns.len() + 1, fields.len()),
            ));
        }
        let (label, counts) = fields.split_last().expect("at least the class field");
        let v = counts
            .iter()
            .map(|f| f.parse::<u32>().map_err(|_| err(i + 2, format!("bad count {:?}", f))))
            .collect::<Result<Vec<_>>>()?;
        rows.push((FeatureVector(v), label.to_string()));
    }
    Ok(CsvTable { columns, rows })
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<CsvTable> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, path)
}

fn arff_name(name: &str) -> String {
    let needs_quotes = name.is_empty()
        || name
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, ',' | '{' | '}' | '\'' | '"' | '%'));
    if needs_quotes {
        format!("'{}'", name.replace('\\', "\\\\").replace('\'', "\\'"))
    } else {
        name.to_string()
    }
}

pub fn arff_string(rows: &[(FeatureVector, String)], schema: &AttributeSchema, relation: &str) -> Result<String> {
    let labels: BTreeSet<&str> = rows.iter().map(|(_, l)| l.as_str()).collect();
    if labels.is_empty() {
        return Err(Error::EmptyLabelUniverse);
    }
    let mut out = String::new();
    writeln!(out, "@relation {}", arff_name(relation)).expect("writing to a String");
    for name in column_names(schema) {
        writeln!(out, "@attribute {} numeric", arff_name(&name)).expect("writing to a String");
    }
    let labels: Vec<&str> = labels.into_iter().collect();
    writeln!(out, "@attribute {} {{{}}}", CLASS_COLUMN, labels.join(",")).expect("writing to a String");
    out.push_str("@data\n");
    write_rows(&mut out, rows, schema.len())?;
    Ok(out)
}

pub fn write_arff(
    rows: &[(FeatureVector, String)],
    schema: &AttributeSchema,
    relation: &str,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let text = arff_string(rows, schema, relation)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> AttributeSchema {
        "# attributes=2 threshold=1 max_ngram=1\nGreek Deity\thypernym_root\nnoun.person\tfile_name\nzeus\t0\n"
            .parse()
            .unwrap()
    }

    #[test]
    fn csv_layout() {
        let rows = vec![(FeatureVector(vec![1, 0]), "art".to_string())];
        let text = csv_string(&rows, &schema()).unwrap();
        assert_eq!(text, "greek_deity,noun.person,class\n1,0,art\n");
        assert_eq!(csv_string(&[], &schema()).unwrap(), "greek_deity,noun.person,class\n");
        let parsed = parse_csv(&text, Path::new("x.csv")).unwrap();
        assert_eq!(parsed.rows, rows);
        assert_eq!(parsed.columns, vec!["greek_deity", "noun.person"]);
    }

    #[test]
    fn csv_rejects_bad_rows() {
        let rows = vec![(FeatureVector(vec![1]), "art".to_string())];
        assert!(matches!(
            csv_string(&rows, &schema()),
            Err(Error::LengthMismatch { .. })
        ));
        let rows = vec![(FeatureVector(vec![1, 1]), "a,b".to_string())];
        assert!(matches!(csv_string(&rows, &schema()), Err(Error::InvalidLabel(_))));
        assert!(parse_csv("a,b\n1,x\n", Path::new("x")).is_err());
        assert!(parse_csv("a,class\n1\n", Path::new("x")).is_err());
        assert!(parse_csv("a,class\n-1,x\n", Path::new("x")).is_err());
    }

    #[test]
    fn colliding_names_get_suffixes() {
        let s: AttributeSchema =
            "# attributes=3 threshold=1 max_ngram=1\nA b\thypernym_root\na_b\thypernym_root\nclass\tfile_name\n"
                .parse()
                .unwrap();
        assert_eq!(column_names(&s), vec!["a_b", "a_b_2", "class_2"]);
    }

    #[test]
    fn arff_layout() {
        let rows = vec![
            (FeatureVector(vec![1, 0]), "politics".to_string()),
            (FeatureVector(vec![0, 2]), "art".to_string()),
        ];
        let text = arff_string(&rows, &schema(), "tweets").unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            &lines[..6],
            &[
                "@relation tweets",
                "@attribute greek_deity numeric",
                "@attribute noun.person numeric",
                "@attribute class {art,politics}",
                "@data",
                "1,0,politics",
            ]
        );
        assert!(arff_string(&rows, &schema(), "my tweets")
            .unwrap()
            .starts_with("@relation 'my tweets'\n"));
        assert!(matches!(
            arff_string(&[], &schema(), "t"),
            Err(Error::EmptyLabelUniverse)
        ));
    }
}
