//! Reader for WordNet lexicographer source files.
//!
//! A lexicographer file is a sequence of brace-delimited synsets:
//!
//! ```text
//! { [deity, verb.cognition:deify,+] god1, immortal, supernatural_being,@ (a gloss) }
//! ```
//!
//! Inside a synset, `word,` entries are lemmas, `word,SYMBOL` or
//! `file:word,SYMBOL` entries are pointers, a bracketed group contributes its
//! head word as a lemma plus the pointers that follow it, and a parenthesized
//! run is the gloss. Whitespace, including newlines, carries no meaning.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LexError {
    #[error("malformed synset in {file} at byte {offset}: {reason}")]
    MalformedSynset {
        file: String,
        offset: usize,
        reason: String,
    },
    #[error("no synsets found in {0}")]
    EmptyFile(String),
    #[error("lexicographer file {0} loaded twice")]
    DuplicateFileName(String),
    #[error("no lexicographer files given")]
    NoFiles,
}

/// Relation carried by a pointer entry.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PointerSymbol {
    Hypernym,
    InstanceHypernym,
    DomainCategory,
    MemberHolonym,
    Derivation,
    /// Any other symbol, kept verbatim.
    Other(String),
}

impl PointerSymbol {
    pub fn parse(text: &str) -> PointerSymbol {
        match text {
            "@" => PointerSymbol::Hypernym,
            "@i" => PointerSymbol::InstanceHypernym,
            ":c" => PointerSymbol::DomainCategory,
            "#m" => PointerSymbol::MemberHolonym,
            "+" => PointerSymbol::Derivation,
            other => PointerSymbol::Other(other.to_string()),
        }
    }

    pub fn as_str(&self) -> &str {
        match self {
            PointerSymbol::Hypernym => "@",
            PointerSymbol::InstanceHypernym => "@i",
            PointerSymbol::DomainCategory => ":c",
            PointerSymbol::MemberHolonym => "#m",
            PointerSymbol::Derivation => "+",
            PointerSymbol::Other(s) => s,
        }
    }

    /// `@` and `@i`, the two relations that build hypernym chains.
    pub fn is_hypernym(&self) -> bool {
        matches!(self, PointerSymbol::Hypernym | PointerSymbol::InstanceHypernym)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawPointer {
    pub target_lemma: String,
    pub target_file: Option<String>,
    pub symbol: PointerSymbol,
    /// Adjective cluster marker such as `divine2` in `heavenly^divine2`.
    /// Pointers carrying one are stored with [`PointerSymbol::Other`].
    pub cluster: Option<String>,
}

impl fmt::Display for RawPointer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(file) = &self.target_file {
            write!(f, "{}:", file)?;
        }
        write!(f, "{}", self.target_lemma)?;
        if let Some(cluster) = &self.cluster {
            write!(f, "^{}", cluster)?;
        }
        write!(f, ",{}", self.symbol.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Synset {
    pub source_file: String,
    pub lemmas: Vec<String>,
    pub raw_lemmas: Vec<String>,
    pub pointers: Vec<RawPointer>,
    pub gloss: String,
}

impl Synset {
    pub fn hypernym_targets(&self) -> impl Iterator<Item = &RawPointer> {
        self.pointers.iter().filter(|p| p.symbol.is_hypernym())
    }
}

/// Writes the synset back in lexicographer syntax using normalized lemmas.
/// Bracketed groups are flattened: every lemma is written first, then every
/// pointer, so re-parsing gives back the same lemma and pointer lists.
/// Lemmas are written as they appeared in the source.
impl fmt::Display for Synset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for lemma in &self.raw_lemmas {
            write!(f, " {},", lemma)?;
        }
        for pointer in &self.pointers {
            write!(f, " {}", pointer)?;
        }
        write!(f, " ({}) }}", self.gloss)
    }
}

/// Strips one trailing run of ASCII digits (the sense number) and lowercases.
///
/// A lemma made only of digits keeps them.
pub fn normalize_lemma(raw: &str) -> String {
    let stripped = raw.trim_end_matches(|c: char| c.is_ascii_digit());
    let base = if stripped.is_empty() { raw } else { stripped };
    base.to_lowercase()
}

struct Scanner<'a> {
    text: &'a str,
    pos: usize,
    file: &'a str,
}

impl<'a> Scanner<'a> {
    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if !c.is_whitespace() {
                break;
            }
            self.bump();
        }
    }

    fn error(&self, offset: usize, reason: impl Into<String>) -> LexError {
        LexError::MalformedSynset {
            file: self.file.to_string(),
            offset,
            reason: reason.into(),
        }
    }

    /// Consumes a balanced parenthesized run; the opening `(` is at the cursor.
    /// Returns the inner text.
    fn paren_run(&mut self) -> Result<&'a str, LexError> {
        let start = self.pos;
        self.bump();
        let mut depth = 1usize;
        while let Some(c) = self.bump() {
            match c {
                '(' => depth += 1,
                ')' => {
                    depth -= 1;
                    if depth == 0 {
                        return Ok(&self.text[start + 1..self.pos - 1]);
                    }
                }
                _ => {}
            }
        }
        Err(self.error(self.text.len(), format!("unclosed '(' opened at byte {}", start)))
    }

    fn word(&mut self) -> (usize, &'a str) {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_whitespace() || matches!(c, '{' | '}' | '[' | ']' | '(' | ')') {
                break;
            }
            self.bump();
        }
        (start, &self.text[start..self.pos])
    }
}

enum Entry {
    Lemma(String),
    Pointer(RawPointer),
}

fn parse_entry(scanner: &Scanner<'_>, offset: usize, token: &str) -> Result<Entry, LexError> {
    let (word, symbol) = match token.find(',') {
        Some(i) => (&token[..i], &token[i + 1..]),
        None => (token, ""),
    };
    if word.is_empty() {
        return Err(scanner.error(offset, format!("empty word in entry {:?}", token)));
    }
    if symbol.is_empty() {
        return Ok(Entry::Lemma(word.to_string()));
    }
    let (target_file, target) = match word.find(':') {
        Some(i) if i > 0 && i + 1 < word.len() => (Some(word[..i].to_string()), &word[i + 1..]),
        _ => (None, word),
    };
    let (target, cluster) = match target.find('^') {
        Some(i) => (&target[..i], Some(target[i + 1..].to_string())),
        None => (target, None),
    };
    if target.is_empty() {
        return Err(scanner.error(offset, format!("pointer without target in {:?}", token)));
    }
    let symbol = match cluster {
        Some(_) => PointerSymbol::Other(symbol.to_string()),
        None => PointerSymbol::parse(symbol),
    };
    Ok(Entry::Pointer(RawPointer {
        target_lemma: normalize_lemma(target),
        target_file,
        symbol,
        cluster,
    }))
}

fn parse_synset(scanner: &mut Scanner<'_>) -> Result<Synset, LexError> {
    let open = scanner.pos;
    scanner.bump();
    let mut raw_lemmas = Vec::new();
    let mut pointers = Vec::new();
    let mut gloss = String::new();
    // Some(true) while inside a bracket before its head word has been read.
    let mut bracket: Option<bool> = None;
    loop {
        scanner.skip_ws();
        let at = scanner.pos;
        match scanner.peek() {
            None => return Err(scanner.error(scanner.text.len(), format!("unclosed '{{' opened at byte {}", open))),
            Some('}') => {
                if bracket.is_some() {
                    return Err(scanner.error(at, "'}' inside an open '['"));
                }
                scanner.bump();
                break;
            }
            Some('{') => return Err(scanner.error(at, "nested '{'")),
            Some('[') => {
                if bracket.is_some() {
                    return Err(scanner.error(at, "nested '['"));
                }
                scanner.bump();
                bracket = Some(true);
            }
            Some(']') => {
                if bracket.take().is_none() {
                    return Err(scanner.error(at, "unmatched ']'"));
                }
                scanner.bump();
            }
            Some(')') => return Err(scanner.error(at, "unmatched ')'")),
            Some('(') => {
                if bracket.is_some() {
                    return Err(scanner.error(at, "gloss inside an open '['"));
                }
                let inner = scanner.paren_run()?;
                if !gloss.is_empty() {
                    gloss.push(' ');
                }
                gloss.push_str(inner.trim());
            }
            Some(_) => {
                let (offset, token) = scanner.word();
                match bracket {
                    Some(true) => {
                        // head of a word group: the lemma itself, never a pointer
                        let head = token.trim_end_matches(',');
                        if head.is_empty() || head.contains(',') {
                            return Err(scanner.error(offset, "bad word group head"));
                        }
                        raw_lemmas.push(head.to_string());
                        bracket = Some(false);
                    }
                    _ => match parse_entry(scanner, offset, token)? {
                        Entry::Lemma(raw) => raw_lemmas.push(raw),
                        Entry::Pointer(p) => pointers.push(p),
                    },
                }
            }
        }
    }
    if raw_lemmas.is_empty() {
        return Err(scanner.error(open, "synset has no lemmas"));
    }
    Ok(Synset {
        source_file: scanner.file.to_string(),
        lemmas: raw_lemmas.iter().map(|r| normalize_lemma(r)).collect(),
        raw_lemmas,
        pointers,
        gloss,
    })
}

/// Parses one lexicographer file into its synsets, in file order.
///
/// Parenthesized runs between synsets are treated as file comments.
pub fn parse_lex_file(content: &str, file_name: &str) -> Result<Vec<Synset>, LexError> {
    let mut scanner = Scanner {
        text: content,
        pos: 0,
        file: file_name,
    };
    let mut synsets = Vec::new();
    loop {
        scanner.skip_ws();
        match scanner.peek() {
            None => break,
            Some('{') => synsets.push(parse_synset(&mut scanner)?),
            Some('(') => {
                scanner.paren_run()?;
            }
            Some(c) => return Err(scanner.error(scanner.pos, format!("unexpected {:?} between synsets", c))),
        }
    }
    if synsets.is_empty() {
        return Err(LexError::EmptyFile(file_name.to_string()));
    }
    Ok(synsets)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SynsetId {
    pub file: usize,
    pub index: usize,
}

/// Where a pointer lands relative to the loaded file set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointerTarget {
    pub file: String,
    /// Target file is part of the database.
    pub file_loaded: bool,
    /// Target lemma is a member of some synset in that file.
    pub member: bool,
}

impl PointerTarget {
    pub fn is_dangling(&self) -> bool {
        !self.file_loaded
    }
}

#[derive(Debug, Clone, Default)]
pub struct LexDatabase {
    file_names: Vec<String>,
    files: BTreeMap<String, Vec<Synset>>,
    lemma_index: BTreeMap<(String, String), Vec<SynsetId>>,
}

impl LexDatabase {
    pub fn file_names(&self) -> &[String] {
        &self.file_names
    }

    pub fn synsets(&self, file: &str) -> Option<&[Synset]> {
        self.files.get(file).map(|v| v.as_slice())
    }

    pub fn synset(&self, id: SynsetId) -> &Synset {
        &self.files[&self.file_names[id.file]][id.index]
    }

    /// All synsets in load order.
    pub fn iter_synsets(&self) -> impl Iterator<Item = (SynsetId, &Synset)> {
        self.file_names.iter().enumerate().flat_map(move |(fi, name)| {
            self.files[name]
                .iter()
                .enumerate()
                .map(move |(index, s)| (SynsetId { file: fi, index }, s))
        })
    }

    pub fn synset_count(&self) -> usize {
        self.files.values().map(Vec::len).sum()
    }

    pub fn lookup(&self, lemma: &str, file: &str) -> &[SynsetId] {
        self.lemma_index
            .get(&(lemma.to_string(), file.to_string()))
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }

    /// Every normalized lemma with the files it appears in.
    pub fn lemma_files(&self) -> BTreeMap<&str, BTreeSet<&str>> {
        let mut out: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for (lemma, file) in self.lemma_index.keys() {
            out.entry(lemma.as_str()).or_default().insert(file.as_str());
        }
        out
    }

    pub fn resolve(&self, pointer: &RawPointer, source_file: &str) -> PointerTarget {
        let file = pointer.target_file.as_deref().unwrap_or(source_file);
        let file_loaded = self.files.contains_key(file);
        let member = !self.lookup(&pointer.target_lemma, file).is_empty();
        PointerTarget {
            file: file.to_string(),
            file_loaded,
            member,
        }
    }

    /// Pointers whose target file is not loaded.
    pub fn dangling_pointers(&self) -> Vec<(SynsetId, &RawPointer)> {
        let mut out = Vec::new();
        for (id, synset) in self.iter_synsets() {
            for p in &synset.pointers {
                if self.resolve(p, &synset.source_file).is_dangling() {
                    out.push((id, p));
                }
            }
        }
        out
    }
}

/// Parses every `(file_name, content)` pair into one database.
pub fn build_database<N, C>(files: &[(N, C)]) -> Result<LexDatabase, LexError>
where
    N: AsRef<str>,
    C: AsRef<str>,
{
    if files.is_empty() {
        return Err(LexError::NoFiles);
    }
    let mut db = LexDatabase::default();
    for (name, content) in files {
        let name = name.as_ref();
        if db.files.contains_key(name) {
            return Err(LexError::DuplicateFileName(name.to_string()));
        }
        let synsets = parse_lex_file(content.as_ref(), name)?;
        let file = db.file_names.len();
        for (index, synset) in synsets.iter().enumerate() {
            for lemma in &synset.lemmas {
                let ids = db.lemma_index.entry((lemma.clone(), name.to_string())).or_default();
                let id = SynsetId { file, index };
                if ids.last() != Some(&id) {
                    ids.push(id);
                }
            }
        }
        db.file_names.push(name.to_string());
        db.files.insert(name.to_string(), synsets);
    }
    Ok(db)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SELF: &str = "{ self, noun.Tops:person,@ (a person considered as a unique individual; \"one's own self\") }";

    #[test]
    fn normalizes_sense_digits() {
        assert_eq!(normalize_lemma("dame1"), "dame");
        assert_eq!(normalize_lemma("Otto_I"), "otto_i");
        assert_eq!(normalize_lemma("bounty_hunter1"), "bounty_hunter");
        assert_eq!(normalize_lemma("b2b"), "b2b");
        assert_eq!(normalize_lemma("ma'am"), "ma'am");
        assert_eq!(normalize_lemma("1755"), "1755");
    }

    #[test]
    fn parses_cross_file_hypernym() {
        let synsets = parse_lex_file(SELF, "noun.person").unwrap();
        assert_eq!(synsets.len(), 1);
        let s = &synsets[0];
        assert_eq!(s.lemmas, vec!["self"]);
        assert_eq!(
            s.pointers,
            vec![RawPointer {
                target_lemma: "person".into(),
                target_file: Some("noun.Tops".into()),
                symbol: PointerSymbol::Hypernym,
                cluster: None,
            }]
        );
        assert!(s.gloss.starts_with("a person considered"));
    }

    #[test]
    fn word_groups_and_cluster_markers() {
        let text = "{ [deity, verb.cognition:deify,+] [divinity, adj.all:heavenly^divine2,+] god1, immortal, supernatural_being,@ noun.group:pantheon,#m (any being) }";
        let s = &parse_lex_file(text, "noun.person").unwrap()[0];
        assert_eq!(s.lemmas, vec!["deity", "divinity", "god", "immortal"]);
        assert_eq!(s.raw_lemmas[2], "god1");
        let symbols: Vec<_> = s.pointers.iter().map(|p| p.symbol.clone()).collect();
        assert_eq!(
            symbols,
            vec![
                PointerSymbol::Derivation,
                PointerSymbol::Other("+".into()),
                PointerSymbol::Hypernym,
                PointerSymbol::MemberHolonym,
            ]
        );
        assert_eq!(s.pointers[1].target_lemma, "heavenly");
        assert_eq!(s.pointers[1].cluster.as_deref(), Some("divine2"));
    }

    #[test]
    fn nested_gloss_parentheses() {
        let text = "{ Parkinson1, James_Parkinson, surgeon,@i (English surgeon (1755-1824)) }";
        let s = &parse_lex_file(text, "noun.person").unwrap()[0];
        assert_eq!(s.gloss, "English surgeon (1755-1824)");
        assert_eq!(s.lemmas, vec!["parkinson", "james_parkinson"]);
    }

    #[test]
    fn synsets_may_span_lines() {
        let text = "{ cowgirl,\n   cowboy,@\n  (a woman\n cowboy) }\n\n";
        let s = &parse_lex_file(text, "noun.person").unwrap()[0];
        assert_eq!(s.lemmas, vec!["cowgirl"]);
        assert_eq!(s.pointers[0].target_lemma, "cowboy");
    }

    #[test]
    fn unknown_symbols_are_kept() {
        let s = &parse_lex_file("{ a, b,~i (g) }", "noun.x").unwrap()[0];
        assert_eq!(s.pointers[0].symbol, PointerSymbol::Other("~i".into()));
    }

    #[test]
    fn empty_input() {
        assert_eq!(
            parse_lex_file("", "noun.person"),
            Err(LexError::EmptyFile("noun.person".into()))
        );
        assert!(matches!(
            parse_lex_file("  \n (comment only) ", "noun.person"),
            Err(LexError::EmptyFile(_))
        ));
    }

    #[test]
    fn unbalanced_input_reports_offsets() {
        match parse_lex_file("{ a, b,@ ", "noun.x") {
            Err(LexError::MalformedSynset { offset, .. }) => assert_eq!(offset, 9),
            other => panic!("unexpected {:?}", other),
        }
        assert!(matches!(
            parse_lex_file("{ a, (gloss }", "noun.x"),
            Err(LexError::MalformedSynset { offset: 13, .. })
        ));
        assert!(matches!(
            parse_lex_file("{ [a, b,+ c, }", "noun.x"),
            Err(LexError::MalformedSynset { .. })
        ));
        assert!(matches!(
            parse_lex_file("{ a, } }", "noun.x"),
            Err(LexError::MalformedSynset { offset: 7, .. })
        ));
        assert!(matches!(
            parse_lex_file("{ b,@ (g) }", "noun.x"),
            Err(LexError::MalformedSynset { offset: 0, .. })
        ));
    }

    #[test]
    fn duplicate_file_names() {
        let files = [("noun.person", SELF), ("noun.person", SELF)];
        assert_eq!(
            build_database(&files).unwrap_err(),
            LexError::DuplicateFileName("noun.person".into())
        );
    }

    #[test]
    fn errors_carry_file_context() {
        let files = [("noun.a", SELF), ("noun.b", "{ x,")];
        match build_database(&files) {
            Err(LexError::MalformedSynset { file, .. }) => assert_eq!(file, "noun.b"),
            other => panic!("unexpected {:?}", other),
        }
    }

    #[test]
    fn resolves_pointers_against_loaded_files() {
        let files = [("noun.person", SELF), ("noun.Tops", "{ person, being,@ (p) }")];
        let db = build_database(&files).unwrap();
        let s = &db.synsets("noun.person").unwrap()[0];
        let target = db.resolve(&s.pointers[0], "noun.person");
        assert!(target.file_loaded && target.member);
        assert_eq!(db.lookup("person", "noun.Tops").len(), 1);
        assert!(db.dangling_pointers().is_empty());
    }
}
