//! Simulator vocabulary shared by the description filter and the validator.
//!
//! The on-disk format is line oriented:
//!
//! ```text
//! # comment
//! term     weather.rain
//! replace  stormy rainy
//! synonym  weather.storm weather.rain
//! word     drizzly
//! keyword  pedestrians
//! ```
//!
//! API terms are `namespace.value` and compared in lowercase.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::Path;

use thiserror::Error;

/// Lexicon shipped with the crate; covers the full scenario DSL vocabulary.
pub const DEFAULT_LEXICON: &str = include_str!("../data/default.lexicon");

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("lexicon file not found: {0}")]
    NotFound(String),
    #[error("failed to read lexicon: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("duplicate {kind} entry for `{key}`")]
    Duplicate { kind: &'static str, key: String },
    #[error("replacement `{key}` -> `{value}` targets neither a known word nor a supported term")]
    DanglingReplacement { key: String, value: String },
    #[error("synonym `{key}` -> `{candidate}` crosses namespaces")]
    NamespaceMismatch { key: String, candidate: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    supported_terms: HashSet<String>,
    replacement_map: HashMap<String, String>,
    synonym_map: HashMap<String, Vec<String>>,
    word_list: HashSet<String>,
    domain_keywords: HashSet<String>,
    /// Spelling dictionary as char vectors, bucketed by length.
    words_by_len: BTreeMap<usize, Vec<(String, Vec<char>)>>,
}

/// Lowercases an API term; `Weather.Storm` and `weather.storm` are the same term.
pub fn normalize_term(term: &str) -> String {
    term.trim().to_lowercase()
}

fn namespace(term: &str) -> &str {
    term.split_once('.').map_or("", |(ns, _)| ns)
}

impl Lexicon {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, LexiconError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                LexiconError::NotFound(path.display().to_string())
            } else {
                LexiconError::Io(e)
            }
        })?;
        Self::parse(&text)
    }

    /// The lexicon embedded in the crate.
    pub fn default_lexicon() -> Self {
        Self::parse(DEFAULT_LEXICON).expect("embedded lexicon is well-formed")
    }

    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut lex = Lexicon::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let kind = parts.next().unwrap_or_default();
            let args: Vec<&str> = parts.collect();
            let parse_err = |message: String| LexiconError::Parse {
                line: line_no,
                message,
            };
            match kind {
                "term" => {
                    let [term] = args[..] else {
                        return Err(parse_err("`term` takes exactly one API term".into()));
                    };
                    let term = normalize_term(term);
                    if !term.contains('.') {
                        return Err(parse_err(format!("`{term}` is not namespaced")));
                    }
                    if !lex.supported_terms.insert(term.clone()) {
                        return Err(LexiconError::Duplicate { kind: "term", key: term });
                    }
                }
                "replace" => {
                    let [from, to] = args[..] else {
                        return Err(parse_err("`replace` takes a word and its replacement".into()));
                    };
                    let from = from.to_lowercase();
                    if lex.replacement_map.contains_key(&from) {
                        return Err(LexiconError::Duplicate { kind: "replace", key: from });
                    }
                    lex.replacement_map.insert(from, to.to_lowercase());
                }
                "synonym" => {
                    let Some((key, candidates)) = args.split_first() else {
                        return Err(parse_err("`synonym` needs a term".into()));
                    };
                    if candidates.is_empty() {
                        return Err(parse_err(format!("`synonym {key}` lists no candidates")));
                    }
                    let key = normalize_term(key);
                    if lex.synonym_map.contains_key(&key) {
                        return Err(LexiconError::Duplicate { kind: "synonym", key });
                    }
                    let mut list: Vec<String> = Vec::with_capacity(candidates.len());
                    for candidate in candidates {
                        let candidate = normalize_term(candidate);
                        if namespace(&candidate) != namespace(&key) {
                            return Err(LexiconError::NamespaceMismatch { key, candidate });
                        }
                        if list.contains(&candidate) {
                            return Err(parse_err(format!(
                                "candidate `{candidate}` repeated for `{key}`"
                            )));
                        }
                        list.push(candidate);
                    }
                    lex.synonym_map.insert(key, list);
                }
                "word" | "keyword" => {
                    if args.is_empty() {
                        return Err(parse_err(format!("`{kind}` needs at least one word")));
                    }
                    let set = if kind == "word" {
                        &mut lex.word_list
                    } else {
                        &mut lex.domain_keywords
                    };
                    for w in args {
                        set.insert(w.to_lowercase());
                    }
                }
                other => return Err(parse_err(format!("unknown entry kind `{other}`"))),
            }
        }
        for (key, value) in &lex.replacement_map {
            if !lex.word_list.contains(value) && !lex.supported_terms.contains(value) {
                return Err(LexiconError::DanglingReplacement {
                    key: key.clone(),
                    value: value.clone(),
                });
            }
        }
        let mut words: Vec<&String> = lex.word_list.iter().collect();
        words.sort();
        for w in words {
            let chars: Vec<char> = w.chars().collect();
            lex.words_by_len.entry(chars.len()).or_default().push((w.clone(), chars));
        }
        Ok(lex)
    }

    /// Description-level replacement for a lowercased token.
    pub fn replacement_for(&self, token: &str) -> Option<&str> {
        self.replacement_map.get(token).map(String::as_str)
    }

    /// First supported candidate listed for an unsupported term.
    pub fn synonym_for(&self, term: &str) -> Option<&str> {
        self.synonym_map
            .get(&normalize_term(term))?
            .iter()
            .find(|c| self.supported_terms.contains(c.as_str()))
            .map(String::as_str)
    }

    pub fn is_supported(&self, term: &str) -> bool {
        self.supported_terms.contains(&normalize_term(term))
    }

    pub fn is_word(&self, word: &str) -> bool {
        self.word_list.contains(word)
    }

    pub fn is_keyword(&self, word: &str) -> bool {
        self.domain_keywords.contains(word)
    }

    /// True when `word` needs no spelling correction: a listed word, a
    /// replacement target, or a supported term.
    pub fn is_known(&self, word: &str) -> bool {
        self.word_list.contains(word)
            || self.supported_terms.contains(word)
            || self.replacement_map.values().any(|v| v == word)
    }

    pub fn supported_terms(&self) -> impl Iterator<Item = &str> {
        self.supported_terms.iter().map(String::as_str)
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.word_list.iter().map(String::as_str)
    }

    /// Dictionary words of `len` chars, in sorted order, with their chars.
    pub(crate) fn words_of_len(&self, len: usize) -> &[(String, Vec<char>)] {
        self.words_by_len.get(&len).map_or(&[], Vec::as_slice)
    }

    pub fn replacements(&self) -> impl Iterator<Item = (&str, &str)> {
        self.replacement_map
            .iter()
            .map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn synonyms(&self) -> impl Iterator<Item = (&str, &[String])> {
        self.synonym_map.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn is_empty(&self) -> bool {
        self.supported_terms.is_empty()
            && self.replacement_map.is_empty()
            && self.synonym_map.is_empty()
            && self.word_list.is_empty()
            && self.domain_keywords.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn replace_line_populates_map() {
        let lex = Lexicon::parse("word rainy\nreplace stormy rainy\n").unwrap();
        assert_eq!(lex.replacement_for("stormy"), Some("rainy"));
        assert_eq!(lex.replacement_for("rainy"), None);
        assert_eq!(lex.replacement_for("xyzzy"), None);
    }

    #[test]
    fn empty_file_gives_empty_lexicon() {
        let lex = Lexicon::parse("").unwrap();
        assert!(lex.is_empty());
        assert_eq!(lex.replacement_for("stormy"), None);
        assert_eq!(lex.synonym_for("weather.storm"), None);
        assert!(!lex.is_supported("weather.rain"));
    }

    #[test]
    fn duplicate_replace_is_rejected() {
        let err = Lexicon::parse("word a b\nreplace stormy a\nreplace stormy b\n").unwrap_err();
        match err {
            LexiconError::Duplicate { key, .. } => assert_eq!(key, "stormy"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = Lexicon::parse("# header\n\nterm weather.rain\nbogus x\n").unwrap_err();
        assert!(matches!(err, LexiconError::Parse { line: 4, .. }), "{err:?}");
        let err = Lexicon::parse("replace onlyone\n").unwrap_err();
        assert!(matches!(err, LexiconError::Parse { line: 1, .. }));
    }

    #[test]
    fn replacement_target_must_exist() {
        let err = Lexicon::parse("replace stormy rainy\n").unwrap_err();
        assert!(matches!(err, LexiconError::DanglingReplacement { .. }));
    }

    #[test]
    fn synonym_picks_first_supported_candidate() {
        let lex = Lexicon::parse(
            "term weather.rain\nterm weather.fog\n\
             synonym weather.storm weather.hail weather.rain weather.fog\n",
        )
        .unwrap();
        assert_eq!(lex.synonym_for("weather.storm"), Some("weather.rain"));
        assert_eq!(lex.synonym_for("Weather.Storm"), Some("weather.rain"));
        assert_eq!(lex.synonym_for("weather.snow"), None);
    }

    #[test]
    fn synonym_with_no_supported_candidate_is_absent() {
        let lex = Lexicon::parse("synonym weather.storm weather.hail\n").unwrap();
        assert_eq!(lex.synonym_for("weather.storm"), None);
    }

    #[test]
    fn synonym_rejects_repeats_and_namespace_hops() {
        assert!(Lexicon::parse("synonym weather.a weather.b weather.b\n").is_err());
        assert!(matches!(
            Lexicon::parse("synonym weather.storm time.night\n"),
            Err(LexiconError::NamespaceMismatch { .. })
        ));
    }

    #[test]
    fn missing_file_is_reported() {
        let err = Lexicon::load("/nonexistent/path/x.lexicon").unwrap_err();
        assert!(matches!(err, LexiconError::NotFound(_)));
    }

    #[test]
    fn default_lexicon_examples() {
        let lex = Lexicon::default_lexicon();
        assert_eq!(lex.replacement_for("stormy"), Some("rainy"));
        assert_eq!(lex.synonym_for("weather.storm"), Some("weather.rain"));
        assert!(lex.is_supported("Weather.Rain"));
        assert!(lex.is_word("drizzly"));
    }
}
