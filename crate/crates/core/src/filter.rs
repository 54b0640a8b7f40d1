//! Description screening and rewriting.
//!
//! [`check_relevance`] blocks off-topic or prompt-injection text before it
//! reaches the generator. [`filter_description`] then walks the word tokens:
//! a token with a lexicon replacement is rewritten; otherwise an unknown word
//! with exactly one dictionary neighbour at edit distance 1 is corrected.
//! Punctuation runs are normalized through a small fixed table.

use std::fmt;
use std::ops::Range;

use crate::lexicon::Lexicon;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Word,
    Punctuation,
    Whitespace,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub span: Range<usize>,
}

/// A raw description split into a lossless token sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioDescription {
    pub raw_text: String,
    pub tokens: Vec<Token>,
}

impl ScenarioDescription {
    pub fn new(raw_text: impl Into<String>) -> Self {
        let raw_text = raw_text.into();
        let tokens = tokenize(&raw_text);
        Self { raw_text, tokens }
    }

    pub fn words(&self) -> impl Iterator<Item = &Token> {
        self.tokens.iter().filter(|t| t.kind == TokenKind::Word)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EditReason {
    Replacement,
    Spelling,
    Punctuation,
}

impl fmt::Display for EditReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EditReason::Replacement => "replacement",
            EditReason::Spelling => "spelling",
            EditReason::Punctuation => "punctuation",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edit {
    /// Byte span in the raw text.
    pub span: Range<usize>,
    pub original: String,
    pub replacement: String,
    pub reason: EditReason,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilteredDescription {
    pub text: String,
    pub edits: Vec<Edit>,
}

impl FilteredDescription {
    /// Wraps already-clean text (no edits).
    pub fn unchanged(text: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            edits: Vec::new(),
        }
    }
}

/// Apply non-overlapping edits, ordered by span, to `raw`.
pub fn apply_edits(raw: &str, edits: &[Edit]) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut cursor = 0;
    for e in edits {
        out.push_str(&raw[cursor..e.span.start]);
        out.push_str(&e.replacement);
        cursor = e.span.end;
    }
    out.push_str(&raw[cursor..]);
    out
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// Lossless split into word, punctuation and whitespace tokens.
///
/// Words are runs of alphanumerics; an apostrophe joins a word only when
/// alphanumerics follow it, and `%` joins a word that ends in a digit.
/// Punctuation tokens are runs of one repeated character.
pub fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let end_of = |i: usize| chars.get(i).map_or(text.len(), |&(b, _)| b);
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (start, c) = chars[i];
        let mut j = i + 1;
        let kind = if c.is_alphanumeric() {
            loop {
                match chars.get(j) {
                    Some(&(_, n)) if n.is_alphanumeric() => j += 1,
                    Some(&(_, n))
                        if is_apostrophe(n)
                            && chars.get(j + 1).is_some_and(|&(_, m)| m.is_alphanumeric()) =>
                    {
                        j += 2
                    }
                    Some(&(_, '%')) if chars[j - 1].1.is_ascii_digit() => {
                        j += 1;
                        break;
                    }
                    _ => break,
                }
            }
            TokenKind::Word
        } else if c.is_whitespace() {
            while chars.get(j).is_some_and(|&(_, n)| n.is_whitespace()) {
                j += 1;
            }
            TokenKind::Whitespace
        } else {
            while chars.get(j).is_some_and(|&(_, n)| n == c) {
                j += 1;
            }
            TokenKind::Punctuation
        };
        let end = end_of(j);
        tokens.push(Token {
            kind,
            text: text[start..end].to_string(),
            span: start..end,
        });
        i = j;
    }
    tokens
}

/// Words that mark an attempt to steer the generator rather than describe a scene.
pub const DEFAULT_DENYLIST: &[&str] = &[
    "ignore",
    "disregard",
    "system",
    "jailbreak",
    "prompt",
    "instructions",
    "override",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RejectReason {
    NoDomainKeyword,
    Denylisted(String),
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::NoDomainKeyword => f.write_str("no traffic-domain keyword"),
            RejectReason::Denylisted(w) => write!(f, "denylisted word `{w}`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Relevance {
    Accept,
    Reject(RejectReason),
}

pub fn check_relevance(desc: &ScenarioDescription, lex: &Lexicon) -> Relevance {
    check_relevance_with(desc, lex, DEFAULT_DENYLIST)
}

pub fn check_relevance_with(
    desc: &ScenarioDescription,
    lex: &Lexicon,
    denylist: &[&str],
) -> Relevance {
    let mut has_keyword = false;
    for token in desc.words() {
        let lower = token.text.to_lowercase();
        if denylist.contains(&lower.as_str()) {
            return Relevance::Reject(RejectReason::Denylisted(lower));
        }
        has_keyword |= lex.is_keyword(&lower);
    }
    if has_keyword {
        Relevance::Accept
    } else {
        Relevance::Reject(RejectReason::NoDomainKeyword)
    }
}

/// Optimal-string-alignment distance (adjacent transpositions count as one edit).
pub fn damerau_levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let (n, m) = (a.len(), b.len());
    let mut d = vec![vec![0usize; m + 1]; n + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            let cost = usize::from(a[i - 1] != b[j - 1]);
            let mut best = (d[i - 1][j] + 1).min(d[i][j - 1] + 1).min(d[i - 1][j - 1] + cost);
            if i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1] {
                best = best.min(d[i - 2][j - 2] + 1);
            }
            d[i][j] = best;
        }
    }
    d[n][m]
}

/// True when the optimal-string-alignment distance is exactly 1, in linear time.
fn one_edit_apart(a: &[char], b: &[char]) -> bool {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let i = short.iter().zip(long).take_while(|(x, y)| x == y).count();
    match long.len() - short.len() {
        0 if i == short.len() => false,
        0 => {
            short[i + 1..] == long[i + 1..]
                || (i + 1 < short.len()
                    && short[i] == long[i + 1]
                    && short[i + 1] == long[i]
                    && short[i + 2..] == long[i + 2..])
        }
        1 => short[i..] == long[i + 1..],
        _ => false,
    }
}

/// The unique dictionary word within distance 1 of `word`, if exactly one exists.
pub fn spelling_correction<'a>(lex: &'a Lexicon, word: &str) -> Option<&'a str> {
    let word: Vec<char> = word.chars().collect();
    let n = word.len();
    let mut found: Option<&str> = None;
    for len in n.saturating_sub(1)..=n + 1 {
        for (candidate, chars) in lex.words_of_len(len) {
            if one_edit_apart(&word, chars) {
                if found.is_some() {
                    return None;
                }
                found = Some(candidate);
            }
        }
    }
    found
}

fn normalize_punctuation(run: &str) -> Option<String> {
    let c = run.chars().next()?;
    let n = run.chars().count();
    let fixed = match c {
        '\u{2018}' | '\u{2019}' => "'".repeat(n),
        '\u{201C}' | '\u{201D}' => "\"".repeat(n),
        ';' => ",".repeat(n),
        '.' if n > 3 => "...".to_string(),
        _ => return None,
    };
    (fixed != run).then_some(fixed)
}

/// Carry the original's leading capital over to a lowercase replacement.
fn match_case(original: &str, replacement: &str) -> String {
    let mut chars = original.chars();
    match chars.next() {
        Some(first) if first.is_uppercase() => {
            let mut r = replacement.chars();
            r.next()
                .map(|c| c.to_uppercase().chain(r).collect())
                .unwrap_or_default()
        }
        _ => replacement.to_string(),
    }
}

fn word_edit(token: &Token, lex: &Lexicon) -> Option<(String, EditReason)> {
    let lower = token.text.to_lowercase();
    if let Some(rep) = lex.replacement_for(&lower) {
        return Some((rep.to_string(), EditReason::Replacement));
    }
    // Numbers, contractions and very short words are too ambiguous to correct.
    if lex.is_known(&lower)
        || lower.chars().count() < 3
        || lower.chars().any(|c| c.is_numeric() || is_apostrophe(c))
    {
        return None;
    }
    let fixed = spelling_correction(lex, &lower)?;
    let fixed = lex.replacement_for(fixed).unwrap_or(fixed);
    Some((fixed.to_string(), EditReason::Spelling))
}

pub fn filter_description(desc: &ScenarioDescription, lex: &Lexicon) -> FilteredDescription {
    let mut edits = Vec::new();
    for token in &desc.tokens {
        let change = match token.kind {
            TokenKind::Word => word_edit(token, lex)
                .map(|(rep, reason)| (match_case(&token.text, &rep), reason)),
            TokenKind::Punctuation => {
                normalize_punctuation(&token.text).map(|p| (p, EditReason::Punctuation))
            }
            TokenKind::Whitespace => None,
        };
        if let Some((replacement, reason)) = change {
            if replacement != token.text {
                edits.push(Edit {
                    span: token.span.clone(),
                    original: token.text.clone(),
                    replacement,
                    reason,
                });
            }
        }
    }
    FilteredDescription {
        text: apply_edits(&desc.raw_text, &edits),
        edits,
    }
}
