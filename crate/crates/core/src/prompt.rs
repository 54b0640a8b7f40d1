//! In-context exemplars and prompt assembly.

use std::collections::HashSet;
use std::ops::Range;
use std::path::Path;

use thiserror::Error;

use crate::filter::{tokenize, FilteredDescription, TokenKind};
use crate::schema::{parse_config, ParseError};

pub const DEFAULT_EXEMPLARS: &str = include_str!("../data/exemplars.txt");

pub const DEFAULT_INSTRUCTION: &str = "You write traffic scenario configurations for a driving simulator. \
Each example below pairs a scenario description with its configuration. \
Write the configuration for the last description using only the fields and values shown in the examples. \
Please do not generate any explanations or comments except code.";

const STOPWORDS: &[&str] = &[
    "a", "an", "and", "are", "as", "at", "be", "by", "for", "from", "has", "have", "in", "is", "it", "its",
    "of", "on", "or", "some", "that", "the", "their", "there", "they", "this", "to", "was", "were", "while",
    "with",
];

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("cannot read exemplars: {0}")]
    Io(#[from] std::io::Error),
    #[error("exemplar record {record}: {message}")]
    Format { record: usize, message: String },
    #[error("exemplar record {record}: config does not parse: {error}")]
    InvalidConfig { record: usize, error: ParseError },
    #[error("asked for {k} exemplars but only {available} exist")]
    TooFewExemplars { k: usize, available: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exemplar {
    pub description: String,
    pub config_text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShotPolicy {
    Zero,
    One,
    Few(usize),
}

impl ShotPolicy {
    pub fn from_count(k: usize) -> Self {
        match k {
            0 => Self::Zero,
            1 => Self::One,
            k => Self::Few(k),
        }
    }

    pub fn k(self) -> usize {
        match self {
            Self::Zero => 0,
            Self::One => 1,
            Self::Few(k) => k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExemplarSet {
    exemplars: Vec<Exemplar>,
    shot_policy: ShotPolicy,
}

impl ExemplarSet {
    /// Every config must parse and the policy must not ask for more than exist.
    pub fn new(exemplars: Vec<Exemplar>, shot_policy: ShotPolicy) -> Result<Self, PromptError> {
        for (i, ex) in exemplars.iter().enumerate() {
            parse_config(&ex.config_text).map_err(|error| PromptError::InvalidConfig { record: i + 1, error })?;
        }
        if shot_policy.k() > exemplars.len() {
            return Err(PromptError::TooFewExemplars {
                k: shot_policy.k(),
                available: exemplars.len(),
            });
        }
        Ok(Self { exemplars, shot_policy })
    }

    /// Parses the `---` separated `DESCRIPTION:` / `CONFIG:` record format.
    /// Lines starting with `#` outside a CONFIG block are comments.
    pub fn parse(text: &str, shot_policy: ShotPolicy) -> Result<Self, PromptError> {
        let mut records: Vec<Vec<&str>> = vec![Vec::new()];
        for line in text.lines() {
            if line.trim() == "---" {
                records.push(Vec::new());
            } else {
                records.last_mut().unwrap().push(line);
            }
        }
        let mut exemplars = Vec::new();
        for (i, lines) in records.iter().enumerate() {
            if lines.iter().all(|l| l.trim().is_empty() || l.starts_with('#')) {
                continue;
            }
            exemplars.push(parse_record(i + 1, lines)?);
        }
        Self::new(exemplars, shot_policy)
    }

    pub fn load(path: impl AsRef<Path>, shot_policy: ShotPolicy) -> Result<Self, PromptError> {
        Self::parse(&std::fs::read_to_string(path)?, shot_policy)
    }

    pub fn default_set(shot_policy: ShotPolicy) -> Result<Self, PromptError> {
        Self::parse(DEFAULT_EXEMPLARS, shot_policy)
    }

    pub fn exemplars(&self) -> &[Exemplar] {
        &self.exemplars
    }

    pub fn shot_policy(&self) -> ShotPolicy {
        self.shot_policy
    }

    pub fn len(&self) -> usize {
        self.exemplars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exemplars.is_empty()
    }
}

fn parse_record(record: usize, lines: &[&str]) -> Result<Exemplar, PromptError> {
    let err = |message: &str| PromptError::Format {
        record,
        message: message.to_string(),
    };
    let body: Vec<&str> = lines
        .iter()
        .copied()
        .skip_while(|l| l.trim().is_empty() || l.starts_with('#'))
        .collect();
    if body.first().map(|l| l.trim()) != Some("DESCRIPTION:") {
        return Err(err("expected a DESCRIPTION: line"));
    }
    let config_at = body
        .iter()
        .position(|l| l.trim() == "CONFIG:")
        .ok_or_else(|| err("missing CONFIG: line"))?;
    let description = body[1..config_at].join("\n").trim().to_string();
    if description.is_empty() {
        return Err(err("empty description"));
    }
    let mut config_text = body[config_at + 1..].join("\n").trim().to_string();
    if config_text.is_empty() {
        return Err(err("empty config"));
    }
    config_text.push('\n');
    Ok(Exemplar {
        description,
        config_text,
    })
}

fn content_words(text: &str) -> HashSet<String> {
    tokenize(text)
        .into_iter()
        .filter(|t| t.kind == TokenKind::Word)
        .map(|t| t.text.to_lowercase())
        .filter(|w| !STOPWORDS.contains(&w.as_str()))
        .collect()
}

/// Number of content words shared by the two texts.
pub fn overlap_score(a: &str, b: &str) -> usize {
    let a = content_words(a);
    content_words(b).iter().filter(|w| a.contains(*w)).count()
}

/// Top `k` exemplars by word overlap with `desc`; ties keep list order.
pub fn select_exemplars<'a>(
    set: &'a ExemplarSet,
    desc: &FilteredDescription,
    k: usize,
) -> Result<Vec<&'a Exemplar>, PromptError> {
    if k > set.len() {
        return Err(PromptError::TooFewExemplars { k, available: set.len() });
    }
    let target = content_words(&desc.text);
    let mut scored: Vec<(usize, &Exemplar)> = set
        .exemplars
        .iter()
        .map(|ex| (content_words(&ex.description).intersection(&target).count(), ex))
        .collect();
    // sort_by is stable, so equal scores keep their original order.
    scored.sort_by_key(|s| std::cmp::Reverse(s.0));
    Ok(scored.into_iter().take(k).map(|(_, ex)| ex).collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prompt {
    pub text: String,
    /// Whitespace-separated units, a cheap budget guard.
    pub token_estimate: usize,
    target: Range<usize>,
}

impl Prompt {
    /// Wraps prompt text produced elsewhere. The target is the text after the
    /// last `DESCRIPTION:` line, up to a trailing `CONFIG:` line if present.
    pub fn from_text(text: impl Into<String>) -> Self {
        let text = text.into();
        let start = match text.rfind("DESCRIPTION:\n") {
            Some(i) if i == 0 || text[..i].ends_with('\n') => i + "DESCRIPTION:\n".len(),
            _ => 0,
        };
        let end = if text.ends_with("\nCONFIG:\n") && text.len() - "\nCONFIG:\n".len() >= start {
            text.len() - "\nCONFIG:\n".len()
        } else {
            text.len()
        };
        Self {
            token_estimate: text.split_whitespace().count(),
            target: start..end,
            text,
        }
    }

    /// The description the model is asked to configure.
    pub fn target_description(&self) -> &str {
        &self.text[self.target.clone()]
    }
}

/// Layout: instruction, a blank line, one `DESCRIPTION:`/`CONFIG:` block per
/// exemplar, then the target description with an open `CONFIG:` line.
pub fn assemble_prompt(desc: &FilteredDescription, exemplars: &[&Exemplar], instruction: &str) -> Prompt {
    let mut text = String::new();
    text.push_str(instruction.trim_end());
    text.push_str("\n\n");
    for ex in exemplars {
        text.push_str("DESCRIPTION:\n");
        text.push_str(&ex.description);
        text.push_str("\nCONFIG:\n");
        text.push_str(&ex.config_text);
        if !ex.config_text.ends_with('\n') {
            text.push('\n');
        }
    }
    text.push_str("DESCRIPTION:\n");
    let start = text.len();
    text.push_str(&desc.text);
    let end = text.len();
    text.push_str("\nCONFIG:\n");
    Prompt {
        token_estimate: text.split_whitespace().count(),
        target: start..end,
        text,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::serialize_config;
    use proptest::prelude::*;

    fn ex(desc: &str) -> Exemplar {
        Exemplar {
            description: desc.to_string(),
            config_text: "scenario \"s\" {\n}\n".to_string(),
        }
    }

    fn set(descs: &[&str]) -> ExemplarSet {
        ExemplarSet::new(descs.iter().map(|d| ex(d)).collect(), ShotPolicy::Zero).unwrap()
    }

    fn fd(text: &str) -> FilteredDescription {
        FilteredDescription::unchanged(text)
    }

    #[test]
    fn default_set_parses() {
        let s = ExemplarSet::default_set(ShotPolicy::Few(3)).unwrap();
        assert_eq!(s.len(), 5);
        for e in s.exemplars() {
            let cfg = parse_config(&e.config_text).unwrap();
            assert_eq!(serialize_config(&cfg), e.config_text, "exemplars are canonical");
        }
    }

    #[test]
    fn k_zero_is_empty() {
        let s = set(&["rain", "fog"]);
        assert!(select_exemplars(&s, &fd("rain"), 0).unwrap().is_empty());
    }

    #[test]
    fn single_shared_word_selects_that_exemplar() {
        let s = set(&["a foggy morning", "heavy rain downtown", "sunny noon"]);
        let got = select_exemplars(&s, &fd("vehicles in the rain"), 1).unwrap();
        assert_eq!(got[0].description, "heavy rain downtown");
    }

    #[test]
    fn ties_keep_list_order() {
        let descs = ["rain night", "rain fog", "rain only", "nothing shared"];
        let s = set(&descs);
        let target = "rain night fog";
        // Brute-force oracle: score each exemplar by hand-written set intersection.
        let t: Vec<&str> = target.split(' ').collect();
        let scores: Vec<usize> = descs
            .iter()
            .map(|d| d.split(' ').filter(|w| t.contains(w)).count())
            .collect();
        assert_eq!(scores, vec![2, 2, 1, 0]);
        let got = select_exemplars(&s, &fd(target), 2).unwrap();
        assert_eq!(got[0].description, "rain night");
        assert_eq!(got[1].description, "rain fog");
    }

    #[test]
    fn too_many_shots_is_an_error() {
        assert!(matches!(
            ExemplarSet::new(vec![ex("a")], ShotPolicy::Few(2)),
            Err(PromptError::TooFewExemplars { k: 2, available: 1 })
        ));
        assert!(select_exemplars(&set(&["a"]), &fd("a"), 2).is_err());
    }

    #[test]
    fn bad_config_is_rejected() {
        let bad = Exemplar {
            description: "x".into(),
            config_text: "scenario {".into(),
        };
        assert!(matches!(
            ExemplarSet::new(vec![bad], ShotPolicy::Zero),
            Err(PromptError::InvalidConfig { record: 1, .. })
        ));
    }

    #[test]
    fn record_format_errors() {
        assert!(ExemplarSet::parse("CONFIG:\nscenario \"s\" {}\n", ShotPolicy::Zero).is_err());
        assert!(ExemplarSet::parse("DESCRIPTION:\nrain\n", ShotPolicy::Zero).is_err());
    }

    #[test]
    fn zero_shot_layout() {
        let p = assemble_prompt(&fd("rain at night"), &[], "Do it.");
        assert_eq!(p.text, "Do it.\n\nDESCRIPTION:\nrain at night\nCONFIG:\n");
        assert_eq!(p.target_description(), "rain at night");
        assert_eq!(p.token_estimate, 7);
    }

    #[test]
    fn default_instruction_forbids_explanations() {
        assert!(DEFAULT_INSTRUCTION.contains("do not generate any explanations or comments except code"));
    }

    #[test]
    fn exemplars_precede_target_in_order() {
        let a = ex("first one");
        let b = ex("second one");
        let p = assemble_prompt(&fd("target"), &[&a, &b], DEFAULT_INSTRUCTION);
        let ia = p.text.find("first one").unwrap();
        let ib = p.text.find("second one").unwrap();
        let it = p.text.find("DESCRIPTION:\ntarget").unwrap();
        assert!(ia < ib && ib < it);
        assert_eq!(Prompt::from_text(p.text.clone()).target_description(), "target");
    }

    proptest! {
        #[test]
        fn description_appears_once(desc in "[a-z]{3,8}( [a-z]{3,8}){0,6}") {
            let set = ExemplarSet::default_set(ShotPolicy::Zero).unwrap();
            let picked = select_exemplars(&set, &fd(&desc), 2).unwrap();
            let p = assemble_prompt(&fd(&desc), &picked, DEFAULT_INSTRUCTION);
            let needle = format!("DESCRIPTION:\n{desc}\nCONFIG:\n");
            prop_assert_eq!(p.text.matches(&needle).count(), 1);
            prop_assert_eq!(p.target_description(), desc.as_str());
            prop_assert_eq!(assemble_prompt(&fd(&desc), &picked, DEFAULT_INSTRUCTION), p);
        }

        #[test]
        fn embedded_configs_reparse(cfg in crate::schema::tests::arb_config()) {
            let e = Exemplar { description: "d".into(), config_text: serialize_config(&cfg) };
            let p = assemble_prompt(&fd("t"), &[&e], "i");
            let start = p.text.find("CONFIG:\n").unwrap() + "CONFIG:\n".len();
            let end = start + e.config_text.len();
            prop_assert_eq!(parse_config(&p.text[start..end]).unwrap(), cfg);
        }
    }
}
