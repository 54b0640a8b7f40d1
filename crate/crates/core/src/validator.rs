//! Turns a free-form generator response into a configuration that parses.
//!
//! Stages, in order: [`extract_config`] isolates the configuration from
//! surrounding prose, [`strip_noncode`] drops comments and any remaining
//! non-directive lines, [`validate_terms`] swaps unsupported vocabulary for a
//! lexicon synonym or removes it, and finally the result is parsed and
//! re-serialized canonically.

use std::fmt;
use std::ops::Range;

use thiserror::Error;

use crate::lexicon::Lexicon;
use crate::llm::RawResponse;
use crate::schema::lexer::{lex, Token, TokenKind};
use crate::schema::{namespace, parse_config, serialize_config, ParseError, ScenarioConfig};

#[derive(Debug, Error)]
pub enum ValidationError {
    #[error("no configuration found in response")]
    NoConfigFound,
    #[error("repaired configuration does not parse: {error}")]
    Parse {
        error: ParseError,
        repaired_text: String,
    },
}

/// Where the configuration was found in the response.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Extraction {
    /// Interior of the longest fenced block.
    Fenced(Range<usize>),
    /// Longest run of directive lines.
    DirectiveRun(Range<usize>),
    /// The whole response was configuration.
    WholeText,
}

impl fmt::Display for Extraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extraction::Fenced(r) => write!(f, "fenced {}..{}", r.start, r.end),
            Extraction::DirectiveRun(r) => write!(f, "lines {}..{}", r.start, r.end),
            Extraction::WholeText => f.write_str("whole-text"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RepairAction {
    Replaced(String),
    Removed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Repair {
    /// The offending API term, `namespace.value`.
    pub term: String,
    pub action: RepairAction,
}

impl fmt::Display for Repair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.action {
            RepairAction::Replaced(with) => write!(f, "{} -> {}", self.term, with),
            RepairAction::Removed => write!(f, "{} removed", self.term),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub extraction: Extraction,
    /// Extracted text before comments and prose were stripped.
    pub candidate: String,
    pub repairs: Vec<Repair>,
    /// Prose or comment lines dropped, plus inline comments cut.
    pub stripped: usize,
    pub repaired_text: String,
    pub final_text: String,
}

impl ValidationReport {
    /// Line-oriented `key=value` rendering used for `report.txt`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("extraction={}\n", self.extraction));
        out.push_str(&format!("stripped={}\n", self.stripped));
        out.push_str(&format!("repairs={}\n", self.repairs.len()));
        for r in &self.repairs {
            out.push_str(&format!("repair={r}\n"));
        }
        out.push_str("candidate<<\n");
        out.push_str(&self.candidate);
        if !self.candidate.ends_with('\n') {
            out.push('\n');
        }
        out.push_str(">>\n");
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LineClass {
    Blank,
    Comment,
    Code,
    Prose,
}

/// Byte offset of a `#` comment outside string literals.
fn comment_start(line: &str) -> Option<usize> {
    let mut in_str = false;
    let mut escaped = false;
    for (i, c) in line.char_indices() {
        if in_str {
            match c {
                _ if escaped => escaped = false,
                '\\' => escaped = true,
                '"' => in_str = false,
                _ => {}
            }
        } else if c == '"' {
            in_str = true;
        } else if c == '#' {
            return Some(i);
        }
    }
    None
}

/// True when the tokens are a sequence of directives, braces and block headers.
fn is_directive_sequence(tokens: &[Token]) -> bool {
    let kind = |i: usize| tokens.get(i).map(|t| &t.kind);
    let mut i = 0;
    while i < tokens.len() {
        match &tokens[i].kind {
            TokenKind::LBrace | TokenKind::RBrace => i += 1,
            TokenKind::Ident(name) if name == "scenario" && matches!(kind(i + 1), Some(TokenKind::Str(_))) => {
                i += 2
            }
            TokenKind::Ident(_) if matches!(kind(i + 1), Some(TokenKind::LBrace)) => i += 1,
            TokenKind::Ident(_) if matches!(kind(i + 1), Some(TokenKind::Colon)) => match kind(i + 2) {
                Some(TokenKind::Ident(_) | TokenKind::Number(_) | TokenKind::Str(_)) => i += 3,
                Some(TokenKind::LBracket) => {
                    let mut j = i + 3;
                    loop {
                        match kind(j) {
                            Some(TokenKind::Ident(_) | TokenKind::Comma) => j += 1,
                            Some(TokenKind::RBracket) => break,
                            _ => return false,
                        }
                    }
                    i = j + 1;
                }
                _ => return false,
            },
            _ => return false,
        }
    }
    true
}

fn classify_line(line: &str) -> LineClass {
    let code = match comment_start(line) {
        Some(at) => &line[..at],
        None => line,
    };
    if code.trim().is_empty() {
        return if line.trim().is_empty() {
            LineClass::Blank
        } else {
            LineClass::Comment
        };
    }
    match lex(code) {
        Ok(tokens) if is_directive_sequence(&tokens) => LineClass::Code,
        _ => LineClass::Prose,
    }
}

/// Lines with their byte offsets, each including its trailing newline.
fn lines_with_offsets(text: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        out.push((offset, line));
        offset += line.len();
    }
    out
}

fn is_fence(line: &str) -> bool {
    line.trim_start().starts_with("```")
}

fn fenced_blocks(text: &str) -> Vec<Range<usize>> {
    let mut blocks = Vec::new();
    let mut open: Option<usize> = None;
    for (offset, line) in lines_with_offsets(text) {
        if !is_fence(line) {
            continue;
        }
        match open.take() {
            None => open = Some(offset + line.len()),
            Some(start) => blocks.push(start..offset),
        }
    }
    if let Some(start) = open {
        blocks.push(start..text.len());
    }
    blocks
}

/// Locates the configuration inside a response.
///
/// The longest fenced block wins (first on ties). Without usable fences a
/// `scenario` block is taken up to its closing brace; failing that, the
/// longest run of directive lines, where comment and blank lines may sit
/// inside a run but never start or end one.
pub fn extract_config(text: &str) -> Result<(String, Extraction), ValidationError> {
    let best_fence = fenced_blocks(text)
        .into_iter()
        .filter(|r| !text[r.clone()].trim().is_empty())
        .fold(None::<Range<usize>>, |best, r| match best {
            Some(b) if b.len() >= r.len() => Some(b),
            _ => Some(r),
        });
    if let Some(r) = best_fence {
        return Ok((text[r.clone()].to_string(), Extraction::Fenced(r)));
    }

    let lines = lines_with_offsets(text);
    if let Some(range) = scenario_block(&lines) {
        return Ok(unfenced(text, range));
    }
    let mut best: Option<(usize, Range<usize>)> = None;
    let mut run: Option<(usize, usize, usize)> = None; // (start_line, last_code_line, code_lines)
    let close = |run: &mut Option<(usize, usize, usize)>, best: &mut Option<(usize, Range<usize>)>| {
        if let Some((s, e, n)) = run.take() {
            if best.as_ref().is_none_or(|(bn, _)| n > *bn) {
                let start = lines[s].0;
                let end = lines[e].0 + lines[e].1.len();
                *best = Some((n, start..end));
            }
        }
    };
    for (idx, (_, line)) in lines.iter().enumerate() {
        match classify_line(line) {
            LineClass::Code => {
                run = Some(match run {
                    Some((s, _, n)) => (s, idx, n + 1),
                    None => (idx, idx, 1),
                });
            }
            LineClass::Blank | LineClass::Comment => {}
            LineClass::Prose => close(&mut run, &mut best),
        }
    }
    close(&mut run, &mut best);

    let (_, range) = best.ok_or(ValidationError::NoConfigFound)?;
    Ok(unfenced(text, range))
}

fn unfenced(text: &str, range: Range<usize>) -> (String, Extraction) {
    let extraction = if text[..range.start].trim().is_empty() && text[range.end..].trim().is_empty() {
        Extraction::WholeText
    } else {
        Extraction::DirectiveRun(range.clone())
    };
    (text[range].to_string(), extraction)
}

/// From the first `scenario "<name>" {` line to the code line closing its
/// brace, so prose lines inside the block stay in the candidate for
/// stripping. Runs to the end of the text when the brace never closes.
fn scenario_block(lines: &[(usize, &str)]) -> Option<Range<usize>> {
    let code_tokens = |line: &str| {
        let code = comment_start(line).map_or(line, |at| &line[..at]);
        lex(code).ok()
    };
    let start = lines.iter().position(|(_, line)| {
        classify_line(line) == LineClass::Code
            && code_tokens(line).is_some_and(|t| {
                matches!(t.first().map(|t| &t.kind), Some(TokenKind::Ident(k)) if k == "scenario")
            })
    })?;
    let mut depth = 0i64;
    for (offset, line) in lines.iter().skip(start) {
        if classify_line(line) != LineClass::Code {
            continue;
        }
        for t in code_tokens(line).unwrap_or_default() {
            match t.kind {
                TokenKind::LBrace => depth += 1,
                TokenKind::RBrace => depth -= 1,
                _ => {}
            }
        }
        if depth <= 0 {
            return Some(lines[start].0..offset + line.len());
        }
    }
    let (last_offset, last) = lines.last()?;
    Some(lines[start].0..last_offset + last.len())
}

/// Non-blank lines outside the extracted region, fences excluded.
fn prose_outside(text: &str, extraction: &Extraction) -> usize {
    let range = match extraction {
        Extraction::WholeText => return 0,
        Extraction::Fenced(r) | Extraction::DirectiveRun(r) => r,
    };
    lines_with_offsets(text)
        .into_iter()
        .filter(|(offset, line)| {
            let inside = *offset >= range.start && offset + line.len() <= range.end.max(range.start);
            !inside && !line.trim().is_empty() && !is_fence(line)
        })
        .count()
}

/// Removes comments and every line that is not a directive, brace or block header.
/// Returns the cleaned text and how many pieces were removed.
pub fn strip_noncode(candidate: &str) -> (String, usize) {
    let mut out = String::with_capacity(candidate.len());
    let mut stripped = 0;
    for line in candidate.split_inclusive('\n') {
        match classify_line(line) {
            LineClass::Blank => out.push_str(line),
            LineClass::Comment | LineClass::Prose => stripped += 1,
            LineClass::Code => match comment_start(line) {
                Some(at) => {
                    stripped += 1;
                    out.push_str(line[..at].trim_end());
                    if line.ends_with('\n') {
                        out.push('\n');
                    }
                }
                None => out.push_str(line),
            },
        }
    }
    (out, stripped)
}

const SCHEMA_KEYS: &[&str] = &[
    "scenario",
    "map",
    "weather",
    "time_of_day",
    "duration_s",
    "timestep_s",
    "seed",
    "tags",
    "actors",
    "target_speed_mps",
    "running_fraction",
    "malfunction",
    "obeys_rules",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ctx {
    Scenario,
    Actors,
    Group,
    Other,
}

/// One controlled-vocabulary position in the token stream.
#[derive(Debug)]
enum Site {
    /// `key: value`; indices of key and value tokens.
    Field { ns: &'static str, key: usize, value: usize },
    /// `malfunction: [a, b]`; indices of `[` and `]`.
    List { ns: &'static str, open: usize, close: usize },
    /// `class: count` with an optional `{ ... }` block ending at `end`.
    Header { name: usize, end: usize },
}

fn token_text(tok: &Token) -> Option<String> {
    match &tok.kind {
        TokenKind::Ident(s) | TokenKind::Str(s) => Some(s.to_lowercase()),
        _ => None,
    }
}

fn matching_brace(tokens: &[Token], open: usize) -> usize {
    let mut depth = 0usize;
    for (i, t) in tokens.iter().enumerate().skip(open) {
        match t.kind {
            TokenKind::LBrace => depth += 1,
            TokenKind::RBrace => {
                depth -= 1;
                if depth == 0 {
                    return i;
                }
            }
            _ => {}
        }
    }
    tokens.len() - 1
}

fn find_sites(tokens: &[Token]) -> (Vec<Site>, Vec<usize>) {
    let kind = |i: usize| tokens.get(i).map(|t| &t.kind);
    let mut sites = Vec::new();
    let mut key_fixes = Vec::new();
    let mut stack: Vec<Ctx> = Vec::new();
    for i in 0..tokens.len() {
        let ctx = stack.last().copied();
        match &tokens[i].kind {
            TokenKind::LBrace => {
                let prev = i.checked_sub(1).map(|p| &tokens[p].kind);
                let push = match (ctx, prev) {
                    (None, Some(TokenKind::Str(_))) => Ctx::Scenario,
                    (Some(Ctx::Scenario), Some(TokenKind::Ident(k))) if k.eq_ignore_ascii_case("actors") => Ctx::Actors,
                    (Some(Ctx::Actors), Some(TokenKind::Number(_))) => Ctx::Group,
                    _ => Ctx::Other,
                };
                stack.push(push);
            }
            TokenKind::RBrace => {
                stack.pop();
            }
            TokenKind::Ident(name) => {
                let followed_by_colon = matches!(kind(i + 1), Some(TokenKind::Colon));
                let lower = name.to_ascii_lowercase();
                if lower != *name
                    && SCHEMA_KEYS.contains(&lower.as_str())
                    && matches!(kind(i + 1), Some(TokenKind::Colon | TokenKind::LBrace | TokenKind::Str(_)))
                {
                    key_fixes.push(i);
                }
                if !followed_by_colon {
                    continue;
                }
                match ctx {
                    Some(Ctx::Scenario) => {
                        let ns = match lower.as_str() {
                            "map" => namespace::MAP,
                            "weather" => namespace::WEATHER,
                            "time_of_day" => namespace::TIME,
                            _ => continue,
                        };
                        if matches!(kind(i + 2), Some(TokenKind::Ident(_) | TokenKind::Str(_))) {
                            sites.push(Site::Field { ns, key: i, value: i + 2 });
                        }
                    }
                    Some(Ctx::Actors) if matches!(kind(i + 2), Some(TokenKind::Number(_))) => {
                        let end = if matches!(kind(i + 3), Some(TokenKind::LBrace)) {
                            matching_brace(tokens, i + 3)
                        } else {
                            i + 2
                        };
                        sites.push(Site::Header { name: i, end });
                    }
                    Some(Ctx::Group) if lower == "malfunction" => {
                        if matches!(kind(i + 2), Some(TokenKind::LBracket)) {
                            if let Some(close) =
                                (i + 3..tokens.len()).find(|&j| matches!(tokens[j].kind, TokenKind::RBracket))
                            {
                                sites.push(Site::List { ns: namespace::MALFUNCTION, open: i + 2, close });
                            }
                        }
                    }
                    _ => {}
                }
            }
            _ => {}
        }
    }
    (sites, key_fixes)
}

/// Widens a removal to the whole line when nothing else is left on it.
fn widen_to_line(text: &str, span: Range<usize>) -> Range<usize> {
    let line_start = text[..span.start].rfind('\n').map_or(0, |p| p + 1);
    let line_end = text[span.end..].find('\n').map_or(text.len(), |p| span.end + p + 1);
    let before = &text[line_start..span.start];
    let after = &text[span.end..line_end];
    if before.trim().is_empty() && after.trim().is_empty() {
        line_start..line_end
    } else {
        span
    }
}

enum Verdict {
    Keep,
    Replace(String),
    Remove,
}

fn judge(ns: &str, value: &str, lex: &Lexicon, repairs: &mut Vec<Repair>) -> Verdict {
    let term = format!("{ns}.{value}");
    if lex.is_supported(&term) {
        return Verdict::Keep;
    }
    match lex.synonym_for(&term) {
        Some(syn) => {
            repairs.push(Repair {
                term,
                action: RepairAction::Replaced(syn.to_string()),
            });
            let local = syn.split_once('.').map_or(syn, |(_, v)| v);
            Verdict::Replace(local.to_string())
        }
        None => {
            repairs.push(Repair {
                term,
                action: RepairAction::Removed,
            });
            Verdict::Remove
        }
    }
}

/// Checks every controlled-vocabulary position against the lexicon.
///
/// Unsupported terms are replaced by their first supported synonym or
/// removed: a removed scalar field falls back to its default, a removed list
/// element disappears from the list, and a removed actor class drops the
/// whole group. Text that does not lex is returned unchanged for the parser
/// to report.
pub fn validate_terms(candidate: &str, lex_: &Lexicon) -> (String, Vec<Repair>) {
    let Ok(tokens) = lex(candidate) else {
        return (candidate.to_string(), Vec::new());
    };
    let (sites, key_fixes) = find_sites(&tokens);
    let mut repairs = Vec::new();
    let mut edits: Vec<(Range<usize>, String)> = Vec::new();
    let mut removed_groups: Vec<Range<usize>> = Vec::new();

    for site in &sites {
        if let Site::Header { name, end } = *site {
            let Some(value) = token_text(&tokens[name]) else { continue };
            match judge(namespace::ACTOR, &value, lex_, &mut repairs) {
                Verdict::Keep => {}
                Verdict::Replace(with) => edits.push((tokens[name].span.clone(), with)),
                Verdict::Remove => {
                    let span = tokens[name].span.start..tokens[end].span.end;
                    removed_groups.push(span.clone());
                    edits.push((widen_to_line(candidate, span), String::new()));
                }
            }
        }
    }
    let inside_removed = |t: &Token| removed_groups.iter().any(|r| r.contains(&t.span.start));

    for site in &sites {
        match *site {
            Site::Header { .. } => {}
            Site::Field { ns, key, value } => {
                let tok = &tokens[value];
                let Some(text) = token_text(tok) else { continue };
                match judge(ns, &text, lex_, &mut repairs) {
                    Verdict::Keep => {
                        if tok.source(candidate) != text {
                            edits.push((tok.span.clone(), text));
                        }
                    }
                    Verdict::Replace(with) => edits.push((tok.span.clone(), with)),
                    Verdict::Remove => {
                        let span = tokens[key].span.start..tok.span.end;
                        edits.push((widen_to_line(candidate, span), String::new()));
                    }
                }
            }
            Site::List { ns, open, close } => {
                if inside_removed(&tokens[open]) {
                    continue;
                }
                let mut kept = Vec::new();
                let mut changed = false;
                for tok in &tokens[open + 1..close] {
                    let Some(text) = token_text(tok) else { continue };
                    match judge(ns, &text, lex_, &mut repairs) {
                        Verdict::Keep => {
                            changed |= tok.source(candidate) != text;
                            kept.push(text);
                        }
                        Verdict::Replace(with) => {
                            changed = true;
                            if !kept.contains(&with) {
                                kept.push(with);
                            }
                        }
                        Verdict::Remove => changed = true,
                    }
                }
                if changed {
                    let span = tokens[open].span.start..tokens[close].span.end;
                    edits.push((span, format!("[{}]", kept.join(", "))));
                }
            }
        }
    }
    for &k in &key_fixes {
        if !inside_removed(&tokens[k]) {
            edits.push((tokens[k].span.clone(), tokens[k].source(candidate).to_ascii_lowercase()));
        }
    }

    edits.sort_by_key(|(span, _)| std::cmp::Reverse(span.start));
    let mut out = candidate.to_string();
    let mut floor = usize::MAX;
    for (span, rep) in edits {
        if span.end > floor {
            continue;
        }
        out.replace_range(span.clone(), &rep);
        floor = span.start;
    }
    (out, repairs)
}

/// API terms at every controlled-vocabulary position, as `namespace.value`.
pub fn api_terms(text: &str) -> Vec<String> {
    let Ok(tokens) = lex(text) else { return Vec::new() };
    let (sites, _) = find_sites(&tokens);
    let mut terms = Vec::new();
    for site in sites {
        match site {
            Site::Field { ns, value, .. } => {
                if let Some(v) = token_text(&tokens[value]) {
                    terms.push(format!("{ns}.{v}"));
                }
            }
            Site::List { ns, open, close } => {
                for tok in &tokens[open + 1..close] {
                    if let Some(v) = token_text(tok) {
                        terms.push(format!("{ns}.{v}"));
                    }
                }
            }
            Site::Header { name, .. } => {
                if let Some(v) = token_text(&tokens[name]) {
                    terms.push(format!("{}.{v}", namespace::ACTOR));
                }
            }
        }
    }
    terms
}

/// Extract, strip, repair, parse; the returned report records every stage.
pub fn validate_pipeline(
    raw: &RawResponse,
    lexicon: &Lexicon,
) -> Result<(ScenarioConfig, ValidationReport), ValidationError> {
    let (candidate, extraction) = extract_config(&raw.text)?;
    let outside = prose_outside(&raw.text, &extraction);
    let (stripped_text, stripped) = strip_noncode(&candidate);
    if stripped_text.trim().is_empty() {
        return Err(ValidationError::NoConfigFound);
    }
    let (repaired_text, repairs) = validate_terms(&stripped_text, lexicon);
    let cfg = parse_config(&repaired_text).map_err(|error| ValidationError::Parse {
        error,
        repaired_text: repaired_text.clone(),
    })?;
    let final_text = serialize_config(&cfg);
    let report = ValidationReport {
        extraction,
        candidate,
        repairs,
        stripped: stripped + outside,
        repaired_text,
        final_text,
    };
    Ok((cfg, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{ActorClass, Malfunction, Weather};
    use proptest::prelude::*;

    const STORM: &str = "Here is the result:\n```\nscenario \"s\" {\n  weather: storm\n  actors {\n    vehicles: 3\n  }\n}\n```\n";

    fn lex() -> Lexicon {
        Lexicon::default_lexicon()
    }

    fn run(text: &str) -> Result<(ScenarioConfig, ValidationReport), ValidationError> {
        validate_pipeline(&RawResponse::from_text(text), &lex())
    }

    #[test]
    fn storm_fixture() {
        let (cfg, report) = run(STORM).unwrap();
        assert_eq!(cfg.weather, Weather::Rain);
        assert_eq!(
            report.repairs,
            vec![Repair {
                term: "weather.storm".into(),
                action: RepairAction::Replaced("weather.rain".into()),
            }]
        );
        assert_eq!(report.stripped, 1);
        assert!(matches!(report.extraction, Extraction::Fenced(_)));
    }

    #[test]
    fn revalidating_output_needs_no_repairs() {
        let (_, first) = run(STORM).unwrap();
        let (_, second) = run(&first.final_text).unwrap();
        assert!(second.repairs.is_empty());
        assert_eq!(second.stripped, 0);
        assert_eq!(second.extraction, Extraction::WholeText);
        assert_eq!(second.final_text, first.final_text);
    }

    #[test]
    fn canonical_config_passes_unchanged() {
        let mut cfg = ScenarioConfig::new("x");
        cfg.set_group(crate::schema::ActorGroup::new(ActorClass::Pedestrian, 4));
        let text = serialize_config(&cfg);
        let (parsed, report) = run(&text).unwrap();
        assert_eq!(parsed, cfg);
        assert_eq!(report.final_text, text);
        assert!(report.repairs.is_empty());
    }

    #[test]
    fn prose_only_is_an_error() {
        assert!(matches!(
            run("Sorry, I cannot produce a configuration for that."),
            Err(ValidationError::NoConfigFound)
        ));
    }

    #[test]
    fn unknown_list_element_is_dropped() {
        let text = "scenario \"m\" {\n  actors {\n    vehicles: 2 {\n      malfunction: [wipers, teleporter]\n    }\n  }\n}\n";
        let (cfg, report) = run(text).unwrap();
        let g = cfg.group(ActorClass::Vehicle).unwrap();
        assert_eq!(g.malfunction.iter().copied().collect::<Vec<_>>(), vec![Malfunction::Wipers]);
        assert_eq!(report.repairs.len(), 1);
        assert_eq!(report.repairs[0].action, RepairAction::Removed);
    }

    #[test]
    fn unknown_scalar_falls_back_to_default() {
        let (cfg, report) = run("scenario \"m\" {\n  map: atlantis\n  weather: fog\n}\n").unwrap();
        assert_eq!(cfg.map, ScenarioConfig::DEFAULT_MAP);
        assert_eq!(cfg.weather, Weather::Fog);
        assert_eq!(report.repairs[0].term, "map.atlantis");
    }

    #[test]
    fn unknown_actor_class_drops_its_group() {
        let text = "scenario \"m\" {\n  actors {\n    dragons: 2 {\n      obeys_rules: false\n    }\n    pedestrians: 1\n  }\n}\n";
        let (cfg, report) = run(text).unwrap();
        assert_eq!(cfg.actor_groups.len(), 1);
        assert_eq!(cfg.count(ActorClass::Pedestrian), 1);
        assert_eq!(report.repairs[0].term, "actor.dragons");
    }

    #[test]
    fn synonym_actor_header_is_renamed() {
        let (cfg, _) = run("scenario \"m\" {\n  actors {\n    cars: 4\n  }\n}\n").unwrap();
        assert_eq!(cfg.count(ActorClass::Vehicle), 4);
    }

    #[test]
    fn two_prose_lines_are_counted() {
        let text = "scenario \"p\" {\n  weather: rain\n  The weather should feel gloomy.\n  map: town01\n  I hope this helps!\n}\n";
        let (cfg, report) = run(text).unwrap();
        assert_eq!(report.stripped, 2);
        assert_eq!(cfg.weather, Weather::Rain);
    }

    #[test]
    fn comments_are_stripped() {
        let (stripped_text, n) = strip_noncode("weather: rain # wet\n# note\nmap: town01\n");
        assert_eq!(stripped_text, "weather: rain\nmap: town01\n");
        assert_eq!(n, 2);
    }

    #[test]
    fn longest_fence_wins() {
        let text = "```\nx: 1\n```\nand\n```\nscenario \"a\" {\n  map: town02\n}\n```\n";
        let (candidate, ex) = extract_config(text).unwrap();
        assert!(candidate.contains("town02"));
        assert!(matches!(ex, Extraction::Fenced(_)));
    }

    #[test]
    fn unfenced_directive_run_is_found() {
        let text = "Sure thing.\nscenario \"a\" {\n  map: town04\n}\nEnjoy.\n";
        let (cfg, report) = run(text).unwrap();
        assert_eq!(cfg.map, crate::schema::MapId::Town04);
        assert!(matches!(report.extraction, Extraction::DirectiveRun(_)));
        assert_eq!(report.stripped, 2);
    }

    #[test]
    fn uppercase_values_are_normalized_without_repairs() {
        let (cfg, report) = run("scenario \"u\" {\n  Weather: FOG\n}\n").unwrap();
        assert_eq!(cfg.weather, Weather::Fog);
        assert!(report.repairs.is_empty());
    }

    #[test]
    fn unparseable_after_repair_reports_text() {
        match run("scenario \"u\" {\n  seed: -4\n}\n") {
            Err(ValidationError::Parse { repaired_text, .. }) => assert!(repaired_text.contains("seed")),
            other => panic!("unexpected {other:?}"),
        }
    }

    fn noisy_value() -> impl Strategy<Value = String> {
        prop_oneof![
            Just("rain".to_string()),
            Just("storm".to_string()),
            Just("snow".to_string()),
            Just("fog".to_string()),
            Just("haze".to_string()),
            "[a-z]{3,8}",
        ]
    }

    proptest! {
        #[test]
        fn output_uses_only_supported_terms(
            w in noisy_value(),
            m in prop_oneof![Just("town01".to_string()), Just("gotham".to_string()), "[a-z]{4,7}"],
            mal in prop::collection::vec(prop_oneof![Just("wipers".to_string()), Just("doors_open".to_string()), "[a-z]{3,6}"], 0..3),
            class in prop_oneof![Just("vehicles".to_string()), Just("cars".to_string()), "[a-z]{4,8}"],
        ) {
            let text = format!(
                "```\nscenario \"p\" {{\n  map: {m}\n  weather: {w}\n  actors {{\n    {class}: 2 {{\n      malfunction: [{}]\n    }}\n  }}\n}}\n```\n",
                mal.join(", ")
            );
            let lexicon = lex();
            if let Ok((_, report)) = validate_pipeline(&RawResponse::from_text(text), &lexicon) {
                for term in api_terms(&report.final_text) {
                    prop_assert!(lexicon.is_supported(&term), "{term} survived");
                }
                let (_, again) = validate_pipeline(&RawResponse::from_text(report.final_text.clone()), &lexicon).unwrap();
                prop_assert!(again.repairs.is_empty());
                prop_assert_eq!(again.final_text, report.final_text);
            }
        }
    }
}
