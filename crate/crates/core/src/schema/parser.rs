use std::collections::{BTreeSet, HashSet};
use std::str::FromStr;

use super::lexer::{lex, Token, TokenKind};
use super::{ActorClass, ActorGroup, ErrorKind, Malfunction, ParseError, ScenarioConfig};

/// A right-hand side as written, before it is checked against its field.
enum Value {
    Ident(String),
    Number { value: f64, text: String },
    Str,
    List(Vec<String>),
}

impl Value {
    fn describe(&self) -> &'static str {
        match self {
            Value::Ident(_) => "identifier",
            Value::Number { .. } => "number",
            Value::Str => "string",
            Value::List(_) => "list",
        }
    }
}

struct Parser<'a> {
    text: &'a str,
    tokens: Vec<Token>,
    pos: usize,
}

fn lowercase_ident(tok: &Token, name: &str) -> Result<(), ParseError> {
    if name.chars().any(|c| c.is_ascii_uppercase()) {
        return Err(ParseError {
            kind: ErrorKind::Syntax,
            line: tok.line,
            column: tok.column,
            message: format!("identifier `{name}` must be lowercase"),
        });
    }
    Ok(())
}

impl<'a> Parser<'a> {
    fn error_at(&self, tok: Option<&Token>, kind: ErrorKind, message: String) -> ParseError {
        let (line, column) = match tok {
            Some(t) => (t.line, t.column),
            None => {
                let line = self.text.lines().count().max(1);
                let col = self.text.lines().last().map_or(0, |l| l.chars().count()) + 1;
                (line, col)
            }
        };
        ParseError {
            kind,
            line,
            column,
            message,
        }
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_kind(&self, offset: usize) -> Option<&TokenKind> {
        self.tokens.get(self.pos + offset).map(|t| &t.kind)
    }

    fn next(&mut self) -> Result<Token, ParseError> {
        let tok = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| self.error_at(None, ErrorKind::Syntax, "unexpected end of input".into()))?;
        self.pos += 1;
        Ok(tok)
    }

    fn expect(&mut self, want: TokenKind, what: &str) -> Result<Token, ParseError> {
        let tok = self.next()?;
        if std::mem::discriminant(&tok.kind) != std::mem::discriminant(&want) {
            return Err(self.error_at(
                Some(&tok),
                ErrorKind::Syntax,
                format!("expected {what}, found `{}`", tok.source(self.text)),
            ));
        }
        Ok(tok)
    }

    fn expect_ident(&mut self) -> Result<(Token, String), ParseError> {
        let tok = self.next()?;
        match &tok.kind {
            TokenKind::Ident(name) => {
                let name = name.clone();
                lowercase_ident(&tok, &name)?;
                Ok((tok, name))
            }
            _ => Err(self.error_at(
                Some(&tok),
                ErrorKind::Syntax,
                format!("expected identifier, found `{}`", tok.source(self.text)),
            )),
        }
    }

    fn value(&mut self) -> Result<Value, ParseError> {
        let tok = self.next()?;
        Ok(match tok.kind {
            TokenKind::Ident(ref s) => {
                lowercase_ident(&tok, s)?;
                Value::Ident(s.clone())
            }
            TokenKind::Number(value) => Value::Number {
                value,
                text: tok.source(self.text).to_string(),
            },
            TokenKind::Str(_) => Value::Str,
            TokenKind::LBracket => {
                let mut items = Vec::new();
                if matches!(self.peek_kind(0), Some(TokenKind::RBracket)) {
                    self.pos += 1;
                    return Ok(Value::List(items));
                }
                loop {
                    let (_, item) = self.expect_ident()?;
                    items.push(item);
                    let sep = self.next()?;
                    match sep.kind {
                        TokenKind::Comma => continue,
                        TokenKind::RBracket => break,
                        _ => {
                            return Err(self.error_at(
                                Some(&sep),
                                ErrorKind::Syntax,
                                "expected `,` or `]` in list".into(),
                            ))
                        }
                    }
                }
                Value::List(items)
            }
            _ => {
                return Err(self.error_at(
                    Some(&tok),
                    ErrorKind::Syntax,
                    format!("expected a value, found `{}`", tok.source(self.text)),
                ))
            }
        })
    }
}

struct FieldCtx<'p, 'a> {
    parser: &'p Parser<'a>,
    key_tok: Token,
    key: String,
    value: Value,
}

impl FieldCtx<'_, '_> {
    fn range(&self, message: String) -> ParseError {
        self.parser.error_at(Some(&self.key_tok), ErrorKind::Range, message)
    }

    fn type_error(&self, want: &str) -> ParseError {
        self.parser.error_at(
            Some(&self.key_tok),
            ErrorKind::Syntax,
            format!("`{}` expects {want}, found {}", self.key, self.value.describe()),
        )
    }

    fn number(&self) -> Result<f64, ParseError> {
        match self.value {
            Value::Number { value, .. } => Ok(value),
            _ => Err(self.type_error("a number")),
        }
    }

    fn integer<T: FromStr>(&self) -> Result<T, ParseError> {
        match &self.value {
            Value::Number { text, .. } => text
                .parse::<T>()
                .map_err(|_| self.range(format!("`{}` must be a non-negative integer, got {text}", self.key))),
            _ => Err(self.type_error("an integer")),
        }
    }

    fn keyword<T: FromStr<Err = String>>(&self) -> Result<T, ParseError> {
        match &self.value {
            Value::Ident(s) => s.parse().map_err(|e| self.range(e)),
            _ => Err(self.type_error("an identifier")),
        }
    }

    fn boolean(&self) -> Result<bool, ParseError> {
        match &self.value {
            Value::Ident(s) if s == "true" => Ok(true),
            Value::Ident(s) if s == "false" => Ok(false),
            _ => Err(self.type_error("`true` or `false`")),
        }
    }

    fn idents(&self) -> Result<&[String], ParseError> {
        match &self.value {
            Value::List(items) => Ok(items),
            _ => Err(self.type_error("a list")),
        }
    }
}

/// Parses configuration text; omitted fields take their defaults.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ParseError> {
    let tokens = lex(text)?;
    let mut p = Parser { text, tokens, pos: 0 };

    let (head_tok, head) = p.expect_ident()?;
    if head != "scenario" {
        return Err(p.error_at(Some(&head_tok), ErrorKind::Syntax, "expected `scenario`".into()));
    }
    let name_tok = p.expect(TokenKind::Str(String::new()), "scenario name string")?;
    let TokenKind::Str(name) = name_tok.kind else { unreachable!() };
    p.expect(TokenKind::LBrace, "`{`")?;

    let mut cfg = ScenarioConfig::new(name);
    let mut seen: HashSet<String> = HashSet::new();
    let mut actors_seen = false;
    loop {
        if matches!(p.peek_kind(0), Some(TokenKind::RBrace)) {
            p.pos += 1;
            break;
        }
        let (key_tok, key) = p.expect_ident()?;
        if key == "actors" && matches!(p.peek_kind(0), Some(TokenKind::LBrace)) {
            if actors_seen {
                return Err(p.error_at(Some(&key_tok), ErrorKind::Syntax, "duplicate `actors` block".into()));
            }
            actors_seen = true;
            p.pos += 1;
            parse_actors(&mut p, &mut cfg)?;
            continue;
        }
        p.expect(TokenKind::Colon, "`:`")?;
        let value = p.value()?;
        if !seen.insert(key.clone()) {
            return Err(p.error_at(Some(&key_tok), ErrorKind::Syntax, format!("duplicate field `{key}`")));
        }
        let f = FieldCtx { parser: &p, key_tok, key, value };
        match f.key.as_str() {
            "map" => cfg.map = f.keyword()?,
            "weather" => cfg.weather = f.keyword()?,
            "time_of_day" => cfg.time_of_day = f.keyword()?,
            "duration_s" => {
                let v = f.number()?;
                if v <= 0.0 {
                    return Err(f.range(format!("duration_s must be > 0, got {v}")));
                }
                cfg.duration_s = v;
            }
            "timestep_s" => {
                let v = f.number()?;
                if !(v > 0.0 && v <= 1.0) {
                    return Err(f.range(format!("timestep_s must be in (0, 1], got {v}")));
                }
                cfg.timestep_s = v;
            }
            "seed" => cfg.seed = f.integer()?,
            "tags" => {
                let mut set = BTreeSet::new();
                for t in f.idents()? {
                    if !set.insert(t.clone()) {
                        return Err(f.range(format!("duplicate tag `{t}`")));
                    }
                }
                cfg.tags = f.idents()?.to_vec();
            }
            other => {
                return Err(p.error_at(Some(&f.key_tok), ErrorKind::Syntax, format!("unknown field `{other}`")));
            }
        }
    }
    if let Some(tok) = p.peek() {
        return Err(p.error_at(Some(tok), ErrorKind::Syntax, "unexpected text after scenario block".into()));
    }
    if cfg.duration_s < cfg.timestep_s {
        return Err(p.error_at(Some(&head_tok), ErrorKind::Range, "duration_s must be at least timestep_s".into()));
    }
    cfg.actor_groups.sort_by_key(|g| g.class);
    Ok(cfg)
}

fn parse_actors(p: &mut Parser<'_>, cfg: &mut ScenarioConfig) -> Result<(), ParseError> {
    loop {
        if matches!(p.peek_kind(0), Some(TokenKind::RBrace)) {
            p.pos += 1;
            return Ok(());
        }
        let (class_tok, class_name) = p.expect_ident()?;
        let class: ActorClass = class_name
            .parse()
            .map_err(|e| p.error_at(Some(&class_tok), ErrorKind::Range, e))?;
        if cfg.group(class).is_some() {
            return Err(p.error_at(Some(&class_tok), ErrorKind::Range, format!("more than one `{class}` group")));
        }
        p.expect(TokenKind::Colon, "`:`")?;
        let count_tok = p.next()?;
        let count: u32 = match count_tok.kind {
            TokenKind::Number(_) => count_tok.source(p.text).parse().map_err(|_| {
                p.error_at(
                    Some(&count_tok),
                    ErrorKind::Range,
                    format!("actor count must be a non-negative integer, got {}", count_tok.source(p.text)),
                )
            })?,
            _ => return Err(p.error_at(Some(&count_tok), ErrorKind::Syntax, "expected actor count".into())),
        };
        let mut group = ActorGroup::new(class, count);
        if matches!(p.peek_kind(0), Some(TokenKind::LBrace)) {
            p.pos += 1;
            let mut seen = HashSet::new();
            loop {
                if matches!(p.peek_kind(0), Some(TokenKind::RBrace)) {
                    p.pos += 1;
                    break;
                }
                let (key_tok, key) = p.expect_ident()?;
                p.expect(TokenKind::Colon, "`:`")?;
                let value = p.value()?;
                if !seen.insert(key.clone()) {
                    return Err(p.error_at(Some(&key_tok), ErrorKind::Syntax, format!("duplicate field `{key}`")));
                }
                let f = FieldCtx { parser: p, key_tok, key, value };
                match f.key.as_str() {
                    "target_speed_mps" => {
                        let v = f.number()?;
                        if v < 0.0 {
                            return Err(f.range(format!("target_speed_mps must be >= 0, got {v}")));
                        }
                        group.target_speed_mps = v;
                    }
                    "running_fraction" => {
                        let v = f.number()?;
                        if class != ActorClass::Pedestrian {
                            return Err(f.range(format!("running_fraction is only valid for pedestrians, not {class}")));
                        }
                        if !(0.0..=1.0).contains(&v) {
                            return Err(f.range(format!("running_fraction must be in [0, 1], got {v}")));
                        }
                        group.running_fraction = v;
                    }
                    "malfunction" => {
                        let mut set = BTreeSet::new();
                        for m in f.idents()? {
                            set.insert(Malfunction::from_str(m).map_err(|e| f.range(e))?);
                        }
                        if !set.is_empty() && class != ActorClass::Vehicle {
                            return Err(f.range(format!("malfunction is only valid for vehicles, not {class}")));
                        }
                        group.malfunction = set;
                    }
                    "obeys_rules" => group.obeys_rules = f.boolean()?,
                    other => {
                        return Err(p.error_at(Some(&f.key_tok), ErrorKind::Syntax, format!("unknown actor field `{other}`")));
                    }
                }
            }
        }
        cfg.actor_groups.push(group);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{MapId, TimeOfDay, Weather};

    #[test]
    fn full_config() {
        let cfg = parse_config(
            r#"# leading comment
scenario "drizzly_downtown" {
  map: town03
  weather: drizzle   # wet
  time_of_day: noon
  duration_s: 30
  timestep_s: 0.05
  seed: 42
  tags: [drizzle, safe]
  actors {
    vehicles: 5 {
      malfunction: [wipers, doors_open]
      obeys_rules: false
    }
    pedestrians: 10 { running_fraction: 0.5 }
    bicycles: 0
  }
}
"#,
        )
        .unwrap();
        assert_eq!(cfg.map, MapId::Town03);
        assert_eq!(cfg.weather, Weather::Drizzle);
        assert_eq!(cfg.time_of_day, TimeOfDay::Noon);
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.tags, vec!["drizzle", "safe"]);
        let v = cfg.group(ActorClass::Vehicle).unwrap();
        assert!(!v.obeys_rules);
        assert_eq!(v.malfunction.len(), 2);
        assert_eq!(cfg.count(ActorClass::Bicycle), 0);
        assert_eq!(cfg.frame_count(), 601);
    }

    #[test]
    fn errors_are_structured() {
        let cases = [
            ("scenario \"s\" { weather: storm }", ErrorKind::Range),
            ("scenario \"s\" { colour: red }", ErrorKind::Syntax),
            ("scenario \"s\" { map: town03 map: town01 }", ErrorKind::Syntax),
            ("scenario \"s\" { actors { bicycles: 1 { malfunction: [wipers] } } }", ErrorKind::Range),
            ("scenario \"s\" { actors { vehicles: 1 { running_fraction: 0.2 } } }", ErrorKind::Range),
            ("scenario \"s\" { actors { vehicles: 1 vehicles: 2 } }", ErrorKind::Range),
            ("scenario \"s\" { actors { vehicles: 1.5 } }", ErrorKind::Range),
            ("scenario \"s\" { duration_s: 0.05 timestep_s: 0.1 }", ErrorKind::Range),
            ("scenario \"s\" { tags: [a, a] }", ErrorKind::Range),
            ("scenario \"s\" { weather: Rain }", ErrorKind::Syntax),
            ("scenario \"s\" { seed: -1 }", ErrorKind::Range),
            ("scenario \"s\" { map: town03 ", ErrorKind::Syntax),
            ("scenario \"s\" { } trailing", ErrorKind::Syntax),
            ("scenario \"s\" { weather: rain; }", ErrorKind::Lexical),
            ("", ErrorKind::Syntax),
        ];
        for (text, kind) in cases {
            let err = parse_config(text).expect_err(text);
            assert_eq!(err.kind, kind, "{text}: {err}");
            assert!(err.line >= 1 && err.column >= 1);
        }
    }

    #[test]
    fn empty_lists_are_accepted() {
        let cfg = parse_config("scenario \"s\" { tags: [] actors { vehicles: 1 { malfunction: [] } } }").unwrap();
        assert!(cfg.tags.is_empty());
    }
}
