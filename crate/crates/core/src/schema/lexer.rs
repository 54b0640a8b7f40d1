use std::ops::Range;

use super::{ErrorKind, ParseError};

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Ident(String),
    Number(f64),
    Str(String),
    Colon,
    Comma,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    /// Byte range in the source, including quotes for strings.
    pub span: Range<usize>,
    pub line: usize,
    pub column: usize,
}

impl Token {
    pub fn source<'a>(&self, text: &'a str) -> &'a str {
        &text[self.span.clone()]
    }

    pub fn ident(&self) -> Option<&str> {
        match &self.kind {
            TokenKind::Ident(s) => Some(s),
            _ => None,
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Tokenizes DSL text; `#` comments run to end of line and are dropped.
pub fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let mut chars = text.char_indices().peekable();
    let mut line = 1;
    let mut line_start = 0;

    while let Some(&(start, c)) = chars.peek() {
        let column = text[line_start..start].chars().count() + 1;
        let err = |message: String| ParseError {
            kind: ErrorKind::Lexical,
            line,
            column,
            message,
        };
        let single = |kind: TokenKind| Token {
            kind,
            span: start..start + c.len_utf8(),
            line,
            column,
        };
        match c {
            '\n' => {
                chars.next();
                line += 1;
                line_start = start + 1;
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            '#' => {
                while chars.peek().is_some_and(|&(_, n)| n != '\n') {
                    chars.next();
                }
            }
            ':' | ',' | '{' | '}' | '[' | ']' => {
                chars.next();
                tokens.push(single(match c {
                    ':' => TokenKind::Colon,
                    ',' => TokenKind::Comma,
                    '{' => TokenKind::LBrace,
                    '}' => TokenKind::RBrace,
                    '[' => TokenKind::LBracket,
                    _ => TokenKind::RBracket,
                }));
            }
            '"' => {
                chars.next();
                let mut value = String::new();
                let end = loop {
                    match chars.next() {
                        None | Some((_, '\n')) => {
                            return Err(err("unterminated string".into()));
                        }
                        Some((i, '"')) => break i + 1,
                        Some((_, '\\')) => match chars.next() {
                            Some((_, '"')) => value.push('"'),
                            Some((_, '\\')) => value.push('\\'),
                            Some((_, 'n')) => value.push('\n'),
                            Some((_, other)) => {
                                return Err(err(format!("unknown escape `\\{other}`")));
                            }
                            None => return Err(err("unterminated string".into())),
                        },
                        Some((_, ch)) => value.push(ch),
                    }
                };
                tokens.push(Token {
                    kind: TokenKind::Str(value),
                    span: start..end,
                    line,
                    column,
                });
            }
            c if c.is_ascii_digit() || c == '-' || c == '.' => {
                let mut end = start;
                while let Some(&(i, n)) = chars.peek() {
                    let prev = text[..i].chars().last();
                    let sign_ok = (n == '-' || n == '+')
                        && (i == start || matches!(prev, Some('e') | Some('E')));
                    if n.is_ascii_digit() || n == '.' || n == 'e' || n == 'E' || sign_ok {
                        end = i + n.len_utf8();
                        chars.next();
                    } else {
                        break;
                    }
                }
                let raw = &text[start..end];
                let value: f64 = raw
                    .parse()
                    .map_err(|_| err(format!("malformed number `{raw}`")))?;
                if !value.is_finite() {
                    return Err(err(format!("number `{raw}` out of range")));
                }
                tokens.push(Token {
                    kind: TokenKind::Number(value),
                    span: start..end,
                    line,
                    column,
                });
            }
            c if is_ident_start(c) => {
                let mut end = start;
                while let Some(&(i, n)) = chars.peek() {
                    if is_ident_char(n) {
                        end = i + 1;
                        chars.next();
                    } else {
                        break;
                    }
                }
                tokens.push(Token {
                    kind: TokenKind::Ident(text[start..end].to_string()),
                    span: start..end,
                    line,
                    column,
                });
            }
            other => return Err(err(format!("unexpected character `{other}`"))),
        }
    }
    Ok(tokens)
}
