use std::fmt;

use super::ParseError;
use crate::ast::SourceLocation;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum TokenKind {
    Word(String),
    Str(String),
    Number(String),
    Semi,
    Comma,
    LBracket,
    RBracket,
    Eof,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Word(w) => write!(f, "`{w}`"),
            TokenKind::Str(s) => write!(f, "string {s:?}"),
            TokenKind::Number(n) => write!(f, "number `{n}`"),
            TokenKind::Semi => f.write_str("`;`"),
            TokenKind::Comma => f.write_str("`,`"),
            TokenKind::LBracket => f.write_str("`[`"),
            TokenKind::RBracket => f.write_str("`]`"),
            TokenKind::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub kind: TokenKind,
    pub location: SourceLocation,
}

struct Cursor<'a> {
    src: &'a str,
    offset: usize,
    line: usize,
    column: usize,
}

impl<'a> Cursor<'a> {
    fn location(&self) -> SourceLocation {
        SourceLocation { line: self.line, column: self.column, offset: self.offset }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.offset..].chars().next()
    }

    fn peek_second(&self) -> Option<char> {
        let mut chars = self.src[self.offset..].chars();
        chars.next();
        chars.next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.offset += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn eat_while(&mut self, pred: impl Fn(char) -> bool) {
        while self.peek().is_some_and(&pred) {
            self.bump();
        }
    }
}

fn error(location: SourceLocation, expected: &str, found: impl Into<String>) -> ParseError {
    ParseError { location, expected: expected.to_string(), found: found.into() }
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut cur = Cursor { src, offset: 0, line: 1, column: 1 };
    let mut tokens = Vec::new();
    loop {
        cur.eat_while(char::is_whitespace);
        let start = cur.location();
        let Some(c) = cur.peek() else {
            tokens.push(Token { kind: TokenKind::Eof, location: start });
            return Ok(tokens);
        };
        let kind = match c {
            '/' if cur.peek_second() == Some('/') => {
                cur.eat_while(|c| c != '\n');
                continue;
            }
            ';' => {
                cur.bump();
                TokenKind::Semi
            }
            ',' => {
                cur.bump();
                TokenKind::Comma
            }
            '[' => {
                cur.bump();
                TokenKind::LBracket
            }
            ']' => {
                cur.bump();
                TokenKind::RBracket
            }
            '\'' => TokenKind::Str(lex_string(&mut cur)?),
            c if c.is_ascii_alphabetic() || c == '_' => {
                cur.eat_while(|c| c.is_ascii_alphanumeric() || c == '_');
                TokenKind::Word(src[start.offset..cur.offset].to_string())
            }
            c if c.is_ascii_digit() || matches!(c, '+' | '-' | '.') => lex_number(&mut cur)?,
            other => return Err(error(start, "a keyword, string, number or punctuation", other.to_string())),
        };
        tokens.push(Token { kind, location: start });
    }
}

fn lex_string(cur: &mut Cursor<'_>) -> Result<String, ParseError> {
    let open = cur.location();
    cur.bump();
    let mut out = String::new();
    loop {
        let here = cur.location();
        match cur.bump() {
            None => return Err(error(open, "closing `'`", "end of input")),
            Some('\'') => return Ok(out),
            Some('\\') => match cur.bump() {
                Some('\\') => out.push('\\'),
                Some('\'') => out.push('\''),
                Some('n') => out.push('\n'),
                Some('t') => out.push('\t'),
                Some('r') => out.push('\r'),
                Some(other) => {
                    return Err(error(here, "escape sequence (\\\\, \\', \\n, \\t, \\r)", format!("\\{other}")))
                }
                None => return Err(error(here, "escape sequence", "end of input")),
            },
            Some(c) => out.push(c),
        }
    }
}

/// `[+-]? (digits ('.' digits*)? | '.' digits) ([eE] [+-]? digits)?`
fn lex_number(cur: &mut Cursor<'_>) -> Result<TokenKind, ParseError> {
    let start = cur.location();
    if matches!(cur.peek(), Some('+' | '-')) {
        cur.bump();
    }
    let int_start = cur.offset;
    cur.eat_while(|c| c.is_ascii_digit());
    let mut digits = cur.offset > int_start;
    if cur.peek() == Some('.') {
        cur.bump();
        let frac_start = cur.offset;
        cur.eat_while(|c| c.is_ascii_digit());
        digits |= cur.offset > frac_start;
    }
    if !digits {
        let found = cur.src[start.offset..cur.offset].to_string();
        return Err(error(start, "a number", found));
    }
    if matches!(cur.peek(), Some('e' | 'E')) {
        cur.bump();
        if matches!(cur.peek(), Some('+' | '-')) {
            cur.bump();
        }
        let exp_start = cur.offset;
        cur.eat_while(|c| c.is_ascii_digit());
        if cur.offset == exp_start {
            let found = cur.src[start.offset..cur.offset].to_string();
            return Err(error(start, "exponent digits", found));
        }
    }
    Ok(TokenKind::Number(cur.src[start.offset..cur.offset].to_string()))
}
