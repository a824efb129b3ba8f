//! Concrete syntax: a hand-written lexer and recursive-descent parser, plus
//! the canonical pretty-printer.
//!
//! ```text
//! program    := command+
//! command    := inspect | import | export
//! inspect    := "inspect" "csv" "from" STRING ";"
//! import     := "import" "csv" "from" STRING filter* ";"
//! filter     := "skip" "empty" | "skip" "malformed" | "skip" STRING ("in" STRING)?
//! export     := "export" "csv" colspec ("," colspec)* "to" STRING
//!               ("sort" "by" STRING)? ("cut" "when" STRING "is" STRING)? ";"
//! colspec    := STRING "is" STRING ("as" ("int" | "real" | "str"))?
//!               ("in" "[" NUMBER "," NUMBER "]")? ("impute" strategy)?
//! strategy   := "mean" | "median" | "forward" "fill" | "back" "fill"
//!             | "linear" "interpolation" | "polynomial" "interpolation" INTEGER
//! ```
//!
//! Keywords are lowercase and case-sensitive. Strings are single-quoted with
//! backslash escapes; `//` starts a comment running to the end of the line.

mod lexer;
mod printer;

use std::fmt;

use lexer::{Token, TokenKind};
pub use printer::{pretty_print, quote};

use crate::ast::*;

/// The first offending token of a program that does not parse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub location: SourceLocation,
    pub expected: String,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: expected {}, found {}", self.location, self.expected, self.found)
    }
}

impl std::error::Error for ParseError {}

pub fn parse(source: &str) -> Result<Spec, ParseError> {
    let tokens = lexer::tokenize(source)?;
    Parser { tokens, pos: 0 }.program()
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        // tokenize always terminates the stream with Eof
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn advance(&mut self) -> Token {
        let tok = self.peek().clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        tok
    }

    fn fail<T>(&self, expected: &str) -> Result<T, ParseError> {
        let tok = self.peek();
        Err(ParseError { location: tok.location, expected: expected.into(), found: tok.kind.to_string() })
    }

    fn at_word(&self, word: &str) -> bool {
        matches!(&self.peek().kind, TokenKind::Word(w) if w == word)
    }

    fn keyword(&mut self, word: &str) -> Result<(), ParseError> {
        if self.at_word(word) {
            self.advance();
            Ok(())
        } else {
            self.fail(&format!("`{word}`"))
        }
    }

    fn eat_word(&mut self, word: &str) -> bool {
        let hit = self.at_word(word);
        if hit {
            self.advance();
        }
        hit
    }

    fn punct(&mut self, kind: TokenKind) -> Result<(), ParseError> {
        if self.peek().kind == kind {
            self.advance();
            Ok(())
        } else {
            self.fail(&kind.to_string())
        }
    }

    fn string(&mut self, what: &str) -> Result<String, ParseError> {
        if let TokenKind::Str(s) = &self.peek().kind {
            let s = s.clone();
            self.advance();
            Ok(s)
        } else {
            self.fail(what)
        }
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        if let TokenKind::Number(n) = &self.peek().kind {
            // the lexer only produces lexemes Rust's float parser accepts
            let value = n.parse::<f64>().map_err(|_| ParseError {
                location: self.peek().location,
                expected: "a number".into(),
                found: n.clone(),
            })?;
            self.advance();
            Ok(value)
        } else {
            self.fail("a number")
        }
    }

    fn program(&mut self) -> Result<Spec, ParseError> {
        let mut commands = Vec::new();
        while self.peek().kind != TokenKind::Eof {
            let location = self.peek().location;
            let cmd = self.command()?;
            commands.push(Located::new(cmd, location));
        }
        if commands.is_empty() {
            return self.fail("`inspect`, `import` or `export`");
        }
        Ok(Spec { commands })
    }

    fn command(&mut self) -> Result<Command, ParseError> {
        if self.eat_word("inspect") {
            self.keyword("csv")?;
            self.keyword("from")?;
            let source = self.string("the file to inspect")?;
            self.punct(TokenKind::Semi)?;
            Ok(Command::Inspect(InspectCmd { source }))
        } else if self.eat_word("import") {
            self.import().map(Command::Import)
        } else if self.eat_word("export") {
            self.export().map(Command::Export)
        } else {
            self.fail("`inspect`, `import` or `export`")
        }
    }

    fn import(&mut self) -> Result<ImportCmd, ParseError> {
        self.keyword("csv")?;
        self.keyword("from")?;
        let mut cmd = ImportCmd { source: self.string("the file to import")?, ..Default::default() };
        while self.eat_word("skip") {
            if self.eat_word("empty") {
                cmd.row_filters.push(RowFilter::SkipEmpty);
            } else if self.eat_word("malformed") {
                cmd.row_filters.push(RowFilter::SkipMalformed);
            } else if let TokenKind::Str(_) = self.peek().kind {
                let needle = self.string("a substring")?;
                let scope = if self.eat_word("in") {
                    FilterScope::Column(self.string("a column name")?)
                } else {
                    FilterScope::AllColumns
                };
                cmd.substring_filters.push(SubstringFilter { needle, scope });
            } else {
                return self.fail("`empty`, `malformed` or a substring");
            }
        }
        self.punct(TokenKind::Semi)?;
        Ok(cmd)
    }

    fn export(&mut self) -> Result<ExportCmd, ParseError> {
        self.keyword("csv")?;
        let mut columns = Vec::new();
        loop {
            let location = self.peek().location;
            columns.push(Located::new(self.colspec()?, location));
            if self.peek().kind == TokenKind::Comma {
                self.advance();
            } else {
                break;
            }
        }
        self.keyword("to")?;
        let target = self.string("an output path")?;
        let sort_by = if self.eat_word("sort") {
            self.keyword("by")?;
            Some(self.string("a column name")?)
        } else {
            None
        };
        let cut = if self.eat_word("cut") {
            self.keyword("when")?;
            let column = self.string("a column name")?;
            self.keyword("is")?;
            let marker = self.string("a marker value")?;
            Some(CutRule { column, marker })
        } else {
            None
        };
        self.punct(TokenKind::Semi)?;
        Ok(ExportCmd { columns, target, sort_by, cut })
    }

    fn colspec(&mut self) -> Result<ColumnPlan, ParseError> {
        let source = self.string("a source column name")?;
        self.keyword("is")?;
        let mut plan = ColumnPlan::new(source, self.string("an output column name")?);
        if self.eat_word("as") {
            plan.declared_type = Some(if self.eat_word("int") {
                ColumnType::Int
            } else if self.eat_word("real") {
                ColumnType::Real
            } else if self.eat_word("str") {
                ColumnType::Str
            } else {
                return self.fail("`int`, `real` or `str`");
            });
        }
        if self.eat_word("in") {
            self.punct(TokenKind::LBracket)?;
            let lo = self.number()?;
            self.punct(TokenKind::Comma)?;
            let hi = self.number()?;
            self.punct(TokenKind::RBracket)?;
            plan.valid_range = Some(ValidRange { lo, hi });
        }
        if self.eat_word("impute") {
            plan.impute = Some(self.strategy()?);
        }
        Ok(plan)
    }

    fn strategy(&mut self) -> Result<ImputeStrategy, ParseError> {
        if self.eat_word("mean") {
            Ok(ImputeStrategy::Mean)
        } else if self.eat_word("median") {
            Ok(ImputeStrategy::Median)
        } else if self.eat_word("forward") {
            self.keyword("fill")?;
            Ok(ImputeStrategy::ForwardFill)
        } else if self.eat_word("back") {
            self.keyword("fill")?;
            Ok(ImputeStrategy::BackFill)
        } else if self.eat_word("linear") {
            self.keyword("interpolation")?;
            Ok(ImputeStrategy::Linear)
        } else if self.eat_word("polynomial") {
            self.keyword("interpolation")?;
            match &self.peek().kind {
                TokenKind::Number(n) if n.bytes().all(|b| b.is_ascii_digit()) => match n.parse::<u32>() {
                    Ok(order) => {
                        self.advance();
                        Ok(ImputeStrategy::Polynomial(order))
                    }
                    Err(_) => self.fail("a polynomial order"),
                },
                _ => self.fail("a polynomial order"),
            }
        } else {
            self.fail("an imputation strategy")
        }
    }
}
