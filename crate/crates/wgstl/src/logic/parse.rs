//! Parser for the s-expression structure grammar.
//!
//! ```text
//! phi := '(' op ')'
//! op  := 'pred' NAME
//!      | 'not' phi
//!      | ('and' | 'or') phi phi
//!      | ('always' | 'eventually' | 'tempX') '[' INT INT ']' phi
//!      | ('forall' | 'exists' | 'graphX') phi
//! ```
//!
//! `tempX` and `graphX` declare flexible operator slots whose concrete kind
//! is learned from data. `;` starts a comment that runs to the end of the
//! line, so annotated pretty-printer output parses back unchanged. As an
//! extension of the binary grammar, `and`/`or` accept two *or more* operands.

use crate::error::{Error, Result};
use crate::logic::ast::{Expr, FormulaTemplate, GraphKind, TemporalKind};

/// Parse structure text into a validated [`FormulaTemplate`].
pub fn parse_structure(text: &str) -> Result<FormulaTemplate> {
    let tokens = tokenize(text)?;
    let mut parser = Parser { tokens, pos: 0 };
    let expr = parser.parse_phi()?;
    if let Some(tok) = parser.peek() {
        return Err(parse_err(tok.line, tok.col, "trailing input after formula"));
    }
    FormulaTemplate::new(expr)
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    LParen,
    RParen,
    LBracket,
    RBracket,
    Int(usize),
    Word(String),
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    line: usize,
    col: usize,
}

fn parse_err(line: usize, col: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        col,
        message: message.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let mut tokens = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            ';' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            '(' | ')' | '[' | ']' => {
                let kind = match c {
                    '(' => TokenKind::LParen,
                    ')' => TokenKind::RParen,
                    '[' => TokenKind::LBracket,
                    _ => TokenKind::RBracket,
                };
                tokens.push(Token { kind, line, col });
                chars.next();
                col += 1;
            }
            c if c.is_ascii_digit() => {
                let start_col = col;
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() {
                        word.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                let value = word
                    .parse::<usize>()
                    .map_err(|_| parse_err(line, start_col, format!("integer `{word}` out of range")))?;
                tokens.push(Token {
                    kind: TokenKind::Int(value),
                    line,
                    col: start_col,
                });
            }
            c if is_name_char(c) => {
                let start_col = col;
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if is_name_char(c) || c.is_ascii_digit() {
                        word.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                tokens.push(Token {
                    kind: TokenKind::Word(word),
                    line,
                    col: start_col,
                });
            }
            other => {
                return Err(parse_err(line, col, format!("unexpected character `{other}`")));
            }
        }
    }
    Ok(tokens)
}

fn is_name_char(c: char) -> bool {
    c.is_alphabetic() || matches!(c, '_' | '-' | '.')
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self, expected: &str) -> Result<Token> {
        let tok = self.tokens.get(self.pos).cloned().ok_or_else(|| {
            let (line, col) = self.end_position();
            parse_err(line, col, format!("unexpected end of input, expected {expected}"))
        })?;
        self.pos += 1;
        Ok(tok)
    }

    fn end_position(&self) -> (usize, usize) {
        self.tokens
            .last()
            .map(|t| (t.line, t.col + 1))
            .unwrap_or((1, 1))
    }

    fn expect(&mut self, kind: TokenKind, expected: &str) -> Result<Token> {
        let tok = self.next(expected)?;
        if tok.kind != kind {
            return Err(parse_err(
                tok.line,
                tok.col,
                format!("expected {expected}, found {}", describe(&tok.kind)),
            ));
        }
        Ok(tok)
    }

    fn parse_phi(&mut self) -> Result<Expr> {
        self.expect(TokenKind::LParen, "`(`")?;
        let head = self.next("an operator keyword")?;
        let word = match &head.kind {
            TokenKind::Word(w) => w.as_str(),
            other => {
                return Err(parse_err(
                    head.line,
                    head.col,
                    format!("expected an operator keyword, found {}", describe(other)),
                ));
            }
        };
        let expr = match word {
            "pred" => {
                let name = self.next("a predicate name")?;
                match name.kind {
                    TokenKind::Word(n) => Expr::Pred(n),
                    other => {
                        return Err(parse_err(
                            name.line,
                            name.col,
                            format!("expected a predicate name, found {}", describe(&other)),
                        ));
                    }
                }
            }
            "not" => Expr::Not(Box::new(self.parse_phi()?)),
            "and" | "or" => {
                let mut children = vec![self.parse_phi()?, self.parse_phi()?];
                while matches!(self.peek().map(|t| &t.kind), Some(TokenKind::LParen)) {
                    children.push(self.parse_phi()?);
                }
                if word == "and" {
                    Expr::And(children)
                } else {
                    Expr::Or(children)
                }
            }
            "always" | "eventually" | "tempX" => {
                let kind = match word {
                    "always" => Some(TemporalKind::Always),
                    "eventually" => Some(TemporalKind::Eventually),
                    _ => None,
                };
                self.expect(TokenKind::LBracket, "`[`")?;
                let k1 = self.parse_int()?;
                let (k2, k2_tok) = self.parse_int_with_pos()?;
                self.expect(TokenKind::RBracket, "`]`")?;
                if k1 > k2 {
                    return Err(parse_err(
                        k2_tok.line,
                        k2_tok.col,
                        format!("malformed interval [{k1} {k2}]: lower bound exceeds upper bound"),
                    ));
                }
                Expr::temporal(kind, k1, k2, self.parse_phi()?)
            }
            "forall" | "exists" | "graphX" => {
                let kind = match word {
                    "forall" => Some(GraphKind::Forall),
                    "exists" => Some(GraphKind::Exists),
                    _ => None,
                };
                Expr::graph(kind, self.parse_phi()?)
            }
            other => {
                return Err(parse_err(
                    head.line,
                    head.col,
                    format!("unknown operator `{other}`"),
                ));
            }
        };
        self.expect(TokenKind::RParen, "`)`")?;
        Ok(expr)
    }

    fn parse_int(&mut self) -> Result<usize> {
        Ok(self.parse_int_with_pos()?.0)
    }

    fn parse_int_with_pos(&mut self) -> Result<(usize, Token)> {
        let tok = self.next("an integer")?;
        match tok.kind {
            TokenKind::Int(v) => Ok((v, tok)),
            ref other => Err(parse_err(
                tok.line,
                tok.col,
                format!("expected an integer, found {}", describe(other)),
            )),
        }
    }
}

fn describe(kind: &TokenKind) -> String {
    match kind {
        TokenKind::LParen => "`(`".into(),
        TokenKind::RParen => "`)`".into(),
        TokenKind::LBracket => "`[`".into(),
        TokenKind::RBracket => "`]`".into(),
        TokenKind::Int(v) => format!("integer `{v}`"),
        TokenKind::Word(w) => format!("`{w}`"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_case_study_structure() {
        let t = parse_structure(
            "(or (tempX [0 6] (graphX (pred p1))) (not (tempX [7 14] (graphX (pred p2)))))",
        )
        .unwrap();
        assert_eq!(t.flexible_temporal().len(), 2);
        assert_eq!(t.flexible_graph().len(), 2);
        assert_eq!(t.pred_names(), ["p1", "p2"]);
    }

    #[test]
    fn parses_fully_determined_template() {
        let t = parse_structure("(always [0 0] (forall (pred p)))").unwrap();
        assert!(!t.has_flexible_slots());
        assert_eq!(t.required_horizon(), 0);
    }

    #[test]
    fn rejects_degenerate_template() {
        assert!(matches!(
            parse_structure("(pred p)"),
            Err(Error::InvalidTemplate(_))
        ));
    }

    #[test]
    fn rejects_malformed_interval() {
        let err = parse_structure("(always [3 1] (forall (pred p)))").unwrap_err();
        match err {
            Error::Parse { message, .. } => assert!(message.contains("interval")),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn reports_line_and_column() {
        let err = parse_structure("(always [0 1]\n  (forall (pred 42)))").unwrap_err();
        match err {
            Error::Parse { line, col, .. } => {
                assert_eq!(line, 2);
                assert!(col > 1);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn skips_comments() {
        let t = parse_structure(
            "; a comment\n(always [0 2] ; weights live elsewhere\n  (exists (pred p)))",
        )
        .unwrap();
        assert_eq!(t.required_horizon(), 2);
    }

    #[test]
    fn rejects_trailing_input() {
        assert!(parse_structure("(always [0 0] (forall (pred p))) (pred q)").is_err());
    }

    #[test]
    fn accepts_nary_connectives() {
        let t = parse_structure(
            "(and (always [0 1] (forall (pred a))) (always [0 1] (forall (pred b))) \
             (eventually [0 1] (exists (pred c))))",
        )
        .unwrap();
        assert_eq!(t.pred_names().len(), 3);
    }
}
