//! Recursive-descent parser for the ASCII formula grammar.
//!
//! ```text
//! implication := disjunction ( "->" implication )?
//! disjunction := conjunction ( "|" conjunction )*
//! conjunction := unary ( "&" unary )*
//! unary       := "!" unary | atom | "(" implication ")"
//! atom        := [A-Za-z][A-Za-z0-9_]*
//! ```

use std::fmt;

use super::formula::Formula;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// Byte offset into the input.
    pub offset: usize,
    pub expected: Vec<&'static str>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "at byte {}: expected {}, found {}",
            self.offset,
            self.expected.join(" or "),
            self.found
        )
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Atom(String),
    Not,
    And,
    Or,
    Arrow,
    Open,
    Close,
    End,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Atom(a) => format!("atom `{a}`"),
            Token::Not => "`!`".into(),
            Token::And => "`&`".into(),
            Token::Or => "`|`".into(),
            Token::Arrow => "`->`".into(),
            Token::Open => "`(`".into(),
            Token::Close => "`)`".into(),
            Token::End => "end of input".into(),
        }
    }
}

fn lex(input: &str) -> Result<Vec<(usize, Token)>, ParseError> {
    let bytes = input.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let token = match c {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
                continue;
            }
            b'!' => Token::Not,
            b'&' => Token::And,
            b'|' => Token::Or,
            b'(' => Token::Open,
            b')' => Token::Close,
            b'-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    i += 1;
                    Token::Arrow
                } else {
                    return Err(ParseError {
                        offset: i + 1,
                        expected: vec!["`>`"],
                        found: found_at(input, i + 1),
                    });
                }
            }
            c if c.is_ascii_alphabetic() => {
                while i + 1 < bytes.len() && (bytes[i + 1].is_ascii_alphanumeric() || bytes[i + 1] == b'_') {
                    i += 1;
                }
                Token::Atom(input[start..=i].to_string())
            }
            _ => {
                return Err(ParseError {
                    offset: i,
                    expected: vec!["atom", "`!`", "`(`", "operator"],
                    found: found_at(input, i),
                })
            }
        };
        tokens.push((start, token));
        i += 1;
    }
    tokens.push((input.len(), Token::End));
    Ok(tokens)
}

fn found_at(input: &str, offset: usize) -> String {
    match input[offset..].chars().next() {
        Some(c) => format!("`{c}`"),
        None => "end of input".into(),
    }
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
}

const OPERAND: [&str; 3] = ["atom", "`!`", "`(`"];

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].1
    }

    fn error(&self, expected: &[&'static str]) -> ParseError {
        let (offset, token) = &self.tokens[self.pos];
        ParseError {
            offset: *offset,
            expected: expected.to_vec(),
            found: token.describe(),
        }
    }

    fn bump(&mut self) {
        self.pos += 1;
    }

    fn implication(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if *self.peek() == Token::Arrow {
            self.bump();
            let rhs = self.implication()?;
            return Ok(Formula::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.conjunction()?;
        while *self.peek() == Token::Or {
            self.bump();
            let rhs = self.conjunction()?;
            lhs = Formula::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Token::And {
            self.bump();
            let rhs = self.unary()?;
            lhs = Formula::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Token::Not => {
                self.bump();
                Ok(Formula::Not(Box::new(self.unary()?)))
            }
            Token::Atom(name) => {
                self.bump();
                Ok(Formula::Atom(name))
            }
            Token::Open => {
                self.bump();
                let inner = self.implication()?;
                if *self.peek() != Token::Close {
                    return Err(self.error(&["`)`", "operator"]));
                }
                self.bump();
                Ok(inner)
            }
            _ => Err(self.error(&OPERAND)),
        }
    }
}

pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let mut parser = Parser {
        tokens: lex(text)?,
        pos: 0,
    };
    let formula = parser.implication()?;
    if *parser.peek() != Token::End {
        return Err(parser.error(&["operator", "end of input"]));
    }
    Ok(formula)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::formula::{and, atom, implies, not, or};

    #[test]
    fn implication_is_right_associative() {
        assert_eq!(
            parse_formula("A -> B -> C").unwrap(),
            implies(atom("A"), implies(atom("B"), atom("C")))
        );
    }

    #[test]
    fn precedence_not_and_or() {
        assert_eq!(
            parse_formula("!A & B | C").unwrap(),
            or(and(not(atom("A")), atom("B")), atom("C"))
        );
        assert_eq!(
            parse_formula("A | B & C -> D").unwrap(),
            implies(or(atom("A"), and(atom("B"), atom("C"))), atom("D"))
        );
    }

    #[test]
    fn unbalanced_paren_reports_end_offset() {
        let err = parse_formula("A & (").unwrap_err();
        assert_eq!(err.offset, 5);
        assert_eq!(err.found, "end of input");
        assert!(err.expected.contains(&"atom"));
    }

    #[test]
    fn whitespace_and_identifiers() {
        assert_eq!(
            parse_formula("  rain_1->wet\t").unwrap(),
            implies(atom("rain_1"), atom("wet"))
        );
        assert_eq!(parse_formula("((A))").unwrap(), atom("A"));
    }

    #[test]
    fn error_positions() {
        assert_eq!(parse_formula("A B").unwrap_err().offset, 2);
        assert_eq!(parse_formula("A - B").unwrap_err().offset, 3);
        assert_eq!(parse_formula("(A").unwrap_err().offset, 2);
        assert_eq!(parse_formula("").unwrap_err().offset, 0);
        assert_eq!(parse_formula("A & 1").unwrap_err().offset, 4);
        assert_eq!(parse_formula("A)").unwrap_err().offset, 1);
    }
}
