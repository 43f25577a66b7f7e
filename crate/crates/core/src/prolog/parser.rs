//! Parser for ground, negation-free Prolog.
//!
//! ```text
//! program := clause*
//! clause  := atom '.' | atom ':-' atom (',' atom)* '.'
//! atom    := ident [ '(' term (',' term)* ')' ]
//! term    := ident [ '(' term (',' term)* ')' ] | number
//! ```
//!
//! Identifiers start with a lowercase letter. `%` comments run to the end of
//! the line. Variables (uppercase or `_` initial) and negation (`\+`, `not`)
//! are rejected with dedicated errors.

use std::collections::HashSet;

use super::{Atom, PrologError, Program, Rule};

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    Variable(String),
    Number(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Neck,
    Negation,
    Eof,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Ident(s) | Token::Variable(s) | Token::Number(s) => format!("`{s}`"),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
            Token::Comma => "`,`".into(),
            Token::Dot => "`.`".into(),
            Token::Neck => "`:-`".into(),
            Token::Negation => "`\\+`".into(),
            Token::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    token: Token,
    line: usize,
    column: usize,
}

fn tokenize(text: &str) -> Result<Vec<Spanned>, PrologError> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let (mut i, mut line, mut column) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_column) = (line, column);
        let mut push = |token, len: usize, i: &mut usize, column: &mut usize| {
            tokens.push(Spanned {
                token,
                line: start_line,
                column: start_column,
            });
            *i += len;
            *column += len;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                column = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                column += 1;
            }
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => push(Token::LParen, 1, &mut i, &mut column),
            ')' => push(Token::RParen, 1, &mut i, &mut column),
            ',' => push(Token::Comma, 1, &mut i, &mut column),
            '.' => push(Token::Dot, 1, &mut i, &mut column),
            ':' if chars.get(i + 1) == Some(&'-') => push(Token::Neck, 2, &mut i, &mut column),
            '\\' if chars.get(i + 1) == Some(&'+') => push(Token::Negation, 2, &mut i, &mut column),
            c if c.is_alphabetic() || c == '_' => {
                let len = chars[i..]
                    .iter()
                    .take_while(|c| c.is_alphanumeric() || **c == '_')
                    .count();
                let word: String = chars[i..i + len].iter().collect();
                let token = if c.is_lowercase() {
                    Token::Ident(word)
                } else {
                    Token::Variable(word)
                };
                push(token, len, &mut i, &mut column);
            }
            c if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(char::is_ascii_digit)) => {
                let mut len = 1 + chars[i + 1..].iter().take_while(|c| c.is_ascii_digit()).count();
                if chars.get(i + len) == Some(&'.')
                    && chars.get(i + len + 1).is_some_and(char::is_ascii_digit)
                {
                    len += 1 + chars[i + len + 1..].iter().take_while(|c| c.is_ascii_digit()).count();
                }
                let number: String = chars[i..i + len].iter().collect();
                push(Token::Number(number), len, &mut i, &mut column);
            }
            other => {
                return Err(PrologError::Syntax {
                    line,
                    column,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    tokens.push(Spanned {
        token: Token::Eof,
        line,
        column,
    });
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, offset: usize) -> &Token {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].token
    }

    fn bump(&mut self) -> Spanned {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, at: &Spanned, message: String) -> PrologError {
        PrologError::Syntax {
            line: at.line,
            column: at.column,
            message,
        }
    }

    fn expect(&mut self, token: Token, context: &str) -> Result<(), PrologError> {
        let next = self.bump();
        if next.token == token {
            Ok(())
        } else {
            Err(self.error(
                &next,
                format!("expected {} {context}, found {}", token.describe(), next.token.describe()),
            ))
        }
    }

    fn at_eof(&self) -> bool {
        self.peek().token == Token::Eof
    }

    /// Parses `ident [ '(' term, ... ')' ]` into canonical text.
    fn term(&mut self, what: &str) -> Result<String, PrologError> {
        let next = self.bump();
        match next.token {
            Token::Ident(name) => {
                if self.peek().token != Token::LParen {
                    return Ok(name);
                }
                self.bump();
                let mut args = vec![self.argument()?];
                while self.peek().token == Token::Comma {
                    self.bump();
                    args.push(self.argument()?);
                }
                self.expect(Token::RParen, "to close the argument list")?;
                Ok(format!("{name}({})", args.join(",")))
            }
            Token::Variable(name) => Err(PrologError::VariableNotAllowed {
                line: next.line,
                column: next.column,
                name,
            }),
            Token::Negation => Err(PrologError::NegationNotAllowed {
                line: next.line,
                column: next.column,
            }),
            ref other => Err(self.error(&next, format!("expected {what}, found {}", other.describe()))),
        }
    }

    fn argument(&mut self) -> Result<String, PrologError> {
        if let Token::Number(_) = self.peek().token {
            let Token::Number(n) = self.bump().token else { unreachable!() };
            return Ok(n);
        }
        self.term("a ground argument")
    }

    fn atom(&mut self) -> Result<Atom, PrologError> {
        self.term("an atom").map(Atom)
    }

    fn body_literal(&mut self) -> Result<Atom, PrologError> {
        let at = self.peek().clone();
        if let Token::Ident(name) = &at.token {
            let negated_call = matches!(self.peek_at(1), Token::LParen | Token::Ident(_) | Token::Variable(_));
            if name == "not" && negated_call {
                return Err(PrologError::NegationNotAllowed {
                    line: at.line,
                    column: at.column,
                });
            }
        }
        self.atom()
    }
}

/// Parses a program. Rules are labelled `R1`, `R2`, ... in source order.
pub fn parse_program(text: &str) -> Result<Program, PrologError> {
    let mut p = Parser {
        tokens: tokenize(text)?,
        pos: 0,
    };
    let mut program = Program::default();
    let mut seen_facts = HashSet::new();
    let mut seen_atoms = HashSet::new();
    let mut note = |atoms: &mut Vec<Atom>, atom: &Atom| {
        if seen_atoms.insert(atom.clone()) {
            atoms.push(atom.clone());
        }
    };
    while !p.at_eof() {
        let head = p.atom()?;
        note(&mut program.atoms, &head);
        let next = p.bump();
        match next.token {
            Token::Dot => {
                if seen_facts.insert(head.clone()) {
                    program.facts.push(head);
                }
            }
            Token::Neck => {
                let mut body = vec![p.body_literal()?];
                while p.peek().token == Token::Comma {
                    p.bump();
                    body.push(p.body_literal()?);
                }
                p.expect(Token::Dot, "at the end of the rule")?;
                for atom in &body {
                    note(&mut program.atoms, atom);
                }
                let label = format!("R{}", program.rules.len() + 1);
                program.rules.push(Rule { label, head, body });
            }
            ref other => {
                return Err(p.error(
                    &next,
                    format!("expected `.` or `:-` after a clause head, found {}", other.describe()),
                ))
            }
        }
    }
    Ok(program)
}

/// Parses a single atom, as used for queries. A trailing `.` is allowed.
pub fn parse_atom(text: &str) -> Result<Atom, PrologError> {
    let mut p = Parser {
        tokens: tokenize(text)?,
        pos: 0,
    };
    let atom = p.atom()?;
    if p.peek().token == Token::Dot {
        p.bump();
    }
    if !p.at_eof() {
        let at = p.peek().clone();
        return Err(p.error(&at, format!("unexpected {} after the query atom", at.token.describe())));
    }
    Ok(atom)
}
