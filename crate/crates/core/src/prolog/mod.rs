//! Explanations for a restriction of Prolog: ground programs, no negation
//! as failure, and a single succeeding derivation.
//!
//! [`parse_program`] reads the program, [`solve`] computes the least model by
//! forward chaining and extracts a derivation tree for the query, and
//! [`build_mental_model`] turns program and tree into a [`MentalModel`](crate::MentalModel).

mod mental;
mod parser;
mod solver;

use std::fmt;

use thiserror::Error;

pub use mental::build_mental_model;
pub use parser::{parse_atom, parse_program};
pub use solver::{least_model, solve, DerivationNode, DerivationTree, LeastModel, NodeId, Resolution};

/// A ground atom in canonical text form, e.g. `a` or `p(1,2)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom(pub String);

impl Atom {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Atom {
    fn from(s: &str) -> Self {
        Atom(s.to_owned())
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    /// `R<n>`, numbered from 1 in source order.
    pub label: String,
    pub head: Atom,
    pub body: Vec<Atom>,
}

impl Rule {
    pub fn body_text(&self) -> String {
        self.body
            .iter()
            .map(Atom::as_str)
            .collect::<Vec<_>>()
            .join(", ")
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} :- {}.", self.head, self.body_text())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Program {
    /// Distinct facts in source order.
    pub facts: Vec<Atom>,
    pub rules: Vec<Rule>,
    /// Every distinct atom of the program, in order of first appearance.
    pub atoms: Vec<Atom>,
}

impl Program {
    pub fn is_fact(&self, atom: &Atom) -> bool {
        self.facts.contains(atom)
    }

    pub fn rule(&self, label: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.label == label)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PrologError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("variable `{name}` at {line}:{column}: only ground programs are supported")]
    VariableNotAllowed {
        line: usize,
        column: usize,
        name: String,
    },
    #[error("negation at {line}:{column}: negation as failure is not supported")]
    NegationNotAllowed { line: usize, column: usize },
    #[error("derivation tree does not match the program: {0}")]
    TreeProgramMismatch(String),
}
