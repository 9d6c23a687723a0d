//! Temporal-logic specifications: syntax, negation normal form, and the
//! boolean semantics over finite traces.

mod ast;
mod nnf;
mod parser;
mod qualitative;

use thiserror::Error;

pub use ast::{Atom, Cmp, Formula, InputSchema, Term};
pub use nnf::to_nnf;
pub use parser::parse_formula;
pub use qualitative::{atom_holds, eval_qualitative, term_value, Trace};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LtlError {
    #[error("syntax error at line {line}, column {column}: expected {expected}, found {found}")]
    Syntax {
        offset: usize,
        line: usize,
        column: usize,
        expected: String,
        found: String,
    },
    #[error("unknown identifier `{name}`")]
    UnknownIdentifier { name: String, offset: Option<usize> },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("at byte {offset}: {source}")]
    Located {
        offset: usize,
        #[source]
        source: Box<LtlError>,
    },
    #[error("negation of an until formula is not supported: {0}")]
    UnsupportedNegation(String),
    #[error("step {step} out of range for trace of length {len}")]
    StepOutOfRange { step: usize, len: usize },
    #[error("invalid trace: {0}")]
    Trace(String),
}

impl LtlError {
    pub(crate) fn at(self, offset: usize) -> LtlError {
        match self {
            LtlError::UnknownIdentifier { name, offset: None } => LtlError::UnknownIdentifier {
                name,
                offset: Some(offset),
            },
            e @ (LtlError::Syntax { .. } | LtlError::Located { .. } | LtlError::UnknownIdentifier { .. }) => e,
            other => LtlError::Located {
                offset,
                source: Box::new(other),
            },
        }
    }
}
