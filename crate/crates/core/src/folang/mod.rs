//! The bounded-quantifier first-order language over names: concrete
//! syntax, model files, exact evaluation and finite-pool maximum witnesses.

mod ast;
mod eval;
mod parse;

use thiserror::Error;

use crate::boolalg::AlgebraError;
use crate::bvm::BvmError;
use crate::error::{Classify, ErrorClass};
use crate::lzero::LzeroError;

pub use ast::{Formula, NameExpr};
pub use eval::{eval_formula, maximum_witness, resolve_name, MaximumWitness, Model, TRANSFER_SUITE};
pub use parse::{parse, parse_formula, parse_name_expr, ModelFile, Parsed, What};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FolangError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("unknown identifier '{0}'")]
    UnknownIdentifier(String),
    #[error("duplicate identifier '{0}'")]
    DuplicateIdentifier(String),
    #[error("model file does not declare 'atoms N' before use")]
    MissingAtoms,
    #[error("empty pool")]
    EmptyPool,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Bvm(#[from] BvmError),
    #[error(transparent)]
    Lzero(#[from] LzeroError),
}

impl Classify for FolangError {
    fn class(&self) -> ErrorClass {
        match self {
            FolangError::Syntax { .. } | FolangError::MissingAtoms | FolangError::DuplicateIdentifier(_) => {
                ErrorClass::Parse
            }
            FolangError::Algebra(e) => e.class(),
            FolangError::Bvm(e) => e.class(),
            FolangError::Lzero(e) => e.class(),
            FolangError::UnknownIdentifier(_) | FolangError::EmptyPool => ErrorClass::Precondition,
        }
    }
}
