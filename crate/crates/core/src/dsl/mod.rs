//! The model language: parsing, pretty-printing and validation.

pub mod ast;
mod lexer;
mod parser;
mod printer;
#[cfg(any(test, feature = "proptest"))]
pub mod strategy;
mod validate;

use std::fmt;

use serde::Serialize;

pub use ast::*;
pub use lexer::KEYWORDS;
pub use parser::{parse_cond, parse_cond_list, parse_model, parse_process};
pub use validate::validate;

/// First syntax error in a source text.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{column}: expected {expected}, found {found}")]
pub struct ParseError {
    pub line: u32,
    pub column: u32,
    pub expected: String,
    pub found: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ErrorCode {
    ParseError,
    RecursionNotGuarded,
    ArityMismatch,
    UnknownDefinition,
    UndeclaredVariable,
    DuplicateDefinition,
    DuplicateDeclaration,
    EmptySumRange,
    KindMismatch,
    OracleNotDeclared,
    UnknownOutput,
    InvalidDomain,
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::ParseError => "ParseError",
            ErrorCode::RecursionNotGuarded => "RecursionNotGuarded",
            ErrorCode::ArityMismatch => "ArityMismatch",
            ErrorCode::UnknownDefinition => "UnknownDefinition",
            ErrorCode::UndeclaredVariable => "UndeclaredVariable",
            ErrorCode::DuplicateDefinition => "DuplicateDefinition",
            ErrorCode::DuplicateDeclaration => "DuplicateDeclaration",
            ErrorCode::EmptySumRange => "EmptySumRange",
            ErrorCode::KindMismatch => "KindMismatch",
            ErrorCode::OracleNotDeclared => "OracleNotDeclared",
            ErrorCode::UnknownOutput => "UnknownOutput",
            ErrorCode::InvalidDomain => "InvalidDomain",
        }
    }

    pub fn parse(s: &str) -> Option<ErrorCode> {
        ALL_CODES.iter().copied().find(|c| c.as_str() == s)
    }
}

const ALL_CODES: &[ErrorCode] = &[
    ErrorCode::ParseError,
    ErrorCode::RecursionNotGuarded,
    ErrorCode::ArityMismatch,
    ErrorCode::UnknownDefinition,
    ErrorCode::UndeclaredVariable,
    ErrorCode::DuplicateDefinition,
    ErrorCode::DuplicateDeclaration,
    ErrorCode::EmptySumRange,
    ErrorCode::KindMismatch,
    ErrorCode::OracleNotDeclared,
    ErrorCode::UnknownOutput,
    ErrorCode::InvalidDomain,
];

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A static error: either the parse error or one validation finding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub code: ErrorCode,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub definition: Option<String>,
    pub line: u32,
    pub column: u32,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}: {}", self.line, self.column, self.code, self.message)?;
        if let Some(d) = &self.definition {
            write!(f, " (in `{d}`)")?;
        }
        Ok(())
    }
}

impl From<ParseError> for Diagnostic {
    fn from(e: ParseError) -> Self {
        Diagnostic {
            code: ErrorCode::ParseError,
            message: format!("expected {}, found {}", e.expected, e.found),
            definition: None,
            line: e.line,
            column: e.column,
        }
    }
}

/// Parses and validates a model.
pub fn load(src: &str) -> Result<ModelAst, Vec<Diagnostic>> {
    let ast = parse_model(src).map_err(|e| vec![Diagnostic::from(e)])?;
    validate(&ast)?;
    Ok(ast)
}

#[cfg(test)]
mod tests;
