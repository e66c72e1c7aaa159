use thiserror::Error;

use crate::graph_model::Violation;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("parse error at {path}: {msg}")]
    Parse { path: String, msg: String },
    #[error("invalid graph: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("invalid λ-blowup: {0}")]
    InvalidBlowup(String),
    #[error("site mismatch: {0}")]
    SiteMismatch(String),
    #[error("not blowdownable: {0}")]
    NotBlowdownable(String),
    #[error("irreducible non-minimal graph: {0}")]
    Irreducible(String),
    #[error("symbol not present: {0}")]
    Symbol(String),
    #[error("localization residue: {0}")]
    Residue(String),
    #[error("label undefined: {0}")]
    LabelUndefined(String),
    #[error("chain not flippable: {0}")]
    NotFlippable(String),
    #[error("inconsistent input: {0}")]
    Inconsistent(String),
    #[error("missing data: {0}")]
    Missing(String),
    #[error("constraint violated: {0}")]
    Constraint(String),
    #[error("internal inconsistency: {0}")]
    BugTrap(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "E_PARSE",
            Error::Invalid(_) => "E_INVALID",
            Error::InvalidBlowup(_) => "E_BLOWUP",
            Error::SiteMismatch(_) => "E_SITE",
            Error::NotBlowdownable(_) => "E_BLOWDOWN",
            Error::Irreducible(_) => "E_IRREDUCIBLE",
            Error::Symbol(_) => "E_SYMBOL",
            Error::Residue(_) => "E_RESIDUE",
            Error::LabelUndefined(_) => "E_LABEL",
            Error::NotFlippable(_) => "E_FLIP",
            Error::Inconsistent(_) => "E_INCONSISTENT",
            Error::Missing(_) => "E_MISSING",
            Error::Constraint(_) => "E_CONSTRAINT",
            Error::BugTrap(_) => "E_BUG",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
