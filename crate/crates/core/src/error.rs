use std::path::PathBuf;

use thiserror::Error;

use crate::arch::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Syntax or schema error; the message carries line/column from the parser.
    #[error("{origin}: {message}")]
    Parse { origin: String, message: String },

    #[error("layer {layer} ({kind}): field `{field}` {reason}")]
    InvalidLayer {
        layer: usize,
        kind: &'static str,
        field: &'static str,
        reason: String,
    },

    #[error("network `{0}` has no CONV/FC layers")]
    EmptyNetwork(String),

    #[error("technology parameter `{field}` {reason}")]
    InvalidTech { field: &'static str, reason: String },

    #[error("missing technology parameter `{0}` (add `base = \"default\"` to overlay the shipped defaults)")]
    MissingTechField(&'static str),

    #[error("invalid design: {0}")]
    InvalidConfig(String),

    #[error("invalid search space: {0}")]
    InvalidSpace(String),

    #[error("search space has {cardinality} configurations, above the limit of {limit}")]
    SpaceTooLarge { cardinality: u128, limit: u128 },

    #[error("design violates the search space: {}", format_violations(.0))]
    Violations(Vec<Violation>),

    #[error("invalid search settings: {0}")]
    InvalidSearch(String),

    #[error("no feasible design found after {evaluated} evaluations ({reason})")]
    NoFeasibleDesign { evaluated: usize, reason: String },

    #[error("report serialization failed: {0}")]
    Serialize(String),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(origin: impl Into<String>, err: impl std::fmt::Display) -> Self {
        Error::Parse {
            origin: origin.into(),
            message: err.to_string().trim_end().to_string(),
        }
    }
}
