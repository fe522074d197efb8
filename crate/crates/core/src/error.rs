use std::fmt;

/// Errors produced anywhere in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("parse error at line {line}, field {field}: {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },

    #[error("the space has no boundary points")]
    NoBoundary,

    #[error("interior point {0} has zero distance to the boundary")]
    TouchesBoundary(String),

    #[error("unknown label {0}")]
    UnknownLabel(String),

    #[error("duplicate label {0}")]
    DuplicateLabel(String),

    #[error("label sets differ: {0}")]
    LabelMismatch(String),

    #[error("matrix is not symmetric at ({0}, {1})")]
    Asymmetric(String, String),

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("insufficient sampling: the graph has {} components ({})", .0.len(), ComponentSummary(.0))]
    InsufficientSampling(Vec<Vec<String>>),

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("empty budget")]
    EmptyBudget,

    #[error("tail length {tail} exceeds sequence length {len}")]
    TailTooLong { tail: usize, len: usize },

    #[error("Busemann values did not stabilize: gap {gap:e} exceeds {tolerance:e} at {label}")]
    NonConvergence {
        label: String,
        gap: f64,
        tolerance: f64,
    },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Whether the error stems from user input rather than a failed check.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Malformed(_)
                | Error::Parse { .. }
                | Error::NoBoundary
                | Error::TouchesBoundary(_)
                | Error::Asymmetric(..)
                | Error::UnknownLabel(_)
                | Error::DuplicateLabel(_)
                | Error::LabelMismatch(_)
                | Error::Parameter(_)
                | Error::Io(_)
                | Error::Json(_)
                | Error::Csv(_)
                | Error::EmptyBudget
                | Error::TailTooLong { .. }
                | Error::InsufficientSampling(_)
                | Error::Precondition(_)
        )
    }
}

struct ComponentSummary<'a>(&'a [Vec<String>]);

impl fmt::Display for ComponentSummary<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            let shown: Vec<&str> = c.iter().take(3).map(String::as_str).collect();
            write!(f, "{} nodes [{}", c.len(), shown.join(", "))?;
            if c.len() > 3 {
                f.write_str(", ...")?;
            }
            f.write_str("]")?;
        }
        Ok(())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
