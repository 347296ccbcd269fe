use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Every edge weight is zero, so no edge distribution exists.
    #[error("all edge weights are zero; the network has no edges")]
    AllZeroWeights,

    #[error("invalid edge weight matrix: {0}")]
    InvalidWeights(String),

    #[error("invalid normalized adjacency: {0}")]
    InvalidAdjacency(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid attributes: {0}")]
    InvalidAttributes(String),

    /// The attribute carries no variation under the node marginals; the
    /// correlation is undefined (not zero).
    #[error("degenerate attribute{}: no variation under the edge distribution", column_suffix(.column))]
    DegenerateAttribute { column: Option<usize> },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("unknown education code {0:?}")]
    UnknownEducationCode(String),

    #[error("occupation {0:?} has no records")]
    EmptyOccupation(String),

    #[error("too few occupations: {found} survive, at least 2 are required")]
    TooFewOccupations { found: usize },

    #[error("group {group:?} of category {category:?} has no weight in the workforce")]
    ZeroWorkforceGroup { category: String, group: String },

    #[error("unknown category {name:?}; configured categories: {}", .configured.join(", "))]
    UnknownCategory {
        name: String,
        configured: Vec<String>,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{}{message}", line_prefix(.line))]
    Input { line: Option<u64>, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn input(line: Option<u64>, message: impl Into<String>) -> Self {
        Error::Input {
            line,
            message: message.into(),
        }
    }

    /// Measure-level failures that turn into status markers in a series
    /// rather than aborting a run.
    pub fn is_analysis_null(&self) -> bool {
        matches!(
            self,
            Error::DegenerateAttribute { .. }
                | Error::AllZeroWeights
                | Error::TooFewOccupations { .. }
                | Error::ZeroWorkforceGroup { .. }
                | Error::EmptyOccupation(_)
        )
    }
}

fn column_suffix(column: &Option<usize>) -> String {
    match column {
        Some(c) => format!(" in column {c}"),
        None => String::new(),
    }
}

fn line_prefix(line: &Option<u64>) -> String {
    match line {
        Some(l) => format!("line {l}: "),
        None => String::new(),
    }
}
