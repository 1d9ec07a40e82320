use thiserror::Error;

/// Errors produced by the estimators, the experiment runner and the I/O helpers.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// An experiment or estimator configuration failed validation.
    #[error("configuration error at `{field}`: {message}")]
    Config { field: String, message: String },

    /// Exhaustive subset search would exceed its scoring budget.
    #[error("search budget exceeded: {required} subsets required, guard limit is {limit}")]
    Budget { required: u128, limit: u64 },

    /// The design restricted to `subset` does not have full column rank.
    #[error("design restricted to subset {subset:?} is rank deficient")]
    Singular { subset: Vec<usize> },

    /// A log-log fit had fewer than three usable points. `table` holds the
    /// per-point summary CSV so the caller can still report it.
    #[error("fit degenerate: {usable} points with nonzero FDR, at least 3 required")]
    FitDegenerate { usable: usize, table: String },

    /// A failure inside one Monte Carlo replicate.
    #[error("replicate {replicate}: {source}")]
    Replicate {
        replicate: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Strips any [`Error::Replicate`] wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Replicate { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
