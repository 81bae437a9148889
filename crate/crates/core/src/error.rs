use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{name} = {value} is outside the accepted range {range}")]
    Domain {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("numerical range error: {0}")]
    NumericalRange(String),

    #[error("objective increased from {previous} to {current} at iteration {iteration}; step size too large")]
    Diverged {
        iteration: usize,
        previous: f64,
        current: f64,
    },

    #[error("observation set is empty")]
    EmptyObservations,

    #[error("run {run}: {source}")]
    Run {
        run: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("{0}")]
    Invalid(String),

    #[error("csv row {row}: {message}")]
    Csv { row: usize, message: String },

    #[error(transparent)]
    CsvParse(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, range: &'static str) -> Self {
        Error::Domain { name, value, range }
    }
}
