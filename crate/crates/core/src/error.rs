use thiserror::Error;

/// Errors raised by the library and surfaced by the CLI.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("unknown game `{0}` (expected rps, prisoners_dilemma, hawk_dove or coordination)")]
    UnknownGame(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("positivity violated: {0}")]
    Positivity(String),

    #[error("unsupported family: {0}")]
    UnsupportedFamily(String),

    #[error("outside domain: {0}")]
    Domain(String),

    #[error("quadrature did not reach tolerance: {0}")]
    Quadrature(String),

    #[error("step failure at t = {t}: positivity guard exhausted {halvings} halvings")]
    StepFailure { t: f64, halvings: u32 },

    #[error("graph too large for exact enumeration: n = {0} (limit 20)")]
    Size(usize),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config error at {pointer}: {message}")]
    Config { pointer: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn check_dim(what: &str, got: usize, expected: usize) -> Result<()> {
    if got != expected {
        return Err(Error::Dimension(format!("{what} has length {got}, expected {expected}")));
    }
    Ok(())
}
