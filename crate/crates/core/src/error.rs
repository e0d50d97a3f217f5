use num_complex::Complex64;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("inadmissible guess: {0}")]
    InadmissibleGuess(String),

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("outside the solver domain: {0}")]
    OutOfDomain(String),

    #[error("instance carries no planted signal")]
    MissingTruth,

    #[error("eigensolver failed to converge: {0}")]
    NonConvergence(String),

    #[error("fixed point failed to converge at z = {z}: residual {residual:.3e}, last iterate r = {r}, s = {s}")]
    FixedPoint {
        z: Complex64,
        residual: f64,
        r: Complex64,
        s: Complex64,
    },

    #[error("root search failed: {0}")]
    Search(String),

    #[error("degenerate recovery: {0}")]
    DegenerateRecovery(String),

    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Numerical failures map to exit code 2 in the command line front end.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence(_)
                | Error::FixedPoint { .. }
                | Error::Search(_)
                | Error::DegenerateRecovery(_)
        )
    }
}
