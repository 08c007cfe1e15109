use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("mode index {index} out of range for a {num_modes}-mode state")]
    ModeOutOfRange { index: usize, num_modes: usize },

    #[error("two-mode operation needs distinct modes, got {0} twice")]
    SameMode(usize),

    #[error("transmission {0} is outside [0, 1]")]
    InvalidTransmission(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not symmetric (deviation {0:.3e})")]
    NotSymmetric(f64),

    #[error("unphysical state: {0}")]
    Unphysical(String),

    #[error("numerical overflow: {0}")]
    Overflow(String),

    #[error("herald pattern has zero probability")]
    ZeroProbability,

    #[error("cutoff did not converge up to d = {cutoff}: relative residual {residual:.3e}")]
    CutoffNotConverged { cutoff: usize, residual: f64 },

    #[error("Wigner negativity quadrature did not converge: last estimates {previous} and {last}")]
    QuadratureNotConverged { previous: f64, last: f64 },
}

impl Error {
    /// True for failures caused by the numbers rather than by the request
    /// (unphysical states, overflow, non-convergence).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Unphysical(_)
                | Error::Overflow(_)
                | Error::ZeroProbability
                | Error::CutoffNotConverged { .. }
                | Error::QuadratureNotConverged { .. }
        )
    }
}
