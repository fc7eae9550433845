use thiserror::Error;

pub type Result<T> = std::result::Result<T, GbiError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GbiError {
    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),

    #[error("groups overlap on label `{0}`")]
    OverlappingGroups(String),

    #[error("empty index group")]
    EmptyGroup,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("matrix is not positive definite (pivot {pivot:e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositiveSemidefinite(f64),

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("conditional mutual information {0:e} below numerical floor")]
    NegativeInformation(f64),

    #[error("no sign change on [{lo}, {hi}] (f(lo) = {f_lo:e}, f(hi) = {f_hi:e})")]
    NoBracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl GbiError {
    /// True for failures of the numerics (singular blocks, missing roots)
    /// as opposed to bad arguments.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            GbiError::NotPositiveDefinite { .. }
                | GbiError::NotPositiveSemidefinite(_)
                | GbiError::NegativeInformation(_)
                | GbiError::NoBracket { .. }
                | GbiError::Numerical(_)
        )
    }
}
