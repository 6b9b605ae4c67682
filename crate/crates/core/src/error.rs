use thiserror::Error;

/// Errors raised by the integer algebra, lattice and reconstruction routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is singular")]
    Singular,

    #[error("at least {needed} moduli are required, got {got}")]
    TooFewModuli { needed: usize, got: usize },

    #[error("moduli {0} and {1} are identical")]
    DuplicateModuli(usize, usize),

    #[error("coset enumeration would produce {size} points, cap is {cap}")]
    CosetCapExceeded { size: String, cap: u64 },

    #[error("closest lattice point is not unique for pair ({reference}, {other})")]
    CvpTie { reference: usize, other: usize },

    #[error("congruence system is inconsistent at stage {stage}")]
    Inconsistent { stage: usize },

    #[error("moduli are not pairwise commutative and coprime: {0}")]
    NotCommutativeCoprime(String),

    #[error("vector is not integral within tolerance (max deviation {deviation:e})")]
    NotIntegral { deviation: f64 },

    #[error("value out of reconstruction range: {0}")]
    OutOfRange(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    /// Stable short code used by the command-line front end.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::Singular => "singular_modulus",
            Error::TooFewModuli { .. } => "too_few_moduli",
            Error::DuplicateModuli(..) => "duplicate_moduli",
            Error::CosetCapExceeded { .. } => "coset_cap_exceeded",
            Error::CvpTie { .. } => "cvp_tie",
            Error::Inconsistent { .. } => "inconsistent_system",
            Error::NotCommutativeCoprime(_) => "not_commutative_coprime",
            Error::NotIntegral { .. } => "not_integral",
            Error::OutOfRange(_) => "out_of_range",
            Error::Invalid(_) => "invalid_input",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
