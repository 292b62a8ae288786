use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: space has {expected} atoms, function has {found} values")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("measure space must contain at least one atom")]
    EmptySpace,

    #[error("atom {index} has invalid weight {value}; weights must be positive and finite")]
    InvalidWeight { index: usize, value: f64 },

    #[error("probability weights sum to {total}, expected 1")]
    NotProbability { total: f64 },

    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("empty search interval [{lo}, {hi}]")]
    EmptyInterval { lo: f64, hi: f64 },

    #[error("function family is empty")]
    EmptyFamily,

    #[error("every member of the family is identically zero")]
    ZeroFamily,

    #[error("atom {atom} is outside the space ({atoms} atoms)")]
    AtomOutOfRange { atom: usize, atoms: usize },

    #[error("step function sets overlap at atom {atom}")]
    Overlap { atom: usize },

    #[error("{atoms} atoms exceed the optimization budget of {max}")]
    BudgetExceeded { atoms: usize, max: usize },

    #[error("random variable is not centered (mean {mean})")]
    NotCentered { mean: f64 },

    #[error("growth condition fails: worst ratio {worst_ratio} > alpha {alpha}")]
    GrowthCondition { worst_ratio: f64, alpha: f64 },

    #[error("{0}")]
    NonConvergent(String),

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }
}
