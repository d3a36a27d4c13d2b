use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("could not place user {user} at least {min_distance_m} m from every RSC after {attempts} attempts")]
    GeometryInfeasible {
        user: usize,
        min_distance_m: f64,
        attempts: usize,
    },

    #[error("oracle instance needs {size} evaluations, budget is {budget}")]
    OracleBudget { size: u128, budget: u128 },

    #[error("experiment spec: {0}")]
    Spec(String),

    #[error("every drop of cell ({sweep}={value}, {arm}) failed: {last}")]
    CellFailed {
        sweep: String,
        value: f64,
        arm: String,
        last: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParam {
        name,
        reason: reason.into(),
    }
}
