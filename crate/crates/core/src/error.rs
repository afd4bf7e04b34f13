use std::fmt;

use crate::fitting::FitReport;

pub type Result<T> = std::result::Result<T, Error>;

/// Which half of a ratio model an error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Gdp,
    Population,
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Component::Gdp => f.write_str("gdp"),
            Component::Population => f.write_str("population"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("evaluation at year {year} reaches the singularity at {singularity}{}", component_suffix(.component))]
    SingularityReached {
        year: f64,
        singularity: f64,
        component: Option<Component>,
    },

    #[error("model with k = 0 never diverges")]
    NoSingularity,

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid year window: {0}")]
    InvalidWindow(String),

    #[error("insufficient data: need at least {needed} observations, found {found}")]
    InsufficientData { needed: usize, found: usize },

    #[error("non-positive value {value} at year {year}")]
    NonPositiveValue { year: f64, value: f64 },

    /// The reciprocal line does not fall (`k <= 0`) or crosses zero before
    /// the first observation.
    #[error("data are not hyperbolic growth: reciprocal line a = {a:e}, k = {k:e}")]
    NonHyperbolic { a: f64, k: f64 },

    #[error("refinement did not converge after {iterations} iterations")]
    DidNotConverge { iterations: usize, best: Box<FitReport> },

    #[error("schema error at line {line}: {message}")]
    Schema { line: usize, message: String },

    #[error("value error at line {line}: {message}")]
    Value { line: usize, message: String },

    #[error("duplicate observation for {region}/{kind} at year {year}")]
    DuplicateYear { region: String, kind: String, year: f64 },

    #[error("region mismatch: {0} vs {1}")]
    RegionMismatch(String, String),

    #[error("series kind mismatch: expected {expected}, found {found}")]
    KindMismatch { expected: String, found: String },

    #[error("series have no common years")]
    NoCommonYears,

    #[error("invalid series: {0}")]
    InvalidSeries(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

fn component_suffix(component: &Option<Component>) -> String {
    match component {
        Some(c) => format!(" of the {c} component"),
        None => String::new(),
    }
}

impl Error {
    /// True for errors caused by the input data rather than by the environment.
    pub fn is_data_error(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::NonHyperbolic { .. })
    }
}
