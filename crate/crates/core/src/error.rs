use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Invalid parameter combination (dimension, mass/charge regime, ...).
    #[error("parameter error: {0}")]
    Parameter(String),

    /// A point outside the domain of a closed-form expression.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate induced metric at node {node}")]
    DegenerateMetric { node: usize },

    #[error("flow breakdown at t = {t}: {reason}")]
    FlowBreakdown { t: f64, reason: String },

    #[error("initial data rejected: {0}")]
    InvalidData(String),

    #[error("extrapolation unstable: {0}")]
    ExtrapolationUnstable(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
