use thiserror::Error;

/// Errors shared by every module in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RiskError {
    /// A value-level precondition failed (empty input, non-finite entry,
    /// index out of range, dimension mismatch, parameter out of range).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A bound evaluator needs a query field that was not supplied.
    #[error("missing field for {family}: {field}")]
    MissingField {
        /// Bound family that required the field.
        family: &'static str,
        /// Name of the missing `BoundQuery` field.
        field: &'static str,
    },

    /// The requested result is only defined for a negative tilt.
    #[error("tilt sign error: {0}")]
    TiltSign(String),

    /// `kl(p, q)` requires p to be absolutely continuous w.r.t. q.
    #[error("absolute continuity violated: q({index}) = 0 but p({index}) = {p_mass}")]
    AbsoluteContinuity {
        /// Offending support point.
        index: usize,
        /// Mass that p places there.
        p_mass: f64,
    },

    /// Exact enumeration of the dataset space would exceed the cap.
    #[error("enumeration too large: |Z|^n = {states} exceeds cap {cap}")]
    EnumerationTooLarge {
        /// Number of joint dataset states requested.
        states: u128,
        /// Configured cap.
        cap: u64,
    },

    /// An experiment configuration is inconsistent or incomplete.
    #[error("config error: {0}")]
    Config(String),
}

impl RiskError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        RiskError::InvalidInput(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        RiskError::Config(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, RiskError>;
