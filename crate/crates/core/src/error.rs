use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("unknown item `{0}`")]
    UnknownItem(String),

    #[error("unknown agent `{0}`")]
    UnknownAgent(String),

    #[error("agent `{agent}` has an invalid preference list: {reason}")]
    Preference { agent: String, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error(
        "instance too large for exact mode: more than {cap} branches; use sampled mode or raise the cap"
    )]
    BranchCap { cap: u64 },

    #[error("enumeration too large: {what} exceeds the cap of {cap}")]
    EnumerationCap { what: String, cap: u64 },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
