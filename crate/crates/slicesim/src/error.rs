use thiserror::Error;

/// Errors raised while loading or validating configuration and lookup tables.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("failed to parse {path}: {reason}")]
    Parse { path: String, reason: String },
    #[error("invalid value at `{field}`: {reason}")]
    Field { field: String, reason: String },
    #[error("unsupported schema version {found} (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },
    #[error("MCS table error in {path}: {reason}")]
    Lut { path: String, reason: String },
}

/// Runtime errors raised by the simulator proper.
#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(
        "exhaustive association search needs {total} candidates ({orus}^{users}), above the cap \
         of {cap}; use the linear selector at this scale"
    )]
    EnumerationCap {
        total: u128,
        orus: usize,
        users: usize,
        cap: u64,
    },
    #[error("every association candidate violates a hard constraint")]
    NoFeasibleCandidate,
    #[error("non-finite training loss for slice {slice} at training step {step}")]
    NonFiniteLoss { slice: char, step: u64 },
    #[error("replay buffer holds {have} transitions, need {need} to sample a batch")]
    ReplayUnderfilled { have: usize, need: usize },
    #[error("action index {action} outside the {actions}-action grid")]
    ActionOutOfRange { action: usize, actions: usize },
    #[error("checkpoint error at {path}: {reason}")]
    Checkpoint { path: String, reason: String },
    #[error("delay undefined: packet never finished transmission")]
    UndefinedDelay,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl SimError {
    /// Process exit code for the CLI: configuration problems exit with 1,
    /// runtime failures with 2.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Config(_) => 1,
            _ => 2,
        }
    }
}
