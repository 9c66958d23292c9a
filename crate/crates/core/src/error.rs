use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("posterior has non-positive total mass ({0:e})")]
    ZeroMass(f64),

    #[error("schedule of length {len} exceeds the enumeration cap of {cap}")]
    EnumerationCap { len: usize, cap: usize },

    #[error("the Fourier engine requires positive integer times, got {0}")]
    NonInteger(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("no feasible position was visited by the swarm")]
    NoFeasiblePoint,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
