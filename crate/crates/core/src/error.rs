use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid erasure profile: {0}")]
    InvalidProfile(String),
    #[error("invalid channel state {0:?}: indicators must be 0 or 1")]
    InvalidState([u8; 4]),
    #[error("situation number {0} outside 1..=16")]
    InvalidSituation(u8),
    #[error("rate pair ({0}, {1}) lies outside the outer bound")]
    OutsideRegion(f64, f64),
    #[error("unsupported erasure regime: {0}")]
    Unsupported(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("tracker replica diverged at slot {slot}: {detail}")]
    ReplicaDivergence { slot: usize, detail: String },
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
}
