use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("{what} out of domain: {value}")]
    Domain { what: &'static str, value: f64 },

    /// A corruption scheme whose feedback does not depend on the reward
    /// (p00 + p11 = 1), or a corruption function with zero slope.
    #[error("corruption on arm {arm} is not invertible (slope 0)")]
    NonInvertibleScheme { arm: usize },

    #[error("arm {arm} cannot be distinguished from the optimal arm (zero divergence)")]
    UnidentifiableModel { arm: usize },

    #[error("arm index {arm} out of range for {arm_count} arms")]
    ArmOutOfRange { arm: usize, arm_count: usize },

    #[error("corruption function is not strictly {direction} near x = {at}")]
    NotMonotone { direction: &'static str, at: f64 },

    #[error("corruption function maps {x} to {y}, outside [0, 1]")]
    OutOfUnitRange { x: f64, y: f64 },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("unknown policy tag `{0}`")]
    UnknownPolicy(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(what: &'static str, value: f64) -> Self {
        Error::Domain { what, value }
    }
}
