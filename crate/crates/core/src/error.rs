use thiserror::Error;

/// Errors produced by model construction and evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("frequency must be positive and finite, got {0} kHz")]
    NonPositiveFrequency(f64),
    #[error("frequency {0} kHz is outside the noise-model validity range [1, 100] kHz")]
    FrequencyOutOfRange(f64),
    #[error("distance {0} m is below the 1 m reference distance")]
    DistanceBelowReference(f64),
    #[error("invalid frequency band [{lo}, {hi}] kHz")]
    InvalidBand { lo: f64, hi: f64 },
    #[error("subcarrier count must be at least 1")]
    NoSubcarriers,
    #[error("quadrature panel count must be at least 1")]
    NoQuadraturePanels,
    #[error("node {0} does not exist in this topology")]
    UnknownNode(usize),
    #[error("need at least 2 sensor nodes, got {0}")]
    TooFewNodes(usize),
    #[error("eavesdropper exclusion radius {radius} m does not fit in a {width} x {height} m region")]
    ExclusionTooLarge { radius: f64, width: f64, height: f64 },
    #[error("could not place the eavesdropper outside the sink exclusion zone after {0} attempts")]
    EvePlacementFailed(usize),
    #[error("invalid topology: {0}")]
    InvalidTopology(String),
    #[error("noise power must be positive and finite, got {0}")]
    NonPositiveNoise(f64),
    #[error("subcarrier power must be non-negative and finite, got {0}")]
    InvalidPower(f64),
    #[error("vector length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("noise profile entries must be positive and finite")]
    InvalidNoiseProfile,
    #[error("power budget must be positive and finite, got {0}")]
    NonPositiveBudget(f64),
    #[error("dual variable must be positive and finite, got {0}")]
    InvalidDualVariable(f64),
    #[error("grid-search oracle supports at most {max} subcarriers, got {got}")]
    OracleTooLarge { max: usize, got: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("cannot summarize an empty record set")]
    NoRecords,
}

pub type Result<T> = std::result::Result<T, Error>;
