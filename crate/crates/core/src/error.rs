use thiserror::Error;

/// Errors produced by reservoir construction and analysis.
#[derive(Debug, Error)]
pub enum Error {
    /// The random connectivity draw has zero spectral radius, so it cannot be
    /// scaled to a positive target radius. Retry with a different seed.
    #[error("degenerate connectivity: the random draw has zero spectral radius")]
    DegenerateConnectivity,

    /// A driving sequence contains a non-finite sample.
    #[error("invalid drive: non-finite sample at step {index}")]
    InvalidDrive { index: usize },

    /// Every node was excluded by the variance guard, so no global consistency
    /// can be formed.
    #[error("degenerate ensemble: all nodes excluded by the variance guard")]
    DegenerateEnsemble,

    /// A readout series is constant, so its consistency correlation is undefined.
    #[error("zero-variance readout")]
    ZeroVarianceReadout,

    /// The ridge normal system is singular.
    #[error("rank-deficient design; increase lambda")]
    RankDeficientDesign,

    /// Every principal direction of the response falls below the null
    /// threshold; there is nothing to whiten.
    #[error("degenerate response: all principal directions below the null threshold")]
    DegenerateResponse,

    /// Conditional Lyapunov spectra are defined for the deterministic map only.
    #[error("noisy dynamics (noise mix > 0) are not supported for Lyapunov spectra")]
    NoisyTangent,

    /// A parameter violates its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
