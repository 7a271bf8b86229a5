use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("cutoff dimension must be at least 2, got {0}")]
    InvalidCutoff(usize),

    #[error("truncation discards probability {tail_mass:.3e}, limit is {limit:.1e}")]
    TruncationOverflow { tail_mass: f64, limit: f64 },

    #[error("cutoff dimension {dim} cannot hold occupation {required}")]
    CutoffTooSmall { required: usize, dim: usize },

    #[error("matrix deviates from Hermitian by {deviation:.3e}")]
    NotHermitian { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("BAT state needs an even photon number >= 2, got {0}")]
    OddN(u32),

    #[error("invalid probe: {0}")]
    InvalidProbe(&'static str),

    #[error("transmissivity must lie in [0, 1], got {0}")]
    BadTransmissivity(f64),

    #[error("state has {leakage:.3e} weight outside the two-ray support")]
    SupportLeakage { leakage: f64 },

    #[error("phase derivative unavailable analytically: {0}")]
    PipelineNotCovariant(&'static str),

    #[error("not a density operator: {0}")]
    NotDensityOperator(&'static str),

    #[error("parity signal is stationary at phi = {phi}")]
    StationaryPoint { phi: f64 },

    #[error("parity signal carries no phase information at alpha = {alpha}")]
    DegenerateParity { alpha: f64 },

    #[error("zero Fisher information gives no finite phase bound")]
    ZeroInformation,

    #[error("shot count must be at least 1")]
    InvalidShots,

    #[error("state has zero norm")]
    ZeroNorm,
}
