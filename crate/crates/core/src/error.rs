use thiserror::Error;

pub type Result<T> = std::result::Result<T, SfpError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SfpError {
    #[error("matrix is not Hermitian (max asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (eigenvalue {0:.3e})")]
    NotPositive(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("invalid mixing matrix: {0}")]
    InvalidMixing(String),

    #[error("basis is not orthonormal (residual {0:.3e})")]
    NotOrthonormal(f64),

    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),

    #[error("POVM effects do not sum to identity (residual {0:.3e})")]
    IncompletePovm(f64),

    #[error("outcome {outcome} has probability {probability:.3e}")]
    ZeroProbabilityOutcome { outcome: usize, probability: f64 },

    #[error("target has weight {weight:.3e} on effect {outcome}")]
    TargetAnnihilated { outcome: usize, weight: f64 },

    #[error("target has vanishing weight on effect {0} but non-zero overlap term")]
    DegenerateTarget(usize),

    #[error("duration {duration} is not an integer number of steps of {dt}")]
    NonCommensurateDuration { duration: f64, dt: f64 },

    #[error("operation requires a qubit (d = 2), got d = {0}")]
    UnsupportedDimension(usize),

    #[error("need at least {needed} samples, have {have}")]
    InsufficientSamples { needed: usize, have: usize },

    #[error("series too short for a spectrum: {have} < {needed}")]
    TooShort { needed: usize, have: usize },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("numerical check failed: {0}")]
    Numerical(String),

    #[error("run {run}, cycle {cycle}: {source}")]
    AtCycle {
        run: usize,
        cycle: usize,
        #[source]
        source: Box<SfpError>,
    },
}

impl SfpError {
    /// Config errors map to a different CLI exit code than numerical failures.
    pub fn is_config(&self) -> bool {
        match self {
            SfpError::Config(_) | SfpError::UnknownPreset(_) => true,
            SfpError::AtCycle { source, .. } => source.is_config(),
            _ => false,
        }
    }

    pub(crate) fn at_cycle(self, run: usize, cycle: usize) -> Self {
        SfpError::AtCycle {
            run,
            cycle,
            source: Box::new(self),
        }
    }
}
