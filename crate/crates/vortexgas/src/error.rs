//! Crate error type.

use thiserror::Error;

/// Integration sub-stage at which a near-collision was detected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeunStage {
    Predictor,
    Corrector,
}

impl std::fmt::Display for HeunStage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HeunStage::Predictor => write!(f, "predictor"),
            HeunStage::Corrector => write!(f, "corrector"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("wave index (0,0) is not a valid basis index")]
    ZeroWaveIndex,

    #[error("evaluation point ({0}, {1}) is within the singularity guard of a lattice point")]
    SingularPoint(f64, f64),

    #[error("vortices {i} and {j} coincide (separation {separation:e})")]
    CoincidentPositions { i: usize, j: usize, separation: f64 },

    #[error(
        "near-collision between vortices {i} and {j} (separation {separation:e}) \
         at step {step}, {stage} stage"
    )]
    NearCollision {
        i: usize,
        j: usize,
        separation: f64,
        step: u64,
        stage: HeunStage,
    },

    #[error("rejection sampling exhausted {attempts} attempts without entering the energy window")]
    AcceptanceFailure { attempts: u64 },

    #[error("invalid count: {0}")]
    InvalidCount(String),

    #[error("invalid cluster composition: {0}")]
    InvalidComposition(String),

    #[error(
        "cutoff {cutoff} too small: lattice sum L = {lattice_sum} does not exceed {needed} \
         required by the target window"
    )]
    CutoffTooSmall {
        cutoff: u32,
        lattice_sum: f64,
        needed: f64,
    },

    #[error("invalid range: {0}")]
    InvalidRange(String),

    #[error("slope fit domain error: {0}")]
    FitDomain(String),

    #[error("invalid histogram bins: {0}")]
    InvalidBins(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Attach a step index to a near-collision raised inside a single step.
    pub(crate) fn with_step(self, step: u64) -> Error {
        match self {
            Error::NearCollision {
                i,
                j,
                separation,
                stage,
                ..
            } => Error::NearCollision {
                i,
                j,
                separation,
                step,
                stage,
            },
            other => other,
        }
    }
}
