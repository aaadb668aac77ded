//! Simulation library for channel-resilient RF device fingerprinting.
//!
//! Models a population of transmitters that differ only through small
//! hardware impairments (IQ imbalance, phase noise, CFO, DC offset, PA
//! nonlinearity), sends their QPSK traffic through Rayleigh flat-fading
//! channels, and compares three identification pipelines end to end:
//!
//! * **SISO** — raw received samples, no channel compensation,
//! * **FBE**  — 3x3 MIMO with Tarokh rate-1/2 STBC and full blind channel
//!   estimation from second-order statistics (sign ambiguity only),
//! * **PBE**  — the same MIMO link with subspace-based partial blind
//!   estimation (one residual complex-scalar ambiguity).
//!
//! Recovered (or raw) I/Q frames feed a small from-scratch CNN classifier;
//! the experiment harness sweeps path gain, Doppler, and impairment
//! intensity and reports testing accuracy and accuracy gaps as CSV.
//!
//! Everything is deterministic given a master seed; see
//! [`numerics::RandomStream`].

pub mod channel;
pub mod cnn;
pub mod dataset;
pub mod estimation;
pub mod harness;
pub mod impairments;
pub mod numerics;
pub mod stbc;

pub use numerics::RandomStream;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (relative asymmetry {asym:.3e})")]
    NotSymmetric { asym: f64 },
    #[error("negative variance: {0}")]
    NegativeVariance(f64),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("estimation window too small: {got} blocks, need at least {min}")]
    InsufficientSamples { got: usize, min: usize },
    #[error("ambiguous estimate: top-eigenvalue gap {gap:.3e} below threshold")]
    AmbiguousEstimate { gap: f64 },
    #[error("ill-conditioned signal subspace: null-space separation {ratio:.3e}")]
    IllConditionedSubspace { ratio: f64 },
    #[error("zero vector where a nonzero vector is required")]
    ZeroVector,
    #[error("time index moved backwards: {t} < {last}")]
    TimeRegression { t: u64, last: u64 },
    #[error("zero-energy frame rejected")]
    ZeroFrame,
    #[error("too few frames per device: {got}, need at least {min}")]
    TooFewFrames { got: usize, min: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("training diverged: loss is not finite at epoch {epoch}")]
    Diverged { epoch: usize },
    #[error("{dropped} of {total} estimation windows dropped (> {limit_pct}% limit)")]
    TooManyDrops {
        dropped: usize,
        total: usize,
        limit_pct: f64,
    },
    #[error("empty dataset: {0}")]
    EmptyDataset(String),
    #[error("bad file format: {0}")]
    BadFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
