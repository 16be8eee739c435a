//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("equilibrium solve did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("ions {i} and {j} closer than the degeneracy threshold (separation {separation:.3e})")]
    DegeneratePositions { i: usize, j: usize, separation: f64 },

    #[error("transverse confinement too weak, chain unstable against zig-zag (min eigenvalue {min_eigenvalue:.3e} in units of the squared axial frequency)")]
    ZigZagInstability { min_eigenvalue: f64 },

    #[error("matrix is not positive definite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("tweezer anti-confinement collapses mode {mode} (shifted squared frequency {shifted_sq:.3e})")]
    ModeCollapse { mode: usize, shifted_sq: f64 },

    #[error("modulation frequency within the resonance guard of mode {mode} (detuning {detuning:.3e} rad/s)")]
    ResonantDrive { mode: usize, detuning: f64 },

    #[error("power-law fit is degenerate: {0}")]
    DegenerateFit(String),

    #[error("sectors with particle number {n} are not supported (max 2)")]
    UnsupportedSector { n: u32 },

    #[error("thermal ensemble would exceed the configured cap ({cap} configurations); use sampling")]
    EnsembleTooLarge { cap: usize },

    #[error("tweezer curvature {ratio:.2}x the squared axial frequency breaks the perturbative regime")]
    CurvatureTooStrong { ratio: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
