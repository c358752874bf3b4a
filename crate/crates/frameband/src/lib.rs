//! Band-limited anisotropic frame analysis on the frequency plane.
//!
//! The crate constructs second-generation curvelets, cone-adapted shearlets
//! and separable Meyer-type wavelets from their frequency-domain windows,
//! and provides the numerical machinery around them:
//!
//! - cross-Grammian inner products by frequency-domain quadrature, the
//!   analytic shear/orientation index sets, displacement vectors and
//!   `Op,p` norms ([`gram`], [`sweep`]),
//! - FFT tile transforms with exact Parseval reconstruction ([`transform`]),
//! - n-term approximation benchmarks on cartoon-like images ([`cartoon`]),
//! - per-scale `l1` geometric separation of point and curve mixtures
//!   ([`separation`]).
//!
//! All constructions are pure functions of immutable inputs; grids are plain
//! row-major `Vec<f64>`/`Vec<Complex64>` fields (see [`grid`]).

pub mod atoms;
pub mod cartoon;
pub mod cli;
pub mod fits;
pub mod geometry;
pub mod gram;
pub mod grid;
pub mod separation;
pub mod sweep;
pub mod transform;
pub mod windows;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Quadrature grid cannot resolve the phase oscillation within the
    /// configured budget; the caller gets a diagnostic instead of garbage.
    #[error("under-resolved quadrature: needs {needed} points per axis, cap is {cap} ({detail})")]
    UnderResolved {
        needed: usize,
        cap: usize,
        detail: String,
    },
    /// Mismatched grid provenance between coefficient sets and plans.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    /// Rejection sampling for a cartoon image exhausted its attempt budget.
    #[error("cartoon rejection sampling failed after {attempts} attempts (seed {seed}, nu {nu})")]
    CartoonRejection { seed: u64, nu: f64, attempts: u32 },
    /// A least-squares fit was requested on degenerate data.
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    /// Decay fit on a slice with no overlapping entries.
    #[error("no overlap in slice: all inner products below {0:e}")]
    NoOverlap(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
