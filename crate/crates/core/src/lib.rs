//! Grid simulator for a quadrature quantum nondemolition measurement built
//! from a beam splitter, homodyne detection, feedback displacement and
//! single-mode squeezing, together with its one-shot Gaussian measurement
//! operator.
//!
//! Units: `[x, p] = i/2`, vacuum variance `1/4` in both quadratures.

pub mod ensemble;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod grid;
pub mod protocol;
mod spectral;
pub mod state;
pub mod two_mode;
pub mod verify;
pub mod wigner;

pub use error::{Error, Result};
pub use grid::QuadratureGrid;
pub use state::{Moments, RawMoments, SingleModeState};
pub use two_mode::{beam_splitter, beam_splitter_conditioned, TwoModeState};

/// Default box half-width for single runs and ensembles.
pub const REFERENCE_HALF_WIDTH: f64 = 8.0;
/// Default number of grid points.
pub const REFERENCE_POINTS: usize = 1024;
/// Box half-width for the identity verification matrix: large enough that
/// the `1/q`-amplified intermediate state of `q = 0.3, x_m = -2` fits.
pub const VERIFY_HALF_WIDTH: f64 = 12.0;
/// Pass threshold for identity residuals.
pub const IDENTITY_THRESHOLD: f64 = 1e-4;

/// The reference grid `[-8, 8] × 1024`.
pub fn reference_grid() -> QuadratureGrid {
    QuadratureGrid::symmetric(REFERENCE_HALF_WIDTH, REFERENCE_POINTS).expect("valid reference grid")
}

/// The wider grid `[-12, 12] × 1024` used wherever amplified states occur.
pub fn verification_grid() -> QuadratureGrid {
    QuadratureGrid::symmetric(VERIFY_HALF_WIDTH, REFERENCE_POINTS).expect("valid verification grid")
}
