use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Grid bounds are not of the form `[-L, L]` with `L > 0`.
    #[error("grid bounds must be symmetric about zero: got [{x_min}, {x_max}]")]
    AsymmetricGrid { x_min: f64, x_max: f64 },

    #[error("grid needs at least {min} points: got {n_points}")]
    TooFewPoints { n_points: usize, min: usize },

    /// Two states (or a state and a grid) live on different grids.
    #[error("grid mismatch between operands")]
    GridMismatch,

    /// The state does not fit in the box: boundary amplitude is too large
    /// relative to the peak, or part of the state was pushed out.
    #[error("state leaks out of the box during {op}: boundary ratio {ratio:.3e}")]
    BoundaryLeak { op: &'static str, ratio: f64 },

    /// A norm-preserving operation changed the norm beyond tolerance,
    /// typically because the grid undersamples the transformed state.
    #[error("norm drift {drift:.3e} during {op} exceeds tolerance")]
    NormDrift { op: &'static str, drift: f64 },

    #[error("state is not normalized: norm^2 = {norm_sq}")]
    NotNormalized { norm_sq: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Requested a conditioning or evaluation point outside the grid.
    #[error("point {value} lies outside the grid [{x_min}, {x_max}]")]
    OutOfGrid { value: f64, x_min: f64, x_max: f64 },

    /// Outcome grid does not carry the full outcome distribution.
    #[error("outcome distribution integrates to {total}, expected 1")]
    Incomplete { total: f64 },

    /// Fock expansion misses too much weight.
    #[error("photon-number basis truncated: residual weight {residual:.3e}")]
    Truncation { residual: f64 },

    #[error("numerical pathology: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
