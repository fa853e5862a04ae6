//! Error type shared by every module of the crate.
//!
//! Numerical *slack* (clamped determinants, admissibility drift, Monte-Carlo
//! skips) is never an error: it is recorded on results and report rows.
//! Errors are reserved for structurally unusable inputs.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Operands disagree in dimension, length, or axis layout.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Supported matrix dimensions are 2 through 6.
    #[error("unsupported matrix dimension {0} (supported: 2..=6)")]
    UnsupportedDimension(usize),

    /// Schur complement requires a strictly positive (1,1) pivot.
    #[error("non-positive pivot a11 = {0} in Schur complement")]
    NonPositivePivot(f64),

    /// Rank-one assembly requires a non-negative density.
    #[error("negative density rho = {0} in rank-one assembly")]
    NegativeDensity(f64),

    /// A matrix argument failed the positive semidefinite test.
    #[error("argument {index} is not positive semidefinite (min eigenvalue {min_eig:e})")]
    NotPsd { index: usize, min_eig: f64 },

    /// A tensor field is not certified pointwise positive semidefinite.
    #[error("tensor field is not certified PSD (call assert_psd first): {0}")]
    NotPsdField(String),

    /// Fields passed to a multi-field functional live on different grids.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// Divergence mass vanished while the determinant integral did not.
    #[error("zero divergence mass with positive determinant integral ({lhs})")]
    ZeroDivMass { lhs: f64 },

    /// A per-row divergence mass vanished in the product-form estimate.
    #[error("row {0} of the divergence has zero mass")]
    ZeroRowMass(usize),

    /// A kernel singularity coincides with a quadrature node.
    #[error("kernel singular point coincides with a quadrature node")]
    SingularOnNode,

    /// The direction omega annihilates the field where its determinant is positive.
    #[error("degenerate direction: omega^T A omega = 0 at cell {cell} where det A > 0")]
    DegenerateDirection { cell: usize },

    /// Flow data is structurally broken (negative density or pressure).
    #[error("negative state: {field} = {value} at cell {cell}, snapshot {snapshot}")]
    NegativeState {
        snapshot: usize,
        cell: usize,
        field: &'static str,
        value: f64,
    },

    /// A kernel functional needs a positive reference energy.
    #[error("zero initial energy: kernel weights undefined")]
    ZeroEnergy,

    /// Transport characteristics cross before the requested time.
    #[error("characteristics cross at t = {0} (Jacobian no longer positive)")]
    CharacteristicCrossing(f64),

    /// The compact support of a solver run reached the grid boundary.
    #[error("support reached the grid boundary at step {0}")]
    SupportReachedBoundary(usize),

    /// The solver produced an unusable state.
    #[error("non-physical state at step {step}: {what}")]
    NonPhysicalState { step: usize, what: String },

    /// A fixed time step exceeds the stability bound.
    #[error("fixed dt = {dt} violates the CFL bound {bound} at step {step}")]
    CflViolation { step: usize, dt: f64, bound: f64 },

    /// Total cell count exceeds the configured budget.
    #[error("grid of {cells} cells exceeds the budget of {budget}")]
    GridTooLarge { cells: usize, budget: usize },

    /// Malformed field or flow file.
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
