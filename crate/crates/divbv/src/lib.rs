//! Numerical laboratory for divergence-controlled symmetric tensor fields.
//!
//! The crate verifies a family of determinant-mass inequalities on
//! lattice-sampled positive semidefinite tensor fields, with three layers:
//!
//! * algebra: packed symmetric matrices ([`symmat`]) and multilinear mixed
//!   determinants ([`mixeddet`]) with their polarization and monotonicity
//!   identities;
//! * fields: cell-centered tensor and scalar fields on rectangular boxes
//!   ([`grid`], [`field`], [`scalar`]) with divergence measures on the
//!   dual lattice and the determinant-mass functionals built from them;
//! * dynamics: discrete gas flows ([`gas`], [`flows`]) whose mass,
//!   momentum and energy feed pressure and velocity-spread estimates with
//!   explicit scaling and boost covariance.
//!
//! Every check returns a structured [`report::Report`] row; binary
//! snapshots round-trip bit-exactly through [`io`]. [`sharpness`] probes
//! how tightly field families approach the sharp benchmark constants.

// Indexed loops mirror the lattice stencils and `!(x > 0.0)` guards are
// NaN-robust by construction; iterator or partial_cmp rewrites would
// obscure both.
#![allow(clippy::needless_range_loop)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod field;
pub mod flows;
pub mod gas;
pub mod grid;
pub mod io;
pub mod mixeddet;
pub mod report;
pub mod scalar;
pub mod sharpness;
pub mod symmat;

pub use error::{Error, Result};
pub use grid::Grid;
pub use report::{Report, Status};
