//! Numerical verification engine for submanifolds of `S^n × R` and `H^n × R`.
//!
//! Immersions are described by charts (expression lists or built-in gallery
//! generators). At each sample point the engine builds exact second-order
//! jets of the immersion, derives frames and extrinsic geometry, and
//! evaluates residuals of the structure equations and of the
//! biconservative, biharmonic, parallel-mean-curvature and class-A
//! conditions.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod ambient;
pub mod classify;
pub mod exprlang;
pub mod extrinsic;
pub mod gallery;
pub mod immersion;
pub mod jets;
pub mod runner;
pub mod scene;

pub use ambient::{AmbientVec, ProductSpace};

pub use jets::{Jet2, VecJet2};

/// Tolerance for quantities computed directly from jets.
pub const TOL_JET: f64 = 1e-9;
/// Tolerance after one finite-difference layer.
pub const TOL_FD: f64 = 1e-6;
/// Tolerance after nested finite differences.
pub const TOL_FD2: f64 = 1e-4;
