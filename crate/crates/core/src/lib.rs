//! Stream function / vorticity finite elements for the 2D Stokes problem.
//!
//! The vorticity is split into an `H^1_0` part, solved on the coarse mesh,
//! and a boundary part spanned by discrete harmonic lifts of the coarse
//! boundary hat functions computed on a uniformly refined copy of the mesh.
//! Refining only the harmonic space stabilizes the classical P1-P1 scheme
//! while keeping three decoupled SPD solves.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod error;
pub mod fem;
pub mod field;
pub mod harmonic;
pub mod hierarchy;
pub mod mesh;
pub mod report;
pub mod space;
pub mod stokes;
pub mod verification;
pub mod vtk;

pub use error::{Error, Result};
pub use field::ScalarField;
pub use hierarchy::MeshHierarchy;
pub use mesh::{Point, TriangleMesh};
