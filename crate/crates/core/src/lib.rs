//! Nonconforming quadratic finite elements on rectangular grids.
//!
//! The crate centres on the reduced rectangular Morley (RRM) space: piecewise
//! quadratics that are continuous at grid vertices and whose edge-mean normal
//! derivatives are continuous across interior edges. Alongside it live the
//! comparison spaces used to study it (bilinear Q1, Wilson, moment-continuous
//! MC, and the cubic-enriched rectangular Morley RM element), the explicit
//! basis constructions for RRM and MC, sparse assembly, saddle-point and
//! reduced-basis solvers, generalized eigensolvers and convergence
//! post-processing.
//!
//! Everything here is `no_std` with `alloc`; file formats and the command line
//! live in the companion `rrm-cli` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod assembly;
pub mod error;
pub mod local;
pub mod mesh;
pub mod postproc;
pub mod problems;
pub mod quadrature;
pub mod solve;
pub mod spaces;
pub mod sparse;
pub mod study;

mod dense;

pub use error::{Error, Result};
pub use mesh::{Domain, EdgeKind, EntityIndex, RectGrid};
