//! Numerical verification engine for para-Hermite Einstein metrics built from
//! hyperheavenly key functions.
//!
//! Everything here is pure computation over truncated Taylor jets: metrics are
//! assembled from key functions (or from the reduced potentials `M(q,w)` and
//! `F(w)`), curvature is taken analytically through the jets, and the claimed
//! properties (Einstein condition, Petrov-Penrose types, congruence optics,
//! homothetic symmetries, reduced ODE/PDE systems) are checked as residuals.
//!
//! The crate is `no_std` and needs only `alloc`. File formats, sampling and
//! the command line live in the companion `phe` crate.

#![no_std]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod congruence;
pub mod conventions;
pub mod error;
pub mod expr;
pub mod fields;
pub mod geometry;
pub mod petrov;
pub mod jet;
pub mod linalg;
pub mod ode;
pub mod quadrature;
pub mod reduced;
pub mod symmetry;

pub use error::{Error, Result};
pub use expr::Expr;
pub use jet::{Jet, MultiIndex};

/// A point of the 4-dimensional chart. Components are ordered
/// `(q, p, x, y)` for hyperheavenly charts and `(q, p, x, w)` (or `u`) for
/// the reduced charts of the type-[II] families.
pub type Point = [f64; 4];
