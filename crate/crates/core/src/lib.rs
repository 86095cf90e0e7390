//! Verification laboratory for relativistic systems made of a worldline and a
//! single spinor or null vector.
//!
//! The crate is organised bottom-up:
//!
//! - [`ad`]: forward-mode differentiation used by every derivative in the crate,
//! - [`algebra`] and [`spinor`]: Minkowski vectors, spinors and spinor tetrads,
//! - [`invariants`]: gauge-invariant Lorentz scalars and the invariant count,
//! - [`form`]: the Lagrangian family `F(P, Q)` behind a runtime registry,
//! - [`noether`]: conserved charges and Poincaré Casimirs,
//! - [`chart`] and [`degeneracy`]: velocity Hessians in the lab-time chart,
//! - [`dynamics`]: free motion, Euler–Lagrange residuals and integration,
//! - [`suite`] and [`report`]: named verification suites and their reports.

pub mod ad;
pub mod algebra;
pub mod chart;
pub mod degeneracy;
pub mod dynamics;
pub mod error;
pub mod form;
pub mod invariants;
pub mod noether;
pub mod report;
pub mod spinor;
pub mod suite;

pub use error::{Error, Result};
