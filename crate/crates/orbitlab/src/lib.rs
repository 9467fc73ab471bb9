//! Numerical laboratory for planar saddle return maps and polynomial dynamics.
//!
//! The crate is organized around five subsystems:
//!
//! * [`model`] — the model diffeomorphism: a linear saddle in normal
//!   coordinates composed with a polynomial global map carrying a
//!   finite-order tangency and its unfolding parameters.
//! * [`renorm`] — rescaled return maps, the unfolding-parameter schedule,
//!   the one-dimensional polynomial limit family, and grid-based
//!   convergence measurements.
//! * [`census`] — periodic-point finders (exact in one dimension, Newton
//!   in two), multiplier classification, degenerate-orbit splitting, and
//!   dynamical zeta partial sums.
//! * [`tower`] — horseshoe rectangle geometry, tower index selection,
//!   localized bump perturbations, and the higher-order tangency solver.
//! * [`polymap`] — vector polynomials of small dimension and degree,
//!   exact iterate composition, periodic-point enumeration with Bezout
//!   caps, and Monte-Carlo hyperbolicity statistics.
//!
//! The [`harness`] module ties the subsystems to a reproducible experiment
//! runner used by the `orbitlab` binary.

pub mod census;
pub mod config;
pub mod error;
pub mod geom;
pub mod harness;
pub mod model;
pub mod poly;
pub mod polymap;
pub mod renorm;
pub mod tower;

pub use error::{Error, Result};
