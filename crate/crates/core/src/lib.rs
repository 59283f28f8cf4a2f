//! Numerical toolkit for time-symmetric charged black-hole initial data.
//!
//! The crate is organised bottom-up:
//!
//! * [`exact_rnt`] evaluates the Reissner–Nordström–Tangherlini family in
//!   closed form and serves as the oracle for everything else.
//! * [`quadrature`] holds the Gauss rules and spectral differentiation used
//!   on sphere grids.
//! * [`surface`] discretises star-shaped hypersurfaces of `R^n` and computes
//!   their curvature and surface integrals.
//! * [`imcf`] runs the inverse mean curvature flow of such surfaces and
//!   records the monotone quantities along it.
//! * [`graph_data`] handles rotationally symmetric graphical initial data:
//!   scalar curvature, energy condition, integral mass formula, ADM flux.
//! * [`inequalities`] assembles all of the above into signed certificates.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exact_rnt;
pub mod graph_data;
pub mod imcf;
pub mod inequalities;
pub mod quadrature;
pub mod surface;

pub use error::{Error, Result};
pub use exact_rnt::RntParams;
