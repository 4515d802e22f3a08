//! Mode decomposition, scattering data and time-domain diagnostics for the
//! massless scalar wave equation on the exterior of a non-extreme Kerr black hole.
//!
//! Every solve is for a single azimuthal number `k`; fields carry the factor
//! `e^{-ikφ}` implicitly.

// index loops mirror the formulas; `!(x > 0.0)` deliberately rejects NaN
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod legendre;
pub mod quadrature;
pub mod tridiag;
pub mod angular;
pub mod ode;
pub mod radial;
pub mod field;
pub mod energy;
pub mod timedomain;
pub mod spectral;
pub mod wavepacket;
pub mod cli;

pub use error::{Error, Result};
pub use geometry::KerrBackground;
