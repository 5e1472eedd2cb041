//! Single-photon reflectivity of N two-level atoms chirally coupled to a
//! single-sided nanophotonic cavity, in the weak-excitation limit, and a
//! simulator for heralded state carving built on those spectra.
//!
//! All rates and detunings are in units of the total single-atom decay rate
//! γ, which is fixed to 1 internally.
//!
//! ```
//! use chiralcav::{DriveParams, SystemParams, reflectivity};
//!
//! // Two atoms, fully left-directional emission, ξ = 0, C = 4.
//! let params = SystemParams::new(2, 1.0, 20.0, 100.0, 300.0, 0.0);
//! let r = reflectivity(&params, &DriveParams::new(0.0)).unwrap();
//! assert!((r - 0.25).abs() < 1e-12);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod carving;
mod error;
pub mod params;
pub mod relax;
pub mod solver;
pub mod spectrum;

pub use error::{Error, Result};
pub use params::{DriveParams, SystemParams, ValidationReport, Violation};
pub use solver::{
    build_linear_system, reflection_amplitude, reflectivity, solve_steady_state, LinearSystem,
    SteadyState,
};
