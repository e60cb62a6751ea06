//! Pseudo-spectral laboratory for the defocusing nonlinear Schrödinger equation
//! `i u_t + Δu = |u|^{p-1} u` on periodic boxes in one and two dimensions.
//!
//! The crate is organised bottom-up:
//!
//! * [`grid`], [`field`], [`spectral`], [`norms`]: discretisation, the Fourier
//!   multiplier calculus (fractional derivatives, Littlewood–Paley pieces, the
//!   I-operator, the free propagator) and Lebesgue/Sobolev norms.
//! * [`solver`]: Strang split-step integration and the conserved functionals.
//! * [`weights`]: radial Morawetz weights and their convexity certificates.
//! * [`analysis`]: conservation-law densities, Morawetz and interaction
//!   actions, commutator kernels, the smoothed one-dimensional action and the
//!   singular double integrals.
//! * [`harness`]: named experiments producing [`harness::EstimateReport`]s,
//!   sweeps and the aggregate CSV.

pub mod analysis;
pub mod error;
pub mod field;
pub mod grid;
pub mod harness;
pub mod norms;
mod pairs;
pub mod quadrature;
pub mod solver;
pub mod spectral;
pub mod weights;

pub use error::{Error, Result};
pub use field::Field;
pub use grid::{make_grid, Grid};
pub use pairs::DEFAULT_PAIR_CAP;
pub use num_complex::Complex64;
