//! Semi-spectral solver and estimate laboratory for the two-dimensional
//! stationary Navier-Stokes equations linearized around a uniform flow
//! `alpha e1`.
//!
//! The x2 direction is handled by FFT; x1 is treated as an evolution
//! variable and each xi2 mode is integrated with exponential recursions.

pub mod besov;
pub mod dump;
pub mod ensemble;
pub mod error;
pub mod estimates;
pub mod field;
pub mod fixed_point;
pub mod grid;
pub mod littlewood_paley;
pub mod norm;
pub mod oseen;
pub mod spectral;

pub use error::{Error, Result};
pub use field::{Components, ScalarField, SemiSpectralField, TensorForcing, VectorField};
pub use grid::Grid2;
pub use littlewood_paley::{BandRange, DyadicProfile};
