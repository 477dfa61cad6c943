//! Decoupling-type norms on periodic grids.
//!
//! The crate is organised bottom up:
//!
//! * [`grid`]: torus grids, fields, unitary FFTs, Fourier multipliers, IO.
//! * [`aniso`]: parabolic dilations, the anisotropic norm and maximal function.
//! * [`frames`]: radial and directional frequency profiles, cap partitions.
//! * [`transform`]: the discretised wave packet transform and its adjoint.
//! * [`norms`]: continuous and discrete decoupling norms, square functions,
//!   critical exponents.
//! * [`experiments`]: seeded scaling experiments and their reports.
//! * [`cli`]: the command line front end used by the `decnorm` binary.

pub mod aniso;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod frames;
pub mod grid;
pub mod norms;
pub mod transform;

pub use error::{Error, Result};
pub use num_complex::Complex64;
