//! Design, simulation and reconstruction for metasurface-based multi-photon
//! polarization tomography.
//!
//! Conventions: Stokes order `(S0, S1, S2, S3)` pairs with `(I, σz, σx, σy)`;
//! multi-photon basis states are ordered with photon slot 0 as the most
//! significant bit; port indices are 0-based in the API and 1-based in files.

pub mod error;
pub mod frames;
pub mod io;
pub mod linalg;
pub mod metagrating;
pub mod polarization;
pub mod reconstruction;
pub mod simulator;

pub use error::{Error, Result};
