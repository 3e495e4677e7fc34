//! Hecke orbits on modular curves, differentials of the third kind and
//! regularized Petersson pairings.

pub mod classical_forms;
pub mod eigen;
pub mod error;
pub mod fixtures;
pub mod halfplane;
pub mod harmonic;
pub mod lattice;
pub mod mfcoeffs;
pub mod modval;
pub mod numeric;
pub mod operators;
pub mod pairing;
pub mod qseries;
pub mod thirdkind;
pub mod verify;

pub use error::{Error, Result};
