//! Bi-Hamiltonian structure, separation of variables and numerical dynamics
//! of the SO(4) Euler top and its XXZ-type symmetric reduction.

pub mod dynamics;
pub mod error;
pub mod leaf;
pub mod scalar;
pub mod so4;
pub mod tensor;
pub mod verify;
pub mod xxz;

pub use error::{Error, Result};
pub use scalar::{Jet, C};
pub use tensor::{BivectorField, Chart, PhasePoint, Residual, ScalarField, VectorField};
