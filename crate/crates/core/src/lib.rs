//! Stabilizer-testing nonlocal games: construction, exact classical values
//! and certified upper bounds.

pub mod anf;
pub mod bounds;
pub mod cluster;
pub mod error;
pub mod game;
pub mod gf2;
pub mod num;
pub mod parityfn;
pub mod pauli;
pub mod qsim;
pub mod states;

pub use error::{Error, Result};
