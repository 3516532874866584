pub mod bounds;
pub mod cli;
pub mod codes;
pub mod error;
pub mod pauli;
pub mod qcore;
pub mod qracse;
pub mod reproduce;
pub mod teleport;

pub use error::{QracError, Result};
