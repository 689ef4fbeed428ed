pub mod analysis;
pub mod cli;
pub mod error;
pub mod exponent;
pub mod gadgets;
pub mod grid;
pub mod io;
pub mod operator;
pub mod solvers;
pub mod suite;

pub use error::{Error, Result};
