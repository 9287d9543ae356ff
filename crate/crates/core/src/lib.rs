pub mod catalog;
pub mod cli;
pub mod coeff;
pub mod error;
pub mod io;
pub mod stats;
pub mod tensor;
pub mod spectral;
pub mod weights;

pub use error::{Error, Result};
