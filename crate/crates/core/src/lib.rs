pub mod copula;
pub mod curve;
pub mod error;
pub mod hazard;
pub mod mc;
pub mod pricer;
pub mod quadrature;

pub use error::{Error, Result};
