pub mod basis;
pub mod diagnostics;
pub mod error;
mod fft;
mod linalg;
pub mod operators;
pub mod particles;
pub mod propagation;
pub mod scenarios;
pub mod solvers;

pub use error::{Error, Result};
