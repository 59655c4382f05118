pub mod cauchy;
pub mod embedding;
pub mod error;
pub mod format;
pub mod grid;
pub mod hermite;
pub mod lattice;
mod linalg;
pub mod run;
pub mod stft;
pub mod twisted;
pub mod weights;

pub use error::{Error, Result};
pub use ndarray;
pub use num_complex;
