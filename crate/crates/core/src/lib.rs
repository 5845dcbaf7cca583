pub mod assumptions;
pub mod coupling;
pub mod eddy;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod io;
pub mod materials;
pub mod mesh;
pub mod phase;
pub mod thermal;
pub mod verification;

pub use error::{Error, Result};
