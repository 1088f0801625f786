pub mod analysis;
pub mod dynamics;
pub mod energy;
pub mod error;
pub mod io;
pub mod kernel;
pub mod spectral;
pub mod state;

pub use error::{Error, Result};
