//! Computable pieces of cylindrical contact homology for supersimple contact
//! forms: operator spectra, index arithmetic, rational chain complexes,
//! evaluation maps, a linear gluing sandbox and orientation signs.

pub mod bundled;
pub mod complex;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod gluing;
pub mod index;
pub mod orientation;
pub mod rational;
pub mod spectral;

pub use error::{Error, Result};
