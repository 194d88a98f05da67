//! Spectral solver and verification harness for time-periodic Stokes flow past a
//! body rotating about the x₁-axis, discretized on a time circle times a periodic box.

pub mod auxiliary;
pub mod error;
mod fft;
pub mod field;
pub mod generators;
pub mod grid;
mod interp;
pub mod io;
mod jet;
pub mod norms;
pub mod report;
pub mod resonance;
pub mod rotation;
pub mod spectral;
pub mod symbols;
pub mod synthesis;
pub mod verify;

pub use error::{Error, Result};
pub use field::{BoxField, BoxSpectrum, ModeSeries, PhysicalField, SpectralField};
pub use grid::{BoxGrid, GridSpec};
pub use num_complex::Complex64;
pub use report::{NormEntry, ProblemKind, SolveReport};
