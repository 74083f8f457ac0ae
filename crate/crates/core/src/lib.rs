pub mod chain;
pub mod cli;
pub mod error;
pub mod fokker_planck;
pub mod kernel;
pub mod measures;
pub mod potential;

pub use error::{RatchetError, Result};
pub use fokker_planck::DensityGrid;
pub use potential::RatchetPotential;
