//! Mean-field equilibria, normal modes, linearized photon–phonon fluctuations
//! and cavity-cooling rates of a trapped-ion chain inside a driven lossy
//! optical cavity, plus a scenario runner that turns parameter sweeps into
//! figure-ready tables.

pub mod equilibrium;
pub mod error;
pub mod fluctuations;
pub mod linalg;
pub mod model;
pub mod modes;
pub mod rates;
pub mod sweep;

pub use error::{Error, Result};
