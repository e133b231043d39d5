//! Battery recharging time statistics for RIS-assisted wireless power transfer.

pub mod brt;
pub mod channel;
pub mod error;
pub mod montecarlo;
pub mod power;
pub mod quad;
pub mod specfun;

pub use error::{Error, Result};
