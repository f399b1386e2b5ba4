//! Work extraction from open bipartite quantum systems.
//!
//! The crate computes ergotropy, local ergotropy and lower bounds on the
//! extended local ergotropy via bang-bang protocols that alternate free
//! system-environment evolution with instantaneous unitaries on the system.
//! Models cover the truncated Jaynes-Cummings qubit-cavity system and
//! Heisenberg spin chains.

pub mod cli;
pub mod control;
pub mod ergotropy;
pub mod error;
pub mod models;
pub mod optim;
pub mod protocols;
pub mod qmath;

pub use error::{Error, Result};
