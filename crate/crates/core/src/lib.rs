//! Verification strategies for stabilizer code subspaces.
//!
//! The crate builds test strategies made of local Pauli measurements, computes
//! their spectral gaps with a dense oracle and a syndrome-basis engine, and
//! simulates the accept/reject protocol.

pub mod bits;
pub mod codes;
pub mod dense;
mod error;
pub mod graphlift;
pub mod pauli;
pub mod report;
pub mod sim;
pub mod spectral;
pub mod strategy;

pub use error::{Error, Result};

/// Size caps shared by every exponential computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Largest generator count a group may be enumerated over.
    pub enumeration_cap: usize,
    /// Largest qubit count for dense matrices.
    pub dense_cap: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self { enumeration_cap: pauli::DEFAULT_ENUMERATION_CAP, dense_cap: dense::DEFAULT_DENSE_CAP }
    }
}
