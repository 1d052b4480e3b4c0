//! Opinion dynamics on the unit sphere.
//!
//! Agents hold unit-vector opinions; an influencer broadcasts unit-vector
//! interventions which every agent assimilates in proportion to its current
//! agreement. This crate provides the update rule, scheduling and simulation,
//! polarization metrics, influencer strategies (densest hemisphere, spherical
//! caps, one-shot interventions) and diagnostics for two dueling influencers.

pub mod duel;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod stats;
pub mod strategies;

pub use error::{Error, Result};
pub use geometry::{Eta, UnitVector};

/// The crate-wide deterministic generator.
pub type SimRng = rand_chacha::ChaCha8Rng;

/// Builds the crate-wide generator from a 64-bit seed.
pub fn seeded_rng(seed: u64) -> SimRng {
    use rand::SeedableRng;
    SimRng::seed_from_u64(seed)
}
