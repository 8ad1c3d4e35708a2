//! Causal bandits over linear structural equation models with soft
//! interventions.

pub mod analysis;
pub mod environment;
pub mod estimation;
pub mod harness;
pub mod policies;
pub mod rng;
pub mod sem;
