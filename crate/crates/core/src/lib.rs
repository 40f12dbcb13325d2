//! Greedy largest-first fragmentation of the unit interval: split laws, a
//! simulation engine, empirical statistics, stationary theory, subtree
//! profiles and the discrete heavy-tailed variant.

pub mod discrete;
pub mod empirics;
pub mod engine;
pub mod error;
pub mod laws;
pub mod profile;
pub mod quad;
pub mod replicate;
pub mod stationary;
pub mod verify;

pub use engine::{run_steps, run_to_cutoff, FragResult, FragState, Interval, SplitEvent};
pub use error::{Error, Result};
pub use laws::{LawDescriptor, SplitLaw};
