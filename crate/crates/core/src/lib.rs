//! Ordinal matching on the line under k-centrum objectives.
//!
//! Agents and items sit at exact rational coordinates. The algorithms only
//! see who prefers what; coordinates are for scoring and analysis.

pub mod error;
pub mod harness;
pub mod instances;
pub mod io;
mod lp;
pub mod model;
pub mod optimal;
pub mod ordermatch;
pub mod permgraph;
pub mod rational;
pub mod twosided;

pub use error::{Error, Result};
pub use model::{derive_profile, k_centrum, Instance, Matching, OrdinalProfile};
pub use rational::Rational;
