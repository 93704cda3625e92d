//! Builders for the two reference scenarios.

pub mod gridworld;
pub mod toy;

pub use gridworld::{build_gridworld, GridState, Gridworld, GridworldConfig};
pub use toy::build_toy_example;
