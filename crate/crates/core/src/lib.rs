//! Multi-robot path planning for Büchi-automaton missions on composed Petri nets.

pub mod alphabet;
pub mod buchi;
pub mod compose;
pub mod milp;
pub mod environment;
pub mod error;
pub mod petri;
pub mod planner;
pub mod quotient;
pub mod render;

pub use error::{Error, Result};
