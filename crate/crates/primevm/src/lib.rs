//! Spiking-neuron substrate, prime attractors, one-shot symbolic memory,
//! a second-degree hash table, a register switch box and a symbolic
//! machine assembled from them.

pub mod analysis;
pub mod assembler;
pub mod attractors;
pub mod computer;
pub mod config;
pub mod error;
pub mod hashtable;
pub mod memory;
pub mod pattern;
pub mod substrate;
pub mod switchbox;

pub use error::{Error, Result};
pub use pattern::Pattern;
