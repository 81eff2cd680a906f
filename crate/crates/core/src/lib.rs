//! Open quantum system dynamics through linear maps on density matrices.
//!
//! A system coupled to an environment evolves, once the environment is traced
//! out, under reduced dynamical maps. Where those maps can be inverted they
//! compose into canonical maps between arbitrary times, which in turn define
//! a time-local master equation that stays valid outside the Markovian
//! regime.

pub mod canonical;
pub mod classical;
pub mod error;
pub mod maps;
pub mod master;
pub mod open_system;
pub mod quantum;
pub mod sampling;

pub use error::{Error, Result};
