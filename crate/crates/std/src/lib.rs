//! Sweeps, parallel Monte Carlo driver, file formats and the `nrcsim` CLI
//! on top of [`nrcsim_core`].

pub mod cli;
pub mod config;
pub mod driver;
pub mod experiments;
pub mod output;
