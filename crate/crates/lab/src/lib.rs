//! Experiments, verification and file formats on top of `fpp-core`.

pub mod commands;
pub mod config;
pub mod dimacs;
pub mod montecarlo;
pub mod output;
pub mod verify;
