//! Core algorithms for maximal flows through lattice cylinders in first
//! passage percolation.
//!
//! The crate is `no_std` (it needs `alloc`): exact cylinder geometry, capacity
//! laws with reproducible sampling, an exact max-flow/min-cut solver with a
//! brute-force oracle, and the slab decomposition and tail-bound calculators
//! used to study upper large deviations of the flows `τ` and `φ`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod capacities;
pub mod deviations;
pub mod exact;
pub mod lattice;
pub mod maxflow;

pub use exact::Rational;
