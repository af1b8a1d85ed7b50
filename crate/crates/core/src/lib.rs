//! Mirror randomized benchmarking on lattice-connected qubits.
//!
//! Sample mirror circuits ([`circuit`], [`design`]), run them under stochastic
//! Pauli error models ([`noise`], [`sim`]), fit the polarization decay
//! ([`analysis`]) and compare the fitted rate with the average layer
//! infidelity. [`campaign`] ties the steps together and [`oracle`] holds
//! brute-force references for small instances.

pub mod bits;
pub mod campaign;
pub mod circuit;
pub mod analysis;
pub mod clifford;
pub mod design;
pub mod error;
pub mod graph;
pub mod layer;
pub mod noise;
pub mod oracle;
pub mod pauli;
pub mod sampling;
pub mod seed;
pub mod sim;
pub mod tableau;

pub use bits::BitString;
pub use clifford::Clifford1Q;
pub use error::{Error, Result};
pub use graph::ConnectivityGraph;
pub use layer::{Layer, Op, Placement};
pub use pauli::{Pauli, PauliString};
