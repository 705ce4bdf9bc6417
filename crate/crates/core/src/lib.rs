//! Simulation suite for hybrid molecule-atom quantum arrays.
//!
//! The library is organized around what a desk-scale study of such an
//! architecture needs:
//!
//! - [`qdyn`]: dense time-dependent Schrodinger propagation on small labeled
//!   tensor-product spaces, with optional non-Hermitian decay terms, unitary
//!   extraction, and average gate fidelity.
//! - [`gates`]: pulse-level simulations of the entangling operations native to
//!   the platform (molecule-atom controlled phase via a Rydberg exchange
//!   blockade, molecule-molecule iSWAP and driven controlled phase).
//! - [`budget`]: gate error budgets scaled from a calibrated anchor platform
//!   across molecular species, Rydberg level matching, and GHZ fidelity
//!   projections.
//! - [`stab`]: a generalized Pauli stabilizer tableau over Z_d (d = 2, 3) with
//!   measurement-based entanglement protocols (GHZ chains, a Z3 toric code)
//!   and a brute-force dense reference simulator used to cross-check them.
//! - [`criticality`]: exact-diagonalization probes of XXZ and three-state
//!   clock chains, plus ancilla-mediated weak measurement channels.
//!
//! All frequencies passed to this library are angular (rad/s). Interfaces
//! that read user-facing configuration accept Hz and convert at the boundary.

pub mod budget;
pub mod criticality;
pub mod gates;
pub mod qdyn;
pub mod stab;

pub use qdyn::{average_gate_fidelity, evolve, extract_unitary};
pub use qdyn::{EvolutionResult, HilbertSpace, StateVector, StepControl, TimeDependentHamiltonian};
