//! Stabilizer simulation over prime qudit dimensions d = 2, 3, with the
//! measurement-based preparation protocols built on top of it.
//!
//! The layers, bottom up:
//! - [`gf`]: linear algebra over GF(d) (elimination, solving, canonical
//!   forms); this is where group membership and rank questions are settled.
//! - [`pauli`]: the generalized Pauli group on n sites. An operator is
//!   tau^k prod_i X_i^{x_i} Z_i^{z_i} with tau^2 = omega = e^{2 pi i / d} and
//!   the phase exponent k tracked modulo 2d.
//! - [`tableau`]: stabilizer states as n commuting independent generators;
//!   Clifford conjugation, X-basis measurement, restriction to a subset of
//!   sites, and a canonical form for group comparison.
//! - [`dense`]: a dense statevector reference implementation of the same
//!   circuits. Slow and exponential, used as the correctness oracle.
//! - [`protocols`]: the cluster-chain GHZ preparation with feedforward and
//!   the Z3 toric-code preparation on an L x L torus.
//!
//! Conventions used throughout: X|k> = |k+1 mod d>, Z|k> = omega^k |k>,
//! so Z X = omega X Z. X-basis outcomes are labeled by m with measured
//! eigenvalue omega^m and eigenket proportional to sum_k omega^{-mk} |k>.

pub mod dense;
pub mod gf;
pub mod pauli;
pub mod protocols;
pub mod tableau;

pub use pauli::PauliOp;
pub use protocols::{
    build_z3_toric_code, run_ghz_protocol, verify_ghz, FeedforwardPlan, GhzRun, ToricReport,
};
pub use tableau::{MeasurementRecord, QuditTableau};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum StabError {
    #[error("qudit dimension {0} not supported (primes 2 and 3 only)")]
    UnsupportedDimension(usize),
    #[error("site {site} out of range for {n} sites")]
    SiteOutOfRange { site: usize, n: usize },
    #[error("operators act on different spaces")]
    SpaceMismatch,
    #[error("need at least {min} sites, got {got}")]
    TooFewSites { min: usize, got: usize },
    #[error("lattice size {0} not supported")]
    UnsupportedLattice(usize),
    #[error("tableau invariant violated: {0}")]
    InvariantViolation(String),
}
