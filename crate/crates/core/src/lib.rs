//! Bit-error rate and secret-key rate simulation for entanglement-based QKD.
//!
//! The source state in one timing window is decomposed into pair-number
//! manifolds, each manifold into partition states (how pairs share the
//! available temporal modes) and each partition state into polarization
//! splits. Single-mode sources give thermal statistics, many-mode sources
//! approach Poissonian statistics, and everything in between is covered by
//! the same decomposition.
//!
//! Modules, bottom-up:
//!
//! - [`combinatorics`]: partitions and exact counting.
//! - [`photon_statistics`]: pair-number, partition and polarization weights.
//! - [`ber_model`]: per-state errors and the source BER.
//! - [`keyrate`]: link scenarios and the secret key.
//! - [`sweep`]: parameter sweeps, JSON configs and CSV output.

pub mod ber_model;
pub mod combinatorics;
pub mod error;
pub mod exec;
pub mod keyrate;
pub mod photon_statistics;
pub mod sweep;

pub use error::{Error, Result};
pub use exec::Execution;
