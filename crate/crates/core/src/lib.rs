//! Grover search with partial diffusion operators.
//!
//! The crate builds search circuits from a compact naming scheme
//! (`G2D2M2`, `D2M2|D2M2`, ...), simulates them exactly, lowers them to a
//! `{Rz, X, SX, CX}` basis on small coupling maps, runs them under a
//! depolarizing/readout noise model, and computes success probability,
//! selectivity, depth, expected depth and degraded-ratio metrics.

pub mod bits;
pub mod catalog;
pub mod decompose;
pub mod density;
pub mod error;
pub mod experiment;
pub mod gates;
pub mod logistic;
pub mod metrics;
pub mod noise;
pub mod optimize;
pub mod plan;
pub mod search;
pub mod statevector;
pub mod stats;
pub mod transpile;

pub use bits::BitString;
pub use error::{Error, Result};
pub use gates::{Circuit, Gate, GateKind};
pub use plan::{SearchPlan, Stage, SupportRule};
pub use statevector::StateVector;
