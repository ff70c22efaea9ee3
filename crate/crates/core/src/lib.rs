//! Simulation of loss-tolerant entanglement swapping between two hybrid
//! discrete/continuous-variable pairs.
//!
//! * [`fock`]: truncated Fock-space states, beam splitters and homodyne bras
//! * [`protocol`]: the swapping circuit, both in closed form and as a
//!   brute-force circuit simulation
//! * [`measures`]: negativity, fidelity, linear entropy
//! * [`mismatch`]: averaging over an unknown loss mismatch
//! * [`sweep`]: parameter grids and CSV/JSON/SVG emission
//! * [`verify`]: self-checks of the model against the circuit oracle

pub mod density;
pub mod error;
pub mod fock;
pub mod measures;
pub mod mismatch;
pub mod protocol;
pub mod sweep;
pub mod verify;

pub use density::DensityMatrix;
pub use error::{Error, Result};
pub use fock::{FockVector, MultiModeState};
pub use measures::MeasureSet;
pub use mismatch::MismatchSpec;
pub use protocol::{BranchDecomposition, HeraldParams, ProtocolParams};
pub use sweep::{SweepRecord, SweepSpec};

pub type Complex = num_complex::Complex64;
