//! Dark-state transfer of a charge-qubit excitation into a collective
//! molecular memory through an off-resonant cavity.
//!
//! Frequencies are angular, in MHz; times are in microseconds; `hbar = 1`.

pub mod dynamics;
pub mod error;
pub mod hamiltonian;
pub mod hilbert;
pub mod linalg;
pub mod params;
pub mod protocol;
pub mod spectral;

pub use dynamics::{Model, RampShape, Schedule, SweepConfig, Trajectory};
pub use error::{Error, Result};
pub use hilbert::{BasisLabel, Operator, SerializedState, SpaceSpec, StateVector};
pub use params::{EffectiveParams, FrohlichCoefficients, SystemParams};
pub use protocol::{StorageReport, StorageTask};
pub use spectral::DarkStateDecomposition;

/// Complex amplitudes used throughout.
pub use num_complex::Complex64;
