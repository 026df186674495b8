//! Thermodynamic bookkeeping for closed bipartite quantum systems.
//!
//! A system `S` and a (truncated) bath `B` evolve jointly under a Hermitian
//! Hamiltonian. The crate splits the total energy into the internal energies of
//! the two parties plus a binding energy carried by their correlations, and
//! tracks heat, work, entropy, pseudo- and extended temperatures and entropy
//! production along exact and Markovian trajectories.
//!
//! Units: `hbar = k_B = 1` throughout.

pub mod accounting;
pub mod bosonic;
pub mod dynamics;
mod error;
pub mod linalg;
pub mod models;
pub mod quadrature;
pub mod random;

pub use accounting::{
    BipartiteSystem, DrivenSystem, EffectiveHamiltonians, EnergySplit, FluxRates,
    InternalEnergies, JointState, ThermoSnapshot,
};
pub use dynamics::{LindbladGenerator, ThermoLedger, TimeGrid, Trajectory};
pub use error::{Error, Result};
pub use linalg::{CompositeLayout, HermitianSpectrum, Matrix, Subsystem};
pub use num_complex::Complex64;
