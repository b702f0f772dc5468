//! Damped harmonic oscillator described through a generator potential:
//! classical trajectories, the canonical Hamiltonian, grid quantum evolution,
//! closed-form packets and short-time kernel composition.

pub mod classical;
pub mod error;
pub mod exec;
pub mod hamiltonian;
pub mod packet;
pub mod propagator;
pub mod quantum;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Execution;
