//! Single-excitation simulator for two-level atoms in an ideal 1-D
//! multimode cavity.
//!
//! The field is quantized in a box of length L with perfectly reflecting
//! mirrors, giving standing-wave modes omega_n = n pi c / L up to a
//! frequency cutoff. Atoms couple through the position-dependent matrix
//! element g sin(k_n r) under the rotating-wave approximation, which makes
//! the total excitation number a constant of motion; with one initial
//! excitation the dynamics closes on the (M+N)-dimensional sector spanned by
//! "atom j excited" and "one photon in mode n".
//!
//! On top of the restricted Hamiltonian sit:
//!
//! * [`dynamics`]: exact eigendecomposition evolution and a fourth-order
//!   Runge-Kutta integrator, usable as mutual oracles;
//! * [`observables`]: level populations, mode-occupation spectra, the
//!   normally ordered field energy density, eigenstate overlaps;
//! * [`scenarios`]: emitter position sweeps, regular/random atomic
//!   crystals, seeded ensembles, analyzer-atom spectrometers;
//! * [`master_eq`]: reconstruction of the time-dependent decay rate and
//!   level shift of the convolutionless master equation from the simulated
//!   emitter amplitude;
//! * [`fit`]: decay-rate and Lorentzian line-shape regression.
//!
//! Everything is dimensionless with hbar = c = epsilon_0 = 1.

pub mod dynamics;
pub mod error;
pub mod fit;
pub mod master_eq;
pub mod model;
pub mod numeric;
pub mod observables;
pub mod scenarios;

pub use error::{Error, Result};
