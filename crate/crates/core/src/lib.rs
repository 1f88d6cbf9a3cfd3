//! Numerical engines for desk-scale analogue quantum simulation studies.
//!
//! The crate covers two families of model and the bookkeeping that ties a
//! simulator to the system it stands in for:
//!
//! * [`hamiltonians`]: tight-binding site networks (excitonic or photonic),
//!   evanescent waveguide couplings, site relabelings and static disorder.
//! * [`open_system`]: Lindblad evolution with pure dephasing, trapping into a
//!   sink and recombination loss, transport efficiency and dephasing sweeps.
//! * [`quantum_walk`]: closed single-particle walks, the propagation-length to
//!   time mapping and stochastic-phase dephasing ensembles.
//! * [`bose_hubbard`]: exact diagonalization on small lattices, condensate
//!   fraction and lattice-modulation absorption spectra.
//! * [`validation`]: correspondence checks between models, speedup
//!   classification and validation reports.
//!
//! # Units
//!
//! Every energy, rate and coupling is an angular frequency with ħ = 1, so a
//! Hamiltonian entry of `1.0` evolves a phase of one radian per unit time.
//! Site energies quoted in wavenumbers (cm⁻¹) convert to rad/s through
//! `ω = 2π c ν̃` with `c` in cm/s; the engines never perform that conversion
//! themselves, they only require all inputs to share one unit.

pub mod bose_hubbard;
pub mod error;
pub mod format;
pub mod hamiltonians;
pub mod linalg;
pub mod ode;
pub mod open_system;
pub mod quantum_walk;
pub mod validation;

pub use error::{Error, ErrorKind, Result};

/// Complex scalar used throughout the crate.
pub type C64 = nalgebra::Complex<f64>;

/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;

/// Dense complex column vector.
pub type CVector = nalgebra::DVector<C64>;
