//! Simulation of spin-pair (bipolaron) formation and transport in a linear
//! trapped-ion crystal dressed by state-dependent optical tweezers.
//!
//! The pipeline, bottom to top:
//!
//! * [`crystal`] — equilibrium positions of the Coulomb chain and its axial /
//!   transverse normal modes.
//! * [`tweezer`] — state-dependent tweezer curvatures, site-weight
//!   calibration, perturbed phonon spectra and per-configuration energies.
//! * [`coupling`] — laser-mediated hopping matrix `J_ij` from the transverse
//!   modes, power-law range fit, and the resonant two-site process set.
//! * [`hilbert`] — conserved-sector basis and dense Hamiltonian assembly.
//! * [`dynamics`] — unitary propagation and bipolaron observables.
//! * [`thermal`] — Bose-Einstein phonon ensembles, thermally averaged
//!   dynamics and mobility estimators.
//!
//! Internally the chain geometry is dimensionless (lengths in units of the
//! Coulomb length scale, curvatures in units of the squared axial trap
//! frequency); all public interfaces use SI units (rad/s, seconds, kelvin).

pub mod constants;
pub mod coupling;
pub mod crystal;
pub mod dynamics;
mod eigen;
pub mod error;
pub mod hilbert;
pub mod thermal;
pub mod tweezer;

pub use error::{Error, Result};
