//! Classical and quantum analysis of the isochronous Liénard oscillator
//!
//! ```text
//! ẍ + k x ẋ + ω² x + (k²/9) x³ = 0
//! ```
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: polynomial Liénard systems and the parameter families built on them.
//! * [`ode`]: an embedded Runge–Kutta 5(4) integrator with dense output.
//! * [`dynamics`]: trajectories, period measurement, the closed-form periodic
//!   solution and amplitude scans.
//! * [`transforms`]: the Levinson–Smith family, its reduction to Liénard form and the
//!   nonlocal map to the harmonic oscillator.
//! * [`hamiltonian`]: Chiellini roots, the last-multiplier Lagrangian, the class-I
//!   branched pair, the class-II Hamiltonian and their flows.
//! * [`quantum`]: ordering schemes, effective potentials, closed-form spectra and a
//!   finite-difference half-line eigensolver.

pub mod dynamics;
pub mod error;
pub mod format;
pub mod hamiltonian;
pub mod model;
pub mod ode;
pub mod quantum;
pub mod transforms;

pub use error::{Error, IntegrationError, Result};
