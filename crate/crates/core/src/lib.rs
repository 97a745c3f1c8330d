//! Stationary scattering of a one-dimensional Dirac particle off a potential
//! step and a square barrier, in natural units (ħ = c = 1).
//!
//! The crate is organised bottom-up:
//!
//! - [`kinematics`]: physical parameters, energy zones, wavenumbers and
//!   spinor ratios, and the plane-wave / evanescent mode basis of a region
//!   with constant potential.
//! - [`spinor`]: the two-component field value and the conserved current.
//! - [`scatter`]: closed-form matched solutions for the step (electron
//!   incidence, virtual antiparticle incidence and their superposition) and
//!   the transfer-matrix square barrier.
//! - [`oracle`]: direct numerical integration of the Dirac system across
//!   smoothed profiles, used to check the closed forms.
//! - [`wavepacket`]: spectral superposition of stationary states into
//!   Gaussian packets and the reflection/penetration diagnostics.

pub mod error;
pub mod kinematics;
pub mod oracle;
pub mod scatter;
pub mod spinor;
pub mod wavepacket;

pub use error::{Error, ErrorKind, Result};
pub use kinematics::{classify_zone, kinematics, Channel, EnergyZone, Kinematics, PhysParams};
pub use scatter::{
    current_density, solve, solve_evanescent, solve_overbarrier, solve_traditional, solve_virtual,
    square_barrier, unitarity_report, BarrierAmplitudes, Family, ScatterSolution, StepAmplitudes,
    UnitarityReport,
};
pub use spinor::Spinor2;

pub use num_complex::Complex64;
