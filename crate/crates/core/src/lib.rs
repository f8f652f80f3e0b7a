//! Mie optics and fluctuation-driven optomechanics of lossy spheres.
//!
//! The crate is organised bottom-up:
//!
//! * [`special`] — Riccati-Bessel functions of complex argument and their
//!   logarithmic derivatives.
//! * [`mie`] — Mie coefficients and the scalar cross-sections of a
//!   homogeneous nonmagnetic sphere.
//! * [`quadrature`] — product rules over the unit sphere and Gauss-Legendre
//!   rules over a frequency band.
//! * [`dyadic`] — the far-field scattering dyadic assembled from vector
//!   spherical harmonics, and trace routes to the cross-sections.
//! * [`force`] — the radiation-pressure functional, the drive/recoil force
//!   under squeezed-vacuum illumination and the narrowband pressure estimate.
//!
//! All quantities are SI unless a name says otherwise.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod dyadic;
pub mod error;
pub mod force;
pub mod mie;
pub mod quadrature;
pub mod special;
mod sum;

pub use error::{Error, Result};

pub use nalgebra::{Matrix3, Vector3};
pub use num_complex::Complex64;

/// Real 3-vector used for directions and forces.
pub type Vec3 = Vector3<f64>;
/// Complex 3-vector used for vector spherical harmonics.
pub type CVec3 = Vector3<Complex64>;
/// Complex 3×3 matrix used for dyadics.
pub type CMat3 = Matrix3<Complex64>;

pub use dyadic::{assemble_dyadic, trace_cross_sections, vector_spherical_harmonic, DyadicSample};
pub use force::{
    quantum_pressure, quantum_pressure_from_effective, radiation_pressure_functional,
    squeezing_from_db, total_force, AngularEnvelope, ForceDiagnostics, ForceGrids, ForceResult,
    FunctionalMode, FunctionalValue, QuantumPressure, SpectralEnvelope, SqueezingProfile,
    ThermalState,
};
pub use mie::{
    cross_sections, mie_coefficients, sweep_radii, truncation_order, CrossSections, MaterialSpec,
    MieSolution, SphereTarget, TruncationPolicy, Warning,
};
pub use quadrature::{build_direction_grid, DirectionGrid, SpectralGrid};
pub use special::{log_derivative, riccati_psi, riccati_xi, RiccatiTable};
