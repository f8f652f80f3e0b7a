//! Physical constants (SI, CODATA 2018 exact values where defined).

/// Reduced Planck constant [J s].
pub const HBAR: f64 = 1.054_571_817e-34;
/// Speed of light in vacuum [m/s].
pub const C: f64 = 299_792_458.0;
/// Boltzmann constant [J/K].
pub const K_B: f64 = 1.380_649e-23;

/// Vacuum wavenumber for an angular frequency.
#[inline]
pub fn wavenumber(omega: f64) -> f64 {
    omega / C
}

/// Angular frequency for a vacuum wavelength.
#[inline]
pub fn omega_from_wavelength(lambda: f64) -> f64 {
    2.0 * std::f64::consts::PI * C / lambda
}
