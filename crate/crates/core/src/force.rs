//! Optomechanical force of a squeezed, anisotropic vacuum on a sphere.
//!
//! The central object is the momentum-transfer functional
//!
//! F[w] = ∫dω (ħk³/8π³) ∫do_n w_ω(n) { n (4π/k) Im tr S(n|n) − ∫do_m m tr[S S†] },
//!
//! which for a sphere collapses to ∫dω (ħk³/4π³) σ_pr(ω) ∫do_n w_ω(n) n.
//! The total force is F[sinh² r] − F[n_ω(β)]: the squeezed drive minus the
//! thermal recoil of the sphere's own emission.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{wavenumber, HBAR, K_B};
use crate::dyadic::{dyadic_from_tables, scattered_moments, tables_for_grid, VshTable};
use crate::error::{Error, Result};
use crate::mie::{
    cross_sections, mie_coefficients, truncation_order, MieSolution, SphereTarget,
    TruncationPolicy, Warning,
};
use crate::quadrature::{
    build_direction_grid, gauss_legendre, integrate_direction_vec, DirectionGrid, SpectralGrid,
};
use crate::sum::KahanSum;
use crate::Vec3;

/// Gaussian envelopes are cut where they fall below e^{-32}.
const GAUSSIAN_CUT: f64 = 8.0;
/// Above this Δω_eff/ω₀ the narrowband estimate is flagged.
pub const NARROWBAND_LIMIT: f64 = 0.1;

/// Angular profile g(n) of the squeezing, peak 1 on the beam axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AngularEnvelope {
    Isotropic,
    /// exp(−θ²/2σ²), θ measured from the axis [rad].
    GaussianCap {
        sigma: f64,
    },
    /// 1 for θ ≤ θ_max, 0 outside [rad].
    TopHat {
        theta_max: f64,
    },
}

/// Spectral profile h(ω) of the squeezing, peak 1 at ω₀.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SpectralEnvelope {
    /// Flat band of full width `width` centred on `omega0` [rad/s].
    DeltaBand { omega0: f64, width: f64 },
    /// exp(−(ω−ω₀)²/2σ²) [rad/s].
    Gaussian { omega0: f64, sigma: f64 },
}

impl SpectralEnvelope {
    pub fn omega0(&self) -> f64 {
        match *self {
            SpectralEnvelope::DeltaBand { omega0, .. }
            | SpectralEnvelope::Gaussian { omega0, .. } => omega0,
        }
    }

    pub fn factor(&self, omega: f64) -> f64 {
        match *self {
            SpectralEnvelope::DeltaBand { omega0, width } => {
                if (omega - omega0).abs() <= 0.5 * width {
                    1.0
                } else {
                    0.0
                }
            }
            SpectralEnvelope::Gaussian { omega0, sigma } => {
                (-0.5 * ((omega - omega0) / sigma).powi(2)).exp()
            }
        }
    }

    /// Frequency interval carrying the envelope.
    pub fn support(&self) -> Result<(f64, f64)> {
        let (omega0, half) = match *self {
            SpectralEnvelope::DeltaBand { omega0, width } => (omega0, 0.5 * width),
            SpectralEnvelope::Gaussian { omega0, sigma } => (omega0, GAUSSIAN_CUT * sigma),
        };
        if half == 0.0 {
            return Err(Error::Degenerate("squeezed bandwidth is zero".into()));
        }
        let lo = (omega0 - half).max(0.0);
        Ok((lo, omega0 + half))
    }

    /// Plain envelope integral ∫h dω [rad/s].
    pub fn envelope_integral(&self) -> f64 {
        match *self {
            SpectralEnvelope::DeltaBand { width, .. } => width,
            SpectralEnvelope::Gaussian { sigma, .. } => (2.0 * PI).sqrt() * sigma,
        }
    }
}

impl AngularEnvelope {
    /// g as a function of the polar angle from the axis.
    pub fn factor_at(&self, theta: f64) -> f64 {
        match *self {
            AngularEnvelope::Isotropic => 1.0,
            AngularEnvelope::GaussianCap { sigma } => (-0.5 * (theta / sigma).powi(2)).exp(),
            AngularEnvelope::TopHat { theta_max } => {
                if theta <= theta_max {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Polar angle beyond which g is zero (or negligible).
    pub fn cutoff(&self) -> f64 {
        match *self {
            AngularEnvelope::Isotropic => PI,
            AngularEnvelope::GaussianCap { sigma } => (GAUSSIAN_CUT * sigma).min(PI),
            AngularEnvelope::TopHat { theta_max } => theta_max.min(PI),
        }
    }

    /// Plain envelope integral ∫g do [sr].
    pub fn envelope_integral(&self) -> f64 {
        polar_integral(self.cutoff(), 256, |theta, _| self.factor_at(theta))
    }
}

/// 2π ∫_0^{θ_cut} f(θ, cos θ) sin θ dθ by Gauss-Legendre in cos θ.
fn polar_integral<F: Fn(f64, f64) -> f64>(theta_cut: f64, n: usize, f: F) -> f64 {
    let cos_min = theta_cut.cos();
    let half = 0.5 * (1.0 - cos_min);
    let mut acc = KahanSum::default();
    for (t, w) in gauss_legendre(n).expect("fixed order is valid") {
        let u = cos_min + half * (t + 1.0);
        acc.add(w * half * f(u.clamp(-1.0, 1.0).acos(), u));
    }
    2.0 * PI * acc.value()
}

/// sinh²(r₀ s)/sinh²(r₀), continued to s² at r₀ = 0.
fn photon_ratio(r0: f64, s: f64) -> f64 {
    if r0 == 0.0 {
        s * s
    } else {
        (r0 * s).sinh().powi(2) / r0.sinh().powi(2)
    }
}

/// r_ω(n) = r₀ g(n) h(ω) about the beam axis n₀.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezingProfile {
    pub r0: f64,
    pub axis: Vec3,
    pub angular: AngularEnvelope,
    pub spectral: SpectralEnvelope,
}

/// r₀ for a quadrature noise reduction given in dB.
pub fn squeezing_from_db(db: f64) -> f64 {
    (10f64.powf(db / 20.0)).ln()
}

impl SqueezingProfile {
    pub fn new(
        r0: f64,
        axis: Vec3,
        angular: AngularEnvelope,
        spectral: SpectralEnvelope,
    ) -> Result<Self> {
        if !(r0 >= 0.0) || !r0.is_finite() {
            return Err(Error::domain(format!(
                "squeezing parameter must be finite and ≥ 0, got {r0}"
            )));
        }
        let norm = axis.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::domain("squeezing axis must be a non-zero vector"));
        }
        match angular {
            AngularEnvelope::GaussianCap { sigma } if !(sigma > 0.0 && sigma.is_finite()) => {
                return Err(Error::domain(format!(
                    "angular width must be positive, got {sigma}"
                )));
            }
            AngularEnvelope::TopHat { theta_max } if !(theta_max > 0.0 && theta_max <= PI) => {
                return Err(Error::domain(format!(
                    "cap half-angle must lie in (0, π], got {theta_max}"
                )));
            }
            _ => {}
        }
        let (omega0, width) = match spectral {
            SpectralEnvelope::DeltaBand { omega0, width } => (omega0, width),
            SpectralEnvelope::Gaussian { omega0, sigma } => (omega0, sigma),
        };
        if !(omega0 > 0.0) || !omega0.is_finite() {
            return Err(Error::domain(format!(
                "centre frequency must be positive, got {omega0}"
            )));
        }
        if !(width >= 0.0) || !width.is_finite() {
            return Err(Error::domain(format!(
                "bandwidth must be finite and ≥ 0, got {width}"
            )));
        }
        Ok(Self {
            r0,
            axis: axis / norm,
            angular,
            spectral,
        })
    }

    pub fn omega0(&self) -> f64 {
        self.spectral.omega0()
    }

    pub fn angular_factor(&self, dir: &Vec3) -> f64 {
        let c = dir.dot(&self.axis) / dir.norm();
        self.angular.factor_at(c.clamp(-1.0, 1.0).acos())
    }

    /// r_ω(n).
    pub fn r(&self, omega: f64, dir: &Vec3) -> f64 {
        self.r0 * self.angular_factor(dir) * self.spectral.factor(omega)
    }

    /// Mean photon number sinh² r_ω(n) of the squeezed mode.
    pub fn photon_number(&self, omega: f64, dir: &Vec3) -> f64 {
        self.r(omega, dir).sinh().powi(2)
    }

    /// The same profile about a different axis.
    pub fn with_axis(&self, axis: Vec3) -> Result<Self> {
        Self::new(self.r0, axis, self.angular, self.spectral)
    }

    /// Gauss-Legendre rule over the envelope's support.
    pub fn spectral_grid(&self, n: usize) -> Result<SpectralGrid> {
        let (lo, hi) = self.spectral.support()?;
        SpectralGrid::gauss_legendre(lo, hi, n)
    }

    /// Direction grid aligned with the axis and restricted to the envelope's
    /// support, so cap edges fall on the grid boundary.
    pub fn direction_grid(&self, n_theta: usize, n_phi: usize) -> Result<DirectionGrid> {
        DirectionGrid::cap(n_theta, n_phi, self.axis, self.angular.cutoff())
    }
}

/// Thermal state of the sphere's own emission.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalState {
    /// Temperature [K].
    pub t_em: f64,
}

impl ThermalState {
    pub fn new(t_em: f64) -> Result<Self> {
        if !(t_em >= 0.0) || !t_em.is_finite() {
            return Err(Error::domain(format!(
                "temperature must be finite and ≥ 0, got {t_em}"
            )));
        }
        Ok(Self { t_em })
    }

    /// Bose-Einstein occupation n_ω(β).
    pub fn occupation(&self, omega: f64) -> f64 {
        if self.t_em == 0.0 {
            return 0.0;
        }
        1.0 / (HBAR * omega / (K_B * self.t_em)).exp_m1()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FunctionalMode {
    /// Full dyadic traces: extinction minus re-radiated momentum.
    Dyadic,
    /// σ_pr times the weighted mean direction; exact for spheres.
    SphereReduced,
}

/// Force vector [N] with the matching scalar magnitude scale [N], the value
/// the force would have if every contribution pointed the same way.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalValue {
    pub force: Vec3,
    pub scale: f64,
}

fn check_weight(w: f64, omega: f64) -> Result<f64> {
    if w >= 0.0 && w.is_finite() {
        Ok(w)
    } else {
        Err(Error::domain(format!(
            "weight {w} at ω = {omega:e} is not finite and non-negative"
        )))
    }
}

/// F[w] over the given spectral and direction grids.
pub fn radiation_pressure_functional<W, P>(
    weight: W,
    sol_provider: P,
    sgrid: &SpectralGrid,
    dgrid: &DirectionGrid,
    mode: FunctionalMode,
) -> Result<FunctionalValue>
where
    W: Fn(f64, &Vec3) -> f64 + Sync,
    P: Fn(f64) -> Result<MieSolution> + Sync,
{
    let sols = solve_all(&sol_provider, sgrid)?;
    functional_with_solutions(&weight, &sols, sgrid, dgrid, mode)
}

fn solve_all<P>(provider: &P, sgrid: &SpectralGrid) -> Result<Vec<MieSolution>>
where
    P: Fn(f64) -> Result<MieSolution> + Sync,
{
    sgrid
        .nodes()
        .par_iter()
        .map(|&omega| provider(omega))
        .collect()
}

fn functional_with_solutions<W>(
    weight: &W,
    sols: &[MieSolution],
    sgrid: &SpectralGrid,
    dgrid: &DirectionGrid,
    mode: FunctionalMode,
) -> Result<FunctionalValue>
where
    W: Fn(f64, &Vec3) -> f64 + Sync,
{
    let per_freq: Vec<FunctionalValue> = sols
        .par_iter()
        .map(|sol| match mode {
            FunctionalMode::SphereReduced => sphere_reduced_at(weight, sol, dgrid),
            FunctionalMode::Dyadic => dyadic_at(weight, sol, dgrid),
        })
        .collect::<Result<_>>()?;
    let (mut fx, mut fy, mut fz, mut scale) = (
        KahanSum::default(),
        KahanSum::default(),
        KahanSum::default(),
        KahanSum::default(),
    );
    for (v, w) in per_freq.iter().zip(sgrid.weights()) {
        fx.add(v.force.x * w);
        fy.add(v.force.y * w);
        fz.add(v.force.z * w);
        scale.add(v.scale * w);
    }
    Ok(FunctionalValue {
        force: Vec3::new(fx.value(), fy.value(), fz.value()),
        scale: scale.value(),
    })
}

/// Spectral density of the sphere-reduced functional at one frequency.
fn sphere_reduced_at<W>(
    weight: &W,
    sol: &MieSolution,
    dgrid: &DirectionGrid,
) -> Result<FunctionalValue>
where
    W: Fn(f64, &Vec3) -> f64 + Sync,
{
    let omega = sol.omega;
    let weights: Vec<f64> = dgrid
        .nodes()
        .par_iter()
        .map(|n| check_weight(weight(omega, n), omega))
        .collect::<Result<_>>()?;
    let mut mean_dir = [
        KahanSum::default(),
        KahanSum::default(),
        KahanSum::default(),
    ];
    let mut total = KahanSum::default();
    for ((n, w), q) in dgrid.nodes().iter().zip(&weights).zip(dgrid.weights()) {
        for (acc, c) in mean_dir.iter_mut().zip(n.iter()) {
            acc.add(w * q * c);
        }
        total.add(w * q);
    }
    let sigma_pr = cross_sections(sol).sigma_pr;
    let k = sol.k;
    let pref = HBAR * k.powi(3) / (4.0 * PI.powi(3)) * sigma_pr;
    Ok(FunctionalValue {
        force: Vec3::new(
            mean_dir[0].value(),
            mean_dir[1].value(),
            mean_dir[2].value(),
        ) * pref,
        scale: pref.abs() * total.value(),
    })
}

/// Inner outgoing-direction grid integrating tr[S S†] and m tr[S S†] exactly:
/// both are polynomials of degree ≤ 2N+1 on the sphere.
pub fn inner_grid_for(n_trunc: usize) -> Result<DirectionGrid> {
    build_direction_grid(n_trunc + 4, 2 * n_trunc + 6)
}

/// Spectral density of the dyadic-mode functional at one frequency.
fn dyadic_at<W>(weight: &W, sol: &MieSolution, dgrid: &DirectionGrid) -> Result<FunctionalValue>
where
    W: Fn(f64, &Vec3) -> f64 + Sync,
{
    let omega = sol.omega;
    let n = sol.n_trunc;
    let inner = inner_grid_for(n)?;
    let inner_tables = tables_for_grid(&inner, n)?;
    let k = sol.k;
    let per_node: Vec<(Vec3, f64)> = dgrid
        .nodes()
        .par_iter()
        .map(|dir| {
            let w = check_weight(weight(omega, dir), omega)?;
            if w == 0.0 {
                return Ok((Vec3::zeros(), 0.0));
            }
            let inc = VshTable::new(n, dir)?;
            let forward = dyadic_from_tables(sol, &inc, &inc, n).trace().im * 4.0 * PI / k;
            let mom = scattered_moments(sol, &inc, &inner_tables, inner.weights());
            Ok((
                (dir * forward - mom.momentum) * w,
                w * (forward.abs() + mom.power),
            ))
        })
        .collect::<Result<_>>()?;
    let mut acc = [
        KahanSum::default(),
        KahanSum::default(),
        KahanSum::default(),
    ];
    let mut scale = KahanSum::default();
    for ((v, s), q) in per_node.iter().zip(dgrid.weights()) {
        for (a, c) in acc.iter_mut().zip(v.iter()) {
            a.add(c * q);
        }
        scale.add(s * q);
    }
    let pref = HBAR * k.powi(3) / (8.0 * PI.powi(3));
    Ok(FunctionalValue {
        force: Vec3::new(acc[0].value(), acc[1].value(), acc[2].value()) * pref,
        scale: scale.value() * pref,
    })
}

/// Equivalent quantum radiation pressure of a squeezing profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumPressure {
    pub omega0: f64,
    pub r0: f64,
    pub axis: Vec3,
    /// Photon-number-weighted bandwidth [rad/s].
    pub delta_omega_eff: f64,
    /// Photon-number-weighted solid angle projected on the axis [sr].
    pub delta_o_eff: f64,
    /// Plain envelope integrals ∫h dω and ∫g do, for reference.
    pub envelope_bandwidth: f64,
    pub envelope_solid_angle: f64,
    /// P_sq [N/m²].
    pub p_sq: f64,
    pub warnings: Vec<Warning>,
}

impl QuantumPressure {
    /// Narrowband force estimate σ_pr(ω₀) P_sq n₀ [N].
    pub fn estimate(&self, sigma_pr: f64) -> Vec3 {
        self.axis * (sigma_pr * self.p_sq)
    }
}

/// P_sq = (ħk₀³/4π³) sinh²(r₀) Δω_eff Δo_eff from the effective quantities.
pub fn quantum_pressure_from_effective(
    r0: f64,
    omega0: f64,
    delta_omega_eff: f64,
    delta_o_eff: f64,
) -> Result<f64> {
    if delta_omega_eff == 0.0 {
        return Err(Error::Degenerate("effective bandwidth is zero".into()));
    }
    for (name, v) in [
        ("r0", r0),
        ("omega0", omega0),
        ("delta_omega_eff", delta_omega_eff),
        ("delta_o_eff", delta_o_eff),
    ] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::domain(format!(
                "{name} must be finite and ≥ 0, got {v}"
            )));
        }
    }
    let k0 = wavenumber(omega0);
    Ok(HBAR * k0.powi(3) / (4.0 * PI.powi(3)) * r0.sinh().powi(2) * delta_omega_eff * delta_o_eff)
}

/// P_sq for a squeezing profile, with Δω_eff and Δo_eff defined so that
/// σ_pr(ω₀) P_sq n₀ reproduces the force of a flat σ_pr:
///
/// sinh²(r₀) Δω_eff Δo_eff = ∫dω ∫do sinh²(r_ω(n)) (n·n₀),
///
/// with Δo_eff = ∫do sinh²(r₀ g) (n·n₀) / sinh²(r₀) carrying the angular part.
pub fn quantum_pressure(squeeze: &SqueezingProfile, omega0: f64) -> Result<QuantumPressure> {
    if !(omega0 > 0.0) || !omega0.is_finite() {
        return Err(Error::domain(format!(
            "centre frequency must be positive, got {omega0}"
        )));
    }
    let (lo, hi) = squeeze.spectral.support()?;
    let r0 = squeeze.r0;
    let ang = squeeze.angular;
    let cut = ang.cutoff();
    let n_ang = 256;

    let delta_o = polar_integral(cut, n_ang, |theta, c| {
        photon_ratio(r0, ang.factor_at(theta)) * c
    });
    let (delta_omega, joint) = match squeeze.spectral {
        SpectralEnvelope::DeltaBand { width, .. } => (width, width * delta_o),
        SpectralEnvelope::Gaussian { .. } => {
            let sg = SpectralGrid::gauss_legendre(lo, hi, 128)?;
            let spectral_only = sg.integrate(|w| photon_ratio(r0, squeeze.spectral.factor(w)));
            let joint = sg.integrate(|w| {
                let h = squeeze.spectral.factor(w);
                polar_integral(cut, n_ang, |theta, c| {
                    photon_ratio(r0, ang.factor_at(theta) * h) * c
                })
            });
            let delta_omega = if delta_o > 0.0 {
                joint / delta_o
            } else {
                spectral_only
            };
            (delta_omega, joint)
        }
    };
    let k0 = wavenumber(omega0);
    let p_sq = HBAR * k0.powi(3) / (4.0 * PI.powi(3)) * r0.sinh().powi(2) * joint;

    let mut warnings = Vec::new();
    let ratio = delta_omega / omega0;
    if ratio > NARROWBAND_LIMIT {
        warnings.push(Warning::Broadband { ratio });
    }
    Ok(QuantumPressure {
        omega0,
        r0,
        axis: squeeze.axis,
        delta_omega_eff: delta_omega,
        delta_o_eff: delta_o,
        envelope_bandwidth: squeeze.spectral.envelope_integral(),
        envelope_solid_angle: ang.envelope_integral(),
        p_sq,
        warnings,
    })
}

/// Quadrature settings for [`total_force`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceGrids {
    pub n_omega: usize,
    pub n_theta: usize,
    pub n_phi: usize,
    pub truncation: TruncationPolicy,
    pub mode: FunctionalMode,
}

impl Default for ForceGrids {
    fn default() -> Self {
        Self {
            n_omega: 16,
            n_theta: 48,
            n_phi: 64,
            truncation: TruncationPolicy::Auto,
            mode: FunctionalMode::SphereReduced,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceDiagnostics {
    pub mode: FunctionalMode,
    pub n_omega: usize,
    pub n_theta: usize,
    pub n_phi: usize,
    pub direction_scheme: String,
    pub n_trunc_min: usize,
    pub n_trunc_max: usize,
    /// Magnitude scales of the drive and recoil functionals [N].
    pub drive_scale: f64,
    pub recoil_scale: f64,
    /// |recoil| / recoil scale; zero for a sphere up to rounding.
    pub recoil_relative: f64,
    /// Relative change of the drive's angular integral at ω₀ under grid doubling.
    pub angular_residual: f64,
    /// Relative change of the drive under doubling of the spectral order
    /// (sphere-reduced mode only).
    pub spectral_residual: Option<f64>,
    /// Narrowband estimate σ_pr(ω₀) P_sq n₀ [N].
    pub estimate: Vec3,
    /// Largest relative deviation of k³σ_pr over the spectral nodes from ω₀.
    pub band_variation: f64,
    pub warnings: Vec<Warning>,
}

/// Net force [N] on the sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceResult {
    pub total: Vec3,
    pub drive: Vec3,
    pub recoil: Vec3,
    /// σ_pr at the squeezing centre frequency [m²].
    pub sigma_pr_at_omega0: f64,
    /// P_sq [N/m²].
    pub p_sq: f64,
    pub diagnostics: ForceDiagnostics,
}

fn solution_at(target: &SphereTarget, omega: f64, policy: TruncationPolicy) -> Result<MieSolution> {
    let x = wavenumber(omega) * target.radius;
    mie_coefficients(target, omega, truncation_order(x, policy)?)
}

/// Drive minus recoil for a sphere in a squeezed vacuum.
pub fn total_force(
    target: &SphereTarget,
    squeeze: &SqueezingProfile,
    thermal: &ThermalState,
    grids: &ForceGrids,
) -> Result<ForceResult> {
    let omega0 = squeeze.omega0();
    let sgrid = squeeze.spectral_grid(grids.n_omega)?;
    let drive_grid = squeeze.direction_grid(grids.n_theta, grids.n_phi)?;
    let recoil_grid = DirectionGrid::aligned(grids.n_theta, grids.n_phi, squeeze.axis)?;
    let provider = |omega: f64| solution_at(target, omega, grids.truncation);
    let sols = solve_all(&provider, &sgrid)?;

    let drive_w = |omega: f64, n: &Vec3| squeeze.photon_number(omega, n);
    let recoil_w = |omega: f64, _: &Vec3| thermal.occupation(omega);
    let drive = functional_with_solutions(&drive_w, &sols, &sgrid, &drive_grid, grids.mode)?;
    let recoil = functional_with_solutions(&recoil_w, &sols, &sgrid, &recoil_grid, grids.mode)?;

    let at0 = solution_at(target, omega0, grids.truncation)?;
    let cs0 = cross_sections(&at0);
    let qp = quantum_pressure(squeeze, omega0)?;

    let coarse = integrate_direction_vec(&drive_grid, |n| n * drive_w(omega0, n));
    let fine = integrate_direction_vec(&drive_grid.refined()?, |n| n * drive_w(omega0, n));
    let angular_residual = if fine.norm() == 0.0 {
        0.0
    } else {
        (fine - coarse).norm() / fine.norm()
    };

    let spectral_residual = match grids.mode {
        FunctionalMode::SphereReduced => {
            let sg2 = squeeze.spectral_grid(2 * grids.n_omega)?;
            let sols2 = solve_all(&provider, &sg2)?;
            let d2 = functional_with_solutions(&drive_w, &sols2, &sg2, &drive_grid, grids.mode)?;
            let denom = d2.force.norm();
            Some(if denom == 0.0 {
                0.0
            } else {
                (d2.force - drive.force).norm() / denom
            })
        }
        FunctionalMode::Dyadic => None,
    };

    let k0_cubed_pr = wavenumber(omega0).powi(3) * cs0.sigma_pr;
    let band_variation = sols
        .iter()
        .map(|s| {
            let v = s.k.powi(3) * cross_sections(s).sigma_pr;
            if k0_cubed_pr == 0.0 {
                0.0
            } else {
                (v / k0_cubed_pr - 1.0).abs()
            }
        })
        .fold(0.0, f64::max);

    let mut warnings = cs0.warnings.clone();
    warnings.extend(qp.warnings.iter().cloned());
    let n_trunc_min = sols.iter().map(|s| s.n_trunc).min().unwrap_or(0);
    let n_trunc_max = sols.iter().map(|s| s.n_trunc).max().unwrap_or(0);
    let recoil_relative = if recoil.scale == 0.0 {
        0.0
    } else {
        recoil.force.norm() / recoil.scale
    };

    Ok(ForceResult {
        total: drive.force - recoil.force,
        drive: drive.force,
        recoil: recoil.force,
        sigma_pr_at_omega0: cs0.sigma_pr,
        p_sq: qp.p_sq,
        diagnostics: ForceDiagnostics {
            mode: grids.mode,
            n_omega: grids.n_omega,
            n_theta: grids.n_theta,
            n_phi: grids.n_phi,
            direction_scheme: drive_grid.scheme(),
            n_trunc_min,
            n_trunc_max,
            drive_scale: drive.scale,
            recoil_scale: recoil.scale,
            recoil_relative,
            angular_residual,
            spectral_residual,
            estimate: qp.estimate(cs0.sigma_pr),
            band_variation,
            warnings,
        },
    })
}

/// The silicon-like reference configuration: ε = 12.11 + 0.1i at 1550 nm,
/// 6 dB of squeezing in a 2π·2.5 THz band, a top-hat cap whose projected
/// solid angle is 1 sr, and 200 retained multipoles.
pub mod reference {
    use super::*;
    use crate::constants::omega_from_wavelength;
    use crate::mie::MaterialSpec;
    use num_complex::Complex64;

    pub const EPSILON: Complex64 = Complex64::new(12.11, 0.1);
    pub const WAVELENGTH: f64 = 1550e-9;
    pub const R0: f64 = 0.69;
    /// Angular-frequency bandwidth [rad/s].
    pub const BANDWIDTH: f64 = 2.0 * PI * 2.5e12;
    pub const N_TRUNC: usize = 200;
    pub const RADIUS: f64 = 10e-6;
    pub const SWEEP_MIN: f64 = 0.2e-6;
    pub const SWEEP_MAX: f64 = 10e-6;

    pub fn omega0() -> f64 {
        omega_from_wavelength(WAVELENGTH)
    }

    pub fn material() -> MaterialSpec {
        MaterialSpec::Constant(EPSILON)
    }

    /// Cap half-angle with π sin²θ = 1 sr.
    pub fn cap_half_angle() -> f64 {
        (1.0 / PI.sqrt()).asin()
    }

    pub fn squeezing() -> SqueezingProfile {
        SqueezingProfile::new(
            R0,
            Vec3::z(),
            AngularEnvelope::TopHat {
                theta_max: cap_half_angle(),
            },
            SpectralEnvelope::DeltaBand {
                omega0: omega0(),
                width: BANDWIDTH,
            },
        )
        .expect("reference parameters are valid")
    }

    pub fn grids() -> ForceGrids {
        ForceGrids {
            n_omega: 16,
            n_theta: 32,
            n_phi: 32,
            truncation: TruncationPolicy::Fixed(N_TRUNC),
            mode: FunctionalMode::SphereReduced,
        }
    }
}
