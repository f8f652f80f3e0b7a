//! Mie coefficients and scalar cross-sections of a homogeneous nonmagnetic sphere.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{wavenumber, C};
use crate::error::{Error, Result};
use crate::special::{log_derivative, riccati_psi, riccati_xi};
use crate::sum::KahanSum;

/// Relative tail size above which a cross-section series is flagged.
pub const TAIL_TOLERANCE: f64 = 1e-12;

/// Non-fatal conditions attached to results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Warning {
    /// A dispersion table was evaluated outside its frequency range and the
    /// nearest tabulated permittivity was used.
    Extrapolated { omega: f64, lo: f64, hi: f64 },
    /// The last retained term of a cross-section series is not negligible.
    Truncation { n_trunc: usize, tail_ratio: f64 },
    /// The squeezed band is too wide for the narrowband pressure estimate.
    Broadband { ratio: f64 },
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Warning::Extrapolated { omega, lo, hi } => write!(
                f,
                "permittivity extrapolated at ω = {omega:e} rad/s (table covers {lo:e}..{hi:e})"
            ),
            Warning::Truncation { n_trunc, tail_ratio } => write!(
                f,
                "series truncated at N = {n_trunc} with relative tail {tail_ratio:.2e}"
            ),
            Warning::Broadband { ratio } => write!(
                f,
                "effective bandwidth is {ratio:.3} of the centre frequency; the narrowband estimate is unreliable"
            ),
        }
    }
}

/// Tabulated permittivity, linear in Re ε and Im ε between nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionTable {
    points: Vec<(f64, Complex64)>,
}

impl DispersionTable {
    /// Builds a table from (ω [rad/s], ε) pairs with strictly increasing ω.
    pub fn new(points: Vec<(f64, Complex64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::config("dispersion table is empty"));
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::config(format!(
                    "dispersion table frequencies must be strictly increasing ({:e} then {:e})",
                    w[0].0, w[1].0
                )));
            }
        }
        for &(omega, eps) in &points {
            if !(omega > 0.0) || !omega.is_finite() {
                return Err(Error::config(format!("invalid table frequency {omega}")));
            }
            check_passive(eps, omega)?;
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(f64, Complex64)] {
        &self.points
    }

    fn eval(&self, omega: f64) -> (Complex64, Option<Warning>) {
        let pts = &self.points;
        let (lo, hi) = (pts[0].0, pts[pts.len() - 1].0);
        if omega <= lo || omega >= hi {
            let eps = if omega <= lo {
                pts[0].1
            } else {
                pts[pts.len() - 1].1
            };
            let warn =
                (omega < lo || omega > hi).then_some(Warning::Extrapolated { omega, lo, hi });
            return (eps, warn);
        }
        let i = pts.partition_point(|p| p.0 <= omega);
        let (w0, e0) = pts[i - 1];
        let (w1, e1) = pts[i];
        let t = (omega - w0) / (w1 - w0);
        (e0 + (e1 - e0) * t, None)
    }
}

/// Relative permittivity of the sphere material.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MaterialSpec {
    Constant(Complex64),
    Table(DispersionTable),
}

impl MaterialSpec {
    pub fn constant(eps: Complex64) -> Result<Self> {
        check_passive(eps, f64::NAN)?;
        Ok(MaterialSpec::Constant(eps))
    }

    /// ε(ω), with a warning when a table had to be extrapolated.
    pub fn permittivity(&self, omega: f64) -> Result<(Complex64, Option<Warning>)> {
        let (eps, warn) = match self {
            MaterialSpec::Constant(eps) => (*eps, None),
            MaterialSpec::Table(t) => t.eval(omega),
        };
        check_passive(eps, omega)?;
        Ok((eps, warn))
    }
}

fn check_passive(eps: Complex64, omega: f64) -> Result<()> {
    if !eps.re.is_finite() || !eps.im.is_finite() {
        return Err(Error::domain(format!("non-finite permittivity {eps}")));
    }
    if eps.im < 0.0 {
        return Err(Error::domain(format!(
            "permittivity {eps} at ω = {omega:e} has Im ε < 0 (active medium)"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereTarget {
    /// Radius [m].
    pub radius: f64,
    pub material: MaterialSpec,
}

impl SphereTarget {
    pub fn new(radius: f64, material: MaterialSpec) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::config(format!(
                "sphere radius must be positive, got {radius}"
            )));
        }
        Ok(Self { radius, material })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TruncationPolicy {
    /// N = ⌈x + 4x^{1/3} + 2⌉.
    Auto,
    Fixed(usize),
}

/// Number of retained multipoles for size parameter `x`.
pub fn truncation_order(x: f64, policy: TruncationPolicy) -> Result<usize> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!(
            "size parameter must be positive, got {x}"
        )));
    }
    match policy {
        TruncationPolicy::Fixed(0) => Err(Error::config("fixed truncation order must be ≥ 1")),
        TruncationPolicy::Fixed(n) => Ok(n),
        TruncationPolicy::Auto => Ok(((x + 4.0 * x.cbrt() + 2.0).ceil() as usize).max(1)),
    }
}

/// Mie coefficients a_n, b_n of one sphere at one frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MieSolution {
    pub omega: f64,
    /// Vacuum wavenumber [1/m].
    pub k: f64,
    pub size_parameter: f64,
    /// k^V a = x √ε.
    pub interior_argument: Complex64,
    pub epsilon: Complex64,
    pub n_trunc: usize,
    /// a_n for n = 1..=n_trunc, stored at index n - 1.
    pub a_coeffs: Vec<Complex64>,
    /// b_n for n = 1..=n_trunc, stored at index n - 1.
    pub b_coeffs: Vec<Complex64>,
    pub warnings: Vec<Warning>,
}

impl MieSolution {
    /// a_n for 1 ≤ n; zero beyond the truncation order.
    pub fn a(&self, n: usize) -> Complex64 {
        debug_assert!(n >= 1);
        self.a_coeffs.get(n - 1).copied().unwrap_or_default()
    }

    pub fn b(&self, n: usize) -> Complex64 {
        debug_assert!(n >= 1);
        self.b_coeffs.get(n - 1).copied().unwrap_or_default()
    }

    /// Solution at size parameter `x` with k = 1 m⁻¹, so cross-sections come
    /// out in units of 1/k².
    pub fn for_size_parameter(epsilon: Complex64, x: f64, n_trunc: usize) -> Result<Self> {
        let target = SphereTarget::new(x, MaterialSpec::constant(epsilon)?)?;
        mie_coefficients(&target, C, n_trunc)
    }
}

/// Principal square root with Im √ε ≥ 0.
pub fn refractive_index(epsilon: Complex64) -> Complex64 {
    let eps = Complex64::new(epsilon.re, if epsilon.im == 0.0 { 0.0 } else { epsilon.im });
    eps.sqrt()
}

struct Prepared {
    omega: f64,
    k: f64,
    x: f64,
    eps: Complex64,
    m: Complex64,
    warnings: Vec<Warning>,
}

fn prepare(target: &SphereTarget, omega: f64, n_trunc: usize) -> Result<Prepared> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::domain(format!(
            "angular frequency must be positive, got {omega}"
        )));
    }
    if n_trunc < 1 {
        return Err(Error::config("truncation order must be ≥ 1"));
    }
    let (eps, warn) = target.material.permittivity(omega)?;
    let k = wavenumber(omega);
    Ok(Prepared {
        omega,
        k,
        x: k * target.radius,
        eps,
        m: refractive_index(eps),
        warnings: warn.into_iter().collect(),
    })
}

fn finish(p: Prepared, n_trunc: usize, a: Vec<Complex64>, b: Vec<Complex64>) -> MieSolution {
    MieSolution {
        omega: p.omega,
        k: p.k,
        size_parameter: p.x,
        interior_argument: p.m * p.x,
        epsilon: p.eps,
        n_trunc,
        a_coeffs: a,
        b_coeffs: b,
        warnings: p.warnings,
    }
}

/// Mie coefficients through the logarithmic derivative D_n(k^V a).
///
/// Orders whose exterior ξ_n(x) would overflow are set to zero; there |a_n|
/// and |b_n| are below 1e-300.
pub fn mie_coefficients(target: &SphereTarget, omega: f64, n_trunc: usize) -> Result<MieSolution> {
    let p = prepare(target, omega, n_trunc)?;
    let zero = Complex64::new(0.0, 0.0);
    if p.eps == Complex64::new(1.0, 0.0) {
        return Ok(finish(p, n_trunc, vec![zero; n_trunc], vec![zero; n_trunc]));
    }

    let (x, m) = (p.x, p.m);
    let mx = m * x;
    let d = log_derivative(n_trunc, mx).map_err(|e| e.at_order(n_trunc))?;
    let ext = riccati_xi(n_trunc, x)?;
    let psi = &ext.psi;
    let xi = ext.xi.as_ref().expect("riccati_xi fills ξ");

    let mut a = vec![zero; n_trunc];
    let mut b = vec![zero; n_trunc];
    for n in 1..=n_trunc.min(xi.len().saturating_sub(1)) {
        let nx = n as f64 / x;
        let ta = d[n] / m + nx;
        let tb = d[n] * m + nx;
        a[n - 1] = (ta * psi[n] - psi[n - 1]) / (ta * xi[n] - xi[n - 1]);
        b[n - 1] = (tb * psi[n] - psi[n - 1]) / (tb * xi[n] - xi[n - 1]);
        if !(a[n - 1].norm().is_finite() && b[n - 1].norm().is_finite()) {
            return Err(Error::Range {
                order: Some(n),
                z: mx,
                reason: "non-finite Mie coefficient".into(),
            });
        }
    }
    Ok(finish(p, n_trunc, a, b))
}

/// Mie coefficients from the spherical-Bessel quotients with the explicit
/// 1/ε prefactor of the nonmagnetic TM boundary condition.
///
/// Uses raw ψ_n(k^V a), so it fails with a range error where e^{Im k^V a}
/// overflows. Kept as an independent route for cross-checks.
pub fn mie_coefficients_direct(
    target: &SphereTarget,
    omega: f64,
    n_trunc: usize,
) -> Result<MieSolution> {
    let p = prepare(target, omega, n_trunc)?;
    let zero = Complex64::new(0.0, 0.0);
    let (x, m, eps) = (p.x, p.m, p.eps);
    let mx = m * x;
    let inner = riccati_psi(n_trunc, mx).map_err(|e| e.at_order(n_trunc))?;
    let outer = riccati_xi(n_trunc, x)?;
    let xi = outer.xi.as_ref().expect("riccati_xi fills ξ");
    let xi_p = outer.xi_prime.as_ref().expect("riccati_xi fills ξ'");
    let inv_eps = eps.inv();

    let mut a = vec![zero; n_trunc];
    let mut b = vec![zero; n_trunc];
    for n in 1..=n_trunc.min(xi.len().saturating_sub(1)) {
        // j_n(k^V a), j_n(k a), h_n(k a) and the radial derivatives
        // ∂_a[a j_n(k a)] = ψ'_n(x), ∂_a[a j_n(k^V a)] = ψ'_n(mx), ∂_a[a h_n(k a)] = ξ'_n(x).
        let j_in = inner.psi[n] / mx;
        let dj_in = inner.psi_prime[n];
        let j_out = outer.psi[n] / x;
        let dj_out = outer.psi_prime[n];
        let h_out = xi[n] / x;
        let dh_out = xi_p[n];
        a[n - 1] =
            (j_in * dj_out - inv_eps * j_out * dj_in) / (j_in * dh_out - inv_eps * h_out * dj_in);
        b[n - 1] = (j_in * dj_out - j_out * dj_in) / (j_in * dh_out - h_out * dj_in);
        if !(a[n - 1].norm().is_finite() && b[n - 1].norm().is_finite()) {
            return Err(Error::Range {
                order: Some(n),
                z: mx,
                reason: "non-finite Mie coefficient in quotient form".into(),
            });
        }
    }
    Ok(finish(p, n_trunc, a, b))
}

/// Scalar cross-sections [m²] at one frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSections {
    pub omega: f64,
    pub sigma_ext: f64,
    pub sigma_sca: f64,
    pub sigma_abs: f64,
    pub sigma_asym: f64,
    pub sigma_pr: f64,
    pub warnings: Vec<Warning>,
}

impl CrossSections {
    /// Efficiencies Q = σ/(πa²) in the order ext, sca, abs, asym, pr.
    pub fn efficiencies(&self, radius: f64) -> [f64; 5] {
        let g = PI * radius * radius;
        [
            self.sigma_ext / g,
            self.sigma_sca / g,
            self.sigma_abs / g,
            self.sigma_asym / g,
            self.sigma_pr / g,
        ]
    }

    /// Mean cosine of the scattering angle, σ_asym/σ_sca.
    pub fn asymmetry_parameter(&self) -> f64 {
        if self.sigma_sca == 0.0 {
            0.0
        } else {
            self.sigma_asym / self.sigma_sca
        }
    }
}

/// The Mie series for σ_ext, σ_sca and σ_asym, summed in ascending order with
/// compensation; σ_abs and σ_pr follow by subtraction.
pub fn cross_sections(sol: &MieSolution) -> CrossSections {
    let n_trunc = sol.n_trunc;
    let mut ext = KahanSum::default();
    let mut sca = KahanSum::default();
    let mut asym = KahanSum::default();
    let (mut last_ext, mut last_sca) = (0.0f64, 0.0f64);

    for n in 1..=n_trunc {
        let (an, bn) = (sol.a(n), sol.b(n));
        let (an1, bn1) = (sol.a(n + 1), sol.b(n + 1));
        let nf = n as f64;
        let w = 2.0 * nf + 1.0;
        last_ext = w * (an.re + bn.re);
        last_sca = w * (an.norm_sqr() + bn.norm_sqr());
        ext.add(last_ext);
        sca.add(last_sca);
        asym.add(nf * (nf + 2.0) / (nf + 1.0) * (an * an1.conj() + bn * bn1.conj()).re);
        asym.add(w / (nf * (nf + 1.0)) * (an * bn.conj()).re);
    }

    let pref = 2.0 * PI / (sol.k * sol.k);
    let sigma_ext = pref * ext.value();
    let sigma_sca = pref * sca.value();
    let sigma_asym = 2.0 * pref * asym.value();

    let mut warnings = sol.warnings.clone();
    let tail = |last: f64, total: f64| {
        if total == 0.0 {
            0.0
        } else {
            (last / total).abs()
        }
    };
    let tail_ratio = tail(last_ext, ext.value()).max(tail(last_sca, sca.value()));
    if tail_ratio > TAIL_TOLERANCE {
        warnings.push(Warning::Truncation {
            n_trunc,
            tail_ratio,
        });
    }

    CrossSections {
        omega: sol.omega,
        sigma_ext,
        sigma_sca,
        sigma_abs: sigma_ext - sigma_sca,
        sigma_asym,
        sigma_pr: sigma_ext - sigma_asym,
        warnings,
    }
}

/// Cross-sections of one material over a list of radii at a fixed frequency.
/// Points run in parallel; the output keeps the input order.
pub fn sweep_radii(
    material: &MaterialSpec,
    radii: &[f64],
    omega: f64,
    policy: TruncationPolicy,
) -> Result<Vec<CrossSections>> {
    radii
        .par_iter()
        .map(|&a| {
            let target = SphereTarget::new(a, material.clone())?;
            let n = truncation_order(wavenumber(omega) * a, policy)?;
            Ok(cross_sections(&mie_coefficients(&target, omega, n)?))
        })
        .collect()
}
