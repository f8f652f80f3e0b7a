//! Riccati-Bessel functions ψ_n(z) = z j_n(z) and ξ_n(x) = x h_n^(1)(x).
//!
//! ψ_n is never built by upward recurrence. The ratios ψ_n/ψ_{n-1} come from
//! the downward continued fraction (Miller's algorithm in ratio form) and are
//! anchored on the exact low orders, so the table degrades only by gradual
//! underflow once ψ_n drops below the smallest normal double. The irregular
//! part χ_n = -x y_n(x) of ξ_n is dominant and is built upward.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest |Im z| accepted by [`riccati_psi`]; e^700 ≈ 1.0e304.
pub const MAX_IMAG_ARG: f64 = 700.0;

/// Magnitude beyond which the upward χ_n recurrence is stopped.
const XI_OVERFLOW: f64 = 1e300;

/// Riccati-Bessel values and derivatives at one argument, indexed by order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiccatiTable {
    pub order_max: usize,
    pub argument: Complex64,
    /// ψ_n(z) for n = 0..=order_max.
    pub psi: Vec<Complex64>,
    /// ψ'_n(z) for n = 0..=order_max.
    pub psi_prime: Vec<Complex64>,
    /// ξ_n(x) for real positive arguments. Shorter than `psi` when χ_n would
    /// overflow; the missing orders have |ξ_n| > 1e300.
    pub xi: Option<Vec<Complex64>>,
    pub xi_prime: Option<Vec<Complex64>>,
}

impl RiccatiTable {
    /// Number of leading orders for which ξ_n is available.
    pub fn xi_len(&self) -> usize {
        self.xi.as_ref().map_or(0, Vec::len)
    }

    /// ψ_n ξ'_n − ψ'_n ξ_n, which equals i for real positive arguments.
    pub fn wronskian(&self, n: usize) -> Option<Complex64> {
        let xi = self.xi.as_ref()?.get(n)?;
        let xi_p = self.xi_prime.as_ref()?.get(n)?;
        Some(self.psi[n] * xi_p - self.psi_prime[n] * xi)
    }
}

/// First order of the downward recurrences.
///
/// The tail must start beyond both `n_max` and |z|: the continued fraction only
/// contracts once n exceeds |z|.
pub fn start_order(n_max: usize, z: Complex64) -> usize {
    let zabs = z.norm().ceil() as usize;
    n_max.max(zabs) + zabs.max(15)
}

fn check_argument(z: Complex64) -> Result<()> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::domain(format!("non-finite argument {z}")));
    }
    if z == Complex64::new(0.0, 0.0) {
        return Err(Error::domain(
            "Riccati-Bessel functions need a non-zero argument",
        ));
    }
    Ok(())
}

/// Ratios ψ_n/ψ_{n-1} for n = 1..=n_max (index 0 unused).
fn psi_ratios(n_max: usize, z: Complex64) -> Vec<Complex64> {
    let n_start = start_order(n_max, z);
    let inv_z = z.inv();
    let mut ratios = vec![Complex64::new(0.0, 0.0); n_max + 1];
    let mut r = Complex64::new(0.0, 0.0);
    for n in (1..=n_start).rev() {
        let mut denom = inv_z * (2 * n + 1) as f64 - r;
        if denom == Complex64::new(0.0, 0.0) {
            denom = Complex64::new(f64::MIN_POSITIVE, 0.0);
        }
        r = denom.inv();
        if n <= n_max {
            ratios[n] = r;
        }
    }
    ratios
}

/// ψ_n(z) and ψ'_n(z) for n = 0..=n_max.
///
/// ψ_0 is `sin z` as evaluated by the platform. ψ_1 uses its closed form
/// unless that form cancels (|ψ_1/ψ_0| ≤ 1), in which case it is taken from the
/// continued fraction.
pub fn riccati_psi(n_max: usize, z: Complex64) -> Result<RiccatiTable> {
    check_argument(z)?;
    if z.im.abs() > MAX_IMAG_ARG {
        return Err(Error::Range {
            order: None,
            z,
            reason: format!("|Im z| exceeds {MAX_IMAG_ARG}; e^|Im z| overflows"),
        });
    }

    let ratios = psi_ratios(n_max, z);
    let (sin_z, cos_z) = (z.sin(), z.cos());

    let mut psi = Vec::with_capacity(n_max + 1);
    psi.push(sin_z);
    if n_max >= 1 {
        let r1 = ratios[1];
        let psi1 = if r1.norm() <= 1.0 {
            r1 * sin_z
        } else {
            sin_z / z - cos_z
        };
        psi.push(psi1);
        for n in 2..=n_max {
            let prev = psi[n - 1];
            psi.push(prev * ratios[n]);
        }
    }

    let mut psi_prime = Vec::with_capacity(n_max + 1);
    psi_prime.push(cos_z);
    for n in 1..=n_max {
        psi_prime.push(psi[n - 1] - psi[n] * (n as f64) / z);
    }

    Ok(RiccatiTable {
        order_max: n_max,
        argument: z,
        psi,
        psi_prime,
        xi: None,
        xi_prime: None,
    })
}

/// ψ_n, ψ'_n, ξ_n and ξ'_n at a real positive argument.
pub fn riccati_xi(n_max: usize, x: f64) -> Result<RiccatiTable> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!(
            "ξ_n needs a finite positive real argument, got {x}"
        )));
    }
    let mut table = riccati_psi(n_max, Complex64::new(x, 0.0))?;
    // Real arguments give real ψ; drop round-off in the imaginary part.
    for v in table.psi.iter_mut().chain(table.psi_prime.iter_mut()) {
        v.im = 0.0;
    }

    let (s, c) = x.sin_cos();
    let mut chi = Vec::with_capacity(n_max + 1);
    chi.push(c);
    for n in 0..n_max {
        let next = if n == 0 {
            c / x + s
        } else {
            (2 * n + 1) as f64 / x * chi[n] - chi[n - 1]
        };
        if !next.is_finite() || next.abs() * ((n + 1) as f64 / x).max(1.0) > XI_OVERFLOW {
            break;
        }
        chi.push(next);
    }

    let xi: Vec<Complex64> = chi
        .iter()
        .zip(&table.psi)
        .map(|(&ch, &ps)| Complex64::new(ps.re, -ch))
        .collect();
    let mut xi_prime = Vec::with_capacity(xi.len());
    xi_prime.push(Complex64::new(c, s));
    for n in 1..xi.len() {
        xi_prime.push(xi[n - 1] - xi[n] * (n as f64 / x));
    }

    table.xi = Some(xi);
    table.xi_prime = Some(xi_prime);
    Ok(table)
}

/// Logarithmic derivatives D_n(z) = ψ'_n(z)/ψ_n(z) for n = 0..=n_max.
///
/// Bounded for every passive interior argument, so it is the quantity Mie
/// assembly uses for strongly absorbing spheres.
pub fn log_derivative(n_max: usize, z: Complex64) -> Result<Vec<Complex64>> {
    check_argument(z)?;
    let n_start = start_order(n_max, z);
    let inv_z = z.inv();
    let mut out = vec![Complex64::new(0.0, 0.0); n_max + 1];
    let mut d = Complex64::new(0.0, 0.0);
    for n in (1..=n_start).rev() {
        let nz = inv_z * n as f64;
        d = nz - (d + nz).inv();
        if n - 1 <= n_max {
            out[n - 1] = d;
        }
    }
    Ok(out)
}
