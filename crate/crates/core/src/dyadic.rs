//! Far-field scattering dyadic of a sphere built from vector spherical harmonics.
//!
//! Convention: X_nm = L Y_nm / √(n(n+1)) with L = −i r × ∇ and Y_nm the fully
//! normalised spherical harmonics carrying the Condon-Shortley phase. Every
//! quantity derived here pairs X_nm with X*_nm, so only ∫|X_nm|² do = 1 matters.
//!
//! The dyadic is
//!
//! S(m|n) = (4πi/k) Σ_n Σ_m [ a_n (m̂ × X_nm(m̂))(n̂ × X*_nm(n̂)) + b_n X_nm(m̂) X*_nm(n̂) ].

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mie::{CrossSections, MieSolution};
use crate::quadrature::{sum_weighted, DirectionGrid, Refined, MAX_DOUBLINGS};
use crate::sum::KahanSum;
use crate::{CMat3, CVec3, Vec3};

/// Residual target for the auto-refined trace quadratures.
pub const TRACE_REFINE_TOL: f64 = 1e-10;

fn zero3() -> CVec3 {
    CVec3::zeros()
}

fn check_direction(dir: &Vec3) -> Result<Vec3> {
    let norm = dir.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::domain(format!(
            "direction {dir:?} is not a usable vector"
        )));
    }
    Ok(dir / norm)
}

/// Spherical angles of a unit vector as (cos θ, sin θ, φ); φ = 0 on the poles.
fn angles(dir: &Vec3) -> (f64, f64, f64) {
    let st = dir.x.hypot(dir.y);
    let ct = dir.z;
    let phi = if st == 0.0 { 0.0 } else { dir.y.atan2(dir.x) };
    (ct, st, phi)
}

/// All X_nm(r̂) and r̂ × X_nm(r̂) for 1 ≤ n ≤ n_max at one direction.
#[derive(Debug, Clone)]
pub struct VshTable {
    n_max: usize,
    dir: Vec3,
    x: Vec<CVec3>,
    rx: Vec<CVec3>,
}

#[inline]
fn index(n: usize, m: i64) -> usize {
    // n² − 1 entries precede degree n; m runs from −n.
    (n * n - 1) + (m + n as i64) as usize
}

impl VshTable {
    pub fn new(n_max: usize, dir: &Vec3) -> Result<Self> {
        let dir = check_direction(dir)?;
        let len = (n_max + 1) * (n_max + 1) - 1;
        let mut x = vec![zero3(); len];
        let (ct, st, phi) = angles(&dir);
        let theta_hat = Vec3::new(ct * phi.cos(), ct * phi.sin(), -st);
        let phi_hat = Vec3::new(-phi.sin(), phi.cos(), 0.0);
        let lift = |v: &Vec3| CVec3::new(v.x.into(), v.y.into(), v.z.into());
        let (th, ph) = (lift(&theta_hat), lift(&phi_hat));
        let i = Complex64::new(0.0, 1.0);

        // t[n] = P̄_n^m(cos θ)/sin θ for the current m ≥ 1, n = m - 1..=n_max.
        let mut t_mm = 1.0 / (4.0 * PI).sqrt();
        let mut t_n1 = vec![0.0; n_max + 1]; // P̄_n^1 / sin θ, kept for m = 0
        let mut t = vec![0.0; n_max + 1];
        for m in 1..=n_max {
            let mf = m as f64;
            t_mm *= -((2.0 * mf + 1.0) / (2.0 * mf)).sqrt();
            if m >= 2 {
                t_mm *= st;
            }
            t.iter_mut().for_each(|v| *v = 0.0);
            t[m] = t_mm;
            if m < n_max {
                t[m + 1] = (2.0 * mf + 3.0).sqrt() * ct * t_mm;
            }
            for n in (m + 2)..=n_max {
                let nf = n as f64;
                let a = ((4.0 * nf * nf - 1.0) / (nf * nf - mf * mf)).sqrt();
                let b = (((nf - 1.0).powi(2) - mf * mf) / (4.0 * (nf - 1.0).powi(2) - 1.0)).sqrt();
                t[n] = a * (ct * t[n - 1] - b * t[n - 2]);
            }
            if m == 1 {
                t_n1.copy_from_slice(&t);
            }

            let phase = Complex64::from_polar(1.0, mf * phi);
            for n in m..=n_max {
                let nf = n as f64;
                let prev = if n > m { t[n - 1] } else { 0.0 };
                let dtheta = nf * ct * t[n]
                    - ((2.0 * nf + 1.0) * (nf * nf - mf * mf) / (2.0 * nf - 1.0)).sqrt() * prev;
                let norm = 1.0 / (nf * (nf + 1.0)).sqrt();
                let v = (th * Complex64::from(-mf * t[n]) - ph * (i * dtheta)) * (phase * norm);
                x[index(n, m as i64)] = v;
                // X_{n,−m} = (−1)^{m+1} X*_nm
                let sign = if m % 2 == 0 { -1.0 } else { 1.0 };
                x[index(n, -(m as i64))] = v.map(|c| c.conj()) * Complex64::from(sign);
            }
        }
        for n in 1..=n_max {
            // ∂θ P̄_n^0 = √(n(n+1)) P̄_n^1, and the 1/√(n(n+1)) normalisation cancels it.
            let p_n1 = st * t_n1[n];
            x[index(n, 0)] = ph * (-i * p_n1);
        }

        let d = lift(&dir);
        let rx = x.iter().map(|v| d.cross(v)).collect();
        Ok(Self { n_max, dir, x, rx })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn direction(&self) -> Vec3 {
        self.dir
    }

    /// X_nm at this direction.
    pub fn x(&self, n: usize, m: i64) -> CVec3 {
        self.x[index(n, m)]
    }

    /// r̂ × X_nm at this direction.
    pub fn r_cross_x(&self, n: usize, m: i64) -> CVec3 {
        self.rx[index(n, m)]
    }
}

/// X_nm(dir) for n ≥ 1, |m| ≤ n.
pub fn vector_spherical_harmonic(n: usize, m: i64, dir: &Vec3) -> Result<CVec3> {
    if n == 0 || m.unsigned_abs() as usize > n {
        return Err(Error::domain(format!(
            "invalid vector spherical harmonic indices (n={n}, m={m})"
        )));
    }
    Ok(VshTable::new(n, dir)?.x(n, m))
}

/// Scattering dyadic at one (outgoing, incident) pair. Units: metres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadicSample {
    pub out_dir: Vec3,
    pub in_dir: Vec3,
    pub matrix: CMat3,
}

impl DyadicSample {
    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        frobenius(&self.matrix)
    }

    /// max(|m·S|, |S·n|) / ‖S‖; zero for a zero dyadic.
    pub fn transversality_residual(&self) -> f64 {
        let s = &self.matrix;
        let norm = self.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let m = self.out_dir.map(Complex64::from);
        let n = self.in_dir.map(Complex64::from);
        let left = s.transpose() * m;
        let right = s * n;
        left.norm().max(right.norm()) / norm
    }
}

pub(crate) fn frobenius(s: &CMat3) -> f64 {
    s.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// S(m|n) from precomputed harmonic tables.
pub fn dyadic_from_tables(
    sol: &MieSolution,
    out: &VshTable,
    inc: &VshTable,
    n_trunc: usize,
) -> CMat3 {
    let n_trunc = n_trunc.min(sol.n_trunc).min(out.n_max).min(inc.n_max);
    let mut s = CMat3::zeros();
    for n in 1..=n_trunc {
        let (an, bn) = (sol.a(n), sol.b(n));
        if an == Complex64::default() && bn == Complex64::default() {
            continue;
        }
        let mut tm = CMat3::zeros();
        let mut te = CMat3::zeros();
        for m in -(n as i64)..=(n as i64) {
            tm += out.r_cross_x(n, m) * inc.r_cross_x(n, m).map(|c| c.conj()).transpose();
            te += out.x(n, m) * inc.x(n, m).map(|c| c.conj()).transpose();
        }
        s += tm * an + te * bn;
    }
    s * Complex64::new(0.0, 4.0 * PI / sol.k)
}

/// S(out|in) for one direction pair, truncated at `n_trunc` (capped by the solution).
pub fn assemble_dyadic(
    sol: &MieSolution,
    out_dir: &Vec3,
    in_dir: &Vec3,
    n_trunc: usize,
) -> Result<DyadicSample> {
    let n = n_trunc.min(sol.n_trunc);
    let out = VshTable::new(n, out_dir)?;
    let inc = VshTable::new(n, in_dir)?;
    Ok(DyadicSample {
        out_dir: out.dir,
        in_dir: inc.dir,
        matrix: dyadic_from_tables(sol, &out, &inc, n),
    })
}

/// Scattered-power moments for one incidence: ∫ tr[S S†] do_m and ∫ m tr[S S†] do_m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteredMoments {
    pub power: f64,
    pub momentum: Vec3,
}

/// Integrates tr[S(m|n)·S^{T*}(m|n)] and its first moment over the outgoing
/// directions of `grid`, using harmonic tables precomputed at the grid nodes.
pub fn scattered_moments(
    sol: &MieSolution,
    inc: &VshTable,
    out_tables: &[VshTable],
    weights: &[f64],
) -> ScatteredMoments {
    let n = sol.n_trunc;
    let traces: Vec<f64> = out_tables
        .par_iter()
        .map(|out| frobenius(&dyadic_from_tables(sol, out, inc, n)).powi(2))
        .collect();
    let mut power = KahanSum::default();
    for (t, w) in traces.iter().zip(weights) {
        power.add(t * w);
    }
    let moments: Vec<Vec3> = traces
        .iter()
        .zip(out_tables)
        .map(|(t, out)| out.dir * *t)
        .collect();
    ScatteredMoments {
        power: power.value(),
        momentum: sum_weighted(&moments, weights),
    }
}

/// Harmonic tables at every node of a grid.
pub fn tables_for_grid(grid: &DirectionGrid, n_max: usize) -> Result<Vec<VshTable>> {
    grid.nodes()
        .par_iter()
        .map(|d| VshTable::new(n_max, d))
        .collect()
}

/// 2σ_ext = (4π/k) Im tr S(n|n).
pub fn forward_extinction(sol: &MieSolution, in_dir: &Vec3) -> Result<f64> {
    let s = assemble_dyadic(sol, in_dir, in_dir, sol.n_trunc)?;
    Ok(0.5 * 4.0 * PI / sol.k * s.matrix.trace().im)
}

/// Cross-sections from the dyadic traces for incidence along `in_dir`,
/// doubling `grid` until σ_sca and σ_asym settle to [`TRACE_REFINE_TOL`].
pub fn trace_cross_sections(
    sol: &MieSolution,
    grid: &DirectionGrid,
    in_dir: &Vec3,
) -> Result<Refined<CrossSections>> {
    let in_dir = check_direction(in_dir)?;
    let inc = VshTable::new(sol.n_trunc, &in_dir)?;
    let sigma_ext = forward_extinction(sol, &in_dir)?;

    let eval = |g: &DirectionGrid| -> Result<(f64, f64)> {
        let tables = tables_for_grid(g, sol.n_trunc)?;
        let mom = scattered_moments(sol, &inc, &tables, g.weights());
        Ok((0.5 * mom.power, 0.5 * mom.momentum.dot(&in_dir)))
    };

    let mut g = grid.clone();
    let mut prev = eval(&g)?;
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_DOUBLINGS {
        let fine_grid = g.refined()?;
        let fine = eval(&fine_grid)?;
        let scale = fine.0.abs();
        residual = if scale == 0.0 {
            0.0
        } else {
            ((fine.0 - prev.0).abs()).max((fine.1 - prev.1).abs()) / scale
        };
        if residual <= TRACE_REFINE_TOL {
            let (sigma_sca, sigma_asym) = prev;
            return Ok(Refined {
                value: CrossSections {
                    omega: sol.omega,
                    sigma_ext,
                    sigma_sca,
                    sigma_abs: sigma_ext - sigma_sca,
                    sigma_asym,
                    sigma_pr: sigma_ext - sigma_asym,
                    warnings: sol.warnings.clone(),
                },
                residual,
                n_theta: g.n_theta(),
                n_phi: g.n_phi(),
            });
        }
        g = fine_grid;
        prev = fine;
    }
    Err(Error::Accuracy {
        what: "dyadic trace quadrature".into(),
        achieved: residual,
        target: TRACE_REFINE_TOL,
    })
}
