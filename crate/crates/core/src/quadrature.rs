//! Quadrature over the unit sphere of directions and over a frequency band.

use std::f64::consts::PI;

use gauss_quad::legendre::GaussLegendre;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum::KahanSum;
use crate::Vec3;

pub const DEFAULT_N_THETA: usize = 64;
pub const DEFAULT_N_PHI: usize = 128;
/// Relative self-convergence target used by the auto-refining integrators.
pub const DEFAULT_REFINE_TOL: f64 = 1e-8;
/// Number of grid doublings tried before giving up.
pub const MAX_DOUBLINGS: usize = 4;

/// Gauss-Legendre nodes and weights on [-1, 1], nodes ascending.
pub fn gauss_legendre(n: usize) -> Result<Vec<(f64, f64)>> {
    let rule = GaussLegendre::new(n)
        .map_err(|e| Error::config(format!("Gauss-Legendre rule of order {n}: {e}")))?;
    let mut pairs = rule.into_node_weight_pairs();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs)
}

/// Unit vectors completing `axis` to a right-handed orthonormal frame.
pub fn orthonormal_frame(axis: &Vec3) -> (Vec3, Vec3) {
    let a = axis.normalize();
    let helper = if a.x.abs() <= a.y.abs() && a.x.abs() <= a.z.abs() {
        Vec3::x()
    } else if a.y.abs() <= a.z.abs() {
        Vec3::y()
    } else {
        Vec3::z()
    };
    let e1 = (helper - a * helper.dot(&a)).normalize();
    let e2 = a.cross(&e1);
    (e1, e2)
}

/// Product rule: Gauss-Legendre in cos θ times the uniform rule in φ, with θ
/// measured from `axis`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionGrid {
    n_theta: usize,
    n_phi: usize,
    axis: Vec3,
    /// Lower end of the cos θ range; −1 for the whole sphere.
    cos_min: f64,
    nodes: Vec<Vec3>,
    weights: Vec<f64>,
}

/// Product grid about ẑ.
pub fn build_direction_grid(n_theta: usize, n_phi: usize) -> Result<DirectionGrid> {
    DirectionGrid::aligned(n_theta, n_phi, Vec3::z())
}

impl DirectionGrid {
    pub fn aligned(n_theta: usize, n_phi: usize, axis: Vec3) -> Result<Self> {
        Self::cap(n_theta, n_phi, axis, PI)
    }

    /// Product rule restricted to the polar cap θ ≤ `theta_max` about `axis`.
    /// Integrands vanishing outside the cap are integrated without the
    /// edge discontinuity spoiling convergence.
    pub fn cap(n_theta: usize, n_phi: usize, axis: Vec3, theta_max: f64) -> Result<Self> {
        if !(theta_max > 0.0 && theta_max <= PI) {
            return Err(Error::config(format!(
                "cap half-angle must lie in (0, π], got {theta_max}"
            )));
        }
        let cos_min = if theta_max == PI {
            -1.0
        } else {
            theta_max.cos()
        };
        if n_theta < 2 || n_phi < 4 {
            return Err(Error::config(format!(
                "direction grid needs N_theta ≥ 2 and N_phi ≥ 4, got ({n_theta}, {n_phi})"
            )));
        }
        let norm = axis.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::config(
                "direction grid axis must be a non-zero vector",
            ));
        }
        let axis = axis / norm;
        let (e1, e2) = if axis == Vec3::z() {
            (Vec3::x(), Vec3::y())
        } else {
            orthonormal_frame(&axis)
        };

        let gl = gauss_legendre(n_theta)?;
        let dphi = 2.0 * PI / n_phi as f64;
        let mut nodes = Vec::with_capacity(n_theta * n_phi);
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        let half = 0.5 * (1.0 - cos_min);
        for &(t, w) in &gl {
            let u = cos_min + half * (t + 1.0);
            let w = w * half;
            let s = (1.0 - u * u).max(0.0).sqrt();
            for j in 0..n_phi {
                let (sp, cp) = (dphi * j as f64).sin_cos();
                let n = e1 * (s * cp) + e2 * (s * sp) + axis * u;
                nodes.push(n.normalize());
                weights.push(w * dphi);
            }
        }
        Ok(Self {
            n_theta,
            n_phi,
            axis,
            cos_min,
            nodes,
            weights,
        })
    }

    pub fn default_grid() -> Self {
        build_direction_grid(DEFAULT_N_THETA, DEFAULT_N_PHI).expect("default sizes are valid")
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn axis(&self) -> Vec3 {
        self.axis
    }

    pub fn nodes(&self) -> &[Vec3] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Polar half-angle covered by the grid; π for the whole sphere.
    pub fn theta_max(&self) -> f64 {
        self.cos_min.acos()
    }

    pub fn is_full_sphere(&self) -> bool {
        self.cos_min == -1.0
    }

    /// Highest spherical-harmonic degree integrated exactly (whole-sphere grids).
    pub fn exact_degree(&self) -> usize {
        (2 * self.n_theta - 1).min(self.n_phi - 1)
    }

    /// Same scheme about another axis.
    pub fn rotated_to(&self, axis: Vec3) -> Result<Self> {
        Self::cap(self.n_theta, self.n_phi, axis, self.theta_max())
    }

    /// Grid with both orders doubled.
    pub fn refined(&self) -> Result<Self> {
        Self::cap(
            2 * self.n_theta,
            2 * self.n_phi,
            self.axis,
            self.theta_max(),
        )
    }

    pub fn scheme(&self) -> String {
        let base = format!(
            "gauss-legendre(cos θ) x uniform(φ), ({}, {})",
            self.n_theta, self.n_phi
        );
        if self.is_full_sphere() {
            base
        } else {
            format!("{base}, cap θ ≤ {:.6}", self.theta_max())
        }
    }
}

/// Weighted sum of a scalar integrand over the grid.
///
/// Evaluation is parallel; the reduction runs in node order so the result does
/// not depend on scheduling.
pub fn integrate_direction<F>(grid: &DirectionGrid, f: F) -> f64
where
    F: Fn(&Vec3) -> f64 + Sync,
{
    let values: Vec<f64> = grid.nodes.par_iter().map(&f).collect();
    let mut acc = KahanSum::default();
    for (v, w) in values.iter().zip(&grid.weights) {
        acc.add(v * w);
    }
    acc.value()
}

/// Componentwise integral of a vector integrand.
pub fn integrate_direction_vec<F>(grid: &DirectionGrid, f: F) -> Vec3
where
    F: Fn(&Vec3) -> Vec3 + Sync,
{
    let values: Vec<Vec3> = grid.nodes.par_iter().map(&f).collect();
    sum_weighted(&values, &grid.weights)
}

pub(crate) fn sum_weighted(values: &[Vec3], weights: &[f64]) -> Vec3 {
    let mut acc = [KahanSum::default(); 3];
    for (v, w) in values.iter().zip(weights) {
        for i in 0..3 {
            acc[i].add(v[i] * w);
        }
    }
    Vec3::new(acc[0].value(), acc[1].value(), acc[2].value())
}

/// Integral together with its self-convergence estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Refined<T> {
    pub value: T,
    /// |I(2N) − I(N)| relative to max(|I(2N)|, `scale`).
    pub residual: f64,
    pub n_theta: usize,
    pub n_phi: usize,
}

/// Relative change of a scalar integral under one grid doubling.
pub fn self_convergence<F>(grid: &DirectionGrid, f: F) -> Result<f64>
where
    F: Fn(&Vec3) -> f64 + Sync,
{
    let coarse = integrate_direction(grid, &f);
    let fine = integrate_direction(&grid.refined()?, &f);
    Ok(relative_change(coarse, fine, 0.0))
}

fn relative_change(coarse: f64, fine: f64, scale: f64) -> f64 {
    let denom = fine.abs().max(scale);
    if denom == 0.0 {
        0.0
    } else {
        (fine - coarse).abs() / denom
    }
}

/// Doubles the grid until successive results agree to `tol` relative.
///
/// `scale` is a magnitude floor for the relative test, for integrals that
/// are expected to vanish.
pub fn integrate_adaptive<F>(
    start: &DirectionGrid,
    f: F,
    tol: f64,
    scale: f64,
) -> Result<Refined<f64>>
where
    F: Fn(&Vec3) -> f64 + Sync,
{
    let mut grid = start.clone();
    let mut prev = integrate_direction(&grid, &f);
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_DOUBLINGS {
        let fine_grid = grid.refined()?;
        let fine = integrate_direction(&fine_grid, &f);
        residual = relative_change(prev, fine, scale);
        if residual <= tol {
            return Ok(Refined {
                value: prev,
                residual,
                n_theta: grid.n_theta,
                n_phi: grid.n_phi,
            });
        }
        grid = fine_grid;
        prev = fine;
    }
    Err(Error::Accuracy {
        what: "direction quadrature".into(),
        achieved: residual,
        target: tol,
    })
}

/// Vector version of [`integrate_adaptive`]; the residual uses the Euclidean norm.
pub fn integrate_adaptive_vec<F>(
    start: &DirectionGrid,
    f: F,
    tol: f64,
    scale: f64,
) -> Result<Refined<Vec3>>
where
    F: Fn(&Vec3) -> Vec3 + Sync,
{
    let mut grid = start.clone();
    let mut prev = integrate_direction_vec(&grid, &f);
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_DOUBLINGS {
        let fine_grid = grid.refined()?;
        let fine = integrate_direction_vec(&fine_grid, &f);
        let denom = fine.norm().max(scale);
        residual = if denom == 0.0 {
            0.0
        } else {
            (fine - prev).norm() / denom
        };
        if residual <= tol {
            return Ok(Refined {
                value: prev,
                residual,
                n_theta: grid.n_theta,
                n_phi: grid.n_phi,
            });
        }
        grid = fine_grid;
        prev = fine;
    }
    Err(Error::Accuracy {
        what: "direction quadrature (vector)".into(),
        achieved: residual,
        target: tol,
    })
}

/// Gauss-Legendre rule on a finite frequency band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid {
    lo: f64,
    hi: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl SpectralGrid {
    /// `n` Gauss-Legendre nodes on [lo, hi] [rad/s].
    pub fn gauss_legendre(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::config(format!(
                "spectral band [{lo:e}, {hi:e}] is empty"
            )));
        }
        if n < 1 {
            return Err(Error::config("spectral grid needs at least one node"));
        }
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let (nodes, weights) = gauss_legendre(n)?
            .into_iter()
            .map(|(t, w)| (mid + half * t, half * w))
            .unzip();
        Ok(Self {
            lo,
            hi,
            nodes,
            weights,
        })
    }

    /// Band of total width `width` centred on `center`.
    pub fn band(center: f64, width: f64, n: usize) -> Result<Self> {
        Self::gauss_legendre(center - 0.5 * width, center + 0.5 * width, n)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn range(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Highest polynomial degree in ω integrated exactly.
    pub fn exact_degree(&self) -> usize {
        2 * self.nodes.len() - 1
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let mut acc = KahanSum::default();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc.add(f(x) * w);
        }
        acc.value()
    }
}
