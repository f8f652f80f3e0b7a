//! Fixtures shared by the benchmarks.

use qforce_core::force::reference;
use qforce_core::{MieSolution, SphereTarget};

/// The 10 µm reference sphere.
pub fn reference_target() -> SphereTarget {
    SphereTarget::new(reference::RADIUS, reference::material()).expect("reference sphere")
}

/// Mie solution of the reference sphere at the carrier, truncated at N = 200.
pub fn reference_solution() -> MieSolution {
    qforce_core::mie_coefficients(&reference_target(), reference::omega0(), reference::N_TRUNC)
        .expect("reference solution")
}

/// `count` radii evenly spaced over the reference sweep range.
pub fn sweep_radii(count: usize) -> Vec<f64> {
    let (lo, hi) = (reference::SWEEP_MIN, reference::SWEEP_MAX);
    (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect()
}
