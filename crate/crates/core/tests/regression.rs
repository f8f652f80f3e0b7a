//! Pinned values for the reference configuration. These guard against silent
//! numerical drift; they were cross-checked against an independent
//! double-precision implementation built on library Bessel functions.

use qforce_core::force::{reference, ThermalState};
use qforce_core::*;

fn close(got: f64, want: f64, tol: f64) {
    assert!(
        (got / want - 1.0).abs() <= tol,
        "got {got:.17e}, want {want:.17e}"
    );
}

#[test]
fn sigma_pr_at_reference_radius() {
    let t = SphereTarget::new(reference::RADIUS, reference::material()).unwrap();
    let cs =
        cross_sections(&mie_coefficients(&t, reference::omega0(), reference::N_TRUNC).unwrap());
    close(cs.sigma_pr, 3.349_429_086_854_971e-10, 1e-12);
    close(cs.sigma_ext, 6.744_704_268_703_202e-10, 1e-12);
    close(cs.sigma_sca, 4.525_315_022_642_864e-10, 1e-12);
    assert!(cs.warnings.is_empty());
}

#[test]
fn sweep_points() {
    let radii = [0.2e-6, 1e-6, 2.5e-6, 5e-6];
    let want = [
        2.359_390_986_355_481e-13,
        4.750_621_049_304_187e-12,
        2.522_996_694_458_958e-11,
        8.622_563_686_350_034e-11,
    ];
    let cs = sweep_radii(
        &reference::material(),
        &radii,
        reference::omega0(),
        TruncationPolicy::Fixed(200),
    )
    .unwrap();
    for (c, w) in cs.iter().zip(want) {
        close(c.sigma_pr, w, 1e-12);
    }
}

#[test]
fn reference_force() {
    let t = SphereTarget::new(reference::RADIUS, reference::material()).unwrap();
    let f = total_force(
        &t,
        &reference::squeezing(),
        &ThermalState::new(300.0).unwrap(),
        &reference::grids(),
    )
    .unwrap();
    close(f.total.z, 1.665_668_783_059_475e-13, 1e-9);
    close(f.p_sq, 4.952_104_278_103_947e-4, 1e-12);
    assert!(f.total.xy().norm() <= 1e-12 * f.total.z);
    assert!(f.diagnostics.spectral_residual.unwrap() < 1e-10);
}
