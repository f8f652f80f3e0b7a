mod common;

use approx::assert_relative_eq;
use common::ExactArg;
use qforce_core::{log_derivative, riccati_psi, riccati_xi, Complex64};

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

#[test]
fn oracle_reproduces_closed_forms() {
    let z = ExactArg::new(13, 7, 10);
    let zv = z.value();
    assert!(rel(common::psi(0, z), zv.sin()) < 1e-15);
    assert!(rel(common::psi(1, z), zv.sin() / zv - zv.cos()) < 1e-14);
}

#[test]
fn psi_table_matches_taylor_oracle() {
    let z = ExactArg::new(10, 5, 10);
    let table = riccati_psi(30, z.value()).unwrap();
    for n in 0..=30 {
        let r = rel(table.psi[n], common::psi(n, z));
        assert!(r < 1e-12, "n={n}: {r:e}");
    }
}

#[test]
fn log_derivative_matches_taylor_oracle() {
    let z = ExactArg::new(20, 2, 10);
    let d = log_derivative(10, z.value()).unwrap();
    for n in 1..=10 {
        let r = rel(d[n], common::log_derivative(n, z));
        assert!(r < 1e-10, "n={n}: {r:e}");
    }
}

#[test]
fn high_index_interior_argument_spot_orders() {
    // k^V a for a = 10 µm at 1550 nm is about 141·(3.48 + 0.014i).
    let z = ExactArg::new(490_680, 1_974, 1000);
    let d = log_derivative(200, z.value()).unwrap();
    let psi = riccati_psi(200, z.value()).unwrap();
    for n in [1usize, 100, 200] {
        let want_d = common::log_derivative(n, z);
        assert!(rel(d[n], want_d) < 1e-10, "D_{n}: {:e}", rel(d[n], want_d));
        let want_psi = common::psi(n, z);
        assert!(
            rel(psi.psi[n], want_psi) < 1e-10,
            "ψ_{n}: {:e}",
            rel(psi.psi[n], want_psi)
        );
    }
}

#[test]
fn real_argument_psi_matches_oracle() {
    let x = ExactArg::new(405, 0, 10);
    let t = riccati_xi(60, x.value().re).unwrap();
    for n in [0usize, 1, 10, 40, 60] {
        let want = common::psi(n, x).re;
        assert_relative_eq!(t.psi[n].re, want, max_relative = 1e-12);
    }
}
