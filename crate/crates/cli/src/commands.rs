//! The four subcommands. Each returns data; printing and file handling live
//! in the caller.

use std::f64::consts::PI;

use qforce_core::constants::{wavenumber, C};
use qforce_core::dyadic::DyadicSample;
use qforce_core::mie::truncation_order;
use qforce_core::quadrature::SpectralGrid;
use qforce_core::{
    assemble_dyadic, build_direction_grid, cross_sections, mie_coefficients, quantum_pressure,
    radiation_pressure_functional, riccati_xi, total_force, trace_cross_sections, Complex64,
    CrossSections, FunctionalMode, MieSolution, SphereTarget, TruncationPolicy, Vec3,
};
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::Loaded;
use crate::error::{CliError, CliResult};
use crate::output::{Cell, Table};

fn warnings_cell(cs: &CrossSections) -> Cell {
    Cell::Text(
        cs.warnings
            .iter()
            .map(|w| w.to_string())
            .collect::<Vec<_>>()
            .join("; "),
    )
}

/// Cross-sections for every (radius, wavelength) pair, radius-major.
pub fn cross_sections_table(cfg: &Loaded) -> CliResult<(Table, Vec<String>)> {
    let radii = cfg.radii()?;
    let omegas = cfg.omegas()?;
    let material = cfg.material()?;
    let policy = cfg.truncation()?;
    let jobs: Vec<(f64, f64)> = radii
        .iter()
        .flat_map(|&a| omegas.iter().map(move |&w| (a, w)))
        .collect();
    let results: Vec<(usize, CrossSections)> = jobs
        .par_iter()
        .map(|&(a, omega)| {
            let ctx = || format!("a = {a:e} m, λ = {:e} m", 2.0 * PI * C / omega);
            let target = SphereTarget::new(a, material.clone())
                .map_err(|e| CliError::from(e).context(ctx()))?;
            let n = truncation_order(wavenumber(omega) * a, policy)
                .map_err(|e| CliError::from(e).context(ctx()))?;
            let sol = mie_coefficients(&target, omega, n)
                .map_err(|e| CliError::from(e).context(ctx()))?;
            Ok((n, cross_sections(&sol)))
        })
        .collect::<CliResult<_>>()?;

    let mut t = Table::new(&[
        "a_m",
        "lambda_m",
        "x",
        "n_trunc",
        "sigma_ext_m2",
        "sigma_sca_m2",
        "sigma_abs_m2",
        "sigma_asym_m2",
        "sigma_pr_m2",
        "warnings",
    ]);
    for (&(a, omega), (n, cs)) in jobs.iter().zip(&results) {
        t.push(vec![
            a.into(),
            (2.0 * PI * C / omega).into(),
            (wavenumber(omega) * a).into(),
            (*n).into(),
            cs.sigma_ext.into(),
            cs.sigma_sca.into(),
            cs.sigma_abs.into(),
            cs.sigma_asym.into(),
            cs.sigma_pr.into(),
            warnings_cell(cs),
        ]);
    }
    Ok((t, vec![format!("policy: truncation = {policy:?}")]))
}

/// Drive, recoil and total force for every radius.
pub fn force_table(cfg: &Loaded) -> CliResult<(Table, Vec<String>)> {
    let radii = cfg.radii()?;
    let omega0 = cfg.omega0()?;
    let material = cfg.material()?;
    let squeeze = cfg.squeezing(omega0)?;
    let thermal = cfg.thermal()?;
    let grids = cfg.grids()?;
    if grids.mode == FunctionalMode::Dyadic {
        let limit = cfg.dyadic_max_x();
        if let Some(a) = radii.iter().find(|&&a| wavenumber(omega0) * a > limit) {
            return Err(CliError::Config(format!(
                "numerics.mode: dyadic mode is limited to x ≤ {limit} (raise numerics.dyadic_max_x); radius {a:e} m gives x = {:.3}",
                wavenumber(omega0) * a
            )));
        }
    }
    let qp = quantum_pressure(&squeeze, omega0)?;
    let results: Vec<_> = radii
        .par_iter()
        .map(|&a| {
            let target = SphereTarget::new(a, material.clone())?;
            total_force(&target, &squeeze, &thermal, &grids)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .zip(&radii)
        .map(|(r, a)| r.map_err(|e| CliError::from(e).context(format!("a = {a:e} m"))))
        .collect::<CliResult<_>>()?;

    let mut t = Table::new(&[
        "a_m",
        "x",
        "F_total_x_N",
        "F_total_y_N",
        "F_total_z_N",
        "F_drive_x_N",
        "F_drive_y_N",
        "F_drive_z_N",
        "F_recoil_x_N",
        "F_recoil_y_N",
        "F_recoil_z_N",
        "sigma_pr_at_omega0_m2",
        "P_sq_N_m2",
        "F_estimate_N",
        "recoil_relative",
        "angular_residual",
        "spectral_residual",
        "band_variation",
        "n_trunc",
    ]);
    for (a, r) in radii.iter().zip(&results) {
        let d = &r.diagnostics;
        t.push(vec![
            (*a).into(),
            (wavenumber(omega0) * a).into(),
            r.total.x.into(),
            r.total.y.into(),
            r.total.z.into(),
            r.drive.x.into(),
            r.drive.y.into(),
            r.drive.z.into(),
            r.recoil.x.into(),
            r.recoil.y.into(),
            r.recoil.z.into(),
            r.sigma_pr_at_omega0.into(),
            r.p_sq.into(),
            (r.sigma_pr_at_omega0 * r.p_sq).into(),
            d.recoil_relative.into(),
            d.angular_residual.into(),
            d.spectral_residual.unwrap_or(f64::NAN).into(),
            d.band_variation.into(),
            d.n_trunc_max.into(),
        ]);
    }
    let mut notes = vec![
        format!(
            "derived: omega0 = {omega0:.16e} rad/s, r0 = {:.16e}, delta_omega_eff = {:.16e} rad/s, delta_o_eff = {:.16e} sr, P_sq = {:.16e} N/m^2",
            squeeze.r0, qp.delta_omega_eff, qp.delta_o_eff, qp.p_sq
        ),
        format!("grids: {grids:?}"),
    ];
    notes.extend(qp.warnings.iter().map(|w| format!("warning: {w}")));
    Ok((t, notes))
}

/// Radius sweep of σ_pr with the narrowband and band-integrated forces.
pub fn fig1_table(cfg: &Loaded) -> CliResult<(Table, Vec<String>)> {
    let (forces, notes) = force_table(cfg)?;
    let get = |name: &str| forces.column(name).expect("force table column");
    let (a, x, pr, est, fz) = (
        get("a_m"),
        get("x"),
        get("sigma_pr_at_omega0_m2"),
        get("F_estimate_N"),
        get("F_total_z_N"),
    );
    let omega0 = cfg.omega0()?;
    let axis = cfg.squeezing(omega0)?.axis;
    let (fx, fy) = (get("F_total_x_N"), get("F_total_y_N"));
    let mut t = Table::new(&[
        "a_m",
        "x",
        "sigma_pr_m2",
        "Q_pr",
        "F_estimate_N",
        "F_axial_N",
    ]);
    let num = |c: &Cell| match c {
        Cell::Float(v) => *v,
        Cell::Int(v) => *v as f64,
        Cell::Text(_) => f64::NAN,
    };
    for i in 0..a.len() {
        let radius = num(a[i]);
        let f = Vec3::new(num(fx[i]), num(fy[i]), num(fz[i]));
        t.push(vec![
            radius.into(),
            num(x[i]).into(),
            num(pr[i]).into(),
            (num(pr[i]) / (PI * radius * radius)).into(),
            num(est[i]).into(),
            f.dot(&axis).into(),
        ]);
    }
    Ok((t, notes))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: String, residual: f64, tolerance: f64) -> Self {
        Self {
            name,
            residual,
            tolerance,
            passed: residual <= tolerance,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CertifyReport {
    pub checks: Vec<Check>,
}

impl CertifyReport {
    pub fn failures(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            s.push_str(&format!(
                "{:4}  {:44}  residual {:.3e}  tolerance {:.1e}\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.residual,
                c.tolerance
            ));
        }
        let failures = self.failures();
        s.push_str(&format!(
            "certify: {} checks, {} failed\n",
            self.checks.len(),
            failures.len()
        ));
        s.push_str(&serde_json::json!({ "failures": failures }).to_string());
        s.push('\n');
        s
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&["check", "residual", "tolerance", "passed"]);
        for c in &self.checks {
            t.push(vec![
                Cell::Text(c.name.clone()),
                c.residual.into(),
                c.tolerance.into(),
                Cell::Text(c.passed.to_string()),
            ]);
        }
        t
    }
}

const TOL_WRONSKIAN: f64 = 1e-10;
const TOL_UNITARITY: f64 = 1e-12;
const TOL_OPTICAL: f64 = 1e-10;
const TOL_RECIPROCITY: f64 = 1e-10;
const TOL_TRACE: f64 = 1e-6;
const TOL_NULL: f64 = 1e-10;

fn label(eps: Complex64) -> String {
    format!("{}{:+}i", eps.re, eps.im)
}

fn random_dir(rng: &mut impl Rng) -> Vec3 {
    let u: f64 = rng.gen_range(-1.0..1.0);
    let phi: f64 = rng.gen_range(0.0..2.0 * PI);
    let s = (1.0 - u * u).sqrt();
    Vec3::new(s * phi.cos(), s * phi.sin(), u)
}

/// Runs the identity suite on every (size parameter, permittivity) pair.
pub fn certify(cfg: &Loaded) -> CliResult<CertifyReport> {
    let c = cfg.config.certify.clone().unwrap_or_default();
    let xs = c
        .size_parameters
        .unwrap_or_else(|| vec![0.5, 1.0, 2.0, 5.0]);
    let perms: Vec<Complex64> = match (c.permittivities, &cfg.config.material) {
        (Some(p), _) => p.iter().map(|[re, im]| Complex64::new(*re, *im)).collect(),
        (None, Some(m)) if m.epsilon.is_some() => {
            let [re, im] = m.epsilon.unwrap();
            vec![Complex64::new(re, im)]
        }
        _ => vec![Complex64::new(2.25, 0.0), Complex64::new(12.11, 0.1)],
    };
    let pairs = c.pairs.unwrap_or(100);
    let seed = c.seed.unwrap_or(1);
    let policy = cfg.truncation()?;
    let grids = cfg.grids()?;
    let grid = build_direction_grid(grids.n_theta, grids.n_phi)?;
    for &x in &xs {
        if !(x > 0.0 && x <= cfg.dyadic_max_x()) {
            return Err(CliError::Config(format!(
                "certify.size_parameters: {x} is outside (0, {}] (raise numerics.dyadic_max_x)",
                cfg.dyadic_max_x()
            )));
        }
    }

    let mut checks = Vec::new();
    for &x in &xs {
        let n = truncation_order(x, policy)?;
        let t = riccati_xi(n, x)?;
        let w = (0..t.xi_len())
            .map(|k| (t.wronskian(k).unwrap() - Complex64::i()).norm())
            .fold(0.0, f64::max);
        checks.push(Check::new(format!("wronskian[x={x}]"), w, TOL_WRONSKIAN));
    }

    let combos: Vec<(f64, Complex64)> = xs
        .iter()
        .flat_map(|&x| perms.iter().map(move |&e| (x, e)))
        .collect();
    let per_combo: Vec<Vec<Check>> = combos
        .par_iter()
        .enumerate()
        .map(|(i, &(x, eps))| {
            certify_one(x, eps, policy, &grid, pairs, seed.wrapping_add(i as u64))
        })
        .collect::<CliResult<_>>()?;
    checks.extend(per_combo.into_iter().flatten());
    Ok(CertifyReport { checks })
}

fn certify_one(
    x: f64,
    eps: Complex64,
    policy: TruncationPolicy,
    grid: &qforce_core::DirectionGrid,
    pairs: usize,
    seed: u64,
) -> CliResult<Vec<Check>> {
    let tag = format!("x={x},eps={}", label(eps));
    let n = truncation_order(x, policy)?;
    let sol = MieSolution::for_size_parameter(eps, x, n)?;
    let lossless = eps.im == 0.0;
    let mut out = Vec::new();

    let mut unit = 0.0f64;
    for k in 1..=n {
        for c in [sol.a(k), sol.b(k)] {
            let d = c.re - c.norm_sqr();
            unit = unit.max(if lossless { d.abs() } else { (-d).max(0.0) });
        }
    }
    let kind = if lossless { "unitarity" } else { "passivity" };
    out.push(Check::new(format!("{kind}[{tag}]"), unit, TOL_UNITARITY));

    let series = cross_sections(&sol);
    if lossless {
        let r = (series.sigma_ext - series.sigma_sca).abs() / series.sigma_ext;
        out.push(Check::new(
            format!("optical_theorem[{tag}]"),
            r,
            TOL_OPTICAL,
        ));
    } else {
        let r = (-series.sigma_abs / series.sigma_ext).max(0.0);
        out.push(Check::new(
            format!("absorption_sign[{tag}]"),
            r,
            TOL_OPTICAL,
        ));
    }

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let (mut recip, mut trans) = (0.0f64, 0.0f64);
    for _ in 0..pairs {
        let (m, k) = (random_dir(&mut rng), random_dir(&mut rng));
        let s: DyadicSample = assemble_dyadic(&sol, &m, &k, n)?;
        let r = assemble_dyadic(&sol, &(-k), &(-m), n)?;
        let norm = s.norm();
        if norm > 0.0 {
            recip = recip.max((s.matrix.transpose() - r.matrix).norm() / norm);
        }
        trans = trans.max(s.transversality_residual());
    }
    out.push(Check::new(
        format!("reciprocity[{tag}]"),
        recip,
        TOL_RECIPROCITY,
    ));
    out.push(Check::new(
        format!("transversality[{tag}]"),
        trans,
        TOL_RECIPROCITY,
    ));

    // Traces at the configured order against the converged series.
    let n_ref = truncation_order(x, TruncationPolicy::Auto)?.max(n) * 2;
    let converged = cross_sections(&MieSolution::for_size_parameter(eps, x, n_ref)?);
    let trace = match trace_cross_sections(&sol, grid, &Vec3::new(0.3, -0.7, 0.65)) {
        Ok(t) => {
            let v = t.value;
            let rel = |a: f64, b: f64| {
                if b == 0.0 {
                    a.abs()
                } else {
                    (a - b).abs() / b.abs()
                }
            };
            rel(v.sigma_ext, converged.sigma_ext)
                .max(rel(v.sigma_sca, converged.sigma_sca))
                .max(rel(v.sigma_asym, converged.sigma_asym))
        }
        Err(qforce_core::Error::Accuracy { achieved, .. }) => achieved.max(TOL_TRACE * 10.0),
        Err(e) => return Err(e.into()),
    };
    out.push(Check::new(
        format!("trace_mapping[{tag}]"),
        trace,
        TOL_TRACE,
    ));

    if eps != Complex64::new(1.0, 0.0) {
        let sg = SpectralGrid::band(C, 1e-3 * C, 2)?;
        let provider = |_: f64| MieSolution::for_size_parameter(eps, x, n);
        let coarse = build_direction_grid(grid.n_theta().min(8), grid.n_phi().min(16))?;
        for (mode, name) in [
            (FunctionalMode::SphereReduced, "sphere_reduced"),
            (FunctionalMode::Dyadic, "dyadic"),
        ] {
            let v = radiation_pressure_functional(|_, _| 1.0, provider, &sg, &coarse, mode)?;
            let r = if v.scale == 0.0 {
                0.0
            } else {
                v.force.norm() / v.scale
            };
            out.push(Check::new(
                format!("isotropic_null_{name}[{tag}]"),
                r,
                TOL_NULL,
            ));
        }
    }
    Ok(out)
}
