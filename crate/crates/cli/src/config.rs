//! Run configuration: a TOML file, optionally layered over a preset, with
//! command-line flags applied last.

use std::path::{Path, PathBuf};

use qforce_core::force::{ForceGrids, ThermalState};
use qforce_core::{
    AngularEnvelope, Complex64, FunctionalMode, MaterialSpec, SpectralEnvelope, SqueezingProfile,
    TruncationPolicy, Vec3,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::units::{self, BandwidthUnit, Quantity};

pub const FIG1_PRESET: &str = include_str!("../presets/fig1.toml");
pub const CERTIFY_PRESET: &str = include_str!("../presets/certify.toml");

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub target: Option<Target>,
    pub material: Option<Material>,
    pub source: Option<Source>,
    pub squeezing: Option<Squeezing>,
    pub thermal: Option<Thermal>,
    pub numerics: Option<Numerics>,
    pub certify: Option<Certify>,
    pub output: Option<Output>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Target {
    pub radius: Option<Quantity>,
    pub radii: Option<Vec<Quantity>>,
    pub sweep: Option<Sweep>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub min: Option<Quantity>,
    pub max: Option<Quantity>,
    pub count: Option<usize>,
    pub spacing: Option<Spacing>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Material {
    /// [Re ε, Im ε]
    pub epsilon: Option<[f64; 2]>,
    /// Dispersion-table file, relative to the config file.
    pub table: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Source {
    pub wavelength: Option<Quantity>,
    pub frequency: Option<Quantity>,
    /// Sweep over vacuum wavelength.
    pub wavelength_sweep: Option<Sweep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Angular {
    Isotropic,
    GaussianCap {
        sigma: Quantity,
    },
    TopHat {
        theta_max: Option<Quantity>,
        projected_solid_angle: Option<Quantity>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Spectral {
    DeltaBand { width: Quantity },
    Gaussian { sigma: Quantity },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Squeezing {
    /// Bare r₀ or a noise reduction such as "6 dB".
    pub r0: Option<Quantity>,
    pub axis: Option<[f64; 3]>,
    pub angular: Option<Angular>,
    pub spectral: Option<Spectral>,
    pub bandwidth_unit: Option<BandwidthUnit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thermal {
    pub t_em: Option<Quantity>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    SphereReduced,
    Dyadic,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    /// "auto" or "fixed:N".
    pub truncation: Option<String>,
    pub n_omega: Option<usize>,
    pub n_theta: Option<usize>,
    pub n_phi: Option<usize>,
    pub mode: Option<Mode>,
    /// Largest size parameter allowed in dyadic mode.
    pub dyadic_max_x: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certify {
    pub size_parameters: Option<Vec<f64>>,
    pub permittivities: Option<Vec<[f64; 2]>>,
    pub pairs: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub path: Option<String>,
    pub columns: Option<Vec<String>>,
}

/// Flag values that override the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub bandwidth_unit: Option<BandwidthUnit>,
    pub truncation: Option<String>,
}

/// A parsed configuration together with the merged TOML it came from.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: RunConfig,
    pub merged: toml::Table,
    pub base_dir: PathBuf,
}

fn parse_table(text: &str, origin: &str) -> CliResult<toml::Table> {
    // Typed parse first so schema errors point at a line.
    toml::from_str::<RunConfig>(text).map_err(|e| CliError::Config(format!("{origin}: {e}")))?;
    toml::from_str::<toml::Table>(text).map_err(|e| CliError::Config(format!("{origin}: {e}")))
}

/// Sections whose keys are alternatives to each other; a file replaces them whole.
const WHOLE_SECTIONS: &[&str] = &["target", "material", "source"];

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        let nonempty = v.as_table().is_some_and(|t| !t.is_empty());
        if WHOLE_SECTIONS.contains(&k.as_str()) && nonempty {
            base.insert(k, v);
            continue;
        }
        merge_nested(base, k, v);
    }
}

fn merge_nested(base: &mut toml::Table, k: String, v: toml::Value) {
    match (base.get_mut(&k), v) {
        (Some(toml::Value::Table(b)), toml::Value::Table(o)) if !is_tagged(&o) => {
            for (k2, v2) in o {
                merge_nested(b, k2, v2);
            }
        }
        (_, v) => {
            base.insert(k, v);
        }
    }
}

/// Tagged envelopes replace each other whole.
fn is_tagged(t: &toml::Table) -> bool {
    t.contains_key("kind")
}

fn section<'a>(root: &'a mut toml::Table, name: &str) -> &'a mut toml::Table {
    root.entry(name.to_string())
        .or_insert_with(|| toml::Value::Table(toml::Table::new()))
        .as_table_mut()
        .expect("config sections are tables")
}

/// Reads `path` (if any) over `preset` (if any) and applies `flags`.
pub fn load(path: Option<&Path>, preset: Option<&str>, flags: &Overrides) -> CliResult<Loaded> {
    let mut merged = match preset {
        Some(text) => parse_table(text, "preset")?,
        None => toml::Table::new(),
    };
    let mut base_dir = PathBuf::from(".");
    if let Some(path) = path {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        merge(
            &mut merged,
            parse_table(&text, &path.display().to_string())?,
        );
        if let Some(dir) = path.parent() {
            base_dir = dir.to_path_buf();
        }
    }
    if let Some(t) = &flags.truncation {
        parse_truncation(t).map_err(|e| e.context("--truncation"))?;
        section(&mut merged, "numerics")
            .insert("truncation".into(), toml::Value::String(t.clone()));
    }
    if let Some(u) = flags.bandwidth_unit {
        if merged.contains_key("squeezing") {
            section(&mut merged, "squeezing").insert(
                "bandwidth_unit".into(),
                toml::Value::String(u.as_str().into()),
            );
        }
    }
    if let Some(out) = &flags.out {
        section(&mut merged, "output").insert(
            "path".into(),
            toml::Value::String(out.display().to_string()),
        );
    }
    let config: RunConfig = toml::Value::Table(merged.clone())
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
    Ok(Loaded {
        config,
        merged,
        base_dir,
    })
}

pub fn parse_truncation(s: &str) -> CliResult<TruncationPolicy> {
    let s = s.trim();
    if s == "auto" {
        return Ok(TruncationPolicy::Auto);
    }
    match s.strip_prefix("fixed:").map(|n| n.trim().parse::<usize>()) {
        Some(Ok(n)) if n >= 1 => Ok(TruncationPolicy::Fixed(n)),
        _ => Err(CliError::Config(format!(
            "truncation must be \"auto\" or \"fixed:N\" with N ≥ 1, got \"{s}\""
        ))),
    }
}

fn field<T>(what: &str, r: Result<T, String>) -> CliResult<T> {
    r.map_err(|m| CliError::Config(format!("{what}: {m}")))
}

fn need<'a, T>(v: &'a Option<T>, section: &str, name: &str) -> CliResult<&'a T> {
    v.as_ref()
        .ok_or_else(|| CliError::Config(format!("{section}.{name}: required")))
}

fn positive(what: &str, v: f64) -> CliResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!(
            "{what}: must be positive, got {v}"
        )))
    }
}

fn sweep_points(
    what: &str,
    s: &Sweep,
    parse: impl Fn(&Quantity) -> Result<f64, String>,
) -> CliResult<Vec<f64>> {
    let lo = positive(
        &format!("{what}.min"),
        field(&format!("{what}.min"), parse(need(&s.min, what, "min")?))?,
    )?;
    let hi = positive(
        &format!("{what}.max"),
        field(&format!("{what}.max"), parse(need(&s.max, what, "max")?))?,
    )?;
    let count = *need(&s.count, what, "count")?;
    if count == 0 {
        return Err(CliError::Config(format!(
            "{what}.count: must be at least 1"
        )));
    }
    if hi < lo {
        return Err(CliError::Config(format!(
            "{what}: max {hi:e} is below min {lo:e}"
        )));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let last = (count - 1) as f64;
    Ok((0..count)
        .map(|i| {
            let t = i as f64 / last;
            match s.spacing.unwrap_or(Spacing::Linear) {
                Spacing::Linear => lo + (hi - lo) * t,
                Spacing::Log => (lo.ln() + (hi.ln() - lo.ln()) * t).exp(),
            }
        })
        .collect())
}

impl Loaded {
    fn require<'a, T>(opt: &'a Option<T>, name: &str) -> CliResult<&'a T> {
        opt.as_ref()
            .ok_or_else(|| CliError::Config(format!("missing [{name}] section")))
    }

    /// Sphere radii [m] in config order.
    pub fn radii(&self) -> CliResult<Vec<f64>> {
        let t = Self::require(&self.config.target, "target")?;
        let given = [t.radius.is_some(), t.radii.is_some(), t.sweep.is_some()]
            .iter()
            .filter(|&&b| b)
            .count();
        if given != 1 {
            return Err(CliError::Config(
                "target: give exactly one of radius, radii or sweep".into(),
            ));
        }
        if let Some(r) = &t.radius {
            return Ok(vec![positive(
                "target.radius",
                field("target.radius", units::length(r))?,
            )?]);
        }
        if let Some(list) = &t.radii {
            return list
                .iter()
                .enumerate()
                .map(|(i, q)| {
                    positive(
                        &format!("target.radii[{i}]"),
                        field(&format!("target.radii[{i}]"), units::length(q))?,
                    )
                })
                .collect();
        }
        sweep_points("target.sweep", t.sweep.as_ref().unwrap(), units::length)
    }

    pub fn material(&self) -> CliResult<MaterialSpec> {
        let m = Self::require(&self.config.material, "material")?;
        match (&m.epsilon, &m.table) {
            (Some([re, im]), None) => MaterialSpec::constant(Complex64::new(*re, *im))
                .map_err(|e| CliError::Config(format!("material.epsilon: {e}"))),
            (None, Some(path)) => {
                let p = Path::new(path);
                let p = if p.is_absolute() {
                    p.to_path_buf()
                } else {
                    self.base_dir.join(p)
                };
                Ok(MaterialSpec::Table(crate::dispersion::load(&p)?))
            }
            _ => Err(CliError::Config(
                "material: give exactly one of epsilon or table".into(),
            )),
        }
    }

    /// Angular frequencies [rad/s] in config order.
    pub fn omegas(&self) -> CliResult<Vec<f64>> {
        let s = Self::require(&self.config.source, "source")?;
        match (&s.wavelength, &s.frequency, &s.wavelength_sweep) {
            (Some(w), None, None) => {
                let lambda = positive(
                    "source.wavelength",
                    field("source.wavelength", units::length(w))?,
                )?;
                Ok(vec![qforce_core::constants::omega_from_wavelength(lambda)])
            }
            (None, Some(f), None) => Ok(vec![positive(
                "source.frequency",
                field("source.frequency", units::angular_frequency(f))?,
            )?]),
            (None, None, Some(sw)) => {
                Ok(sweep_points("source.wavelength_sweep", sw, units::length)?
                    .into_iter()
                    .map(qforce_core::constants::omega_from_wavelength)
                    .collect())
            }
            _ => Err(CliError::Config(
                "source: give exactly one of wavelength, frequency or wavelength_sweep".into(),
            )),
        }
    }

    /// The single carrier frequency of force-type runs.
    pub fn omega0(&self) -> CliResult<f64> {
        let w = self.omegas()?;
        if w.len() != 1 {
            return Err(CliError::Config(
                "source: force runs need a single wavelength or frequency".into(),
            ));
        }
        Ok(w[0])
    }

    pub fn truncation(&self) -> CliResult<TruncationPolicy> {
        match self
            .config
            .numerics
            .as_ref()
            .and_then(|n| n.truncation.as_deref())
        {
            Some(t) => parse_truncation(t).map_err(|e| e.context("numerics.truncation")),
            None => Ok(TruncationPolicy::Auto),
        }
    }

    pub fn squeezing(&self, omega0: f64) -> CliResult<SqueezingProfile> {
        let s = Self::require(&self.config.squeezing, "squeezing")?;
        let r0 = field(
            "squeezing.r0",
            units::squeezing(need(&s.r0, "squeezing", "r0")?),
        )?;
        let axis = s
            .axis
            .map(|[x, y, z]| Vec3::new(x, y, z))
            .unwrap_or_else(Vec3::z);
        let angular = match need(&s.angular, "squeezing", "angular")? {
            Angular::Isotropic => AngularEnvelope::Isotropic,
            Angular::GaussianCap { sigma } => AngularEnvelope::GaussianCap {
                sigma: field("squeezing.angular.sigma", units::angle(sigma))?,
            },
            Angular::TopHat { theta_max, projected_solid_angle } => match (theta_max, projected_solid_angle) {
                (Some(t), None) => AngularEnvelope::TopHat { theta_max: field("squeezing.angular.theta_max", units::angle(t))? },
                (None, Some(o)) => {
                    let omega = field("squeezing.angular.projected_solid_angle", units::solid_angle(o))?;
                    if !(omega > 0.0 && omega <= std::f64::consts::PI) {
                        return Err(CliError::Config(format!(
                            "squeezing.angular.projected_solid_angle: must lie in (0, π] sr, got {omega}"
                        )));
                    }
                    AngularEnvelope::TopHat { theta_max: (omega / std::f64::consts::PI).sqrt().asin() }
                }
                _ => {
                    return Err(CliError::Config(
                        "squeezing.angular: top_hat needs exactly one of theta_max or projected_solid_angle".into(),
                    ))
                }
            },
        };
        let unit = s.bandwidth_unit.ok_or_else(|| {
            CliError::Config("squeezing.bandwidth_unit: required (\"rad_s\" or \"hz\") when a spectral envelope is given".into())
        })?;
        let spectral = match need(&s.spectral, "squeezing", "spectral")? {
            Spectral::DeltaBand { width } => SpectralEnvelope::DeltaBand {
                omega0,
                width: field("squeezing.spectral.width", units::bandwidth(width, unit))?,
            },
            Spectral::Gaussian { sigma } => SpectralEnvelope::Gaussian {
                omega0,
                sigma: field("squeezing.spectral.sigma", units::bandwidth(sigma, unit))?,
            },
        };
        SqueezingProfile::new(r0, axis, angular, spectral)
            .map_err(|e| CliError::Config(format!("squeezing: {e}")))
    }

    pub fn thermal(&self) -> CliResult<ThermalState> {
        let t = match &self.config.thermal {
            Some(t) => field(
                "thermal.t_em",
                units::temperature(need(&t.t_em, "thermal", "t_em")?),
            )?,
            None => 0.0,
        };
        ThermalState::new(t).map_err(|e| CliError::Config(format!("thermal.t_em: {e}")))
    }

    pub fn grids(&self) -> CliResult<ForceGrids> {
        let d = ForceGrids::default();
        let n = self.config.numerics.clone().unwrap_or_default();
        let mode = match n.mode.unwrap_or(Mode::SphereReduced) {
            Mode::SphereReduced => FunctionalMode::SphereReduced,
            Mode::Dyadic => FunctionalMode::Dyadic,
        };
        Ok(ForceGrids {
            n_omega: n.n_omega.unwrap_or(d.n_omega),
            n_theta: n.n_theta.unwrap_or(d.n_theta),
            n_phi: n.n_phi.unwrap_or(d.n_phi),
            truncation: self.truncation()?,
            mode,
        })
    }

    pub fn dyadic_max_x(&self) -> f64 {
        self.config
            .numerics
            .as_ref()
            .and_then(|n| n.dyadic_max_x)
            .unwrap_or(5.0)
    }

    pub fn output_path(&self) -> Option<PathBuf> {
        self.config
            .output
            .as_ref()
            .and_then(|o| o.path.as_ref())
            .map(PathBuf::from)
    }

    pub fn columns(&self) -> Option<&[String]> {
        self.config
            .output
            .as_ref()
            .and_then(|o| o.columns.as_deref())
    }

    /// The merged configuration as TOML text, for provenance headers.
    pub fn echo(&self) -> String {
        toml::to_string(&self.merged).unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn load_str(text: &str, preset: Option<&str>, flags: &Overrides) -> CliResult<Loaded> {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        load(Some(f.path()), preset, flags)
    }

    #[test]
    fn presets_parse() {
        let fig1 = load(None, Some(FIG1_PRESET), &Overrides::default()).unwrap();
        assert_eq!(fig1.radii().unwrap().len(), 400);
        let w0 = fig1.omega0().unwrap();
        let sq = fig1.squeezing(w0).unwrap();
        assert!((sq.r0 - 0.69).abs() < 1e-15);
        match sq.spectral {
            SpectralEnvelope::DeltaBand { width, .. } => {
                assert_eq!(width, 2.0 * std::f64::consts::PI * 2.5e12)
            }
            _ => panic!(),
        }
        assert_eq!(fig1.truncation().unwrap(), TruncationPolicy::Fixed(200));
        load(None, Some(CERTIFY_PRESET), &Overrides::default()).unwrap();
    }

    #[test]
    fn syntax_errors_have_line_numbers() {
        let e = load_str(
            "[target]\nradius = \"1 um\"\n[material\n",
            None,
            &Overrides::default(),
        )
        .unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("line 3"), "{e}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let e = load_str(
            "[target]\nradious = \"1 um\"\n",
            None,
            &Overrides::default(),
        )
        .unwrap_err();
        assert!(e.to_string().contains("radious"), "{e}");
        assert!(e.to_string().contains("line 2"), "{e}");
    }

    #[test]
    fn flags_win_over_file() {
        let flags = Overrides {
            truncation: Some("fixed:7".into()),
            bandwidth_unit: Some(BandwidthUnit::RadS),
            out: Some("x.csv".into()),
        };
        let l = load(None, Some(FIG1_PRESET), &flags).unwrap();
        assert_eq!(l.truncation().unwrap(), TruncationPolicy::Fixed(7));
        assert_eq!(l.output_path().unwrap(), PathBuf::from("x.csv"));
        // "2.5 THz" cannot be read as rad/s.
        assert!(l.squeezing(1e15).is_err());
        assert!(l.echo().contains("fixed:7"));
    }

    #[test]
    fn bandwidth_unit_is_mandatory() {
        let text = "[squeezing]\nr0 = \"6 dB\"\nangular = { kind = \"isotropic\" }\nspectral = { kind = \"delta_band\", width = 1e12 }\n";
        let l = load_str(text, None, &Overrides::default()).unwrap();
        let e = l.squeezing(1e15).unwrap_err();
        assert!(e.to_string().contains("bandwidth_unit"));
    }

    #[test]
    fn user_file_overrides_preset_and_envelopes_replace_whole() {
        let text =
            "[squeezing]\nangular = { kind = \"gaussian_cap\", sigma = \"10 deg\" }\n[target]\n";
        let l = load_str(text, Some(FIG1_PRESET), &Overrides::default()).unwrap();
        let sq = l.squeezing(l.omega0().unwrap()).unwrap();
        assert!(matches!(sq.angular, AngularEnvelope::GaussianCap { .. }));
        assert_eq!(l.radii().unwrap().len(), 400);
        let l = load_str(
            "[target]\nradius = \"2 um\"\n",
            Some(FIG1_PRESET),
            &Overrides::default(),
        )
        .unwrap();
        assert_eq!(l.radii().unwrap(), vec![2e-6]);
    }

    #[test]
    fn sweeps_and_validation() {
        let l = load_str(
            "[target.sweep]\nmin = \"0.1 um\"\nmax = \"10 um\"\ncount = 5\nspacing = \"log\"\n",
            None,
            &Overrides::default(),
        )
        .unwrap();
        let r = l.radii().unwrap();
        assert_eq!(r.len(), 5);
        assert!((r[2] - 1e-6).abs() < 1e-18);
        let l = load_str("[target]\nradius = -1\n", None, &Overrides::default()).unwrap();
        assert!(l.radii().is_err());
        assert!(parse_truncation("fixed:0").is_err());
        assert!(parse_truncation("many").is_err());
    }
}
