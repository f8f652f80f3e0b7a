//! Dispersion tables: one sample per line as `<ω, f or λ with unit>  <Re ε>  <Im ε>`,
//! separated by commas, tabs or spaces. `#` starts a comment.

use std::path::Path;

use qforce_core::mie::DispersionTable;
use qforce_core::Complex64;

use crate::error::{CliError, CliResult};
use crate::units::{spectral_position, Quantity};

pub fn parse(text: &str, origin: &str) -> CliResult<DispersionTable> {
    let mut points = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = |msg: String| CliError::Config(format!("{origin}:{}: {msg}", i + 1));
        let fields: Vec<&str> = if line.contains(',') || line.contains('\t') {
            line.split([',', '\t'])
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .collect()
        } else {
            let parts: Vec<&str> = line.split_whitespace().collect();
            // "1550 nm 12.1 0.1" keeps the unit with its number.
            if parts.len() == 4 {
                vec![
                    &line[..line.find(parts[1]).unwrap() + parts[1].len()],
                    parts[2],
                    parts[3],
                ]
            } else {
                parts
            }
        };
        if fields.len() != 3 {
            return Err(at(format!(
                "expected 3 fields (position, Re ε, Im ε), found {}",
                fields.len()
            )));
        }
        let omega = spectral_position(&Quantity::Text(fields[0].to_string())).map_err(at)?;
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| at(format!("cannot read \"{s}\" as a number")))
        };
        points.push((omega, Complex64::new(num(fields[1])?, num(fields[2])?)));
    }
    // Wavelength-ordered tables arrive with descending ω.
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    DispersionTable::new(points).map_err(|e| CliError::Config(format!("{origin}: {e}")))
}

pub fn load(path: &Path) -> CliResult<DispersionTable> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Config(format!(
            "cannot read dispersion table {}: {e}",
            path.display()
        ))
    })?;
    parse(&text, &path.display().to_string())
}
