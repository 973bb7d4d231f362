//! Bath files.
//!
//! A bath file is TOML with the continuum parameters at top level and one
//! `[[mode]]` table per oscillator:
//!
//! ```toml
//! system_mass = 1.0
//! gamma0 = 1.0
//! cutoff = 10.0
//! cutoff_shape = "sharp"
//! freq_max = 10.0
//! delta_omega = 0.5
//!
//! [[mode]]
//! mass = 1.0
//! freq = 0.25
//! coupling = 0.0997
//! ```

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BathSpec, CutoffShape};
use crate::{Error, Result};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BathFile {
    system_mass: f64,
    gamma0: f64,
    cutoff: f64,
    cutoff_shape: CutoffShape,
    freq_max: f64,
    delta_omega: f64,
    mode: Vec<ModeRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModeRecord {
    mass: f64,
    freq: f64,
    coupling: f64,
}

/// TOML text of a bath, as written by [`write_bath`].
pub fn bath_to_toml(spec: &BathSpec) -> Result<String> {
    let file = BathFile {
        system_mass: spec.system_mass,
        gamma0: spec.gamma0,
        cutoff: spec.cutoff,
        cutoff_shape: spec.cutoff_shape,
        freq_max: spec.freq_max,
        delta_omega: spec.delta_omega,
        mode: (0..spec.n_modes())
            .map(|i| ModeRecord {
                mass: spec.mode_mass[i],
                freq: spec.mode_freq[i],
                coupling: spec.coupling[i],
            })
            .collect(),
    };
    toml::to_string(&file).map_err(|e| Error::Format(e.to_string()))
}

pub fn write_bath(spec: &BathSpec, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, bath_to_toml(spec)?)?;
    Ok(())
}

pub fn read_bath(path: impl AsRef<Path>) -> Result<BathSpec> {
    let text = std::fs::read_to_string(path)?;
    let file: BathFile = toml::from_str(&text).map_err(|e| Error::Format(e.to_string()))?;
    let spec = BathSpec {
        system_mass: file.system_mass,
        mode_mass: file.mode.iter().map(|m| m.mass).collect(),
        mode_freq: file.mode.iter().map(|m| m.freq).collect(),
        coupling: file.mode.iter().map(|m| m.coupling).collect(),
        gamma0: file.gamma0,
        cutoff: file.cutoff,
        cutoff_shape: file.cutoff_shape,
        freq_max: file.freq_max,
        delta_omega: file.delta_omega,
    };
    spec.validate()?;
    Ok(spec)
}

/// Two-column CSV `tau,gamma` of the discrete kernel on `taus`.
pub fn write_kernel_csv(spec: &BathSpec, taus: &[f64], out: &mut impl Write) -> Result<()> {
    writeln!(out, "tau,gamma")?;
    for &tau in taus {
        writeln!(out, "{tau},{}", spec.memory_kernel(tau))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::discretize_ohmic;

    #[test]
    fn round_trip_is_exact() {
        let spec = discretize_ohmic(0.7, 3.0, 17, CutoffShape::Lorentzian, 45.0).unwrap();
        let dir = std::env::temp_dir().join(format!("bath-rt-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bath.toml");
        write_bath(&spec, &path).unwrap();
        let back = read_bath(&path).unwrap();
        assert_eq!(spec, back);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn malformed_file_is_a_format_error() {
        let dir = std::env::temp_dir().join(format!("bath-bad-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.toml");
        std::fs::write(&path, "system_mass = 1.0\nmode = 3\n").unwrap();
        assert!(matches!(read_bath(&path), Err(Error::Format(_))));
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn kernel_csv_has_header_and_rows() {
        let spec = discretize_ohmic(1.0, 2.0, 10, CutoffShape::Sharp, 2.0).unwrap();
        let mut buf = Vec::new();
        write_kernel_csv(&spec, &[0.0, 0.5, 1.0], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "tau,gamma");
    }
}
