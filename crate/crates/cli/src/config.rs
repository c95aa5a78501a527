//! TOML configuration and its merge with command-line flags.
//!
//! Precedence is flags, then the file, then built-in defaults. Unknown keys
//! anywhere in the file are rejected.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::args::{CommonArgs, Format};

pub const DEFAULT_SEED: u64 = 20_240_917;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_EVALS: usize = 1_000_000;
pub const DEFAULT_VERIFY_COUNT: usize = 1000;

/// A configuration problem, reported with the offending field.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn field_error(field: &str, msg: impl fmt::Display) -> ConfigError {
    ConfigError(format!("invalid `{field}`: {msg}"))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub path: PathSection,
    #[serde(default)]
    pub quadrature: QuadratureSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default)]
    pub expm: ExpmSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathSection {
    pub kind: Option<String>,
    #[serde(rename = "R")]
    pub r: Option<f64>,
    pub modes: Option<usize>,
    pub hbar: Option<f64>,
    pub lengths: Option<Vec<f64>>,
    pub samples: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSection {
    pub tolerance: Option<f64>,
    pub max_evals: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub format: Option<Format>,
    pub path: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(rename = "R")]
    pub r: Option<Vec<f64>>,
    pub hbar: Option<Vec<f64>>,
    pub length: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub seed: Option<u64>,
    pub count: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpmSection {
    pub a: Option<[[f64; 2]; 2]>,
    pub b: Option<[[f64; 2]; 2]>,
    pub c: Option<[[f64; 2]; 2]>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| ConfigError(format!("{}: {}", path.display(), e.0)))
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(e.to_string().trim_end().to_owned()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathKind {
    Squeeze1,
    Squeeze2,
    CustomSamples,
}

impl PathKind {
    fn parse(s: &str) -> Result<Self, ConfigError> {
        match s {
            "squeeze1" => Ok(Self::Squeeze1),
            "squeeze2" => Ok(Self::Squeeze2),
            "custom-samples" => Ok(Self::CustomSamples),
            other => Err(field_error(
                "path.kind",
                format!("expected squeeze1, squeeze2 or custom-samples, got {other:?}"),
            )),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Squeeze1 => "squeeze1",
            Self::Squeeze2 => "squeeze2",
            Self::CustomSamples => "custom-samples",
        }
    }
}

/// Settings shared by every subcommand after merging flags, file and defaults.
#[derive(Debug, Clone)]
pub struct Settings {
    pub kind: PathKind,
    /// `None` for custom-samples paths until the sample file is read.
    pub modes: Option<usize>,
    pub radii: Vec<f64>,
    pub hbars: Vec<f64>,
    pub lengths: Vec<f64>,
    pub samples: Option<PathBuf>,
    pub tol: f64,
    pub max_evals: usize,
    pub seed: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub count: usize,
    pub expm: ExpmSection,
}

/// Which subcommand is being configured; sweeps read grids, the others single values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Single,
    Grid,
}

fn check_all(
    field: &str,
    values: &[f64],
    ok: impl Fn(f64) -> bool,
    what: &str,
) -> Result<(), ConfigError> {
    match values.iter().find(|v| !ok(**v)) {
        Some(bad) => Err(field_error(field, format!("{what}, got {bad}"))),
        None => Ok(()),
    }
}

impl Settings {
    pub fn resolve(flags: &CommonArgs, mode: Mode) -> Result<Self, ConfigError> {
        let file = match &flags.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        Self::merge(flags, file, mode)
    }

    pub fn merge(flags: &CommonArgs, file: FileConfig, mode: Mode) -> Result<Self, ConfigError> {
        let kind_text = flags.kind.clone().or(file.path.kind.clone());
        let modes = flags.modes.or(file.path.modes);
        let kind = match (
            kind_text.as_deref().map(PathKind::parse).transpose()?,
            modes,
        ) {
            (Some(k), _) => k,
            (None, Some(2)) => PathKind::Squeeze2,
            (None, _) => PathKind::Squeeze1,
        };
        let modes = match (kind, modes) {
            (PathKind::Squeeze1, None | Some(1)) => Some(1),
            (PathKind::Squeeze2, None | Some(2)) => Some(2),
            (PathKind::CustomSamples, m) => m,
            (k, Some(m)) => {
                return Err(field_error(
                    "modes",
                    format!(
                        "{} paths have {} mode(s), got {m}",
                        k.name(),
                        if k == PathKind::Squeeze1 { 1 } else { 2 }
                    ),
                ))
            }
        };
        if modes == Some(0) {
            return Err(field_error("modes", "must be at least 1"));
        }

        let (radii, hbars, lengths) = match mode {
            Mode::Single => (
                flags
                    .r
                    .clone()
                    .or(file.path.r.map(|r| vec![r]))
                    .unwrap_or_else(|| vec![1.0]),
                flags
                    .hbar
                    .clone()
                    .or(file.path.hbar.map(|h| vec![h]))
                    .unwrap_or_else(|| vec![1.0]),
                flags
                    .length
                    .clone()
                    .or(file.path.lengths.clone())
                    .unwrap_or_else(|| vec![1.0]),
            ),
            Mode::Grid => (
                flags
                    .r
                    .clone()
                    .or(file.sweep.r.clone())
                    .or(file.path.r.map(|r| vec![r]))
                    .unwrap_or_default(),
                flags
                    .hbar
                    .clone()
                    .or(file.sweep.hbar.clone())
                    .or(file.path.hbar.map(|h| vec![h]))
                    .unwrap_or_else(|| vec![1.0]),
                flags
                    .length
                    .clone()
                    .or(file.sweep.length.clone())
                    .unwrap_or_else(|| vec![1.0]),
            ),
        };
        check_all(
            "R",
            &radii,
            |r| r >= 0.0 && r.is_finite(),
            "must be finite and >= 0",
        )?;
        check_all(
            "hbar",
            &hbars,
            |h| h > 0.0 && h.is_finite(),
            "must be finite and > 0",
        )?;
        check_all(
            "lengths",
            &lengths,
            |l| l > 0.0 && l.is_finite(),
            "must be finite and > 0",
        )?;
        if mode == Mode::Single {
            if radii.len() != 1 {
                return Err(field_error(
                    "R",
                    format!("expected one value, got {}", radii.len()),
                ));
            }
            if hbars.len() != 1 {
                return Err(field_error(
                    "hbar",
                    format!("expected one value, got {}", hbars.len()),
                ));
            }
            if let Some(n) = modes {
                if lengths.len() != 1 && lengths.len() != n {
                    return Err(field_error(
                        "lengths",
                        format!("expected 1 or {n} values, got {}", lengths.len()),
                    ));
                }
            }
        }

        let tol = flags
            .tol
            .or(file.quadrature.tolerance)
            .unwrap_or(DEFAULT_TOL);
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(field_error(
                "quadrature.tolerance",
                format!("must be > 0, got {tol}"),
            ));
        }
        let max_evals = flags
            .max_evals
            .or(file.quadrature.max_evals)
            .unwrap_or(DEFAULT_MAX_EVALS);
        if max_evals < 15 {
            return Err(field_error(
                "quadrature.max_evals",
                format!("must be at least 15, got {max_evals}"),
            ));
        }
        let samples = flags.samples.clone().or(file.path.samples.clone());
        if kind == PathKind::CustomSamples && samples.is_none() {
            return Err(field_error(
                "path.samples",
                "required for custom-samples paths",
            ));
        }

        Ok(Self {
            kind,
            modes,
            radii,
            hbars,
            lengths,
            samples,
            tol,
            max_evals,
            seed: flags.seed.or(file.verify.seed).unwrap_or(DEFAULT_SEED),
            format: flags.format.or(file.output.format).unwrap_or(Format::Csv),
            out: flags.out.clone().or(file.output.path.clone()),
            count: file.verify.count.unwrap_or(DEFAULT_VERIFY_COUNT),
            expm: file.expm,
        })
    }

    /// Lengths for `n` modes, broadcasting a single value.
    pub fn lengths_for(&self, n: usize) -> Result<Vec<f64>, ConfigError> {
        match self.lengths.len() {
            1 => Ok(vec![self.lengths[0]; n]),
            k if k == n => Ok(self.lengths.clone()),
            k => Err(field_error(
                "lengths",
                format!("expected 1 or {n} values, got {k}"),
            )),
        }
    }
}
