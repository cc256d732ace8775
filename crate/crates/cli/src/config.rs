//! Job configuration: one JSON document whose fields mirror the CLI flags.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use rufst::{FeatureKind, RotationMode, Spec};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum Transform {
    #[default]
    Plain,
    Rotational,
}

impl From<Transform> for FeatureKind {
    fn from(t: Transform) -> Self {
        match t {
            Transform::Plain => FeatureKind::Plain,
            Transform::Rotational => FeatureKind::Rotational,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum Rotation {
    #[default]
    Exact,
    Bilinear,
}

impl From<Rotation> for RotationMode {
    fn from(r: Rotation) -> Self {
        match r {
            Rotation::Exact => RotationMode::Exact,
            Rotation::Bilinear => RotationMode::Bilinear,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    /// Check names to run; empty means all.
    pub suites: Vec<String>,
    /// Negative control: break the named check on purpose.
    pub mutate: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JobConfig {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: u32,
    /// Radial levels; `None` means the covering level of the grid
    /// (frame commands) or 2 (scatter).
    #[serde(rename = "M")]
    pub m: Option<u32>,
    #[serde(rename = "K")]
    pub k: u32,
    /// `N1xN2`.
    pub size: String,
    pub transform: Transform,
    pub rotation_mode: Rotation,
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub cap: u64,
    pub verify: VerifyConfig,
}

impl Default for JobConfig {
    fn default() -> Self {
        Self {
            a: 2.0,
            b: 8,
            m: None,
            k: 2,
            size: "33x33".into(),
            transform: Transform::Plain,
            rotation_mode: Rotation::Exact,
            input: None,
            out: None,
            seed: 0,
            cap: rufst::DEFAULT_CAP,
            verify: VerifyConfig::default(),
        }
    }
}

/// Flags shared by every subcommand; each overrides the matching JSON field.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// JSON job file; flags take precedence over its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Radial shell width.
    #[arg(long = "A", global = true)]
    pub a: Option<f64>,
    /// Order of the invariance group.
    #[arg(long = "B", global = true)]
    pub b: Option<u32>,
    /// Radial truncation level.
    #[arg(long = "M", global = true)]
    pub m: Option<u32>,
    /// Scattering depth.
    #[arg(long = "K", global = true)]
    pub k: Option<u32>,
    /// Grid size as N1xN2.
    #[arg(long, global = true)]
    pub size: Option<String>,
    #[arg(long, value_enum, global = true)]
    pub transform: Option<Transform>,
    #[arg(long, value_enum, global = true)]
    pub rotation_mode: Option<Rotation>,
    /// Input array (.npy) or image (.pgm, .png)
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for generated inputs
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Largest number of scattering maps a run may compute.
    #[arg(long, global = true)]
    pub cap: Option<u64>,
}

pub fn parse_size(s: &str) -> Result<(usize, usize), CliError> {
    let err = || {
        CliError::config(format!(
            "invalid parameter `size`: expected N1xN2, got `{s}`"
        ))
    };
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(err)?;
    let n1: usize = a.trim().parse().map_err(|_| err())?;
    let n2: usize = b.trim().parse().map_err(|_| err())?;
    if n1 < 3 || n2 < 3 {
        return Err(CliError::config(format!(
            "invalid parameter `size`: both sides must be at least 3, got `{s}`"
        )));
    }
    Ok((n1, n2))
}

impl JobConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }

    /// File (if any) first, then flags.
    pub fn resolve(flags: &Overrides) -> Result<Self, CliError> {
        let mut cfg = match &flags.config {
            Some(p) => Self::from_file(p)?,
            None => Self::default(),
        };
        macro_rules! take {
            ($($f:ident),*) => { $(if let Some(v) = flags.$f.clone() { cfg.$f = v; })* };
        }
        take!(a, b, k, size, transform, rotation_mode, seed, cap);
        if flags.m.is_some() {
            cfg.m = flags.m;
        }
        if flags.input.is_some() {
            cfg.input = flags.input.clone();
        }
        if flags.out.is_some() {
            cfg.out = flags.out.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        parse_size(&self.size)?;
        if !(self.a.is_finite() && self.a > 0.0) {
            return Err(CliError::config(format!(
                "invalid parameter `A`: must be positive, got {}",
                self.a
            )));
        }
        if self.b == 0 {
            return Err(CliError::config(
                "invalid parameter `B`: must be at least 1",
            ));
        }
        if self.m == Some(0) {
            return Err(CliError::config(
                "invalid parameter `M`: must be at least 1",
            ));
        }
        if self.k == 0 {
            return Err(CliError::config(
                "invalid parameter `K`: must be at least 1",
            ));
        }
        if self.cap == 0 {
            return Err(CliError::config(
                "invalid parameter `cap`: must be at least 1",
            ));
        }
        Ok(())
    }

    pub fn grid(&self) -> (usize, usize) {
        parse_size(&self.size).expect("validated")
    }

    /// Frame spec with `M` defaulting to the covering level.
    pub fn spec(&self) -> Result<Spec, CliError> {
        let covering = Spec::covering(self.a, self.b, self.grid())?;
        Ok(match self.m {
            Some(m) => covering.with_levels(m)?,
            None => covering,
        })
    }

    /// Scatter truncation level; defaults to 2.
    pub fn scatter_levels(&self) -> u32 {
        self.m.unwrap_or(2)
    }
}
