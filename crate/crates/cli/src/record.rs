//! Feature export: `features.npy` (map stack), `features.json` (layout and
//! metadata) and `norms.csv`.

use std::path::Path;

use ndarray::{Array3, ArrayD, Axis};
use rufst::{Features, RotationMode};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::npy::{self, NpyArray};

pub const MAPS_FILE: &str = "features.npy";
pub const META_FILE: &str = "features.json";
pub const NORMS_FILE: &str = "norms.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordMeta {
    pub version: String,
    pub transform: String,
    pub rotation_mode: String,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: u32,
    pub grid: (usize, usize),
    #[serde(rename = "M")]
    pub levels: u32,
    #[serde(rename = "K")]
    pub depth: u32,
    /// Weight on the first map (`|G|^{-1/2}` for rotational, 1 for plain).
    pub first_map_weight: f64,
    /// Norm used for `norms` and `feature_norm`.
    pub norm: String,
    pub feature_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct MetaFile {
    meta: RecordMeta,
    layout: Vec<String>,
    norms: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRecord {
    pub meta: RecordMeta,
    pub layout: Vec<String>,
    pub norms: Vec<f64>,
    /// `(maps, N1, N2)`; absent when only the norm table was read.
    pub maps: Option<Array3<f64>>,
}

impl FeatureRecord {
    pub fn from_features(fs: &Features, a: f64, b: u32, mode: RotationMode) -> Self {
        let grid = fs.maps[0].dim();
        let views: Vec<_> = fs.maps.iter().map(|m| m.view()).collect();
        let maps = ndarray::stack(Axis(0), &views).expect("maps share a shape");
        let first_map_weight = match fs.kind {
            rufst::FeatureKind::Plain => 1.0,
            rufst::FeatureKind::Rotational => 1.0 / (b as f64).sqrt(),
        };
        FeatureRecord {
            meta: RecordMeta {
                version: env!("CARGO_PKG_VERSION").into(),
                transform: fs.kind.name().into(),
                rotation_mode: match mode {
                    RotationMode::Exact => "exact",
                    RotationMode::Bilinear => "bilinear",
                }
                .into(),
                a,
                b,
                grid,
                levels: fs.levels,
                depth: fs.depth,
                first_map_weight,
                norm: "frobenius".into(),
                feature_norm: fs.norm(),
            },
            layout: fs.layout.clone(),
            norms: fs.map_energies().into_iter().map(f64::sqrt).collect(),
            maps: Some(maps),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        if let Some(maps) = &self.maps {
            npy::save(
                &dir.join(MAPS_FILE),
                &NpyArray::Real(maps.clone().into_dyn()),
            )?;
        }
        let meta = MetaFile {
            meta: self.meta.clone(),
            layout: self.layout.clone(),
            norms: self.norms.clone(),
        };
        let json = serde_json::to_string_pretty(&meta).expect("plain data");
        let path = dir.join(META_FILE);
        std::fs::write(&path, json + "\n").map_err(|e| CliError::io(&path, e))?;
        let mut csv = String::from("id,norm\n");
        for (id, n) in self.layout.iter().zip(&self.norms) {
            csv.push_str(&format!("{id},{n:e}\n"));
        }
        let path = dir.join(NORMS_FILE);
        std::fs::write(&path, csv).map_err(|e| CliError::io(&path, e))
    }

    pub fn read(dir: &Path) -> Result<Self, CliError> {
        let path = dir.join(META_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        let meta: MetaFile = serde_json::from_str(&text).map_err(|e| CliError::Format {
            format: "feature JSON",
            reason: e.to_string(),
        })?;
        let maps_path = dir.join(MAPS_FILE);
        let maps = if maps_path.exists() {
            match npy::load(&maps_path)? {
                NpyArray::Real(a) => Some(to3(a)?),
                NpyArray::Complex(_) => {
                    return Err(CliError::Format {
                        format: "NPY",
                        reason: "feature maps must be real".into(),
                    })
                }
            }
        } else {
            None
        };
        if let Some(m) = &maps {
            if m.len_of(Axis(0)) != meta.layout.len() {
                return Err(CliError::Format {
                    format: "NPY",
                    reason: format!(
                        "{} maps for {} layout entries",
                        m.len_of(Axis(0)),
                        meta.layout.len()
                    ),
                });
            }
        }
        Ok(FeatureRecord {
            meta: meta.meta,
            layout: meta.layout,
            norms: meta.norms,
            maps,
        })
    }
}

fn to3(a: ArrayD<f64>) -> Result<Array3<f64>, CliError> {
    a.into_dimensionality().map_err(|_| CliError::Format {
        format: "NPY",
        reason: "feature stack must be three-dimensional".into(),
    })
}
