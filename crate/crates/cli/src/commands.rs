//! Subcommand bodies. Each writes its report to `out` and returns the exit code.

use std::io::Write;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use num_complex::Complex64;
use rufst::{
    analyze, build_frame, parseval_residual, scatter, verify_partition, wedge_diameter,
    wedge_diameter_uniform_bound, Frame, Grid, RotationMode, Spec, Truncation,
};
use serde::Serialize;

use crate::config::JobConfig;
use crate::error::{CliError, EXIT_FAILED, EXIT_OK};
use crate::image_io::read_image;
use crate::npy::{self, NpyArray};
use crate::record::FeatureRecord;
use crate::render::render_frame;
use crate::signals::{frobenius, random_complex, random_unit};
use crate::verify;

/// Input array of either kind.
pub enum Input {
    Real(Array2<f64>),
    Complex(Array2<Complex64>),
}

pub fn read_input(path: &Path) -> Result<Input, CliError> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase();
    if ext != "npy" {
        return Ok(Input::Real(read_image(path)?));
    }
    let two_d = |shape: &[usize]| {
        if shape.len() == 2 {
            Ok(())
        } else {
            Err(CliError::Format {
                format: "NPY",
                reason: format!("expected a 2-D array, found shape {shape:?}"),
            })
        }
    };
    match npy::load(path)? {
        NpyArray::Real(a) => {
            two_d(a.shape())?;
            Ok(Input::Real(a.into_dimensionality().expect("checked")))
        }
        NpyArray::Complex(a) => {
            two_d(a.shape())?;
            Ok(Input::Complex(a.into_dimensionality().expect("checked")))
        }
    }
}

fn check_grid(
    cfg: &JobConfig,
    shape: (usize, usize),
    flag_size: bool,
) -> Result<(usize, usize), CliError> {
    if flag_size && shape != cfg.grid() {
        return Err(CliError::config(format!(
            "invalid parameter `size`: input is {}x{}, size says {}",
            shape.0, shape.1, cfg.size
        )));
    }
    Ok(shape)
}

fn out_dir(cfg: &JobConfig, what: &str) -> Result<PathBuf, CliError> {
    cfg.out.clone().ok_or_else(|| {
        CliError::config(format!(
            "invalid parameter `out`: {what} needs an output directory"
        ))
    })
}

#[derive(Serialize)]
struct AtomSummary {
    id: String,
    bbox_origin: (isize, isize),
    bbox_size: (usize, usize),
    empty: bool,
    energy: f64,
}

#[derive(Serialize)]
struct FrameSummary {
    #[serde(rename = "A")]
    a: f64,
    #[serde(rename = "B")]
    b: u32,
    grid: (usize, usize),
    #[serde(rename = "M")]
    levels: u32,
    full_cover: bool,
    partition_max_dev_inside: f64,
    partition_max_leak_outside: f64,
    atoms: Vec<AtomSummary>,
}

pub fn frame_build(cfg: &JobConfig, out: &mut dyn Write) -> Result<i32, CliError> {
    let spec = cfg.spec()?;
    let frame = build_frame(&spec);
    let (n1, n2) = spec.grid();
    let rep = verify_partition(&frame);
    let empty = frame.atoms().iter().filter(|a| a.is_empty()).count();
    writeln!(
        out,
        "spec        A={} B={} grid={n1}x{n2} M={}",
        spec.a(),
        spec.b(),
        spec.levels()
    )?;
    writeln!(
        out,
        "atoms       {} (1 low pass + {} bands, {empty} empty)",
        frame.atoms().len(),
        frame.bands().len()
    )?;
    if spec.is_full_cover() {
        writeln!(
            out,
            "cover       full (A*M = {} >= max |k| = {:.4})",
            spec.a() * spec.levels() as f64,
            spec.max_radius()
        )?;
    } else {
        writeln!(
            out,
            "warning     not a full cover (A*M = {} < max |k| = {:.4}); covering level is {}",
            spec.a() * spec.levels() as f64,
            spec.max_radius(),
            spec.covering_level()
        )?;
    }
    let ok = rep.max_dev_inside < 1e-10;
    writeln!(
        out,
        "partition   max |sum - 1| on |k| <= AM: {:.3e} ({} 1e-12)",
        rep.max_dev_inside,
        if rep.max_dev_inside < 1e-12 {
            "<"
        } else {
            ">="
        }
    )?;
    writeln!(
        out,
        "leak        max sum on |k| >= A(M+1): {:e}",
        rep.max_leak_outside
    )?;
    let bound = wedge_diameter_uniform_bound(&spec);
    let mut widest = 0.0f64;
    for m in 1..=spec.levels() {
        if let Ok(d) = wedge_diameter(&spec, m) {
            widest = widest.max(d);
        }
    }
    if widest > 0.0 {
        writeln!(
            out,
            "wedges      max diameter {widest:.4} {} uniform bound {bound:.4}",
            if widest <= bound { "<=" } else { ">" }
        )?;
    }
    if let Some(dir) = &cfg.out {
        write_frame(&frame, &rep, dir)?;
        writeln!(out, "wrote       {}", dir.display())?;
    }
    Ok(if ok { EXIT_OK } else { EXIT_FAILED })
}

fn write_frame(
    frame: &Frame,
    rep: &rufst::PartitionReport<f64>,
    dir: &Path,
) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let spec = frame.spec();
    let summary = FrameSummary {
        a: spec.a(),
        b: spec.b(),
        grid: spec.grid(),
        levels: spec.levels(),
        full_cover: spec.is_full_cover(),
        partition_max_dev_inside: rep.max_dev_inside,
        partition_max_leak_outside: rep.max_leak_outside,
        atoms: frame
            .atoms()
            .iter()
            .map(|a| AtomSummary {
                id: a.index().to_string(),
                bbox_origin: a.bbox().origin,
                bbox_size: a.bbox().size,
                empty: a.is_empty(),
                energy: a.energy(),
            })
            .collect(),
    };
    let path = dir.join("frame.json");
    std::fs::write(
        &path,
        serde_json::to_string_pretty(&summary).expect("plain data") + "\n",
    )
    .map_err(|e| CliError::io(&path, e))?;
    let views: Vec<_> = frame.atoms().iter().map(|a| a.mask().view()).collect();
    let masks = ndarray::stack(ndarray::Axis(0), &views).expect("masks share a shape");
    npy::save(&dir.join("masks.npy"), &NpyArray::Real(masks.into_dyn()))
}

pub fn frame_render(cfg: &JobConfig, out: &mut dyn Write) -> Result<i32, CliError> {
    let dir = out_dir(cfg, "frame render")?;
    let frame = build_frame(&cfg.spec()?);
    let n = render_frame(&frame, &dir)?;
    writeln!(
        out,
        "rendered    {n} atoms and montage.pgm to {}",
        dir.display()
    )?;
    Ok(EXIT_OK)
}

pub fn scatter_cmd(
    cfg: &JobConfig,
    size_given: bool,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let (image, source) = match &cfg.input {
        Some(p) => match read_input(p)? {
            Input::Real(a) => (a, p.display().to_string()),
            Input::Complex(_) => {
                return Err(CliError::config(
                    "invalid parameter `input`: scatter needs a real image",
                ))
            }
        },
        None => (
            random_unit(cfg.grid(), cfg.seed),
            format!("seeded random {} (seed {})", cfg.size, cfg.seed),
        ),
    };
    let grid = check_grid(cfg, image.dim(), size_given && cfg.input.is_some())?;
    let levels = cfg.scatter_levels();
    let spec = Spec::new(cfg.a, cfg.b, grid, levels)?;
    let frame = build_frame(&spec);
    let mode: RotationMode = cfg.rotation_mode.into();
    let trunc = Truncation::new(levels, cfg.k).with_cap(cfg.cap);
    let fs = scatter(&frame, &image, trunc, cfg.transform.into(), mode)?;
    writeln!(out, "input       {source}, norm {:.12e}", frobenius(&image))?;
    writeln!(
        out,
        "transform   {} ({}) A={} B={} M={levels} K={}",
        fs.kind.name(),
        match mode {
            RotationMode::Exact => "exact",
            RotationMode::Bilinear => "bilinear",
        },
        cfg.a,
        cfg.b,
        cfg.k
    )?;
    writeln!(out, "maps        {}", fs.len())?;
    writeln!(out, "norm        {:.12e}", fs.norm())?;
    if let Some(dir) = &cfg.out {
        FeatureRecord::from_features(&fs, cfg.a, cfg.b, mode).write(dir)?;
        writeln!(out, "wrote       {}", dir.display())?;
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct CoefficientBlock {
    id: String,
    bbox_origin: (isize, isize),
    bbox_size: (usize, usize),
    offset: usize,
    len: usize,
}

pub fn analyze_cmd(
    cfg: &JobConfig,
    size_given: bool,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let (array, source) = match &cfg.input {
        Some(p) => {
            let g = match read_input(p)? {
                Input::Real(a) => Grid::from_real(&a),
                Input::Complex(a) => Grid::space(a),
            };
            (g, p.display().to_string())
        }
        None => (
            Grid::space(random_complex(cfg.grid(), cfg.seed)),
            format!("seeded random complex {} (seed {})", cfg.size, cfg.seed),
        ),
    };
    let grid = check_grid(cfg, array.shape(), size_given && cfg.input.is_some())?;
    let base = Spec::covering(cfg.a, cfg.b, grid)?;
    let spec = match cfg.m {
        Some(m) => base.with_levels(m)?,
        None => base,
    };
    let frame = build_frame(&spec);
    let coeffs = analyze(&frame, &array)?;
    let residual = parseval_residual(&frame, &array)?;
    writeln!(
        out,
        "input       {source}, energy {:.12e}",
        array.norm_sqr()
    )?;
    writeln!(
        out,
        "atoms       {} coefficient blocks, {} values",
        coeffs.len(),
        coeffs.atoms.iter().map(|a| a.values.len()).sum::<usize>()
    )?;
    writeln!(out, "energy      {:.12e}", coeffs.energy())?;
    writeln!(
        out,
        "residual    {residual:.3e}{}",
        if coeffs.parseval_guaranteed {
            ""
        } else {
            " (not a full cover; Parseval not expected)"
        }
    )?;
    if let Some(dir) = &cfg.out {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let mut flat = Vec::new();
        let mut blocks = Vec::new();
        for a in &coeffs.atoms {
            blocks.push(CoefficientBlock {
                id: a.index.to_string(),
                bbox_origin: a.bbox.origin,
                bbox_size: a.bbox.size,
                offset: flat.len(),
                len: a.values.len(),
            });
            flat.extend(a.values.iter().copied());
        }
        let n = flat.len();
        let arr = ndarray::ArrayD::from_shape_vec(ndarray::IxDyn(&[n]), flat).expect("flat vector");
        npy::save(&dir.join("coefficients.npy"), &NpyArray::Complex(arr))?;
        let path = dir.join("coefficients.json");
        std::fs::write(
            &path,
            serde_json::to_string_pretty(&blocks).expect("plain data") + "\n",
        )
        .map_err(|e| CliError::io(&path, e))?;
        writeln!(out, "wrote       {}", dir.display())?;
    }
    Ok(EXIT_OK)
}

pub fn verify_cmd(cfg: &JobConfig, out: &mut dyn Write) -> Result<i32, CliError> {
    let checks = verify::run(cfg)?;
    let mut failed = 0;
    for c in &checks {
        writeln!(out, "{c}")?;
        failed += usize::from(!c.pass());
    }
    writeln!(out, "summary {} checks, {failed} failed", checks.len())?;
    Ok(if failed == 0 { EXIT_OK } else { EXIT_FAILED })
}
