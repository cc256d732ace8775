//! Space-domain pictures of frame atoms and the `(n, m)` montage.
//!
//! Each atom is drawn from `idft(mask)` with the origin moved to the grid
//! center. The real part shows the oscillation; the modulus shows the
//! envelope. Every image is normalized by its own largest magnitude.

use std::path::Path;

use ndarray::{s, Array2};
use num_complex::Complex64;
use rufst::{freq_of_index, idft, Atom, AtomIndex, Domain, Frame, Grid, PolarPoint};
use serde::Serialize;

use crate::error::CliError;
use crate::image_io::{quantize, write_pgm};

/// `idft(mask)` with the spatial origin at index `(N1/2, N2/2)`.
pub fn atom_field(atom: &Atom) -> Array2<Complex64> {
    let mask = Grid::new(
        atom.mask().mapv(|v| Complex64::new(v, 0.0)),
        Domain::Frequency,
    );
    let f = idft(&mask).expect("frequency-domain input");
    let (n1, n2) = f.shape();
    let (c1, c2) = (n1 / 2, n2 / 2);
    Array2::from_shape_fn((n1, n2), |(i, j)| {
        f.values()[[(i + n1 - c1) % n1, (j + n2 - c2) % n2]]
    })
}

pub fn real_part(atom: &Atom) -> Array2<f64> {
    atom_field(atom).mapv(|c| c.re)
}

pub fn modulus(atom: &Atom) -> Array2<f64> {
    atom_field(atom).mapv(|c| c.norm())
}

fn peak(a: &Array2<f64>) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Real part mapped from `[-max, max]` to `0..=255`.
pub fn render_real(atom: &Atom) -> (Array2<u8>, f64) {
    let re = real_part(atom);
    let m = peak(&re);
    (quantize(&re, -m, m), m)
}

/// Modulus mapped from `[0, max]` to `0..=255`.
pub fn render_modulus(atom: &Atom) -> (Array2<u8>, f64) {
    let ab = modulus(atom);
    let m = peak(&ab);
    (quantize(&ab, 0.0, m), m)
}

/// Strongest nonzero frequency of an 8-bit image, as centered lattice
/// coordinates. Real images peak at `+-k`; the sign closer to `hint` wins.
pub fn fft_peak(pixels: &Array2<u8>, hint: (f64, f64)) -> (isize, isize) {
    let (n1, n2) = pixels.dim();
    let mean = pixels.iter().map(|v| *v as f64).sum::<f64>() / (n1 * n2) as f64;
    let g = Grid::from_real(&pixels.mapv(|v| v as f64 - mean));
    let spec = rufst::dft(&g).expect("space-domain input");
    let mut best = (0, 0);
    let mut best_val = -1.0;
    for ((i, j), v) in spec.values().indexed_iter() {
        if v.norm() > best_val {
            best_val = v.norm();
            best = (freq_of_index(i, n1), freq_of_index(j, n2));
        }
    }
    let dot = best.0 as f64 * hint.0 + best.1 as f64 * hint.1;
    if dot < 0.0 {
        (-best.0, -best.1)
    } else {
        best
    }
}

/// Whether the peak bin sits in the same wedge as the centroid: angle within
/// `half_width` and radius within `a`.
pub fn peak_agrees(
    peak: (isize, isize),
    centroid: PolarPoint<f64>,
    a: f64,
    half_width: f64,
) -> bool {
    let p = rufst::to_polar(peak.0 as f64, peak.1 as f64);
    let dphi = rufst::wrap_angle(p.phi - centroid.phi).abs();
    dphi <= half_width && (p.rho - centroid.rho).abs() <= a
}

#[derive(Debug, Serialize)]
struct RenderEntry {
    id: String,
    file: String,
    modulus_file: String,
    real_max: f64,
    modulus_max: f64,
}

#[derive(Debug, Serialize)]
struct RenderMeta {
    normalization: &'static str,
    real_mapping: &'static str,
    modulus_mapping: &'static str,
    montage: String,
    montage_rows: usize,
    montage_columns: usize,
    atoms: Vec<RenderEntry>,
}

/// Montage cell `(n, m)`, 1-based, shows `f_{m, r_n}` with `r_n` the
/// `(n-1)`-th rotation of level `m`; missing rotations stay blank.
pub fn montage(frame: &Frame) -> Array2<u8> {
    let spec = frame.spec();
    let (n1, n2) = spec.grid();
    let cols = spec.levels() as usize;
    let rows = frame
        .bands()
        .iter()
        .filter_map(|a| a.index().rotation())
        .map(|r| r.order() as usize)
        .max()
        .unwrap_or(1);
    let gap = 1;
    let mut out = Array2::<u8>::from_elem((rows * (n1 + gap) - gap, cols * (n2 + gap) - gap), 0);
    for atom in frame.bands() {
        let Some(r) = atom.index().rotation() else {
            continue;
        };
        let (row, col) = (r.index() as usize, r.level() as usize - 1);
        let (px, _) = render_real(atom);
        let (i0, j0) = (row * (n1 + gap), col * (n2 + gap));
        out.slice_mut(s![i0..i0 + n1, j0..j0 + n2]).assign(&px);
    }
    out
}

fn file_name(idx: &AtomIndex) -> String {
    format!("atom_{idx}")
}

pub fn render_frame(frame: &Frame, dir: &Path) -> Result<usize, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut entries = Vec::new();
    for atom in frame.atoms().iter().filter(|a| !a.is_empty()) {
        let base = file_name(&atom.index());
        let (re, re_max) = render_real(atom);
        let (ab, ab_max) = render_modulus(atom);
        write_pgm(&dir.join(format!("{base}.pgm")), &re)?;
        write_pgm(&dir.join(format!("{base}_abs.pgm")), &ab)?;
        entries.push(RenderEntry {
            id: atom.index().to_string(),
            file: format!("{base}.pgm"),
            modulus_file: format!("{base}_abs.pgm"),
            real_max: re_max,
            modulus_max: ab_max,
        });
    }
    let grid = montage(frame);
    write_pgm(&dir.join("montage.pgm"), &grid)?;
    let rows = frame
        .bands()
        .iter()
        .filter_map(|a| a.index().rotation())
        .map(|r| r.order() as usize)
        .max()
        .unwrap_or(1);
    let meta = RenderMeta {
        normalization: "per-image maximum magnitude",
        real_mapping: "pixel = round(255 * (v + max) / (2 max))",
        modulus_mapping: "pixel = round(255 * v / max)",
        montage: "montage.pgm".into(),
        montage_rows: rows,
        montage_columns: frame.spec().levels() as usize,
        atoms: entries,
    };
    let path = dir.join("render.json");
    std::fs::write(
        &path,
        serde_json::to_string_pretty(&meta).expect("plain data") + "\n",
    )
    .map_err(|e| CliError::io(&path, e))?;
    Ok(meta.atoms.len())
}
