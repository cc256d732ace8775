//! Grayscale image files: binary PGM (P5) always, PNG with the `png` feature.
//! Samples are scaled to `[0, 1]` by the file's maximum value.

use std::path::Path;

use ndarray::Array2;

use crate::error::CliError;

fn bad(reason: impl Into<String>) -> CliError {
    CliError::Format {
        format: "PGM",
        reason: reason.into(),
    }
}

/// Next whitespace-delimited header token, skipping `#` comments.
fn token(bytes: &[u8], pos: &mut usize) -> Result<String, CliError> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(bad("truncated header"));
    }
    Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
}

fn number(bytes: &[u8], pos: &mut usize, what: &str) -> Result<usize, CliError> {
    let t = token(bytes, pos)?;
    t.parse().map_err(|_| bad(format!("bad {what} `{t}`")))
}

/// Decode a P5 image; rows become axis 0.
pub fn decode_pgm(bytes: &[u8]) -> Result<Array2<f64>, CliError> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(bad("missing P5 magic"));
    }
    let mut pos = 2;
    let width = number(bytes, &mut pos, "width")?;
    let height = number(bytes, &mut pos, "height")?;
    let maxval = number(bytes, &mut pos, "maxval")?;
    if !(1..=65535).contains(&maxval) {
        return Err(bad(format!("maxval {maxval} out of range")));
    }
    pos += 1;
    let depth = if maxval < 256 { 1 } else { 2 };
    let need = width * height * depth;
    let data = bytes
        .get(pos..pos + need)
        .ok_or_else(|| bad(format!("expected {need} pixel bytes")))?;
    let scale = maxval as f64;
    Ok(Array2::from_shape_fn((height, width), |(i, j)| {
        let k = (i * width + j) * depth;
        let v = if depth == 1 {
            data[k] as u16
        } else {
            u16::from_be_bytes([data[k], data[k + 1]])
        };
        v as f64 / scale
    }))
}

pub fn encode_pgm(pixels: &Array2<u8>) -> Vec<u8> {
    let (h, w) = pixels.dim();
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    out.extend(pixels.iter());
    out
}

pub fn write_pgm(path: &Path, pixels: &Array2<u8>) -> Result<(), CliError> {
    std::fs::write(path, encode_pgm(pixels)).map_err(|e| CliError::io(path, e))
}

#[cfg(feature = "png")]
pub fn read_png(path: &Path) -> Result<Array2<f64>, CliError> {
    let img = image::open(path)
        .map_err(|e| CliError::Format {
            format: "PNG",
            reason: e.to_string(),
        })?
        .into_luma16();
    let (w, h) = img.dimensions();
    Ok(Array2::from_shape_fn((h as usize, w as usize), |(i, j)| {
        img.get_pixel(j as u32, i as u32)[0] as f64 / 65535.0
    }))
}

/// Read a grayscale image chosen by extension.
pub fn read_image(path: &Path) -> Result<Array2<f64>, CliError> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase();
    match ext.as_str() {
        "pgm" | "pnm" => decode_pgm(&std::fs::read(path).map_err(|e| CliError::io(path, e))?),
        #[cfg(feature = "png")]
        "png" => read_png(path),
        #[cfg(not(feature = "png"))]
        "png" => Err(CliError::config("PNG input needs the `png` feature")),
        other => Err(CliError::config(format!(
            "unsupported image extension `{other}`"
        ))),
    }
}

/// Map `values` linearly from `[lo, hi]` onto `0..=255`.
pub fn quantize(values: &Array2<f64>, lo: f64, hi: f64) -> Array2<u8> {
    let span = if hi > lo { hi - lo } else { 1.0 };
    values.mapv(|v| (((v - lo) / span) * 255.0).round().clamp(0.0, 255.0) as u8)
}
