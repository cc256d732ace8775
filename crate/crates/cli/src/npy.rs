//! NPY (v1.0 / v2.0 read, v1.0 write) for little-endian `f8`, `f4` and `c16` arrays.

use std::io::{Read, Write};

use ndarray::{ArrayD, IxDyn};
use num_complex::Complex64;

use crate::error::CliError;

const MAGIC: &[u8; 6] = b"\x93NUMPY";

#[derive(Debug, Clone, PartialEq)]
pub enum NpyArray {
    Real(ArrayD<f64>),
    Complex(ArrayD<Complex64>),
}

impl NpyArray {
    pub fn shape(&self) -> &[usize] {
        match self {
            NpyArray::Real(a) => a.shape(),
            NpyArray::Complex(a) => a.shape(),
        }
    }
}

fn bad(reason: impl Into<String>) -> CliError {
    CliError::Format {
        format: "NPY",
        reason: reason.into(),
    }
}

fn header(descr: &str, shape: &[usize]) -> Vec<u8> {
    let dims = match shape {
        [n] => format!("({n},)"),
        _ => format!(
            "({})",
            shape
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        ),
    };
    let mut dict = format!("{{'descr': '{descr}', 'fortran_order': False, 'shape': {dims}, }}");
    // magic + version + u16 length + dict + newline, padded to 64 bytes
    let unpadded = MAGIC.len() + 2 + 2 + dict.len() + 1;
    dict.push_str(&" ".repeat((64 - unpadded % 64) % 64));
    dict.push('\n');
    let mut out = Vec::with_capacity(10 + dict.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&[1, 0]);
    out.extend_from_slice(&(dict.len() as u16).to_le_bytes());
    out.extend_from_slice(dict.as_bytes());
    out
}

pub fn write_npy<W: Write>(w: &mut W, array: &NpyArray) -> Result<(), CliError> {
    match array {
        NpyArray::Real(a) => {
            w.write_all(&header("<f8", a.shape()))?;
            for v in a.iter() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        NpyArray::Complex(a) => {
            w.write_all(&header("<c16", a.shape()))?;
            for v in a.iter() {
                w.write_all(&v.re.to_le_bytes())?;
                w.write_all(&v.im.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

struct Dict {
    descr: String,
    fortran: bool,
    shape: Vec<usize>,
}

fn field<'a>(dict: &'a str, key: &str) -> Result<&'a str, CliError> {
    let tag = format!("'{key}':");
    let start = dict
        .find(&tag)
        .ok_or_else(|| bad(format!("header lacks `{key}`")))?
        + tag.len();
    Ok(dict[start..].trim_start())
}

fn parse_dict(text: &str) -> Result<Dict, CliError> {
    let descr = field(text, "descr")?;
    let descr = descr
        .strip_prefix('\'')
        .and_then(|s| s.split('\'').next())
        .ok_or_else(|| bad("malformed descr"))?
        .to_string();
    let fortran = field(text, "fortran_order")?.starts_with("True");
    let shape = field(text, "shape")?;
    let inner = shape
        .strip_prefix('(')
        .and_then(|s| s.split(')').next())
        .ok_or_else(|| bad("malformed shape"))?;
    let shape = inner
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<usize>()
                .map_err(|_| bad(format!("bad dimension `{s}`")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Dict {
        descr,
        fortran,
        shape,
    })
}

fn to_c_order<T: Clone>(
    values: Vec<T>,
    shape: &[usize],
    fortran: bool,
) -> Result<ArrayD<T>, CliError> {
    if fortran {
        let rev: Vec<usize> = shape.iter().rev().copied().collect();
        let a = ArrayD::from_shape_vec(IxDyn(&rev), values).map_err(|e| bad(e.to_string()))?;
        Ok(a.reversed_axes().as_standard_layout().into_owned())
    } else {
        ArrayD::from_shape_vec(IxDyn(shape), values).map_err(|e| bad(e.to_string()))
    }
}

pub fn read_npy<R: Read>(r: &mut R) -> Result<NpyArray, CliError> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() < 10 || &bytes[..6] != MAGIC {
        return Err(bad("missing magic string"));
    }
    let (len, start) = match bytes[6] {
        1 => (u16::from_le_bytes([bytes[8], bytes[9]]) as usize, 10),
        2 | 3 if bytes.len() >= 12 => (
            u32::from_le_bytes([bytes[8], bytes[9], bytes[10], bytes[11]]) as usize,
            12,
        ),
        v => return Err(bad(format!("unsupported version {v}"))),
    };
    let text = bytes
        .get(start..start + len)
        .ok_or_else(|| bad("truncated header"))
        .and_then(|h| std::str::from_utf8(h).map_err(|_| bad("header is not text")))?;
    let dict = parse_dict(text)?;
    let body = &bytes[start + len..];
    let count: usize = dict.shape.iter().product();
    let width = match dict.descr.as_str() {
        "<f8" => 8,
        "<f4" => 4,
        "<c16" => 16,
        other => return Err(bad(format!("unsupported dtype `{other}`"))),
    };
    if body.len() != count * width {
        return Err(bad(format!(
            "expected {} data bytes, found {}",
            count * width,
            body.len()
        )));
    }
    let f8 = |c: &[u8]| f64::from_le_bytes(c.try_into().expect("8-byte chunk"));
    match width {
        8 => Ok(NpyArray::Real(to_c_order(
            body.chunks_exact(8).map(f8).collect(),
            &dict.shape,
            dict.fortran,
        )?)),
        4 => {
            let vals = body
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().expect("4-byte chunk")) as f64)
                .collect();
            Ok(NpyArray::Real(to_c_order(vals, &dict.shape, dict.fortran)?))
        }
        _ => {
            let vals = body
                .chunks_exact(16)
                .map(|c| Complex64::new(f8(&c[..8]), f8(&c[8..])))
                .collect();
            Ok(NpyArray::Complex(to_c_order(
                vals,
                &dict.shape,
                dict.fortran,
            )?))
        }
    }
}

pub fn save(path: &std::path::Path, array: &NpyArray) -> Result<(), CliError> {
    let mut f =
        std::io::BufWriter::new(std::fs::File::create(path).map_err(|e| CliError::io(path, e))?);
    write_npy(&mut f, array)?;
    f.flush().map_err(|e| CliError::io(path, e))
}

pub fn load(path: &std::path::Path) -> Result<NpyArray, CliError> {
    let mut f = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    read_npy(&mut f)
}
