#![allow(dead_code)]

use ndarray::Array2;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_real(shape: (usize, usize), seed: u64) -> Array2<f64> {
    let mut r = rng(seed);
    Array2::from_shape_fn(shape, |_| r.gen_range(-1.0..1.0))
}

pub fn random_complex(shape: (usize, usize), seed: u64) -> Array2<Complex<f64>> {
    let mut r = rng(seed);
    Array2::from_shape_fn(shape, |_| {
        Complex::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))
    })
}

/// Real image whose spectrum lives in `|k| <= radius`.
pub fn band_limited(shape: (usize, usize), radius: f64, seed: u64) -> Array2<f64> {
    let mut r = rng(seed);
    let (n1, n2) = shape;
    let reach = radius.floor() as isize;
    let mut modes = Vec::new();
    for k1 in -reach..=reach {
        for k2 in -reach..=reach {
            if ((k1 * k1 + k2 * k2) as f64).sqrt() <= radius {
                modes.push((
                    k1 as f64,
                    k2 as f64,
                    r.gen_range(-1.0..1.0),
                    r.gen_range(0.0..std::f64::consts::TAU),
                ));
            }
        }
    }
    Array2::from_shape_fn(shape, |(x1, x2)| {
        modes
            .iter()
            .map(|(k1, k2, a, ph)| {
                a * (std::f64::consts::TAU
                    * (k1 * x1 as f64 / n1 as f64 + k2 * x2 as f64 / n2 as f64)
                    + ph)
                    .cos()
            })
            .sum()
    })
}

pub fn norm(a: &Array2<f64>) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn rel_err(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    let d = norm(&(a - b));
    let s = norm(b);
    if s == 0.0 {
        d
    } else {
        d / s
    }
}
