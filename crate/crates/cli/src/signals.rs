//! Seeded test signals.

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_real(shape: (usize, usize), seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_fn(shape, |_| rng.gen_range(-1.0..1.0))
}

pub fn random_unit(shape: (usize, usize), seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_fn(shape, |_| rng.gen_range(0.0..1.0))
}

pub fn random_complex(shape: (usize, usize), seed: u64) -> Array2<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_fn(shape, |_| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

/// Real sum of random cosines with integer frequencies `|k| <= radius`.
pub fn band_limited(shape: (usize, usize), radius: f64, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n1, n2) = shape;
    let reach = radius.floor() as isize;
    let mut modes = Vec::new();
    for k1 in -reach..=reach {
        for k2 in -reach..=reach {
            if ((k1 * k1 + k2 * k2) as f64).sqrt() <= radius {
                let amp = rng.gen_range(-1.0..1.0);
                let phase = rng.gen_range(0.0..std::f64::consts::TAU);
                modes.push((k1 as f64 / n1 as f64, k2 as f64 / n2 as f64, amp, phase));
            }
        }
    }
    Array2::from_shape_fn(shape, |(x1, x2)| {
        modes
            .iter()
            .map(|(f1, f2, a, ph)| {
                a * (std::f64::consts::TAU * (f1 * x1 as f64 + f2 * x2 as f64) + ph).cos()
            })
            .sum()
    })
}

pub fn frobenius(a: &Array2<f64>) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `||a - b|| / ||b||`, or the absolute difference when `b` vanishes.
pub fn relative(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    let d = frobenius(&(a - b));
    let s = frobenius(b);
    if s == 0.0 {
        d
    } else {
        d / s
    }
}
