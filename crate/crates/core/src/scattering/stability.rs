//! Translation and deformation probes for the scattering transforms.

use ndarray::Array2;

use crate::error::{invalid, Result};
use crate::frame::FrameInstance;
use crate::scalar::Real;

use super::rotate::{sample_periodic, RotationMode};
use super::transform::{feature_distance, scatter, FeatureKind, Truncation};

/// Largest admissible `||grad tau||_inf` for a warp.
pub const WARP_GRADIENT_LIMIT: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Perturbation<T> {
    /// Circular shift `F(x - y)`.
    Shift(isize, isize),
    /// `F(x - tau(x))` with `tau(x) = a (sin(2 pi x2 / N2), sin(2 pi x1 / N1))`.
    Warp { amplitude: T },
}

impl<T: Real> Perturbation<T> {
    /// `|y|` for shifts, `||grad tau||_inf` for warps.
    pub fn magnitude(&self, grid: (usize, usize)) -> T {
        match *self {
            Perturbation::Shift(a, b) => {
                let (a, b) = (T::from_isize_lossy(a), T::from_isize_lossy(b));
                (a * a + b * b).sqrt()
            }
            Perturbation::Warp { amplitude } => warp_gradient(amplitude, grid),
        }
    }
}

/// `||grad tau||_inf` of the sinusoidal warp of the given amplitude.
pub fn warp_gradient<T: Real>(amplitude: T, grid: (usize, usize)) -> T {
    let n = T::from_usize_lossy(grid.0.min(grid.1));
    amplitude.abs() * T::TAU() / n
}

/// Largest warp amplitude allowed on `grid`.
pub fn max_warp_amplitude<T: Real>(grid: (usize, usize)) -> T {
    T::lit(WARP_GRADIENT_LIMIT) * T::from_usize_lossy(grid.0.min(grid.1)) / T::TAU()
}

pub fn perturb<T: Real>(image: &Array2<T>, p: &Perturbation<T>) -> Result<Array2<T>> {
    let (n1, n2) = image.dim();
    match *p {
        Perturbation::Shift(y1, y2) => Ok(Array2::from_shape_fn((n1, n2), |(i, j)| {
            let a = (i as isize - y1).rem_euclid(n1 as isize) as usize;
            let b = (j as isize - y2).rem_euclid(n2 as isize) as usize;
            image[[a, b]]
        })),
        Perturbation::Warp { amplitude } => {
            let g = warp_gradient(amplitude, (n1, n2));
            if g > T::lit(WARP_GRADIENT_LIMIT) {
                return Err(invalid(
                    "warp",
                    format!("gradient {g} exceeds {WARP_GRADIENT_LIMIT}"),
                ));
            }
            let w1 = T::TAU() / T::from_usize_lossy(n1);
            let w2 = T::TAU() / T::from_usize_lossy(n2);
            Ok(Array2::from_shape_fn((n1, n2), |(i, j)| {
                let x1 = T::from_usize_lossy(i);
                let x2 = T::from_usize_lossy(j);
                let t1 = amplitude * (w2 * x2).sin();
                let t2 = amplitude * (w1 * x1).sin();
                sample_periodic(image, x1 - t1, x2 - t2)
            }))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityPoint<T> {
    pub magnitude: T,
    pub signal_distance: T,
    pub feature_distance: T,
    /// `feature_distance / signal_distance`, 0 when both vanish.
    pub ratio: T,
}

/// Transform settings shared by every probe of a sweep.
#[derive(Debug, Clone, Copy)]
pub struct ProbeConfig {
    pub truncation: Truncation,
    pub kind: FeatureKind,
    pub mode: RotationMode,
}

pub fn stability_sweep<T: Real>(
    frame: &FrameInstance<T>,
    image: &Array2<T>,
    config: &ProbeConfig,
    perturbations: &[Perturbation<T>],
) -> Result<Vec<StabilityPoint<T>>> {
    let run = |f: &Array2<T>| scatter(frame, f, config.truncation, config.kind, config.mode);
    let base = run(image)?;
    perturbations
        .iter()
        .map(|p| {
            let moved = perturb(image, p)?;
            let signal = moved
                .iter()
                .zip(image)
                .map(|(a, b)| (*a - *b) * (*a - *b))
                .sum::<T>()
                .sqrt();
            let feature = feature_distance(&run(&moved)?, &base)?;
            let ratio = if signal == T::zero() {
                T::zero()
            } else {
                feature / signal
            };
            Ok(StabilityPoint {
                magnitude: p.magnitude(image.dim()),
                signal_distance: signal,
                feature_distance: feature,
                ratio,
            })
        })
        .collect()
}

pub fn stability_probe<T: Real>(
    frame: &FrameInstance<T>,
    image: &Array2<T>,
    config: &ProbeConfig,
    perturbation: Perturbation<T>,
) -> Result<StabilityPoint<T>> {
    Ok(stability_sweep(frame, image, config, &[perturbation])?.remove(0))
}
