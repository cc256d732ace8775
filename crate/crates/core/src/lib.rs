//! Rotational uniform covering frames on finite 2-D grids, their finite
//! Parseval analysis, and plain and rotation-invariant Fourier scattering.
//!
//! Everything is generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix the scalar to `f64`, with `*32` variants for `f32`.
//!
//! ```
//! use rufst::{build_frame, scatter_plain, Spec, Truncation};
//! use ndarray::Array2;
//!
//! let spec = Spec::covering(2.0, 4, (17, 17)).unwrap();
//! let frame = build_frame(&spec);
//! let image = Array2::from_shape_fn((17, 17), |(i, j)| ((i * j) % 5) as f64);
//! let features = scatter_plain(&frame, &image, Truncation::new(2, 2)).unwrap();
//! let norm: f64 = image.iter().map(|v| v * v).sum::<f64>().sqrt();
//! assert!(features.norm() <= norm + 1e-10);
//! ```

pub mod error;
pub mod fft;
pub mod finite;
pub mod frame;
pub mod math;
pub mod reference;
pub mod scalar;
pub mod scattering;

pub use error::{Error, Result};
pub use fft::{dft, freq_of_index, idft, index_of_freq, Domain, Fft2, GridArray};
pub use finite::{
    analyze, analyze_with, modulation, parseval_residual, synthesize, AtomCoefficients,
    CoefficientSet, Normalization,
};
pub use frame::{
    build_atom, build_frame, coset_representatives, direction_diagnostic, index_set,
    verify_partition, wedge_diameter, wedge_diameter_bound, wedge_diameter_uniform_bound,
    AtomIndex, BoundingBox, FrameInstance, FrameSpec, PartitionReport, SpectralAtom,
};
pub use math::{
    beta, eta, from_polar, group_elements, group_order, pow2_ceil, sector_half_width, smooth_step,
    to_polar, wrap_angle, CutoffProfile, GroupElement, PolarPoint,
};
pub use scalar::Real;
pub use scattering::{
    check_exact_group, enumerate_coset_paths, enumerate_paths, feature_distance, feature_norm,
    filter, filter_energies, max_warp_amplitude, perturb, propagate, rotate_array, scatter,
    scatter_plain, scatter_rotational, smooth, stability_probe, stability_sweep, warp_gradient,
    FeatureKind, FeatureSet, Perturbation, ProbeConfig, RotationMode, ScatteringPath,
    StabilityPoint, Truncation, DEFAULT_CAP,
};

pub type Spec = FrameSpec<f64>;
pub type Spec32 = FrameSpec<f32>;
pub type Frame = FrameInstance<f64>;
pub type Frame32 = FrameInstance<f32>;
pub type Atom = SpectralAtom<f64>;
pub type Atom32 = SpectralAtom<f32>;
pub type Grid = GridArray<f64>;
pub type Grid32 = GridArray<f32>;
pub type Coefficients = CoefficientSet<f64>;
pub type Coefficients32 = CoefficientSet<f32>;
pub type Features = FeatureSet<f64>;
pub type Features32 = FeatureSet<f32>;
