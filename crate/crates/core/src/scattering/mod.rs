//! Plain and rotational Fourier scattering.

mod path;
mod rotate;
mod stability;
mod transform;

pub use path::{enumerate_coset_paths, enumerate_paths, ScatteringPath, DEFAULT_CAP};
pub use rotate::{check_exact_group, rotate_array, RotationMode};
pub use stability::{
    max_warp_amplitude, perturb, stability_probe, stability_sweep, warp_gradient, Perturbation,
    ProbeConfig, StabilityPoint, WARP_GRADIENT_LIMIT,
};
pub use transform::{
    feature_distance, feature_norm, filter, filter_energies, propagate, scatter, scatter_plain,
    scatter_rotational, smooth, FeatureKind, FeatureSet, Truncation,
};
