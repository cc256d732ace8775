//! Slow reference implementations used to cross-check the fast paths.
//!
//! Nothing here touches the FFT: spectra come from the defining sum and
//! frame coefficients from explicit inner products over each atom's box.
//! Cost is `O(vol(N)^2)` per transform, so keep grids small.

use ndarray::Array2;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::fft::{freq_of_index, index_of_freq, Domain, GridArray};
use crate::finite::{AtomCoefficients, CoefficientSet, Normalization};
use crate::frame::FrameInstance;
use crate::scalar::Real;

/// DFT by direct summation, `F^(k) = sum_n F(n) exp(-2 pi i k.n / N)`.
pub fn naive_dft<T: Real>(array: &GridArray<T>) -> Result<GridArray<T>> {
    if array.domain() != Domain::Space {
        return Err(Error::DomainMismatch {
            expected: "space",
            found: "frequency",
        });
    }
    let (n1, n2) = array.shape();
    let f1 = T::from_usize_lossy(n1);
    let f2 = T::from_usize_lossy(n2);
    let values = array.values();
    let out = Array2::from_shape_fn((n1, n2), |(k1, k2)| {
        let mut acc = Complex::new(T::zero(), T::zero());
        for ((x1, x2), v) in values.indexed_iter() {
            // reduce k.n modulo N before scaling to keep the phase small
            let p1 = T::from_usize_lossy((k1 * x1) % n1) / f1;
            let p2 = T::from_usize_lossy((k2 * x2) % n2) / f2;
            acc = acc + *v * Complex::from_polar(T::one(), -T::TAU() * (p1 + p2));
        }
        acc
    });
    Ok(GridArray::new(out, Domain::Frequency))
}

/// Frame coefficients from the defining sum
/// `c_p(n) = vol(N)^{-1/2} sum_k F^(k) mask_p(k) conj(E_{p,n}(k))`.
pub fn analyze_direct<T: Real>(
    frame: &FrameInstance<T>,
    array: &GridArray<T>,
) -> Result<CoefficientSet<T>> {
    let grid = frame.spec().grid();
    if array.shape() != grid {
        return Err(Error::ShapeMismatch {
            expected: grid,
            found: array.shape(),
        });
    }
    let spectrum = naive_dft(array)?;
    let spectrum = spectrum.values();
    let scale = T::from_usize_lossy(grid.0 * grid.1).sqrt().recip();
    let mut atoms = Vec::new();
    for atom in frame.atoms().iter().filter(|a| !a.is_empty()) {
        let bb = atom.bbox();
        let amp = T::from_usize_lossy(bb.volume()).sqrt().recip();
        let s1 = T::from_usize_lossy(bb.size.0);
        let s2 = T::from_usize_lossy(bb.size.1);
        let values = Array2::from_shape_fn(bb.size, |(n1, n2)| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for j1 in 0..bb.size.0 {
                for j2 in 0..bb.size.1 {
                    let k1 = bb.origin.0 + j1 as isize;
                    let k2 = bb.origin.1 + j2 as isize;
                    let idx = [index_of_freq(k1, grid.0), index_of_freq(k2, grid.1)];
                    let m = atom.mask()[idx];
                    if m == T::zero() {
                        continue;
                    }
                    let theta = T::TAU()
                        * (T::from_isize_lossy(k1) * T::from_usize_lossy(n1) / s1
                            + T::from_isize_lossy(k2) * T::from_usize_lossy(n2) / s2);
                    // conj(E) = amp * exp(+i theta)
                    acc = acc + spectrum[idx] * Complex::from_polar(amp * m, theta);
                }
            }
            acc * scale
        });
        atoms.push(AtomCoefficients {
            index: atom.index(),
            bbox: bb,
            values,
        });
    }
    Ok(CoefficientSet {
        grid,
        normalization: Normalization::Parseval,
        parseval_guaranteed: frame.is_full_cover(),
        atoms,
    })
}

/// Largest relative deviation between two coefficient sets, measured
/// against the Euclidean norm of `reference`.
pub fn coefficient_distance<T: Real>(
    fast: &CoefficientSet<T>,
    reference: &CoefficientSet<T>,
) -> Result<T> {
    if fast.atoms.len() != reference.atoms.len() {
        return Err(Error::LayoutMismatch("different atom counts".into()));
    }
    let mut diff = T::zero();
    for (a, b) in fast.atoms.iter().zip(&reference.atoms) {
        if a.index != b.index || a.values.dim() != b.values.dim() {
            return Err(Error::LayoutMismatch(format!("block {} differs", a.index)));
        }
        diff = diff
            + a.values
                .iter()
                .zip(&b.values)
                .map(|(x, y)| (*x - *y).norm_sqr())
                .sum::<T>();
    }
    let norm = reference.energy();
    if norm == T::zero() {
        return Ok(diff.sqrt());
    }
    Ok((diff / norm).sqrt())
}

/// Circular convolution with a sampled mask by direct summation of the
/// inverse DFT; used to cross-check the propagator on tiny grids.
pub fn naive_filter<T: Real>(array: &GridArray<T>, mask: &Array2<T>) -> Result<GridArray<T>> {
    let spectrum = naive_dft(array)?;
    let (n1, n2) = array.shape();
    let f1 = T::from_usize_lossy(n1);
    let f2 = T::from_usize_lossy(n2);
    let vol = T::from_usize_lossy(n1 * n2);
    let out = Array2::from_shape_fn((n1, n2), |(x1, x2)| {
        let mut acc = Complex::new(T::zero(), T::zero());
        for ((i, j), v) in spectrum.values().indexed_iter() {
            let k1 = T::from_isize_lossy(freq_of_index(i, n1));
            let k2 = T::from_isize_lossy(freq_of_index(j, n2));
            let t =
                T::TAU() * (k1 * T::from_usize_lossy(x1) / f1 + k2 * T::from_usize_lossy(x2) / f2);
            acc = acc + *v * Complex::from_polar(mask[[i, j]], t);
        }
        acc / vol
    });
    Ok(GridArray::space(out))
}
