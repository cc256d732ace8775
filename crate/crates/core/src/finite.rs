//! Finite uniform covering frames for arrays.
//!
//! Each nonempty atom `p` with support box `S_p` contributes the family
//! `F_{p,n}`, `0 <= n < S_p`, whose DFT is `mask_p * E_{p,n}` with
//! `E_{p,n}(k) = vol(S_p)^{-1/2} exp(-2 pi i k.n / S_p)` on the box. The
//! coefficient of `F` against `F_{p,n}` is
//!
//! ```text
//! c_p(n) = vol(N)^{-1/2} sum_{k in box} F^(k) mask_p(k) conj(E_{p,n}(k))
//! ```
//!
//! which makes the family a Parseval frame whenever the sampled masks
//! partition unity on the lattice.

use std::collections::HashMap;

use ndarray::Array2;
use num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::fft::{index_of_freq, Domain, Fft2, GridArray};
use crate::frame::{AtomIndex, BoundingBox, FrameInstance, SpectralAtom};
use crate::scalar::Real;

/// Scaling of frame coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// `vol(N)^{-1/2}` in front of the spectral sum: an exact Parseval frame.
    #[default]
    Parseval,
    /// Frobenius inner products against atoms whose DFT is literally
    /// `mask * E`; total energy comes out scaled by `1 / vol(N)`.
    Literal,
}

impl Normalization {
    fn analysis_scale<T: Real>(self, vol_n: T) -> T {
        match self {
            Normalization::Parseval => vol_n.sqrt().recip(),
            Normalization::Literal => vol_n.recip(),
        }
    }
}

/// Coefficients of one atom, laid out over its `S_p` box.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomCoefficients<T> {
    pub index: AtomIndex,
    pub bbox: BoundingBox,
    pub values: Array2<Complex<T>>,
}

impl<T: Real> AtomCoefficients<T> {
    pub fn energy(&self) -> T {
        self.values.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Frame coefficients of an array, one block per nonempty atom in frame order.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet<T> {
    pub grid: (usize, usize),
    pub normalization: Normalization,
    /// False when the frame does not cover every lattice frequency.
    pub parseval_guaranteed: bool,
    pub atoms: Vec<AtomCoefficients<T>>,
}

impl<T: Real> CoefficientSet<T> {
    pub fn energy(&self) -> T {
        self.atoms.iter().map(AtomCoefficients::energy).sum()
    }

    pub fn len(&self) -> usize {
        self.atoms.iter().map(|a| a.values.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn scale(&mut self, factor: Complex<T>) {
        for a in &mut self.atoms {
            a.values.mapv_inplace(|c| c * factor);
        }
    }

    /// Linear combination `alpha * self + other`; layouts must match.
    pub fn axpy(&self, alpha: Complex<T>, other: &Self) -> Result<Self> {
        check_layout(self, other)?;
        let mut out = self.clone();
        for (a, b) in out.atoms.iter_mut().zip(&other.atoms) {
            a.values
                .zip_mut_with(&b.values, |x, y| *x = *x * alpha + *y);
        }
        Ok(out)
    }

    pub fn zeros_like(&self) -> Self {
        let mut out = self.clone();
        out.scale(Complex::new(T::zero(), T::zero()));
        out
    }
}

fn check_layout<T: Real>(a: &CoefficientSet<T>, b: &CoefficientSet<T>) -> Result<()> {
    let same = a.grid == b.grid
        && a.atoms.len() == b.atoms.len()
        && a.atoms
            .iter()
            .zip(&b.atoms)
            .all(|(x, y)| x.index == y.index && x.values.dim() == y.values.dim());
    if same {
        Ok(())
    } else {
        Err(Error::LayoutMismatch("coefficient sets differ".into()))
    }
}

/// `E_{p,n}` sampled on the atom's box, indexed by offset from the box origin.
pub fn modulation<T: Real>(
    atom: &SpectralAtom<T>,
    n: (usize, usize),
) -> Result<Array2<Complex<T>>> {
    let bb = atom.bbox();
    if n.0 >= bb.size.0 || n.1 >= bb.size.1 {
        return Err(Error::IndexOutOfRange(format!(
            "modulation index {n:?} outside box {:?}",
            bb.size
        )));
    }
    let amp = T::from_usize_lossy(bb.volume()).sqrt().recip();
    let s1 = T::from_usize_lossy(bb.size.0);
    let s2 = T::from_usize_lossy(bb.size.1);
    let n1 = T::from_usize_lossy(n.0);
    let n2 = T::from_usize_lossy(n.1);
    Ok(Array2::from_shape_fn(bb.size, |(j1, j2)| {
        let k1 = T::from_isize_lossy(bb.origin.0 + j1 as isize);
        let k2 = T::from_isize_lossy(bb.origin.1 + j2 as isize);
        let theta = -T::TAU() * (k1 * n1 / s1 + k2 * n2 / s2);
        Complex::from_polar(amp, theta)
    }))
}

/// Per-box-size transform plans, owned by one caller.
struct BoxPlans<T: Real> {
    planner: FftPlanner<T>,
    plans: HashMap<(usize, usize), Fft2<T>>,
}

impl<T: Real> BoxPlans<T> {
    fn new() -> Self {
        Self {
            planner: FftPlanner::new(),
            plans: HashMap::new(),
        }
    }

    fn get(&mut self, shape: (usize, usize)) -> &Fft2<T> {
        let planner = &mut self.planner;
        self.plans
            .entry(shape)
            .or_insert_with(|| Fft2::with_planner(planner, shape))
    }
}

/// `exp(sign * 2 pi i origin.n / S)` over the coefficient box.
fn origin_phase<T: Real>(bb: &BoundingBox, sign: T) -> Array2<Complex<T>> {
    let o1 = T::from_isize_lossy(bb.origin.0);
    let o2 = T::from_isize_lossy(bb.origin.1);
    let s1 = T::from_usize_lossy(bb.size.0);
    let s2 = T::from_usize_lossy(bb.size.1);
    Array2::from_shape_fn(bb.size, |(n1, n2)| {
        let t = T::TAU() * (o1 * T::from_usize_lossy(n1) / s1 + o2 * T::from_usize_lossy(n2) / s2);
        Complex::from_polar(T::one(), sign * t)
    })
}

/// Frame coefficients through the fast path: gather the masked spectrum on
/// each atom's box and apply a box-sized inverse DFT.
pub fn analyze<T: Real>(
    frame: &FrameInstance<T>,
    array: &GridArray<T>,
) -> Result<CoefficientSet<T>> {
    analyze_with(frame, array, Normalization::Parseval)
}

pub fn analyze_with<T: Real>(
    frame: &FrameInstance<T>,
    array: &GridArray<T>,
    normalization: Normalization,
) -> Result<CoefficientSet<T>> {
    let grid = frame.spec().grid();
    array.expect_domain(Domain::Space)?;
    let spectrum = Fft2::new(grid).dft(array)?;
    let spectrum = spectrum.values();
    let vol_n = T::from_usize_lossy(grid.0 * grid.1);
    let scale = normalization.analysis_scale(vol_n);
    let mut plans = BoxPlans::new();
    let mut atoms = Vec::new();
    for atom in frame.atoms().iter().filter(|a| !a.is_empty()) {
        let bb = atom.bbox();
        let mut block = Array2::from_shape_fn(bb.size, |(j1, j2)| {
            let k = (bb.origin.0 + j1 as isize, bb.origin.1 + j2 as isize);
            let idx = [index_of_freq(k.0, grid.0), index_of_freq(k.1, grid.1)];
            spectrum[idx] * atom.mask()[idx]
        });
        plans.get(bb.size).inverse_unscaled_in_place(&mut block)?;
        let amp = scale / T::from_usize_lossy(bb.volume()).sqrt();
        let phase = origin_phase(&bb, T::one());
        block.zip_mut_with(&phase, |c, p| *c = *c * *p * amp);
        atoms.push(AtomCoefficients {
            index: atom.index(),
            bbox: bb,
            values: block,
        });
    }
    Ok(CoefficientSet {
        grid,
        normalization,
        parseval_guaranteed: frame.is_full_cover(),
        atoms,
    })
}

/// Adjoint of [`analyze`]; reconstructs the array for full-cover frames.
pub fn synthesize<T: Real>(
    frame: &FrameInstance<T>,
    coeffs: &CoefficientSet<T>,
) -> Result<GridArray<T>> {
    let grid = frame.spec().grid();
    if coeffs.grid != grid {
        return Err(Error::ShapeMismatch {
            expected: grid,
            found: coeffs.grid,
        });
    }
    let vol_n = T::from_usize_lossy(grid.0 * grid.1);
    let scale = coeffs.normalization.analysis_scale(vol_n) * vol_n;
    let mut spectrum = Array2::from_elem(grid, Complex::new(T::zero(), T::zero()));
    let mut plans = BoxPlans::new();
    for block in &coeffs.atoms {
        let atom = frame
            .atom(&block.index)
            .ok_or_else(|| Error::LayoutMismatch(format!("atom {} not in frame", block.index)))?;
        let bb = atom.bbox();
        if bb != block.bbox || block.values.dim() != bb.size {
            return Err(Error::LayoutMismatch(format!(
                "coefficient box for {} does not match the atom",
                block.index
            )));
        }
        let phase = origin_phase(&bb, -T::one());
        let mut work = &block.values * &phase;
        plans.get(bb.size).forward_in_place(&mut work)?;
        let amp = scale / T::from_usize_lossy(bb.volume()).sqrt();
        for ((j1, j2), v) in work.indexed_iter() {
            let k = (bb.origin.0 + j1 as isize, bb.origin.1 + j2 as isize);
            let idx = [index_of_freq(k.0, grid.0), index_of_freq(k.1, grid.1)];
            spectrum[idx] = spectrum[idx] + *v * (atom.mask()[idx] * amp);
        }
    }
    Fft2::new(grid).idft(&GridArray::new(spectrum, Domain::Frequency))
}

/// `|sum |c|^2 - ||F||^2| / ||F||^2`; zero for the zero array.
pub fn parseval_residual<T: Real>(frame: &FrameInstance<T>, array: &GridArray<T>) -> Result<T> {
    let coeffs = analyze(frame, array)?;
    let norm = array.norm_sqr();
    if norm == T::zero() {
        return Ok(T::zero());
    }
    Ok((coeffs.energy() - norm).abs() / norm)
}
