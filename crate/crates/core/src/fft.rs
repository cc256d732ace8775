//! Two-dimensional DFT on `N1 x N2` grids and the domain-tagged array type.
//!
//! Forward transform is unnormalized, `F^(k) = sum_n F(n) e^{-2 pi i k.n/N}`;
//! the inverse carries `1/vol(N)`. Spectra are stored in natural DFT order,
//! index `i` holding the centered frequency [`freq_of_index`].

use std::sync::Arc;

use ndarray::{Array2, Axis};
use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Centered frequency of DFT bin `i` on an axis of length `n`:
/// range `-floor(n/2) ..= ceil(n/2) - 1`.
#[inline]
pub fn freq_of_index(i: usize, n: usize) -> isize {
    if i < n.div_ceil(2) {
        i as isize
    } else {
        i as isize - n as isize
    }
}

/// Inverse of [`freq_of_index`]; `k` is reduced modulo `n`.
#[inline]
pub fn index_of_freq(k: isize, n: usize) -> usize {
    k.rem_euclid(n as isize) as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Space,
    Frequency,
}

impl Domain {
    fn name(self) -> &'static str {
        match self {
            Domain::Space => "space",
            Domain::Frequency => "frequency",
        }
    }
}

/// Complex samples over an `N1 x N2` grid, tagged with their domain.
#[derive(Debug, Clone, PartialEq)]
pub struct GridArray<T> {
    values: Array2<Complex<T>>,
    domain: Domain,
}

impl<T: Real> GridArray<T> {
    pub fn new(values: Array2<Complex<T>>, domain: Domain) -> Self {
        Self { values, domain }
    }

    pub fn space(values: Array2<Complex<T>>) -> Self {
        Self::new(values, Domain::Space)
    }

    pub fn from_real(values: &Array2<T>) -> Self {
        Self::space(values.mapv(|v| Complex::new(v, T::zero())))
    }

    pub fn zeros(shape: (usize, usize), domain: Domain) -> Self {
        Self::new(
            Array2::from_elem(shape, Complex::new(T::zero(), T::zero())),
            domain,
        )
    }

    pub fn shape(&self) -> (usize, usize) {
        self.values.dim()
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn values(&self) -> &Array2<Complex<T>> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut Array2<Complex<T>> {
        &mut self.values
    }

    pub fn into_values(self) -> Array2<Complex<T>> {
        self.values
    }

    pub fn norm_sqr(&self) -> T {
        self.values.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    pub(crate) fn expect_domain(&self, domain: Domain) -> Result<()> {
        if self.domain != domain {
            return Err(Error::DomainMismatch {
                expected: domain.name(),
                found: self.domain.name(),
            });
        }
        Ok(())
    }
}

/// Planned forward/inverse 2-D transforms for one grid shape.
///
/// Plans are immutable and shareable across threads; every call allocates
/// its own scratch.
#[derive(Clone)]
pub struct Fft2<T: Real> {
    shape: (usize, usize),
    row_fwd: Arc<dyn Fft<T>>,
    row_inv: Arc<dyn Fft<T>>,
    col_fwd: Arc<dyn Fft<T>>,
    col_inv: Arc<dyn Fft<T>>,
}

impl<T: Real> std::fmt::Debug for Fft2<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2").field("shape", &self.shape).finish()
    }
}

impl<T: Real> Fft2<T> {
    pub fn new(shape: (usize, usize)) -> Self {
        Self::with_planner(&mut FftPlanner::new(), shape)
    }

    /// Plan through a shared planner so repeated lengths reuse plans.
    pub fn with_planner(planner: &mut FftPlanner<T>, shape: (usize, usize)) -> Self {
        Self {
            shape,
            row_fwd: planner.plan_fft_forward(shape.1),
            row_inv: planner.plan_fft_inverse(shape.1),
            col_fwd: planner.plan_fft_forward(shape.0),
            col_inv: planner.plan_fft_inverse(shape.0),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    fn check(&self, found: (usize, usize)) -> Result<()> {
        if found != self.shape {
            return Err(Error::ShapeMismatch {
                expected: self.shape,
                found,
            });
        }
        Ok(())
    }

    fn run(&self, data: &mut Array2<Complex<T>>, rows: &Arc<dyn Fft<T>>, cols: &Arc<dyn Fft<T>>) {
        let (n1, n2) = self.shape;
        let scratch_len = rows
            .get_inplace_scratch_len()
            .max(cols.get_inplace_scratch_len());
        let mut scratch = vec![Complex::new(T::zero(), T::zero()); scratch_len];
        if !data.is_standard_layout() {
            *data = data.as_standard_layout().into_owned();
        }
        {
            let flat = data.as_slice_mut().expect("standard layout");
            for row in flat.chunks_exact_mut(n2) {
                rows.process_with_scratch(row, &mut scratch);
            }
        }
        let mut column = vec![Complex::new(T::zero(), T::zero()); n1];
        for mut col in data.axis_iter_mut(Axis(1)) {
            for (dst, src) in column.iter_mut().zip(col.iter()) {
                *dst = *src;
            }
            cols.process_with_scratch(&mut column, &mut scratch);
            for (dst, src) in col.iter_mut().zip(column.iter()) {
                *dst = *src;
            }
        }
    }

    /// Unnormalized forward transform in place.
    pub fn forward_in_place(&self, data: &mut Array2<Complex<T>>) -> Result<()> {
        self.check(data.dim())?;
        self.run(data, &self.row_fwd, &self.col_fwd);
        Ok(())
    }

    /// Inverse transform in place without the `1/vol(N)` factor.
    pub fn inverse_unscaled_in_place(&self, data: &mut Array2<Complex<T>>) -> Result<()> {
        self.check(data.dim())?;
        self.run(data, &self.row_inv, &self.col_inv);
        Ok(())
    }

    /// Inverse transform in place, scaled by `1/vol(N)`.
    pub fn inverse_in_place(&self, data: &mut Array2<Complex<T>>) -> Result<()> {
        self.check(data.dim())?;
        self.run(data, &self.row_inv, &self.col_inv);
        let scale = T::one() / T::from_usize_lossy(self.shape.0 * self.shape.1);
        data.mapv_inplace(|c| c * scale);
        Ok(())
    }

    pub fn forward_real(&self, data: &Array2<T>) -> Result<Array2<Complex<T>>> {
        let mut out = data.mapv(|v| Complex::new(v, T::zero()));
        self.forward_in_place(&mut out)?;
        Ok(out)
    }

    pub fn dft(&self, array: &GridArray<T>) -> Result<GridArray<T>> {
        array.expect_domain(Domain::Space)?;
        let mut values = array.values.clone();
        self.forward_in_place(&mut values)?;
        Ok(GridArray::new(values, Domain::Frequency))
    }

    pub fn idft(&self, array: &GridArray<T>) -> Result<GridArray<T>> {
        array.expect_domain(Domain::Frequency)?;
        let mut values = array.values.clone();
        self.inverse_in_place(&mut values)?;
        Ok(GridArray::new(values, Domain::Space))
    }
}

/// One-shot forward DFT.
pub fn dft<T: Real>(array: &GridArray<T>) -> Result<GridArray<T>> {
    Fft2::new(array.shape()).dft(array)
}

/// One-shot inverse DFT.
pub fn idft<T: Real>(array: &GridArray<T>) -> Result<GridArray<T>> {
    Fft2::new(array.shape()).idft(array)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random(shape: (usize, usize), seed: u64) -> GridArray<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        GridArray::space(Array2::from_shape_fn(shape, |_| {
            Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        }))
    }

    #[test]
    fn frequency_indexing() {
        let f: Vec<isize> = (0..5).map(|i| freq_of_index(i, 5)).collect();
        assert_eq!(f, [0, 1, 2, -2, -1]);
        let f: Vec<isize> = (0..4).map(|i| freq_of_index(i, 4)).collect();
        assert_eq!(f, [0, 1, -2, -1]);
        for n in [3, 4, 9, 10] {
            for i in 0..n {
                assert_eq!(index_of_freq(freq_of_index(i, n), n), i);
            }
        }
    }

    #[test]
    fn delta_has_flat_spectrum() {
        let mut d = GridArray::<f64>::zeros((9, 7), Domain::Space);
        d.values_mut()[[0, 0]] = Complex::new(1.0, 0.0);
        let s = dft(&d).unwrap();
        assert!(s
            .values()
            .iter()
            .all(|c| (*c - Complex::new(1.0, 0.0)).norm() < 1e-14));
    }

    #[test]
    fn constant_concentrates_at_dc() {
        let c = GridArray::<f64>::space(Array2::from_elem((6, 5), Complex::new(0.5, 0.0)));
        let s = dft(&c).unwrap();
        for ((i, j), v) in s.values().indexed_iter() {
            let want = if i == 0 && j == 0 { 15.0 } else { 0.0 };
            assert!((v.re - want).abs() < 1e-13 && v.im.abs() < 1e-13);
        }
    }

    #[test]
    fn round_trip_and_parseval() {
        for shape in [(9, 9), (8, 12), (17, 5)] {
            let f = random(shape, 3);
            let plan = Fft2::new(shape);
            let s = plan.dft(&f).unwrap();
            let back = plan.idft(&s).unwrap();
            let err: f64 = (back.values() - f.values())
                .iter()
                .map(|c| c.norm_sqr())
                .sum();
            assert!(err.sqrt() / f.norm() < 1e-12);
            let vol = (shape.0 * shape.1) as f64;
            assert!((s.norm_sqr() - vol * f.norm_sqr()).abs() / (vol * f.norm_sqr()) < 1e-12);
        }
    }

    #[test]
    fn rejects_wrong_domain_and_shape() {
        let f = random((5, 5), 1);
        let plan = Fft2::new((5, 5));
        assert!(matches!(plan.idft(&f), Err(Error::DomainMismatch { .. })));
        let plan = Fft2::new((5, 6));
        assert!(matches!(plan.dft(&f), Err(Error::ShapeMismatch { .. })));
    }
}
