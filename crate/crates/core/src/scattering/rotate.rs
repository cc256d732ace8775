//! Spatial rotation of arrays about the grid center, `f_r(x) = f(r x)`.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::math::GroupElement;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RotationMode {
    /// Index permutation; needs an odd square grid and a multiple of `pi/2`.
    #[default]
    Exact,
    /// Bilinear resampling with zero fill outside the grid.
    Bilinear,
}

impl std::str::FromStr for RotationMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Self::Exact),
            "bilinear" => Ok(Self::Bilinear),
            other => Err(format!(
                "unknown rotation mode `{other}` (expected exact|bilinear)"
            )),
        }
    }
}

/// Check that every rotation of the invariance group of order `b` can be
/// applied exactly on `grid`.
pub fn check_exact_group(grid: (usize, usize), b: u32) -> Result<()> {
    if !matches!(b, 1 | 2 | 4) {
        return Err(Error::RotationUnsupported(format!(
            "group of order {b} is not a subgroup of the lattice quarter turns"
        )));
    }
    check_exact_grid(grid)
}

fn check_exact_grid(grid: (usize, usize)) -> Result<()> {
    if grid.0 != grid.1 || grid.0.is_multiple_of(2) {
        return Err(Error::RotationUnsupported(format!(
            "exact rotation needs an odd square grid, got {}x{}",
            grid.0, grid.1
        )));
    }
    Ok(())
}

/// Pull back `array` through the rotation `r` about the grid center.
pub fn rotate_array<T: Real>(
    array: &Array2<T>,
    r: &GroupElement,
    mode: RotationMode,
) -> Result<Array2<T>> {
    match mode {
        RotationMode::Exact => {
            let turns = r.quarter_turns().ok_or_else(|| {
                Error::RotationUnsupported(format!("angle of {r} is not a multiple of pi/2"))
            })?;
            check_exact_grid(array.dim())?;
            Ok(rotate_quarter(array, turns))
        }
        RotationMode::Bilinear => Ok(rotate_bilinear(array, r.angle())),
    }
}

/// `out[c + x] = in[c + R^turns x]` with `R(x1, x2) = (-x2, x1)`; odd square grids.
pub(crate) fn rotate_quarter<T: Copy>(array: &Array2<T>, turns: u8) -> Array2<T> {
    let n = array.dim().0;
    let c = (n / 2) as isize;
    Array2::from_shape_fn((n, n), |(i, j)| {
        let (x1, x2) = (i as isize - c, j as isize - c);
        let (y1, y2) = match turns % 4 {
            0 => (x1, x2),
            1 => (-x2, x1),
            2 => (-x1, -x2),
            _ => (x2, -x1),
        };
        array[[(y1 + c) as usize, (y2 + c) as usize]]
    })
}

pub(crate) fn rotate_bilinear<T: Real>(array: &Array2<T>, theta: T) -> Array2<T> {
    let (n1, n2) = array.dim();
    let half = T::lit(0.5);
    let c1 = (T::from_usize_lossy(n1) - T::one()) * half;
    let c2 = (T::from_usize_lossy(n2) - T::one()) * half;
    let (s, co) = theta.sin_cos();
    Array2::from_shape_fn((n1, n2), |(i, j)| {
        let x1 = T::from_usize_lossy(i) - c1;
        let x2 = T::from_usize_lossy(j) - c2;
        let y1 = x1 * co - x2 * s + c1;
        let y2 = x1 * s + x2 * co + c2;
        sample_bilinear(array, y1, y2)
    })
}

/// Bilinear sample at fractional position `(y1, y2)`, zero outside.
pub(crate) fn sample_bilinear<T: Real>(array: &Array2<T>, y1: T, y2: T) -> T {
    let (n1, n2) = array.dim();
    let f1 = y1.floor();
    let f2 = y2.floor();
    let t1 = y1 - f1;
    let t2 = y2 - f2;
    let i0 = f1.to_isize().unwrap_or(isize::MIN / 2);
    let j0 = f2.to_isize().unwrap_or(isize::MIN / 2);
    let get = |i: isize, j: isize| {
        if i < 0 || j < 0 || i >= n1 as isize || j >= n2 as isize {
            T::zero()
        } else {
            array[[i as usize, j as usize]]
        }
    };
    let one = T::one();
    let mut acc = T::zero();
    // skip zero-weight neighbours so integer positions reproduce samples exactly
    for (di, wi) in [(0, one - t1), (1, t1)] {
        if wi == T::zero() {
            continue;
        }
        for (dj, wj) in [(0, one - t2), (1, t2)] {
            if wj == T::zero() {
                continue;
            }
            acc = acc + wi * wj * get(i0 + di, j0 + dj);
        }
    }
    acc
}

/// Bilinear sample with periodic wrap-around.
pub(crate) fn sample_periodic<T: Real>(array: &Array2<T>, y1: T, y2: T) -> T {
    let (n1, n2) = array.dim();
    let f1 = y1.floor();
    let f2 = y2.floor();
    let t1 = y1 - f1;
    let t2 = y2 - f2;
    let i0 = f1.to_isize().unwrap_or(0);
    let j0 = f2.to_isize().unwrap_or(0);
    let get = |i: isize, j: isize| {
        array[[
            i.rem_euclid(n1 as isize) as usize,
            j.rem_euclid(n2 as isize) as usize,
        ]]
    };
    let one = T::one();
    (one - t1) * (one - t2) * get(i0, j0)
        + (one - t1) * t2 * get(i0, j0 + 1)
        + t1 * (one - t2) * get(i0 + 1, j0)
        + t1 * t2 * get(i0 + 1, j0 + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random(n: usize, seed: u64) -> Array2<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn((n, n), |_| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn identity_is_noop() {
        let f = random(9, 1);
        let e = GroupElement::identity(1, 4).unwrap();
        assert_eq!(rotate_array(&f, &e, RotationMode::Exact).unwrap(), f);
        assert_eq!(rotate_array(&f, &e, RotationMode::Bilinear).unwrap(), f);
    }

    #[test]
    fn quarter_turns_compose_and_preserve_norm() {
        let f = random(11, 2);
        let q = GroupElement::new(1, 4, 1).unwrap();
        let h = GroupElement::new(1, 4, 2).unwrap();
        let twice = rotate_array(
            &rotate_array(&f, &q, RotationMode::Exact).unwrap(),
            &q,
            RotationMode::Exact,
        )
        .unwrap();
        let half = rotate_array(&f, &h, RotationMode::Exact).unwrap();
        assert_eq!(twice, half);
        // permutation: identical multiset of samples, so the norm agrees
        let sorted = |a: &Array2<f64>| {
            let mut v: Vec<f64> = a.iter().copied().collect();
            v.sort_by(f64::total_cmp);
            v
        };
        assert_eq!(sorted(&half), sorted(&f));
        let norm = |a: &Array2<f64>| a.iter().map(|v| v * v).sum::<f64>();
        assert!((norm(&half) - norm(&f)).abs() <= 1e-15 * norm(&f));
        let four = (0..4).fold(f.clone(), |acc, _| {
            rotate_array(&acc, &q, RotationMode::Exact).unwrap()
        });
        assert_eq!(four, f);
    }

    #[test]
    fn quarter_turn_direction() {
        // f_r(x) = f(r x): a bump at centered (1, 0) moves to (0, -1).
        let mut f = Array2::<f64>::zeros((5, 5));
        f[[3, 2]] = 1.0;
        let q = GroupElement::new(1, 4, 1).unwrap();
        let g = rotate_array(&f, &q, RotationMode::Exact).unwrap();
        assert_eq!(g[[2, 1]], 1.0);
        let b = rotate_array(&f, &q, RotationMode::Bilinear).unwrap();
        assert!((b[[2, 1]] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_mode_rejections() {
        let q = GroupElement::new(1, 8, 1).unwrap();
        assert!(rotate_array(&random(9, 0), &q, RotationMode::Exact).is_err());
        let q = GroupElement::new(1, 4, 1).unwrap();
        assert!(rotate_array(&Array2::<f64>::zeros((8, 8)), &q, RotationMode::Exact).is_err());
        assert!(rotate_array(&Array2::<f64>::zeros((9, 7)), &q, RotationMode::Exact).is_err());
        assert!(check_exact_group((9, 9), 8).is_err());
        assert!(check_exact_group((9, 9), 4).is_ok());
    }

    #[test]
    fn bilinear_matches_exact_on_quarter_turns() {
        let f = random(9, 3);
        let q = GroupElement::new(1, 4, 3).unwrap();
        let a = rotate_array(&f, &q, RotationMode::Exact).unwrap();
        let b = rotate_array(&f, &q, RotationMode::Bilinear).unwrap();
        let err = (&a - &b).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(err < 1e-12);
    }
}
