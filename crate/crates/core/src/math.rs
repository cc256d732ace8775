//! Scalar primitives: dyadic rounding, smooth cutoffs whose squared
//! translates partition unity, finite rotation groups of the plane and
//! polar coordinates.

use std::fmt;

use crate::error::{invalid, Result};
use crate::scalar::Real;

/// The unique power of two `m*` with `m <= m* < 2m`.
pub fn pow2_ceil(m: u64) -> Result<u64> {
    if m == 0 {
        return Err(invalid("m", "must be a positive integer"));
    }
    m.checked_next_power_of_two()
        .ok_or_else(|| invalid("m", "too large for dyadic rounding"))
}

/// Smooth monotone step: 0 on `t <= 0`, 1 on `t >= 1`, and
/// `s(t) + s(1 - t) = 1` everywhere.
pub fn smooth_step<T: Real>(t: T) -> T {
    if t <= T::zero() {
        return T::zero();
    }
    if t >= T::one() {
        return T::one();
    }
    let left = bump_tail(t);
    let right = bump_tail(T::one() - t);
    left / (left + right)
}

#[inline]
fn bump_tail<T: Real>(t: T) -> T {
    if t <= T::zero() {
        T::zero()
    } else {
        (-t.recip()).exp()
    }
}

/// Wrap an angle into `(-pi, pi]`.
pub fn wrap_angle<T: Real>(phi: T) -> T {
    let two_pi = T::TAU();
    let pi = T::PI();
    if phi > -pi && phi <= pi {
        return phi;
    }
    let mut w = (phi + pi) % two_pi;
    if w < T::zero() {
        w = w + two_pi;
    }
    w = w - pi;
    if w <= -pi {
        w + two_pi
    } else {
        w
    }
}

/// Even, smooth cutoff `eta_A` supported in `[-A, A]` whose integer
/// translates by `A` have squares summing to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffProfile<T> {
    half_width: T,
}

impl<T: Real> CutoffProfile<T> {
    pub fn new(half_width: T) -> Result<Self> {
        if !half_width.is_finite() || half_width <= T::zero() {
            return Err(invalid(
                "A",
                "cutoff half-width must be positive and finite",
            ));
        }
        Ok(Self { half_width })
    }

    pub fn half_width(&self) -> T {
        self.half_width
    }

    /// `eta_A(x)`; exactly zero for `|x| >= A`.
    pub fn value(&self, x: T) -> T {
        let t = x.abs() / self.half_width;
        if t >= T::one() {
            return T::zero();
        }
        (T::FRAC_PI_2() * smooth_step(t)).cos()
    }
}

/// `eta_A(x)` for a one-off evaluation.
pub fn eta<T: Real>(a: T, x: T) -> Result<T> {
    Ok(CutoffProfile::new(a)?.value(x))
}

/// Angular half-width `B_m = 2 pi / (m* B)` of the level-`m` sector.
pub fn sector_half_width<T: Real>(level: u32, base: u32) -> Result<T> {
    let order = group_order(level, base)?;
    Ok(T::TAU() / T::from_u64(order).expect("group order representable"))
}

/// Angular cutoff `beta_{m,B}(phi)`: `eta_{B_m}` applied to the wrapped angle.
///
/// Squares of its rotates by the elements of `G_m` sum to one. Constant one
/// when the group is trivial.
pub fn beta<T: Real>(level: u32, base: u32, phi: T) -> Result<T> {
    let order = group_order(level, base)?;
    if order == 1 {
        return Ok(T::one());
    }
    let width = T::TAU() / T::from_u64(order).expect("group order representable");
    Ok(CutoffProfile { half_width: width }.value(wrap_angle(phi)))
}

/// `|G_m| = m* B` for the plane.
pub fn group_order(level: u32, base: u32) -> Result<u64> {
    if level == 0 {
        return Err(invalid("m", "level must be at least 1"));
    }
    if base == 0 {
        return Err(invalid("B", "must be at least 1"));
    }
    let star = pow2_ceil(u64::from(level))?;
    star.checked_mul(u64::from(base))
        .ok_or_else(|| invalid("B", "group order overflows"))
}

/// Element of the finite rotation group `G_m`: rotation by `2 pi j / (m* B)`.
///
/// Angles are kept as integer fractions of a full turn so composition and
/// coset reduction are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    level: u32,
    index: u64,
    base: u32,
}

impl GroupElement {
    pub fn new(level: u32, base: u32, index: u64) -> Result<Self> {
        let order = group_order(level, base)?;
        if index >= order {
            return Err(crate::Error::IndexOutOfRange(format!(
                "rotation index {index} not below group order {order}"
            )));
        }
        Ok(Self { level, index, base })
    }

    pub fn identity(level: u32, base: u32) -> Result<Self> {
        Self::new(level, base, 0)
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn order(&self) -> u64 {
        group_order(self.level, self.base).expect("validated at construction")
    }

    pub fn is_identity(&self) -> bool {
        self.index == 0
    }

    /// Reduced fraction `(num, den)` of a full turn.
    pub fn angle_fraction(&self) -> (u64, u64) {
        let order = self.order();
        let g = gcd(self.index, order);
        (self.index / g, order / g)
    }

    pub fn angle<T: Real>(&self) -> T {
        T::TAU() * T::from_u64(self.index).unwrap() / T::from_u64(self.order()).unwrap()
    }

    /// Same rotation viewed as an element of the (larger or equal) group at `level`.
    ///
    /// Returns `None` when the rotation is not a member of that group.
    pub fn lift(&self, level: u32) -> Option<Self> {
        let target = group_order(level, self.base).ok()?;
        let own = self.order();
        let scaled = u128::from(self.index) * u128::from(target);
        if scaled % u128::from(own) != 0 {
            return None;
        }
        Some(Self {
            level,
            index: (scaled / u128::from(own)) as u64,
            base: self.base,
        })
    }

    /// Group product; the result lives at the larger of the two levels.
    ///
    /// # Panics
    /// If the elements come from families with different base order `B`.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.base, other.base, "rotation groups with different B");
        let level = self.level.max(other.level);
        let a = self.lift(level).expect("nested groups");
        let b = other.lift(level).expect("nested groups");
        let order = a.order();
        Self {
            level,
            index: (a.index + b.index) % order,
            base: self.base,
        }
    }

    pub fn inverse(&self) -> Self {
        let order = self.order();
        Self {
            index: (order - self.index) % order,
            ..*self
        }
    }

    /// Whether the two elements are the same rotation, regardless of level.
    pub fn same_rotation(&self, other: &Self) -> bool {
        self.base == other.base && self.angle_fraction() == other.angle_fraction()
    }

    /// Number of quarter turns if the angle is a multiple of `pi/2`.
    pub fn quarter_turns(&self) -> Option<u8> {
        let (num, den) = self.angle_fraction();
        match den {
            1 => Some(0),
            2 => Some(2),
            4 => Some(num as u8),
            _ => None,
        }
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m{}.j{}", self.level, self.index)
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

/// All `m* B` elements of `G_m`, sorted by angle with the identity first.
pub fn group_elements(level: u32, base: u32) -> Result<Vec<GroupElement>> {
    let order = group_order(level, base)?;
    Ok((0..order)
        .map(|index| GroupElement { level, index, base })
        .collect())
}

/// Polar coordinates of a planar point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarPoint<T> {
    pub rho: T,
    /// Angle in `(-pi, pi]`.
    pub phi: T,
}

pub fn to_polar<T: Real>(x: T, y: T) -> PolarPoint<T> {
    let rho = x.hypot(y);
    if rho == T::zero() {
        return PolarPoint {
            rho,
            phi: T::zero(),
        };
    }
    let mut phi = y.atan2(x);
    if phi <= -T::PI() {
        phi = T::PI();
    }
    PolarPoint { rho, phi }
}

pub fn from_polar<T: Real>(p: PolarPoint<T>) -> (T, T) {
    let (s, c) = p.phi.sin_cos();
    (p.rho * c, p.rho * s)
}
