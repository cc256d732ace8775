//! Sampled rotational uniform covering frames on the centered DFT lattice.
//!
//! Atom masks are the Fourier-domain generators sampled at integer
//! frequencies `k` of an `N1 x N2` grid:
//!
//! * low pass: `eta_A(|k|)`
//! * band `(m, r)`: `eta_A(|k| - mA) * beta_{m,B}(phi(k) - angle(r))`
//!
//! Frequencies use axis 0 as the first coordinate, so `phi(k) = atan2(k2, k1)`.

use std::fmt;

use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::fft::freq_of_index;
use crate::math::{
    group_elements, group_order, pow2_ceil, sector_half_width, to_polar, wrap_angle, CutoffProfile,
    GroupElement, PolarPoint,
};
use crate::scalar::Real;

/// Parameters of a sampled frame: shell spacing `A`, base group order `B`,
/// grid shape and the highest radial level `M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameSpec<T> {
    a: T,
    b: u32,
    grid: (usize, usize),
    levels: u32,
}

impl<T: Real> FrameSpec<T> {
    pub fn new(a: T, b: u32, grid: (usize, usize), levels: u32) -> Result<Self> {
        if !a.is_finite() || a <= T::zero() {
            return Err(invalid("A", "must be positive and finite"));
        }
        if b == 0 {
            return Err(invalid("B", "must be at least 1"));
        }
        if levels == 0 {
            return Err(invalid("M", "must be at least 1"));
        }
        if grid.0 < 3 || grid.1 < 3 {
            return Err(invalid(
                "size",
                format!("grid must be at least 3x3, got {}x{}", grid.0, grid.1),
            ));
        }
        // Group orders at the top level must fit the index type.
        group_order(levels, b)?;
        Ok(Self { a, b, grid, levels })
    }

    /// Spec whose level count is the smallest `M` covering every lattice frequency.
    pub fn covering(a: T, b: u32, grid: (usize, usize)) -> Result<Self> {
        let probe = Self::new(a, b, grid, 1)?;
        let levels = probe.covering_level();
        Self::new(a, b, grid, levels)
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn b(&self) -> u32 {
        self.b
    }

    pub fn grid(&self) -> (usize, usize) {
        self.grid
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn with_levels(&self, levels: u32) -> Result<Self> {
        Self::new(self.a, self.b, self.grid, levels)
    }

    /// Largest `|k|` over the lattice.
    pub fn max_radius(&self) -> T {
        let h1 = T::from_usize_lossy(self.grid.0 / 2);
        let h2 = T::from_usize_lossy(self.grid.1 / 2);
        h1.hypot(h2)
    }

    /// `ceil(max |k| / A)`, at least 1.
    pub fn covering_level(&self) -> u32 {
        let q = (self.max_radius() / self.a).ceil();
        q.to_u32().unwrap_or(u32::MAX).max(1)
    }

    /// `A M >= max |k|`: the sampled partition of unity holds at every bin.
    pub fn is_full_cover(&self) -> bool {
        self.a * T::from_u32(self.levels).unwrap() >= self.max_radius()
    }

    /// `|G| = B`, the order of the invariance group.
    pub fn invariance_group(&self) -> Vec<GroupElement> {
        group_elements(1, self.b).expect("validated spec")
    }

    pub fn atom_count(&self) -> usize {
        1 + self.band_count()
    }

    pub fn band_count(&self) -> usize {
        (1..=self.levels)
            .map(|m| group_order(m, self.b).unwrap() as usize)
            .sum()
    }
}

/// Index of a frame generator: the low pass `f_0` or a band `(m, r)` with `r` in `G_m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AtomIndex {
    LowPass,
    Band(GroupElement),
}

impl AtomIndex {
    pub fn band(level: u32, base: u32, index: u64) -> Result<Self> {
        Ok(Self::Band(GroupElement::new(level, base, index)?))
    }

    pub fn level(&self) -> Option<u32> {
        match self {
            AtomIndex::LowPass => None,
            AtomIndex::Band(r) => Some(r.level()),
        }
    }

    pub fn rotation(&self) -> Option<GroupElement> {
        match self {
            AtomIndex::LowPass => None,
            AtomIndex::Band(r) => Some(*r),
        }
    }

    /// Left action `g (m, s) = (m, g s)` for `g` in a group nested in `G_m`.
    pub fn rotate_by(&self, g: &GroupElement) -> Self {
        match self {
            AtomIndex::LowPass => AtomIndex::LowPass,
            AtomIndex::Band(s) => {
                debug_assert!(g.level() <= s.level());
                AtomIndex::Band(g.compose(s))
            }
        }
    }
}

impl fmt::Display for AtomIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AtomIndex::LowPass => write!(f, "f0"),
            AtomIndex::Band(r) => write!(f, "{r}"),
        }
    }
}

/// All indices of the truncated family: the low pass followed by every
/// `(m, r)`, `1 <= m <= M`, sorted by level then angle.
pub fn index_set<T: Real>(spec: &FrameSpec<T>) -> Vec<AtomIndex> {
    let mut out = Vec::with_capacity(spec.atom_count());
    out.push(AtomIndex::LowPass);
    for m in 1..=spec.levels {
        out.extend(
            group_elements(m, spec.b)
                .unwrap()
                .into_iter()
                .map(AtomIndex::Band),
        );
    }
    out
}

/// One band index per coset of `G` in `G_m`, for each level `m <= M`.
///
/// Representatives are the angle indices `0 .. m*`; their `G`-orbits tile
/// the band part of [`index_set`].
pub fn coset_representatives<T: Real>(spec: &FrameSpec<T>) -> Vec<AtomIndex> {
    let mut out = Vec::new();
    for m in 1..=spec.levels {
        let star = pow2_ceil(u64::from(m)).unwrap();
        for j in 0..star {
            out.push(AtomIndex::band(m, spec.b, j).unwrap());
        }
    }
    out
}

/// Smallest lattice box containing the nonzero samples of a mask, in
/// centered frequency coordinates. `size` counts lattice points per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundingBox {
    pub origin: (isize, isize),
    pub size: (usize, usize),
}

impl BoundingBox {
    pub fn volume(&self) -> usize {
        self.size.0 * self.size.1
    }

    pub fn contains(&self, k: (isize, isize)) -> bool {
        k.0 >= self.origin.0
            && k.1 >= self.origin.1
            && k.0 < self.origin.0 + self.size.0 as isize
            && k.1 < self.origin.1 + self.size.1 as isize
    }
}

/// Sampled Fourier mask of one frame generator.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralAtom<T> {
    index: AtomIndex,
    /// Natural DFT order, same shape as the grid.
    mask: Array2<T>,
    bbox: BoundingBox,
    empty: bool,
}

impl<T: Real> SpectralAtom<T> {
    pub fn index(&self) -> AtomIndex {
        self.index
    }

    pub fn mask(&self) -> &Array2<T> {
        &self.mask
    }

    /// Mask sample at centered frequency `k`; zero off the lattice.
    pub fn at(&self, k: (isize, isize)) -> T {
        let (n1, n2) = self.mask.dim();
        if !in_lattice(k.0, n1) || !in_lattice(k.1, n2) {
            return T::zero();
        }
        self.mask[[
            crate::fft::index_of_freq(k.0, n1),
            crate::fft::index_of_freq(k.1, n2),
        ]]
    }

    pub fn bbox(&self) -> BoundingBox {
        self.bbox
    }

    /// No lattice point falls inside the atom's support.
    pub fn is_empty(&self) -> bool {
        self.empty
    }

    pub fn energy(&self) -> T {
        self.mask.iter().map(|v| *v * *v).sum()
    }
}

fn in_lattice(k: isize, n: usize) -> bool {
    let lo = -((n / 2) as isize);
    let hi = n.div_ceil(2) as isize - 1;
    (lo..=hi).contains(&k)
}

/// Evaluates band masks with the rotation split into an exact lattice part
/// (multiples of a quarter or half turn, applied to the integer frequency)
/// and a residual angle, so masks related by lattice rotations agree
/// bit-for-bit.
struct BandEvaluator<T> {
    radial: CutoffProfile<T>,
    angular: Option<CutoffProfile<T>>,
    center: T,
    order: u64,
    lattice_turns: u64,
    quarter_steps: u8,
    residual: T,
}

impl<T: Real> BandEvaluator<T> {
    fn new(spec: &FrameSpec<T>, r: &GroupElement) -> Self {
        let order = r.order();
        let turns = gcd4(order);
        let per_turn = order / turns;
        let q = r.index() / per_turn;
        let j_res = r.index() % per_turn;
        let quarter_steps = ((q * (4 / turns)) % 4) as u8;
        let residual = T::TAU() * T::from_u64(j_res).unwrap() / T::from_u64(order).unwrap();
        let angular = if order == 1 {
            None
        } else {
            Some(CutoffProfile::new(sector_half_width(r.level(), r.base()).unwrap()).unwrap())
        };
        Self {
            radial: CutoffProfile::new(spec.a).unwrap(),
            angular,
            center: spec.a * T::from_u32(r.level()).unwrap(),
            order,
            lattice_turns: turns,
            quarter_steps,
            residual,
        }
    }

    fn value(&self, k1: isize, k2: isize) -> T {
        let x = T::from_isize_lossy(k1);
        let y = T::from_isize_lossy(k2);
        let rho = x.hypot(y);
        let radial = self.radial.value(rho - self.center);
        if radial == T::zero() {
            return T::zero();
        }
        let Some(angular) = &self.angular else {
            return radial;
        };
        let (u, v) = rotate_quarter_inverse(k1, k2, self.quarter_steps);
        let phi = to_polar(T::from_isize_lossy(u), T::from_isize_lossy(v)).phi;
        let rel = wrap_angle(phi - self.residual);
        radial * angular.value(rel)
    }
}

fn gcd4(order: u64) -> u64 {
    if order.is_multiple_of(4) {
        4
    } else if order.is_multiple_of(2) {
        2
    } else {
        1
    }
}

/// Apply the inverse of `steps` counter-clockwise quarter turns to `(k1, k2)`.
pub(crate) fn rotate_quarter_inverse(k1: isize, k2: isize, steps: u8) -> (isize, isize) {
    match steps % 4 {
        0 => (k1, k2),
        1 => (k2, -k1),
        2 => (-k1, -k2),
        _ => (-k2, k1),
    }
}

/// Sample one generator's mask over the grid of `spec`.
pub fn build_atom<T: Real>(spec: &FrameSpec<T>, idx: AtomIndex) -> SpectralAtom<T> {
    let (n1, n2) = spec.grid;
    let mask = match idx {
        AtomIndex::LowPass => {
            let radial = CutoffProfile::new(spec.a).unwrap();
            Array2::from_shape_fn((n1, n2), |(i, j)| {
                let k1 = T::from_isize_lossy(freq_of_index(i, n1));
                let k2 = T::from_isize_lossy(freq_of_index(j, n2));
                radial.value(k1.hypot(k2))
            })
        }
        AtomIndex::Band(r) => {
            assert_eq!(r.base(), spec.b, "atom rotation from a different family");
            let eval = BandEvaluator::new(spec, &r);
            debug_assert!(eval.order >= eval.lattice_turns);
            Array2::from_shape_fn((n1, n2), |(i, j)| {
                eval.value(freq_of_index(i, n1), freq_of_index(j, n2))
            })
        }
    };
    let (bbox, empty) = support_box(&mask);
    SpectralAtom {
        index: idx,
        mask,
        bbox,
        empty,
    }
}

fn support_box<T: Real>(mask: &Array2<T>) -> (BoundingBox, bool) {
    let (n1, n2) = mask.dim();
    let mut lo = (isize::MAX, isize::MAX);
    let mut hi = (isize::MIN, isize::MIN);
    for ((i, j), v) in mask.indexed_iter() {
        if *v != T::zero() {
            let k = (freq_of_index(i, n1), freq_of_index(j, n2));
            lo = (lo.0.min(k.0), lo.1.min(k.1));
            hi = (hi.0.max(k.0), hi.1.max(k.1));
        }
    }
    if lo.0 > hi.0 {
        return (
            BoundingBox {
                origin: (0, 0),
                size: (1, 1),
            },
            true,
        );
    }
    (
        BoundingBox {
            origin: lo,
            size: ((hi.0 - lo.0 + 1) as usize, (hi.1 - lo.1 + 1) as usize),
        },
        false,
    )
}

/// Deviation of the sampled frame condition from its ideal values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionReport<T> {
    /// `max |sum_p mask_p(k)^2 - 1|` over `|k| <= A M`.
    pub max_dev_inside: T,
    /// `max sum_p mask_p(k)^2` over `|k| >= A (M + 1)`.
    pub max_leak_outside: T,
    pub inside_points: usize,
    pub outside_points: usize,
}

/// An immutable, fully sampled truncated frame.
#[derive(Debug, Clone)]
pub struct FrameInstance<T> {
    spec: FrameSpec<T>,
    atoms: Vec<SpectralAtom<T>>,
    partition: PartitionReport<T>,
}

impl<T: Real> FrameInstance<T> {
    pub fn spec(&self) -> &FrameSpec<T> {
        &self.spec
    }

    /// Low pass first, then bands by `(m, angle index)`.
    pub fn atoms(&self) -> &[SpectralAtom<T>] {
        &self.atoms
    }

    pub fn low_pass(&self) -> &SpectralAtom<T> {
        &self.atoms[0]
    }

    pub fn bands(&self) -> &[SpectralAtom<T>] {
        &self.atoms[1..]
    }

    /// Bands with level at most `m`; a prefix of [`Self::bands`].
    pub fn bands_up_to(&self, m: u32) -> &[SpectralAtom<T>] {
        let count: usize = (1..=m.min(self.spec.levels))
            .map(|l| group_order(l, self.spec.b).unwrap() as usize)
            .sum();
        &self.atoms[1..1 + count]
    }

    pub fn partition(&self) -> PartitionReport<T> {
        self.partition
    }

    pub fn is_full_cover(&self) -> bool {
        self.spec.is_full_cover()
    }

    /// Position of `idx` in [`Self::atoms`].
    pub fn position(&self, idx: &AtomIndex) -> Option<usize> {
        match idx {
            AtomIndex::LowPass => Some(0),
            AtomIndex::Band(r) => {
                if r.level() > self.spec.levels || r.base() != self.spec.b {
                    return None;
                }
                let before: u64 = (1..r.level())
                    .map(|l| group_order(l, self.spec.b).unwrap())
                    .sum();
                Some(1 + (before + r.index()) as usize)
            }
        }
    }

    pub fn atom(&self, idx: &AtomIndex) -> Option<&SpectralAtom<T>> {
        self.position(idx).map(|p| &self.atoms[p])
    }
}

/// Build every atom of `spec`. A spec without full cover is accepted; its
/// partition report shows where the frame condition falls short.
pub fn build_frame<T: Real>(spec: &FrameSpec<T>) -> FrameInstance<T> {
    let atoms: Vec<_> = index_set(spec)
        .into_par_iter()
        .map(|idx| build_atom(spec, idx))
        .collect();
    let partition = partition_of(spec, &atoms);
    FrameInstance {
        spec: *spec,
        atoms,
        partition,
    }
}

/// Recompute the sampled frame condition on the lattice.
pub fn verify_partition<T: Real>(frame: &FrameInstance<T>) -> PartitionReport<T> {
    partition_of(&frame.spec, &frame.atoms)
}

fn partition_of<T: Real>(spec: &FrameSpec<T>, atoms: &[SpectralAtom<T>]) -> PartitionReport<T> {
    let (n1, n2) = spec.grid;
    let mut total = Array2::<T>::zeros((n1, n2));
    for atom in atoms {
        total.zip_mut_with(&atom.mask, |t, v| *t = *t + *v * *v);
    }
    let inner = spec.a * T::from_u32(spec.levels).unwrap();
    let outer = spec.a * T::from_u32(spec.levels + 1).unwrap();
    let mut report = PartitionReport {
        max_dev_inside: T::zero(),
        max_leak_outside: T::zero(),
        inside_points: 0,
        outside_points: 0,
    };
    for ((i, j), s) in total.indexed_iter() {
        let k1 = T::from_isize_lossy(freq_of_index(i, n1));
        let k2 = T::from_isize_lossy(freq_of_index(j, n2));
        let rho = k1.hypot(k2);
        if rho <= inner {
            report.inside_points += 1;
            report.max_dev_inside = report.max_dev_inside.max((*s - T::one()).abs());
        }
        if rho >= outer {
            report.outside_points += 1;
            report.max_leak_outside = report.max_leak_outside.max(*s);
        }
    }
    report
}

/// Numerical diameter of the wedge `W_m = {|rho - mA| <= A, |phi| <= B_m}`,
/// from a dense sampling of its boundary.
pub fn wedge_diameter<T: Real>(spec: &FrameSpec<T>, m: u32) -> Result<T> {
    let order = group_order(m, spec.b)?;
    if order < 4 {
        return Err(invalid(
            "m",
            format!("wedge diameter needs m* B >= 4, got {order}"),
        ));
    }
    let half: T = sector_half_width(m, spec.b)?;
    let a = spec.a;
    let mf = T::from_u32(m).unwrap();
    let r_in = a * (mf - T::one());
    let r_out = a * (mf + T::one());
    const SAMPLES: usize = 256;
    let mut pts = Vec::with_capacity(4 * SAMPLES);
    let step = |i: usize| T::from_usize_lossy(i) / T::from_usize_lossy(SAMPLES - 1);
    for i in 0..SAMPLES {
        let t = step(i);
        let phi = -half + (half + half) * t;
        let rho = r_in + (r_out - r_in) * t;
        for (r, p) in [(r_in, phi), (r_out, phi), (rho, half), (rho, -half)] {
            let (s, c) = p.sin_cos();
            pts.push((r * c, r * s));
        }
    }
    let mut best = T::zero();
    for (i, p) in pts.iter().enumerate() {
        for q in &pts[i + 1..] {
            best = best.max((p.0 - q.0).hypot(p.1 - q.1));
        }
    }
    Ok(best)
}

/// Per-level diameter bound from the two coordinate estimates
/// `2A + 2 pi^2 A m / (B^2 m*^2)` and `4 pi A (m + 1) / (B m*)`.
pub fn wedge_diameter_bound<T: Real>(spec: &FrameSpec<T>, m: u32) -> Result<T> {
    let star = T::from_u64(pow2_ceil(u64::from(m))?).unwrap();
    let mf = T::from_u32(m).unwrap();
    let b = T::from_u32(spec.b).unwrap();
    let a = spec.a;
    let two = T::lit(2.0);
    let pi = T::PI();
    let dx = two * a + two * pi * pi * a / (b * b) * mf / (star * star);
    let dy = two * two * pi * a / b * (mf + T::one()) / star;
    Ok(dx.hypot(dy))
}

/// Level-independent bound `sqrt((2A + 2 pi^2 A / B^2)^2 + (8 pi A / B)^2)`.
pub fn wedge_diameter_uniform_bound<T: Real>(spec: &FrameSpec<T>) -> T {
    let b = T::from_u32(spec.b).unwrap();
    let a = spec.a;
    let pi = T::PI();
    let dx = T::lit(2.0) * a + T::lit(2.0) * pi * pi * a / (b * b);
    let dy = T::lit(8.0) * pi * a / b;
    dx.hypot(dy)
}

/// Mask-weighted spectral centroid of a band atom, in polar form.
pub fn direction_diagnostic<T: Real>(atom: &SpectralAtom<T>) -> Result<PolarPoint<T>> {
    if atom.index == AtomIndex::LowPass {
        return Err(invalid("atom", "direction is defined for band atoms only"));
    }
    if atom.empty {
        return Err(Error::EmptyMask(atom.index.to_string()));
    }
    let (n1, n2) = atom.mask.dim();
    let (mut w, mut s1, mut s2) = (T::zero(), T::zero(), T::zero());
    for ((i, j), v) in atom.mask.indexed_iter() {
        if *v != T::zero() {
            w = w + *v;
            s1 = s1 + *v * T::from_isize_lossy(freq_of_index(i, n1));
            s2 = s2 + *v * T::from_isize_lossy(freq_of_index(j, n2));
        }
    }
    Ok(to_polar(s1 / w, s2 / w))
}
