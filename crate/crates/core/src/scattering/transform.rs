//! Propagation `U[p]F = |F (*) f_p|`, smoothing by `f_0`, and the truncated
//! plain and rotational scattering transforms.
//!
//! Convolutions are circular: `F (*) f_p = idft(dft(F) * mask_p)`.

use ndarray::Array2;
use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::fft::{Domain, Fft2, GridArray};
use crate::frame::{coset_representatives, AtomIndex, FrameInstance, SpectralAtom};
use crate::math::GroupElement;
use crate::scalar::Real;

use super::path::{check_cap, ScatteringPath, DEFAULT_CAP};
use super::rotate::{check_exact_group, rotate_bilinear, rotate_quarter, RotationMode};

/// Radial level `M`, depth `K` and the bound on the number of computed maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Truncation {
    pub levels: u32,
    pub depth: u32,
    pub cap: u64,
}

impl Truncation {
    pub fn new(levels: u32, depth: u32) -> Self {
        Self {
            levels,
            depth,
            cap: DEFAULT_CAP,
        }
    }

    pub fn with_cap(mut self, cap: u64) -> Self {
        self.cap = cap;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    Plain,
    Rotational,
}

impl FeatureKind {
    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::Plain => "plain",
            FeatureKind::Rotational => "rotational",
        }
    }
}

/// Output maps of a truncated transform in layout order.
///
/// The first map is the smoothed input (`k0`); path maps follow layer by
/// layer, identified as `k<depth>/<path>`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet<T> {
    pub kind: FeatureKind,
    pub levels: u32,
    pub depth: u32,
    pub layout: Vec<String>,
    pub maps: Vec<Array2<T>>,
}

impl<T: Real> FeatureSet<T> {
    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    /// Per-map squared Frobenius norms.
    pub fn map_energies(&self) -> Vec<T> {
        self.maps
            .iter()
            .map(|m| m.iter().map(|v| *v * *v).sum())
            .collect()
    }

    pub fn norm(&self) -> T {
        feature_norm(self)
    }

    pub fn map(&self, id: &str) -> Option<&Array2<T>> {
        self.layout
            .iter()
            .position(|l| l == id)
            .map(|i| &self.maps[i])
    }
}

/// `sqrt(sum_maps ||map||^2)`.
pub fn feature_norm<T: Real>(fs: &FeatureSet<T>) -> T {
    fs.map_energies().into_iter().sum::<T>().sqrt()
}

/// `sqrt(sum_maps ||a_map - b_map||^2)`; layouts must agree.
pub fn feature_distance<T: Real>(a: &FeatureSet<T>, b: &FeatureSet<T>) -> Result<T> {
    if a.kind != b.kind || a.layout != b.layout {
        return Err(Error::LayoutMismatch(format!(
            "{} set with {} maps vs {} set with {} maps",
            a.kind.name(),
            a.len(),
            b.kind.name(),
            b.len()
        )));
    }
    let mut total = T::zero();
    for (x, y) in a.maps.iter().zip(&b.maps) {
        if x.dim() != y.dim() {
            return Err(Error::ShapeMismatch {
                expected: x.dim(),
                found: y.dim(),
            });
        }
        total = total
            + x.iter()
                .zip(y)
                .map(|(u, v)| (*u - *v) * (*u - *v))
                .sum::<T>();
    }
    Ok(total.sqrt())
}

fn check_input<T: Real>(frame: &FrameInstance<T>, shape: (usize, usize)) -> Result<Fft2<T>> {
    let grid = frame.spec().grid();
    if shape != grid {
        return Err(Error::ShapeMismatch {
            expected: grid,
            found: shape,
        });
    }
    Ok(Fft2::new(grid))
}

fn apply_mask<T: Real>(spectrum: &Array2<Complex<T>>, mask: &Array2<T>) -> Array2<Complex<T>> {
    let mut out = spectrum.clone();
    out.zip_mut_with(mask, |c, m| *c = *c * *m);
    out
}

/// `F (*) f_p` for any atom, including the low pass.
pub fn filter<T: Real>(
    frame: &FrameInstance<T>,
    array: &GridArray<T>,
    idx: &AtomIndex,
) -> Result<GridArray<T>> {
    array.expect_domain(Domain::Space)?;
    let plan = check_input(frame, array.shape())?;
    let atom = frame
        .atom(idx)
        .ok_or_else(|| invalid("atom", format!("{idx} is not part of this frame")))?;
    let mut work = array.values().clone();
    plan.forward_in_place(&mut work)?;
    let mut work = apply_mask(&work, atom.mask());
    plan.inverse_in_place(&mut work)?;
    Ok(GridArray::space(work))
}

/// `U[p]F = |F (*) f_p|`, real and nonnegative.
pub fn propagate<T: Real>(
    frame: &FrameInstance<T>,
    array: &GridArray<T>,
    idx: &AtomIndex,
) -> Result<Array2<T>> {
    Ok(filter(frame, array, idx)?.values().mapv(|c| c.norm()))
}

/// `F (*) f_0`.
pub fn smooth<T: Real>(frame: &FrameInstance<T>, array: &GridArray<T>) -> Result<GridArray<T>> {
    filter(frame, array, &AtomIndex::LowPass)
}

/// `||F (*) f_p||^2` for every atom of the frame, in frame order.
pub fn filter_energies<T: Real>(frame: &FrameInstance<T>, array: &GridArray<T>) -> Result<Vec<T>> {
    array.expect_domain(Domain::Space)?;
    let plan = check_input(frame, array.shape())?;
    let mut spectrum = array.values().clone();
    plan.forward_in_place(&mut spectrum)?;
    frame
        .atoms()
        .par_iter()
        .map(|atom| {
            let mut work = apply_mask(&spectrum, atom.mask());
            plan.inverse_in_place(&mut work)?;
            Ok(work.iter().map(|c| c.norm_sqr()).sum())
        })
        .collect()
}

/// Depth-first evaluation of the path tree below one first-layer band.
struct Cascade<'a, T: Real> {
    plan: &'a Fft2<T>,
    low_pass: &'a Array2<T>,
    bands: &'a [SpectralAtom<T>],
    depth: usize,
}

impl<'a, T: Real> Cascade<'a, T> {
    fn smooth_spectrum(&self, spectrum: &Array2<Complex<T>>) -> Result<Array2<T>> {
        let mut s = apply_mask(spectrum, self.low_pass);
        self.plan.inverse_in_place(&mut s)?;
        Ok(s.mapv(|c| c.re))
    }

    fn node(
        &self,
        parent: &Array2<Complex<T>>,
        band: usize,
        layer: usize,
        out: &mut [Vec<Array2<T>>],
    ) -> Result<()> {
        let mut work = apply_mask(parent, self.bands[band].mask());
        self.plan.inverse_in_place(&mut work)?;
        work.mapv_inplace(|c| Complex::new(c.norm(), T::zero()));
        self.plan.forward_in_place(&mut work)?;
        out[layer].push(self.smooth_spectrum(&work)?);
        if layer + 1 < self.depth {
            for child in 0..self.bands.len() {
                self.node(&work, child, layer + 1, out)?;
            }
        }
        Ok(())
    }
}

/// Smoothed input plus every path map, layer by layer in lexicographic order.
struct PlainMaps<T> {
    first: Array2<T>,
    layers: Vec<Vec<Array2<T>>>,
}

fn plain_maps<T: Real>(
    frame: &FrameInstance<T>,
    image: &Array2<T>,
    trunc: &Truncation,
) -> Result<PlainMaps<T>> {
    let plan = check_input(frame, image.dim())?;
    if trunc.levels == 0 {
        return Err(invalid("M", "must be at least 1"));
    }
    if trunc.depth == 0 {
        return Err(invalid("K", "must be at least 1"));
    }
    if trunc.levels > frame.spec().levels() {
        return Err(invalid(
            "M",
            format!(
                "frame was built with {} levels, {} requested",
                frame.spec().levels(),
                trunc.levels
            ),
        ));
    }
    let bands = frame.bands_up_to(trunc.levels);
    check_cap(bands.len(), trunc.depth, trunc.cap)?;
    let cascade = Cascade {
        plan: &plan,
        low_pass: frame.low_pass().mask(),
        bands,
        depth: trunc.depth as usize,
    };
    let root = plan.forward_real(image)?;
    let first = cascade.smooth_spectrum(&root)?;
    let subtrees: Vec<Vec<Vec<Array2<T>>>> = (0..bands.len())
        .into_par_iter()
        .map(|b| {
            let mut out = vec![Vec::new(); cascade.depth];
            cascade.node(&root, b, 0, &mut out)?;
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut layers: Vec<Vec<Array2<T>>> = vec![Vec::new(); cascade.depth];
    for subtree in subtrees {
        for (layer, maps) in layers.iter_mut().zip(subtree) {
            layer.extend(maps);
        }
    }
    Ok(PlainMaps { first, layers })
}

fn path_label<T: Real>(bands: &[SpectralAtom<T>], positions: &[usize]) -> String {
    let steps = positions.iter().map(|p| bands[*p].index()).collect();
    format!(
        "k{}/{}",
        positions.len(),
        ScatteringPath::new(steps).expect("bands only")
    )
}

/// Mixed-radix digits of `e` in base `width`, most significant first.
fn digits(mut e: usize, width: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = e % width;
        e /= width;
    }
    out
}

/// Truncated Fourier scattering: `{F (*) f_0} U {U[p]F (*) f_0 : p in G[M]^k, k <= K}`.
pub fn scatter_plain<T: Real>(
    frame: &FrameInstance<T>,
    image: &Array2<T>,
    trunc: Truncation,
) -> Result<FeatureSet<T>> {
    let maps = plain_maps(frame, image, &trunc)?;
    let bands = frame.bands_up_to(trunc.levels);
    let n = bands.len();
    let mut layout = vec!["k0".to_string()];
    let mut out = vec![maps.first];
    for (l, layer) in maps.layers.into_iter().enumerate() {
        for (e, map) in layer.into_iter().enumerate() {
            layout.push(path_label(bands, &digits(e, n, l + 1)));
            out.push(map);
        }
    }
    Ok(FeatureSet {
        kind: FeatureKind::Plain,
        levels: trunc.levels,
        depth: trunc.depth,
        layout,
        maps: out,
    })
}

struct Rotator {
    mode: RotationMode,
    group: Vec<GroupElement>,
}

impl Rotator {
    fn new(grid: (usize, usize), b: u32, mode: RotationMode) -> Result<Self> {
        if mode == RotationMode::Exact {
            check_exact_group(grid, b)?;
        }
        Ok(Self {
            mode,
            group: crate::math::group_elements(1, b)?,
        })
    }

    fn apply<T: Real>(&self, map: &Array2<T>, t: usize) -> Array2<T> {
        let r = &self.group[t];
        match self.mode {
            RotationMode::Exact => rotate_quarter(map, r.quarter_turns().expect("checked group")),
            RotationMode::Bilinear => rotate_bilinear(map, r.angle()),
        }
    }

    /// `sqrt(sum_t |maps(t)(r_t x)|^2)`.
    fn orbit_norm<T: Real>(&self, maps: impl Fn(usize) -> Array2<T>) -> Array2<T> {
        let mut acc: Option<Array2<T>> = None;
        for t in 0..self.group.len() {
            let m = self.apply(&maps(t), t);
            match &mut acc {
                None => acc = Some(m.mapv(|v| v * v)),
                Some(a) => a.zip_mut_with(&m, |s, v| *s = *s + *v * *v),
            }
        }
        let mut acc = acc.expect("group is nonempty");
        acc.mapv_inplace(|v| v.sqrt());
        acc
    }
}

/// Truncated rotational Fourier scattering.
///
/// First map: `|G|^{-1/2} (sum_r |(F (*) f_0)(r x)|^2)^{1/2}`. For each
/// coset path `q` in `Q[M, k]`: `(sum_r |(U[rq]F (*) f_0)(r x)|^2)^{1/2}`.
pub fn scatter_rotational<T: Real>(
    frame: &FrameInstance<T>,
    image: &Array2<T>,
    trunc: Truncation,
    mode: RotationMode,
) -> Result<FeatureSet<T>> {
    let spec = frame.spec();
    let rotator = Rotator::new(spec.grid(), spec.b(), mode)?;
    let maps = plain_maps(frame, image, &trunc)?;
    let bands = frame.bands_up_to(trunc.levels);
    let n = bands.len();

    // rot[t][pos]: position of r_t applied to band `pos`
    let rot: Vec<Vec<usize>> = rotator
        .group
        .iter()
        .map(|r| {
            bands
                .iter()
                .map(|a| {
                    frame
                        .position(&a.index().rotate_by(r))
                        .expect("orbit stays in frame")
                        - 1
                })
                .collect()
        })
        .collect();
    let reps: Vec<usize> = coset_representatives(&spec.with_levels(trunc.levels)?)
        .iter()
        .map(|q| frame.position(q).expect("representative in frame") - 1)
        .collect();

    let order = T::from_usize_lossy(rotator.group.len());
    let mut first = rotator.orbit_norm(|_| maps.first.clone());
    let weight = order.sqrt().recip();
    first.mapv_inplace(|v| v * weight);

    let mut layout = vec!["k0".to_string()];
    let mut out = vec![first];
    for (l, layer) in maps.layers.iter().enumerate() {
        let tail = n.pow(l as u32);
        let combos: Vec<(String, Array2<T>)> = (0..reps.len() * tail)
            .into_par_iter()
            .map(|e| {
                let mut q = vec![reps[e / tail]];
                q.extend(digits(e % tail, n, l));
                let map = rotator.orbit_norm(|t| {
                    let idx = q.iter().fold(0usize, |acc, p| acc * n + rot[t][*p]);
                    layer[idx].clone()
                });
                (path_label(bands, &q), map)
            })
            .collect();
        for (label, map) in combos {
            layout.push(label);
            out.push(map);
        }
    }
    Ok(FeatureSet {
        kind: FeatureKind::Rotational,
        levels: trunc.levels,
        depth: trunc.depth,
        layout,
        maps: out,
    })
}

/// Dispatch on the transform kind.
pub fn scatter<T: Real>(
    frame: &FrameInstance<T>,
    image: &Array2<T>,
    trunc: Truncation,
    kind: FeatureKind,
    mode: RotationMode,
) -> Result<FeatureSet<T>> {
    match kind {
        FeatureKind::Plain => scatter_plain(frame, image, trunc),
        FeatureKind::Rotational => scatter_rotational(frame, image, trunc, mode),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{build_frame, FrameSpec};
    use crate::reference::naive_filter;
    use rand::{Rng, SeedableRng};

    fn random(n: usize, seed: u64) -> Array2<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn((n, n), |_| rng.gen_range(-1.0..1.0))
    }

    fn frame(a: f64, b: u32, n: usize, m: u32) -> FrameInstance<f64> {
        build_frame(&FrameSpec::new(a, b, (n, n), m).unwrap())
    }

    fn energy(a: &Array2<f64>) -> f64 {
        a.iter().map(|v| v * v).sum()
    }

    #[test]
    fn propagate_zero_and_single_mode() {
        let fr = frame(2.0, 8, 17, 4);
        let idx = AtomIndex::band(2, 8, 0).unwrap();
        let z = GridArray::zeros((17, 17), Domain::Space);
        assert!(propagate(&fr, &z, &idx).unwrap().iter().all(|v| *v == 0.0));
        // mode at k0 = (4, 0), where band (2, e) has mask 1
        let f = GridArray::space(Array2::from_shape_fn((17, 17), |(x1, _)| {
            Complex::from_polar(0.75, std::f64::consts::TAU * 4.0 * x1 as f64 / 17.0)
        }));
        let u = propagate(&fr, &f, &idx).unwrap();
        assert!(u.iter().all(|v| (v - 0.75).abs() < 1e-12));
    }

    #[test]
    fn propagate_matches_naive_filter() {
        let fr = frame(1.5, 4, 9, 3);
        let f = GridArray::from_real(&random(9, 4));
        for atom in fr.atoms() {
            let fast = filter(&fr, &f, &atom.index()).unwrap();
            let slow = naive_filter(&f, atom.mask()).unwrap();
            let err = (fast.values() - slow.values())
                .iter()
                .fold(0.0f64, |m, c| m.max(c.norm()));
            assert!(err < 1e-12);
        }
    }

    #[test]
    fn smoothing_examples() {
        let fr = frame(2.0, 8, 17, 4);
        let c = GridArray::space(Array2::from_elem((17, 17), Complex::new(0.4, 0.0)));
        let s = smooth(&fr, &c).unwrap();
        assert!(s
            .values()
            .iter()
            .all(|v| (v - Complex::new(0.4, 0.0)).norm() < 1e-12));
        let f = GridArray::from_real(&random(17, 8));
        let mean = f.values().sum();
        assert!((smooth(&fr, &f).unwrap().values().sum() - mean).norm() < 1e-10);
        let hi = GridArray::space(Array2::from_shape_fn((17, 17), |(x1, x2)| {
            Complex::from_polar(
                1.0,
                std::f64::consts::TAU * (2.0 * x1 as f64 + x2 as f64) / 17.0,
            )
        }));
        assert!(smooth(&fr, &hi).unwrap().norm() < 1e-12);
    }

    #[test]
    fn one_layer_energy_conservation() {
        let s = FrameSpec::covering(2.0, 8, (17, 17)).unwrap();
        let fr = build_frame(&s);
        let f = GridArray::from_real(&random(17, 1));
        let total: f64 = filter_energies(&fr, &f).unwrap().iter().sum();
        assert!((total - f.norm_sqr()).abs() / f.norm_sqr() < 1e-10);
    }

    #[test]
    fn plain_layout_and_bounds() {
        let fr = frame(2.0, 4, 17, 3);
        let f = random(17, 2);
        let norm_f = energy(&f).sqrt();
        let s1 = scatter_plain(&fr, &f, Truncation::new(2, 1)).unwrap();
        let s2 = scatter_plain(&fr, &f, Truncation::new(2, 2)).unwrap();
        let s3 = scatter_plain(&fr, &f, Truncation::new(3, 2)).unwrap();
        assert_eq!(s1.len(), 1 + 12);
        assert_eq!(s2.len(), 1 + 12 + 144);
        assert_eq!(s2.layout[13], "k2/m1.j0-m1.j0");
        assert!(s1.norm() <= s2.norm() && s2.norm() <= s3.norm());
        assert!(s3.norm() <= norm_f + 1e-12);
        let z = scatter_plain(&fr, &Array2::zeros((17, 17)), Truncation::new(2, 2)).unwrap();
        assert!(z.maps.iter().all(|m| m.iter().all(|v| *v == 0.0)));
    }

    #[test]
    fn deep_paths_match_direct_composition() {
        let fr = frame(2.0, 4, 11, 2);
        let f = random(11, 6);
        let fs = scatter_plain(&fr, &f, Truncation::new(2, 2)).unwrap();
        let p1 = AtomIndex::band(2, 4, 3).unwrap();
        let p2 = AtomIndex::band(1, 4, 1).unwrap();
        let u1 = propagate(&fr, &GridArray::from_real(&f), &p1).unwrap();
        let u2 = propagate(&fr, &GridArray::from_real(&u1), &p2).unwrap();
        let want = smooth(&fr, &GridArray::from_real(&u2)).unwrap();
        let got = fs.map("k2/m2.j3-m1.j1").unwrap();
        let err = got
            .iter()
            .zip(want.values())
            .fold(0.0f64, |m, (g, w)| m.max((g - w.re).abs()));
        assert!(err < 1e-12);
    }

    #[test]
    fn rotational_norm_equals_plain() {
        let fr = frame(2.0, 4, 17, 3);
        let f = random(17, 3);
        let t = Truncation::new(3, 2);
        let plain = scatter_plain(&fr, &f, t).unwrap();
        let rot = scatter_rotational(&fr, &f, t, RotationMode::Exact).unwrap();
        assert_eq!(rot.len(), 1 + 7 + 7 * 28);
        assert!((plain.norm() - rot.norm()).abs() / plain.norm() < 1e-10);
    }

    #[test]
    fn rotational_is_invariant() {
        for b in [1u32, 2, 4] {
            let fr = frame(2.0, b, 13, 3);
            let f = random(13, 10 + b as u64);
            let t = Truncation::new(2, 2);
            let base = scatter_rotational(&fr, &f, t, RotationMode::Exact).unwrap();
            for r in fr.spec().invariance_group() {
                let g = crate::scattering::rotate_array(&f, &r, RotationMode::Exact).unwrap();
                let turned = scatter_rotational(&fr, &g, t, RotationMode::Exact).unwrap();
                for (a, c) in base.maps.iter().zip(&turned.maps) {
                    let scale = energy(a).sqrt().max(1e-300);
                    let err = energy(&(a - c)).sqrt() / scale;
                    assert!(err < 1e-8, "b={b} r={r} err={err}");
                }
            }
        }
    }

    #[test]
    fn rotational_exact_mode_requires_lattice_group() {
        let fr = frame(2.0, 8, 13, 2);
        let f = random(13, 1);
        assert!(matches!(
            scatter_rotational(&fr, &f, Truncation::new(1, 1), RotationMode::Exact),
            Err(Error::RotationUnsupported(_))
        ));
        assert!(scatter_rotational(&fr, &f, Truncation::new(1, 1), RotationMode::Bilinear).is_ok());
    }

    #[test]
    fn equivariance_of_propagation() {
        // smooth(U[p] F_r) = (smooth(U[r p] F))_r
        let fr = frame(2.0, 4, 13, 3);
        let f = random(13, 21);
        for r in fr.spec().invariance_group() {
            let fr_r = crate::scattering::rotate_array(&f, &r, RotationMode::Exact).unwrap();
            for atom in fr.bands() {
                let p = atom.index();
                let lhs = smooth(
                    &fr,
                    &GridArray::from_real(
                        &propagate(&fr, &GridArray::from_real(&fr_r), &p).unwrap(),
                    ),
                )
                .unwrap();
                let u = propagate(&fr, &GridArray::from_real(&f), &p.rotate_by(&r)).unwrap();
                let rhs = smooth(&fr, &GridArray::from_real(&u))
                    .unwrap()
                    .values()
                    .mapv(|c| c.re);
                let rhs = crate::scattering::rotate_array(&rhs, &r, RotationMode::Exact).unwrap();
                let err = lhs
                    .values()
                    .iter()
                    .zip(&rhs)
                    .fold(0.0f64, |m, (a, b)| m.max((a.re - b).abs()));
                assert!(err < 1e-10, "r={r} p={p}");
            }
        }
    }

    #[test]
    fn distance_properties() {
        let fr = frame(2.0, 4, 11, 2);
        let t = Truncation::new(2, 1);
        let sets: Vec<_> = (0..3)
            .map(|s| scatter_plain(&fr, &random(11, 30 + s), t).unwrap())
            .collect();
        assert_eq!(feature_distance(&sets[0], &sets[0]).unwrap(), 0.0);
        let d01 = feature_distance(&sets[0], &sets[1]).unwrap();
        let d12 = feature_distance(&sets[1], &sets[2]).unwrap();
        let d02 = feature_distance(&sets[0], &sets[2]).unwrap();
        assert!(d02 <= d01 + d12 + 1e-12);
        let other = scatter_plain(&fr, &random(11, 1), Truncation::new(1, 1)).unwrap();
        assert!(matches!(
            feature_distance(&sets[0], &other),
            Err(Error::LayoutMismatch(_))
        ));
    }

    #[test]
    fn cap_and_level_guards() {
        let fr = frame(2.0, 8, 17, 4);
        let f = random(17, 0);
        assert!(matches!(
            scatter_plain(&fr, &f, Truncation::new(4, 3).with_cap(10_000)),
            Err(Error::CapExceeded { .. })
        ));
        assert!(scatter_plain(&fr, &f, Truncation::new(5, 1)).is_err());
        assert!(scatter_plain(&fr, &random(9, 0), Truncation::new(1, 1)).is_err());
    }
}
