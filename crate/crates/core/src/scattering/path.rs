//! Scattering paths over the truncated index set and their `G`-orbits.

use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::frame::{coset_representatives, index_set, AtomIndex, FrameSpec};
use crate::math::GroupElement;
use crate::scalar::Real;

/// Default bound on the number of maps a transform may produce.
pub const DEFAULT_CAP: u64 = 1_000_000;

/// A sequence of band indices `(p_1, ..., p_k)`, applied first to last.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ScatteringPath(Vec<AtomIndex>);

impl ScatteringPath {
    pub fn new(steps: Vec<AtomIndex>) -> Result<Self> {
        if steps.is_empty() {
            return Err(invalid("path", "must contain at least one band"));
        }
        if steps.contains(&AtomIndex::LowPass) {
            return Err(invalid("path", "entries must be band atoms"));
        }
        Ok(Self(steps))
    }

    pub fn steps(&self) -> &[AtomIndex] {
        &self.0
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    /// Left action `r (p_1, ..., p_k) = (r p_1, ..., r p_k)`.
    pub fn rotate_by(&self, r: &GroupElement) -> Self {
        Self(self.0.iter().map(|p| p.rotate_by(r)).collect())
    }
}

impl fmt::Display for ScatteringPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("-")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

/// `sum_{k=1}^{K} width^k`, or an error when above `cap`.
pub(crate) fn check_cap(width: usize, depth: u32, cap: u64) -> Result<u128> {
    let mut total: u128 = 0;
    let mut layer: u128 = 1;
    for _ in 0..depth {
        layer = layer.saturating_mul(width as u128);
        total = total.saturating_add(layer);
    }
    if total > u128::from(cap) {
        return Err(Error::CapExceeded {
            requested: total,
            cap,
        });
    }
    Ok(total)
}

fn validate<T: Real>(spec: &FrameSpec<T>, levels: u32, depth: u32) -> Result<FrameSpec<T>> {
    if depth == 0 {
        return Err(invalid("K", "must be at least 1"));
    }
    spec.with_levels(levels)
}

fn expand(
    layers: &mut Vec<Vec<ScatteringPath>>,
    first: &[AtomIndex],
    all: &[AtomIndex],
    depth: u32,
) {
    let mut current: Vec<Vec<AtomIndex>> = first.iter().map(|p| vec![*p]).collect();
    for _ in 0..depth {
        layers.push(current.iter().cloned().map(ScatteringPath).collect());
        if layers.len() == depth as usize {
            break;
        }
        current = current
            .iter()
            .flat_map(|prefix| {
                all.iter().map(move |p| {
                    let mut next = prefix.clone();
                    next.push(*p);
                    next
                })
            })
            .collect();
    }
}

/// Layers `G[M]^k`, `k = 1..=K`, each in lexicographic order of the band list.
pub fn enumerate_paths<T: Real>(
    spec: &FrameSpec<T>,
    levels: u32,
    depth: u32,
    cap: u64,
) -> Result<Vec<Vec<ScatteringPath>>> {
    let spec = validate(spec, levels, depth)?;
    let bands: Vec<AtomIndex> = index_set(&spec).into_iter().skip(1).collect();
    check_cap(bands.len(), depth, cap)?;
    let mut layers = Vec::with_capacity(depth as usize);
    expand(&mut layers, &bands, &bands, depth);
    Ok(layers)
}

/// Layers `Q[M, k] = G_0[M] x G[M]^{k-1}`: the first entry runs over coset
/// representatives, the rest over every band.
pub fn enumerate_coset_paths<T: Real>(
    spec: &FrameSpec<T>,
    levels: u32,
    depth: u32,
    cap: u64,
) -> Result<Vec<Vec<ScatteringPath>>> {
    let spec = validate(spec, levels, depth)?;
    let bands: Vec<AtomIndex> = index_set(&spec).into_iter().skip(1).collect();
    check_cap(bands.len(), depth, cap)?;
    let reps = coset_representatives(&spec);
    let mut layers = Vec::with_capacity(depth as usize);
    expand(&mut layers, &reps, &bands, depth);
    Ok(layers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn spec(b: u32) -> FrameSpec<f64> {
        FrameSpec::new(2.0, b, (33, 33), 4).unwrap()
    }

    #[test]
    fn layer_sizes() {
        let l = enumerate_paths(&spec(8), 4, 2, DEFAULT_CAP).unwrap();
        assert_eq!(l.iter().map(Vec::len).collect::<Vec<_>>(), [88, 7744]);
        let l = enumerate_paths(&spec(1), 1, 3, DEFAULT_CAP).unwrap();
        assert_eq!(l.iter().map(Vec::len).collect::<Vec<_>>(), [1, 1, 1]);
        let q = enumerate_coset_paths(&spec(8), 4, 2, DEFAULT_CAP).unwrap();
        assert_eq!(q.iter().map(Vec::len).collect::<Vec<_>>(), [11, 968]);
    }

    #[test]
    fn lexicographic_order() {
        let l = enumerate_paths(&spec(2), 2, 2, DEFAULT_CAP).unwrap();
        let mut sorted = l[1].clone();
        sorted.sort();
        assert_eq!(sorted, l[1]);
        assert_eq!(l[1][0].to_string(), "m1.j0-m1.j0");
    }

    #[test]
    fn cap_is_enforced() {
        let err = enumerate_paths(&spec(8), 4, 3, 1000).unwrap_err();
        assert!(matches!(err, Error::CapExceeded { .. }));
        assert!(enumerate_coset_paths(&spec(8), 4, 2, 100).is_err());
        assert!(enumerate_paths(&spec(8), 4, 0, 100).is_err());
    }

    #[test]
    fn orbits_of_coset_paths_tile_all_paths() {
        for b in [2u32, 4, 8] {
            for m in 1..=3u32 {
                let s = spec(b);
                let all = enumerate_paths(&s, m, 2, DEFAULT_CAP).unwrap();
                let reps = enumerate_coset_paths(&s, m, 2, DEFAULT_CAP).unwrap();
                let group = s.invariance_group();
                for k in 0..2 {
                    let mut seen = HashSet::new();
                    for q in &reps[k] {
                        for r in &group {
                            assert!(seen.insert(q.rotate_by(r)), "duplicate for b={b} m={m}");
                        }
                    }
                    let full: HashSet<_> = all[k].iter().cloned().collect();
                    assert_eq!(seen, full);
                }
            }
        }
    }

    #[test]
    fn path_validation() {
        assert!(ScatteringPath::new(vec![]).is_err());
        assert!(ScatteringPath::new(vec![AtomIndex::LowPass]).is_err());
    }
}
