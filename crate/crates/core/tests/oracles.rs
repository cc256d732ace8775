mod common;

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use common::{random_complex, random_real};
use ndarray::Array2;
use rufst::reference::{analyze_direct, coefficient_distance, naive_dft, naive_filter};
use rufst::{
    analyze, build_frame, dft, filter, freq_of_index, group_elements, index_set, AtomIndex, Grid,
    Spec,
};

// Straight transcription of the cutoff formulas, independent of the library.
fn step(t: f64) -> f64 {
    let psi = |u: f64| if u > 0.0 { (-1.0 / u).exp() } else { 0.0 };
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        psi(t) / (psi(t) + psi(1.0 - t))
    }
}

fn eta(a: f64, x: f64) -> f64 {
    if x.abs() >= a {
        0.0
    } else {
        (FRAC_PI_2 * step(x.abs() / a)).cos()
    }
}

fn oracle_mask(a: f64, idx: &AtomIndex, k: (f64, f64)) -> f64 {
    let rho = k.0.hypot(k.1);
    match idx {
        AtomIndex::LowPass => eta(a, rho),
        AtomIndex::Band(r) => {
            let m = r.level() as f64;
            let order = r.order() as f64;
            let radial = eta(a, rho - m * a);
            if order == 1.0 {
                return radial;
            }
            let mut phi = k.1.atan2(k.0) - TAU * r.index() as f64 / order;
            phi = phi.rem_euclid(TAU);
            if phi > PI {
                phi -= TAU;
            }
            radial * eta(TAU / order, phi)
        }
    }
}

#[test]
fn masks_match_direct_formula() {
    for (a, b, n) in [(2.0, 8u32, 25usize), (1.5, 3, 21), (2.5, 4, 24)] {
        let spec = Spec::covering(a, b, (n, n)).unwrap();
        let frame = build_frame(&spec);
        let mut worst = 0.0f64;
        for atom in frame.atoms() {
            for ((i, j), v) in atom.mask().indexed_iter() {
                let k = (freq_of_index(i, n) as f64, freq_of_index(j, n) as f64);
                worst = worst.max((v - oracle_mask(a, &atom.index(), k)).abs());
            }
        }
        assert!(worst < 1e-12, "A={a} B={b} N={n}: {worst}");
    }
}

#[test]
fn shell_counts_follow_the_tiling_figure() {
    let spec = Spec::new(2.0, 8, (33, 33), 4).unwrap();
    let idx = index_set(&spec);
    let per_level: Vec<usize> = (1..=4)
        .map(|m| idx.iter().filter(|p| p.level() == Some(m)).count())
        .collect();
    assert_eq!(per_level, [8, 16, 32, 32]);
    let angles: Vec<f64> = group_elements(1, 8)
        .unwrap()
        .iter()
        .map(|g| g.angle())
        .collect();
    for (k, t) in angles.iter().enumerate() {
        assert!((t - k as f64 * PI / 4.0).abs() < 1e-15);
    }
}

#[test]
fn fast_dft_matches_direct_sum() {
    for shape in [(9, 9), (8, 5), (17, 17)] {
        let f = Grid::space(random_complex(shape, 3));
        let fast = dft(&f).unwrap();
        let slow = naive_dft(&f).unwrap();
        let err = (fast.values() - slow.values())
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(err / slow.norm() < 1e-12);
    }
}

#[test]
fn analysis_matches_inner_products() {
    let frame = build_frame(&Spec::covering(2.0, 8, (17, 17)).unwrap());
    for seed in 0..5 {
        let f = Grid::space(random_complex((17, 17), seed));
        let d = coefficient_distance(
            &analyze(&frame, &f).unwrap(),
            &analyze_direct(&frame, &f).unwrap(),
        )
        .unwrap();
        assert!(d < 1e-10, "seed {seed}: {d}");
    }
    // non-covering frame with partial atoms
    let frame = build_frame(&Spec::new(1.5, 4, (12, 11), 3).unwrap());
    let f = Grid::space(random_complex((12, 11), 9));
    let d = coefficient_distance(
        &analyze(&frame, &f).unwrap(),
        &analyze_direct(&frame, &f).unwrap(),
    )
    .unwrap();
    assert!(d < 1e-10);
}

#[test]
fn filtering_matches_direct_sum() {
    let frame = build_frame(&Spec::new(2.0, 4, (10, 9), 2).unwrap());
    let f = Grid::from_real(&random_real((10, 9), 5));
    for atom in frame.atoms() {
        let fast = filter(&frame, &f, &atom.index()).unwrap();
        let slow = naive_filter(&f, atom.mask()).unwrap();
        let diff: Array2<f64> = (fast.values() - slow.values()).mapv(|c| c.norm());
        assert!(diff.iter().all(|d| *d < 1e-12), "{}", atom.index());
    }
}
