//! Acceptance criteria, one line each. Exits nonzero if any fails.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use rufst::reference::{analyze_direct, coefficient_distance};
use rufst::{
    analyze, build_frame, direction_diagnostic, enumerate_coset_paths, feature_distance, filter,
    freq_of_index, index_set, max_warp_amplitude, rotate_array, scatter_plain, scatter_rotational,
    sector_half_width, stability_sweep, wrap_angle, AtomIndex, FeatureKind, Grid, Perturbation,
    ProbeConfig, RotationMode, Spec, Truncation,
};
use rufst_cli::render::{fft_peak, peak_agrees, render_real};
use rufst_cli::signals::{band_limited, frobenius, random_complex, random_real, relative};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn partition() -> Outcome {
    let (a, b, n) = (2.0, 8, 33);
    let covering = Spec::covering(a, b, (n, n)).unwrap();
    let mut dev = 0.0f64;
    let mut leak = 0.0f64;
    for m in 1..=covering.levels() {
        let frame = build_frame(&covering.with_levels(m).unwrap());
        let mut sum = ndarray::Array2::<f64>::zeros((n, n));
        for atom in frame.atoms() {
            sum.zip_mut_with(atom.mask(), |s, v| *s += v * v);
        }
        for ((i, j), s) in sum.indexed_iter() {
            let rho = (freq_of_index(i, n) as f64).hypot(freq_of_index(j, n) as f64);
            if rho <= a * m as f64 && m == covering.levels() {
                dev = dev.max((s - 1.0).abs());
            }
            if rho >= a * (m as f64 + 1.0) {
                leak = leak.max(*s);
            }
        }
    }
    outcome(
        dev < 1e-12 && leak == 0.0 && covering.is_full_cover(),
        format!("max |sum-1| {dev:.2e} < 1e-12 at M={}, max sum beyond A(M+1) {leak:e} == 0 for M=1..{}", covering.levels(), covering.levels()),
    )
}

fn parseval() -> Outcome {
    let mut worst = 0.0f64;
    for n in [9usize, 17, 33] {
        let frame = build_frame(&Spec::covering(2.0, 8, (n, n)).unwrap());
        for s in 0..20 {
            let f = Grid::space(random_complex((n, n), 1000 + s));
            let c = analyze(&frame, &f).unwrap();
            let coeff: f64 = c
                .atoms
                .iter()
                .flat_map(|a| a.values.iter())
                .map(|v| v.norm_sqr())
                .sum();
            let sig: f64 = f.values().iter().map(|v| v.norm_sqr()).sum();
            worst = worst.max((coeff - sig).abs() / sig);
        }
    }
    outcome(
        worst < 1e-10,
        format!("max relative residual {worst:.2e} < 1e-10 over 3x20 arrays"),
    )
}

fn oracle() -> Outcome {
    let frame = build_frame(&Spec::covering(2.0, 8, (17, 17)).unwrap());
    let mut worst = 0.0f64;
    for s in 0..20 {
        let f = Grid::space(random_complex((17, 17), 2000 + s));
        worst = worst.max(
            coefficient_distance(
                &analyze(&frame, &f).unwrap(),
                &analyze_direct(&frame, &f).unwrap(),
            )
            .unwrap(),
        );
    }
    outcome(
        worst < 1e-10,
        format!("max relative error {worst:.2e} < 1e-10 over 20 arrays"),
    )
}

fn invariance() -> Outcome {
    let frame = build_frame(&Spec::new(2.0, 4, (33, 33), 3).unwrap());
    let t = Truncation::new(3, 2);
    let mut worst = 0.0f64;
    let mut maps = 0;
    for s in 0..5 {
        let f = random_real((33, 33), 3000 + s);
        let base = scatter_rotational(&frame, &f, t, RotationMode::Exact).unwrap();
        maps = base.len();
        for r in frame.spec().invariance_group() {
            let g = rotate_array(&f, &r, RotationMode::Exact).unwrap();
            let turned = scatter_rotational(&frame, &g, t, RotationMode::Exact).unwrap();
            for (x, y) in turned.maps.iter().zip(&base.maps) {
                worst = worst.max(relative(x, y));
            }
        }
    }
    outcome(
        worst < 1e-8,
        format!(
            "max per-map relative error {worst:.2e} < 1e-8 ({maps} maps, 5 images, 4 rotations)"
        ),
    )
}

fn norm_equality() -> Outcome {
    let mut worst = 0.0f64;
    for b in [1u32, 2, 4] {
        let frame = build_frame(&Spec::new(2.0, b, (33, 33), 3).unwrap());
        for (m, k) in [(3, 1), (3, 2)] {
            let f = random_real((33, 33), 4000 + b as u64 + m as u64 * 10 + k as u64);
            let t = Truncation::new(m, k);
            let p = scatter_plain(&frame, &f, t).unwrap().norm();
            let r = scatter_rotational(&frame, &f, t, RotationMode::Exact)
                .unwrap()
                .norm();
            worst = worst.max((p - r).abs() / p);
        }
    }
    outcome(
        worst < 1e-10,
        format!("max relative norm gap {worst:.2e} < 1e-10 (B=1,2,4; M=3; K=1,2)"),
    )
}

fn contraction() -> Outcome {
    let frame = build_frame(&Spec::new(2.0, 4, (33, 33), 2).unwrap());
    let t = Truncation::new(2, 2);
    let mut norm_excess = f64::NEG_INFINITY;
    let mut dist_excess = f64::NEG_INFINITY;
    for s in 0..20u64 {
        let f = random_real((33, 33), 5000 + 2 * s);
        let g = random_real((33, 33), 5001 + 2 * s);
        for kind in [FeatureKind::Plain, FeatureKind::Rotational] {
            let run = |x: &ndarray::Array2<f64>| match kind {
                FeatureKind::Plain => scatter_plain(&frame, x, t).unwrap(),
                FeatureKind::Rotational => {
                    scatter_rotational(&frame, x, t, RotationMode::Exact).unwrap()
                }
            };
            let (sf, sg) = (run(&f), run(&g));
            norm_excess = norm_excess
                .max(sf.norm() - frobenius(&f))
                .max(sg.norm() - frobenius(&g));
            dist_excess =
                dist_excess.max(feature_distance(&sf, &sg).unwrap() - frobenius(&(&f - &g)));
        }
    }
    outcome(
        norm_excess <= 1e-10 && dist_excess <= 1e-10,
        format!("max ||S F|| - ||F|| = {norm_excess:.3e}, max dist - ||F-G|| = {dist_excess:.3e}, both <= 1e-10"),
    )
}

fn coset() -> Outcome {
    let mut dups = 0usize;
    let mut missing = 0usize;
    let mut checked = 0usize;
    for b in [2u32, 4, 8] {
        for m in 1..=3u32 {
            let spec = Spec::new(2.0, b, (33, 33), m).unwrap();
            let bands: Vec<AtomIndex> = index_set(&spec)
                .into_iter()
                .filter(|p| *p != AtomIndex::LowPass)
                .collect();
            let group = spec.invariance_group();
            let reps = enumerate_coset_paths(&spec, m, 2, rufst::DEFAULT_CAP).unwrap();
            for k in 1..=2usize {
                let mut all = HashSet::new();
                for p in &bands {
                    if k == 1 {
                        all.insert(vec![*p]);
                    } else {
                        for q in &bands {
                            all.insert(vec![*p, *q]);
                        }
                    }
                }
                let mut seen = HashSet::new();
                for q in &reps[k - 1] {
                    for r in &group {
                        let steps = q.rotate_by(r).steps().to_vec();
                        if !seen.insert(steps) {
                            dups += 1;
                        }
                    }
                }
                missing += all.difference(&seen).count() + seen.difference(&all).count();
                checked += all.len();
            }
        }
    }
    outcome(
        dups == 0 && missing == 0,
        format!("{dups} duplicates, {missing} omissions over {checked} paths"),
    )
}

fn energy() -> Outcome {
    let mut worst = 0.0f64;
    let mut s = 0;
    for (a, b, n) in [(2.0, 8u32, 33usize), (1.5, 4, 17), (3.0, 5, 24)] {
        let frame = build_frame(&Spec::covering(a, b, (n, n)).unwrap());
        for _ in 0..10 {
            s += 1;
            let f = Grid::from_real(&random_real((n, n), 6000 + s));
            let total: f64 = frame
                .atoms()
                .iter()
                .map(|atom| {
                    filter(&frame, &f, &atom.index())
                        .unwrap()
                        .values()
                        .iter()
                        .map(|v| v.norm_sqr())
                        .sum::<f64>()
                })
                .sum();
            let sig = f.norm_sqr();
            worst = worst.max((total - sig).abs() / sig);
        }
    }
    outcome(
        worst < 1e-10,
        format!("max relative error {worst:.2e} < 1e-10 over 3 frames x 10 arrays"),
    )
}

fn stability() -> Outcome {
    let n = 33;
    let frame = build_frame(&Spec::new(2.0, 4, (n, n), 2).unwrap());
    let amax = max_warp_amplitude::<f64>((n, n));
    let shifts: Vec<_> = (1..=4).map(|y| Perturbation::Shift(y, 0)).collect();
    let warps: Vec<_> = (1..=4)
        .map(|i| Perturbation::Warp {
            amplitude: amax * i as f64 / 4.0,
        })
        .collect();
    let mut ratio = 0.0f64;
    let mut drops = 0usize;
    let mut sweeps = 0usize;
    for seed in 0..3u64 {
        let f = band_limited((n, n), 4.0, 7000 + seed);
        for kind in [FeatureKind::Plain, FeatureKind::Rotational] {
            let probe = ProbeConfig {
                truncation: Truncation::new(2, 2),
                kind,
                mode: RotationMode::Exact,
            };
            for sweep in [&shifts, &warps] {
                let pts = stability_sweep(&frame, &f, &probe, sweep).unwrap();
                sweeps += 1;
                for p in &pts {
                    ratio = ratio.max(p.feature_distance / p.signal_distance);
                }
                drops += pts
                    .windows(2)
                    .filter(|w| w[1].feature_distance < w[0].feature_distance)
                    .count();
            }
        }
    }
    outcome(
        ratio <= 1.0 && drops == 0,
        format!("max feature/signal ratio {ratio:.3} <= 1, {drops} decreasing steps in {sweeps} sweeps (shifts 1..4, warps up to |grad tau| = 1/4)"),
    )
}

fn direction() -> Outcome {
    let (a, b) = (2.0, 8);
    let frame = build_frame(&Spec::new(a, b, (33, 33), 4).unwrap());
    let mut bad_radius = 0;
    let mut bad_angle = 0;
    let mut bad_peak = 0;
    let mut worst_angle = 0.0f64;
    for atom in frame.bands() {
        let r = atom.index().rotation().unwrap();
        let m = r.level() as f64;
        let hw: f64 = sector_half_width(r.level(), b).unwrap();
        let c = direction_diagnostic(atom).unwrap();
        if c.rho < a * (m - 1.0) || c.rho > a * (m + 1.0) {
            bad_radius += 1;
        }
        let dphi = wrap_angle(c.phi - r.angle::<f64>()).abs();
        worst_angle = worst_angle.max(dphi / hw);
        if dphi > hw {
            bad_angle += 1;
        }
        let (px, _) = render_real(atom);
        if !peak_agrees(fft_peak(&px, rufst::from_polar(c)), c, a, hw) {
            bad_peak += 1;
        }
    }
    outcome(
        bad_radius + bad_angle + bad_peak == 0,
        format!(
            "{} atoms: {bad_radius} radius, {bad_angle} angle (worst {worst_angle:.3} B_m), {bad_peak} render-peak violations",
            frame.bands().len()
        ),
    )
}

type Criterion = (u32, &'static str, fn() -> Outcome, Option<Duration>);

fn main() {
    let criteria: [Criterion; 10] = [
        (
            1,
            "partition of unity",
            partition,
            Some(Duration::from_secs(1)),
        ),
        (
            2,
            "finite Parseval",
            parseval,
            Some(Duration::from_secs(10)),
        ),
        (
            3,
            "oracle equivalence",
            oracle,
            Some(Duration::from_secs(30)),
        ),
        (
            4,
            "G-invariance",
            invariance,
            Some(Duration::from_secs(120)),
        ),
        (5, "norm equality", norm_equality, None),
        (6, "upper bound and non-expansiveness", contraction, None),
        (7, "coset decomposition", coset, None),
        (8, "one-layer energy conservation", energy, None),
        (9, "stability sweeps", stability, None),
        (10, "direction diagnostics", direction, None),
    ];
    let mut failed = 0;
    for (id, name, run, limit) in criteria {
        let start = Instant::now();
        let out = run();
        let took = start.elapsed();
        let in_time = limit.is_none_or(|l| took <= l);
        let pass = out.pass && in_time;
        failed += usize::from(!pass);
        let budget = limit
            .map(|l| format!(" (limit {:.0} s)", l.as_secs_f64()))
            .unwrap_or_default();
        println!(
            "criterion {id:>2} {:<4} {name}: {}; {:.2} s{budget}",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            took.as_secs_f64()
        );
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
