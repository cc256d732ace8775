//! Self-check suites. Each check prints one line:
//! `<name> <measured> <op> <threshold> PASS|FAIL`.
//!
//! `mutate` names a check whose invariant is broken on purpose; that check
//! must then fail.

use std::collections::HashSet;
use std::fmt;

use rufst::reference::{analyze_direct, coefficient_distance};
use rufst::{
    analyze, analyze_with, build_atom, build_frame, direction_diagnostic, enumerate_coset_paths,
    enumerate_paths, feature_distance, filter_energies, max_warp_amplitude, rotate_array,
    scatter_plain, scatter_rotational, sector_half_width, stability_sweep, AtomIndex, FeatureKind,
    Features, Frame, Grid, GroupElement, Normalization, Perturbation, ProbeConfig, RotationMode,
    Spec, Truncation,
};

use crate::config::JobConfig;
use crate::error::CliError;
use crate::render::{fft_peak, peak_agrees, render_real};
use crate::signals::{band_limited, frobenius, random_complex, random_real, relative};

pub const CHECKS: &[&str] = &[
    "partition",
    "partition-leak",
    "parseval",
    "oracle",
    "energy",
    "coset",
    "equivariance",
    "invariance",
    "norm-equality",
    "upper-bound",
    "non-expansive",
    "stability-ratio",
    "stability-monotone",
    "direction-angle",
    "direction-radius",
    "render-peak",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Lt,
    Le,
    Eq,
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Op::Lt => "<",
            Op::Le => "<=",
            Op::Eq => "==",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub op: Op,
    pub threshold: f64,
}

impl Check {
    pub fn new(name: &'static str, value: f64, op: Op, threshold: f64) -> Self {
        Self {
            name,
            value,
            op,
            threshold,
        }
    }

    pub fn pass(&self) -> bool {
        match self.op {
            Op::Lt => self.value < self.threshold,
            Op::Le => self.value <= self.threshold,
            Op::Eq => self.value == self.threshold,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<20} {:>12.4e} {:<2} {:<8.1e} {}",
            self.name,
            self.value,
            self.op,
            self.threshold,
            if self.pass() { "PASS" } else { "FAIL" }
        )
    }
}

struct Ctx<'a> {
    cfg: &'a JobConfig,
    mutate: Option<&'a str>,
}

impl Ctx<'_> {
    fn broken(&self, name: &str) -> bool {
        self.mutate == Some(name)
    }

    fn covering(&self, grid: (usize, usize)) -> Result<Frame, CliError> {
        Ok(build_frame(&Spec::covering(self.cfg.a, self.cfg.b, grid)?))
    }
}

fn partition(cx: &Ctx) -> Result<Vec<Check>, CliError> {
    let spec = cx.cfg.spec()?;
    let (a, grid) = (spec.a(), spec.grid());
    let mut dev = 0.0f64;
    let mut leak = 0.0f64;
    // the configured frame plus a truncated one, so the outer region is not empty
    let half = (spec.levels() / 2).max(1);
    for m in [spec.levels(), half] {
        let frame = build_frame(&spec.with_levels(m)?);
        let mut sum = SquareSum::new(grid);
        for (i, atom) in frame.atoms().iter().enumerate() {
            if i == 1 && cx.broken("partition") {
                continue;
            }
            sum.add(atom.mask());
        }
        if cx.broken("partition-leak") {
            sum.add(
                build_atom(
                    &spec.with_levels(m + 1)?,
                    AtomIndex::band(m + 1, spec.b(), 0)?,
                )
                .mask(),
            );
        }
        let mf = m as f64;
        for ((k1, k2), v) in sum.iter() {
            let rho = (k1 as f64).hypot(k2 as f64);
            if rho <= a * mf && m == spec.levels() {
                dev = dev.max((v - 1.0).abs());
            }
            if rho >= a * (mf + 1.0) {
                leak = leak.max(v);
            }
        }
    }
    Ok(vec![
        Check::new("partition", dev, Op::Lt, 1e-12),
        Check::new("partition-leak", leak, Op::Eq, 0.0),
    ])
}

/// Pointwise `sum_p mask_p(k)^2` in centered coordinates.
struct SquareSum {
    grid: (usize, usize),
    acc: ndarray::Array2<f64>,
}

impl SquareSum {
    fn new(grid: (usize, usize)) -> Self {
        Self {
            grid,
            acc: ndarray::Array2::zeros(grid),
        }
    }

    fn add(&mut self, mask: &ndarray::Array2<f64>) {
        self.acc.zip_mut_with(mask, |s, m| *s += m * m);
    }

    fn iter(&self) -> impl Iterator<Item = ((isize, isize), f64)> + '_ {
        let (n1, n2) = self.grid;
        self.acc.indexed_iter().map(move |((i, j), v)| {
            (
                (rufst::freq_of_index(i, n1), rufst::freq_of_index(j, n2)),
                *v,
            )
        })
    }
}

fn parseval(cx: &Ctx) -> Result<Vec<Check>, CliError> {
    let norm = if cx.broken("parseval") {
        Normalization::Literal
    } else {
        Normalization::Parseval
    };
    let mut worst = 0.0f64;
    for n in [9usize, 17, 33] {
        let frame = cx.covering((n, n))?;
        for i in 0..20 {
            let f = Grid::space(random_complex((n, n), cx.cfg.seed.wrapping_add(i)));
            let e = analyze_with(&frame, &f, norm)?.energy();
            worst = worst.max((e - f.norm_sqr()).abs() / f.norm_sqr());
        }
    }
    Ok(vec![Check::new("parseval", worst, Op::Lt, 1e-10)])
}

fn oracle(cx: &Ctx) -> Result<Vec<Check>, CliError> {
    let frame = cx.covering((17, 17))?;
    let mut worst = 0.0f64;
    for i in 0..20 {
        let f = Grid::space(random_complex((17, 17), cx.cfg.seed.wrapping_add(100 + i)));
        let mut fast = analyze(&frame, &f)?;
        if cx.broken("oracle") {
            fast.atoms[0].values.mapv_inplace(|c| c * (1.0 + 1e-6));
        }
        worst = worst.max(coefficient_distance(&fast, &analyze_direct(&frame, &f)?)?);
    }
    Ok(vec![Check::new("oracle", worst, Op::Lt, 1e-10)])
}

fn energy(cx: &Ctx) -> Result<Vec<Check>, CliError> {
    let frame = cx.covering(cx.cfg.grid())?;
    let mut worst = 0.0f64;
    for i in 0..10 {
        let f = Grid::from_real(&random_real(
            cx.cfg.grid(),
            cx.cfg.seed.wrapping_add(200 + i),
        ));
        let parts = filter_energies(&frame, &f)?;
        let skip = usize::from(cx.broken("energy"));
        let total: f64 = parts[skip..].iter().sum();
        worst = worst.max((total - f.norm_sqr()).abs() / f.norm_sqr());
    }
    Ok(vec![Check::new("energy", worst, Op::Lt, 1e-10)])
}

fn coset(cx: &Ctx) -> Result<Vec<Check>, CliError> {
    let mut faults = 0usize;
    for b in [2u32, 4, 8] {
        let spec = Spec::new(2.0, b, (33, 33), 3)?;
        let group = spec.invariance_group();
        for m in 1..=3 {
            let all = enumerate_paths(&spec, m, 2, rufst::DEFAULT_CAP)?;
            let reps = if cx.broken("coset") {
                all.clone()
            } else {
                enumerate_coset_paths(&spec, m, 2, rufst::DEFAULT_CAP)?
            };
            for (layer, want) in reps.iter().zip(&all) {
                let mut seen = HashSet::new();
                for q in layer {
                    for r in &group {
                        if !seen.insert(q.rotate_by(r)) {
                            faults += 1;
                        }
                    }
                }
                faults += want.iter().filter(|p| !seen.contains(*p)).count();
                faults += seen.len().saturating_sub(want.len());
            }
        }
    }
    Ok(vec![Check::new("coset", faults as f64, Op::Eq, 0.0)])
}

fn equivariance(cx: &Ctx) -> Result<Vec<Check>, CliError> {
    let frame = build_frame(&Spec::new(2.0, 4, (17, 17), 3)?);
    let f = random_real((17, 17), cx.cfg.seed.wrapping_add(300));
    let t = Truncation::new(3, 2);
    let base = scatter_plain(&frame, &f, t)?;
    let paths = enumerate_paths(frame.spec(), 3, 2, rufst::DEFAULT_CAP)?;
    let scale = base
        .maps
        .iter()
        .flat_map(|m| m.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let mut worst = 0.0f64;
    for r in frame.spec().invariance_group() {
        let turned = scatter_plain(&frame, &rotate_array(&f, &r, RotationMode::Exact)?, t)?;
        // pulling back by r^-1 instead of r breaks the identity
        let back = if cx.broken("equivariance") {
            r.inverse()
        } else {
            r
        };
        for (k, layer) in paths.iter().enumerate() {
            for p in layer {
                let lhs = turned.map(&format!("k{}/{p}", k + 1)).expect("layout");
                let src = base
                    .map(&format!("k{}/{}", k + 1, p.rotate_by(&r)))
                    .expect("layout");
                let rhs = rotate_array(src, &back, RotationMode::Exact)?;
                let err = (lhs - &rhs).iter().fold(0.0f64, |m, v| m.max(v.abs()));
                worst = worst.max(err / scale);
            }
        }
    }
    Ok(vec![Check::new("equivariance", worst, Op::Lt, 1e-10)])
}

fn rotational(
    frame: &Frame,
    f: &ndarray::Array2<f64>,
    t: Truncation,
    kind: FeatureKind,
) -> Result<Features, CliError> {
    Ok(match kind {
        FeatureKind::Plain => scatter_plain(frame, f, t)?,
        FeatureKind::Rotational => scatter_rotational(frame, f, t, RotationMode::Exact)?,
    })
}

fn invariance(cx: &Ctx) -> Result<Vec<Check>, CliError> {
    let frame = build_frame(&Spec::new(2.0, 4, (33, 33), 3)?);
    let t = Truncation::new(3, 2);
    let kind = if cx.broken("invariance") {
        FeatureKind::Plain
    } else {
        FeatureKind::Rotational
    };
    let mut inv = 0.0f64;
    let mut eq = 0.0f64;
    for i in 0..5 {
        let f = random_real((33, 33), cx.cfg.seed.wrapping_add(400 + i));
        let base = rotational(&frame, &f, t, kind)?;
        for r in frame.spec().invariance_group() {
            let turned = rotational(&frame, &rotate_array(&f, &r, RotationMode::Exact)?, t, kind)?;
            for (a, b) in turned.maps.iter().zip(&base.maps) {
                inv = inv.max(relative(a, b));
            }
        }
        let mut rot = scatter_rotational(&frame, &f, t, RotationMode::Exact)?;
        if cx.broken("norm-equality") {
            rot.maps[0].mapv_inplace(|v| v * 2.0);
        }
        let plain = scatter_plain(&frame, &f, t)?.norm();
        eq = eq.max((rot.norm() - plain).abs() / plain);
    }
    Ok(vec![
        Check::new("invariance", inv, Op::Lt, 1e-8),
        Check::new("norm-equality", eq, Op::Lt, 1e-10),
    ])
}

fn contraction(cx: &Ctx) -> Result<Vec<Check>, CliError> {
    let frame = build_frame(&Spec::new(2.0, 4, (17, 17), 2)?);
    let t = Truncation::new(2, 2);
    let up = if cx.broken("upper-bound") { 2.0 } else { 1.0 };
    let ne = if cx.broken("non-expansive") {
        10.0
    } else {
        1.0
    };
    let mut excess_norm = f64::NEG_INFINITY;
    let mut excess_dist = f64::NEG_INFINITY;
    for i in 0..20 {
        let f = random_real((17, 17), cx.cfg.seed.wrapping_add(500 + 2 * i));
        let g = random_real((17, 17), cx.cfg.seed.wrapping_add(501 + 2 * i));
        for kind in [FeatureKind::Plain, FeatureKind::Rotational] {
            let sf = rotational(&frame, &f, t, kind)?;
            let sg = rotational(&frame, &g, t, kind)?;
            excess_norm = excess_norm.max(up * sf.norm() - frobenius(&f));
            excess_dist = excess_dist.max(ne * feature_distance(&sf, &sg)? - frobenius(&(&f - &g)));
        }
    }
    Ok(vec![
        Check::new("upper-bound", excess_norm, Op::Le, 1e-10),
        Check::new("non-expansive", excess_dist, Op::Le, 1e-10),
    ])
}

fn stability(cx: &Ctx) -> Result<Vec<Check>, CliError> {
    let n = 33;
    let frame = build_frame(&Spec::new(2.0, 4, (n, n), 2)?);
    let f = band_limited((n, n), 4.0, cx.cfg.seed.wrapping_add(600));
    let probe = ProbeConfig {
        truncation: Truncation::new(2, 2),
        kind: FeatureKind::Rotational,
        mode: RotationMode::Exact,
    };
    let amax = max_warp_amplitude::<f64>((n, n));
    let shifts: Vec<_> = (1..=4).map(|y| Perturbation::Shift(y, 0)).collect();
    let warps: Vec<_> = (1..=4)
        .map(|i| Perturbation::Warp {
            amplitude: amax * i as f64 / 4.0,
        })
        .collect();
    let mut ratio = 0.0f64;
    let mut drops = 0usize;
    for sweep in [shifts, warps] {
        let mut pts = stability_sweep(&frame, &f, &probe, &sweep)?;
        if cx.broken("stability-monotone") {
            pts.reverse();
        }
        let gain = if cx.broken("stability-ratio") {
            10.0
        } else {
            1.0
        };
        for p in &pts {
            ratio = ratio.max(gain * p.ratio);
        }
        drops += pts
            .windows(2)
            .filter(|w| w[1].feature_distance < w[0].feature_distance)
            .count();
    }
    Ok(vec![
        Check::new("stability-ratio", ratio, Op::Le, 1.0),
        Check::new("stability-monotone", drops as f64, Op::Eq, 0.0),
    ])
}

fn direction(cx: &Ctx) -> Result<Vec<Check>, CliError> {
    let spec = Spec::new(cx.cfg.a, cx.cfg.b, cx.cfg.grid(), 4)?;
    let frame = build_frame(&spec);
    let a = spec.a();
    let mut angle = 0.0f64;
    let mut radius = 0.0f64;
    let mut misses = 0usize;
    for atom in frame.bands().iter().filter(|x| !x.is_empty()) {
        let r: GroupElement = atom.index().rotation().expect("band");
        let m = r.level() as f64;
        let hw: f64 = sector_half_width(r.level(), spec.b())?;
        let c = direction_diagnostic(atom)?;
        let target = if cx.broken("direction-angle") {
            r.angle::<f64>() + 2.0 * hw
        } else {
            r.angle()
        };
        angle = angle.max(rufst::wrap_angle(c.phi - target).abs() / hw);
        let centre = if cx.broken("direction-radius") {
            (m + 2.0) * a
        } else {
            m * a
        };
        radius = radius.max((c.rho - centre).abs() / a);
        let (px, _) = render_real(atom);
        let mut hint = rufst::from_polar(c);
        if cx.broken("render-peak") {
            hint = (-hint.0, -hint.1);
        }
        if !peak_agrees(fft_peak(&px, hint), c, a, hw) {
            misses += 1;
        }
    }
    Ok(vec![
        Check::new("direction-angle", angle, Op::Le, 1.0),
        Check::new("direction-radius", radius, Op::Le, 1.0),
        Check::new("render-peak", misses as f64, Op::Eq, 0.0),
    ])
}

type Suite = fn(&Ctx) -> Result<Vec<Check>, CliError>;

const SUITES: &[(&[&str], Suite)] = &[
    (&["partition", "partition-leak"], partition),
    (&["parseval"], parseval),
    (&["oracle"], oracle),
    (&["energy"], energy),
    (&["coset"], coset),
    (&["equivariance"], equivariance),
    (&["invariance", "norm-equality"], invariance),
    (&["upper-bound", "non-expansive"], contraction),
    (&["stability-ratio", "stability-monotone"], stability),
    (
        &["direction-angle", "direction-radius", "render-peak"],
        direction,
    ),
];

/// Run the selected checks (all when `suites` is empty).
pub fn run(cfg: &JobConfig) -> Result<Vec<Check>, CliError> {
    let wanted = &cfg.verify.suites;
    for s in wanted.iter().chain(cfg.verify.mutate.iter()) {
        if !CHECKS.contains(&s.as_str()) {
            return Err(CliError::config(format!(
                "invalid parameter `verify`: unknown check `{s}` (known: {})",
                CHECKS.join(", ")
            )));
        }
    }
    let cx = Ctx {
        cfg,
        mutate: cfg.verify.mutate.as_deref(),
    };
    let mut out = Vec::new();
    for (names, suite) in SUITES {
        if wanted.is_empty() || names.iter().any(|n| wanted.iter().any(|w| w == n)) {
            let checks = suite(&cx)?;
            out.extend(
                checks
                    .into_iter()
                    .filter(|c| wanted.is_empty() || wanted.iter().any(|w| w == c.name)),
            );
        }
    }
    Ok(out)
}
