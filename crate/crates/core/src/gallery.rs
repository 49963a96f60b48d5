//! Closed-form example fixtures and the gallery runner.
//!
//! Every extremal fixture carries its expected profile and support; the
//! runner solves, measures the sup-error on a dense s-grid and compares the
//! support at grid resolution.

use std::f64::consts::E;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::extremal::{solve_with, GridSpec, Problem, Solution};
use crate::glue::{disc_reflection_glue, log_ratio_profile, quadratic_profile, quadratic_threshold};
use crate::glue::{radial_glue_check, submean_check, GluedFunction, TrigHarmonic};
use crate::measure::{RadialMeasure, SupportReport};
use crate::par::{self, Exec};
use crate::persson::{geometric_series, mixture, reconstruct};
use crate::radial::{s_of, Curve, Knot, LeftTail, RadialProfile, RadialSet, RadialWeight, WeightKind};
use crate::{lelong_mass, Result};

pub const PROFILE_TOL: f64 = 1e-6;
pub const MASS_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct GalleryOptions {
    pub dim: usize,
    pub grid: GridSpec,
    /// Points of the s-grid used for profile comparisons.
    pub eval_points: usize,
    pub submean_samples: usize,
    pub seed: u64,
    /// Number of terms kept in the countable-union series.
    pub truncation: usize,
    pub exec: Exec,
}

impl Default for GalleryOptions {
    fn default() -> Self {
        GalleryOptions {
            dim: 2,
            grid: GridSpec::default(),
            eval_points: 10_000,
            submean_samples: 20_000,
            seed: 0,
            truncation: 8,
            exec: Exec::default(),
        }
    }
}

/// An extremal problem with a known answer.
#[derive(Clone, Debug)]
pub struct ExtremalFixture {
    pub name: String,
    pub problem: Problem,
    pub expected: RadialProfile,
    /// Support as closed radius intervals; spheres are `[r, r]`.
    pub expected_support: Vec<[f64; 2]>,
    /// s-range of the profile comparison.
    pub eval_range: (f64, f64),
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct FixtureReport {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile_error: Option<f64>,
    /// Largest endpoint distance between found and expected support.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub support_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub support_cell: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub expected_support: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub support: Vec<[f64; 2]>,
    /// Relative error of the total mass against `(2 pi)^n`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mass_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_spacing: Option<f64>,
    #[serde(default)]
    pub notes: Vec<String>,
    #[serde(skip)]
    pub elapsed: Duration,
    #[serde(skip)]
    pub problem: Option<Problem>,
    #[serde(skip)]
    pub solution: Option<Solution>,
}

fn pl(points: &[(f64, f64)], left: f64, right: f64) -> RadialProfile {
    RadialProfile::piecewise_linear(points, left, right).expect("fixture profile")
}

fn profile_weight(scale: f64, profile: RadialProfile, domain: RadialSet) -> RadialWeight {
    RadialWeight::new(WeightKind::ScaledProfile { scale, profile }, domain).expect("fixture weight")
}

fn unit_ball() -> RadialSet {
    RadialSet::ball(1.0).expect("unit ball")
}

/// `max(log r, -1/2) - 1`.
fn example1_weight() -> RadialProfile {
    pl(&[(-1.0, -1.5)], 0.0, 0.5)
}

/// `(1/2) max(log r, -1/2) - 1/2`.
fn example2_weight() -> RadialProfile {
    pl(&[(-1.0, -0.75)], 0.0, 0.25)
}

pub fn example1_global(dim: usize) -> Result<ExtremalFixture> {
    Ok(ExtremalFixture {
        name: "example 1 global".into(),
        problem: Problem::global(dim, profile_weight(1.0, example1_weight(), unit_ball()))?,
        // max(log r, -1/2) - 1; the displayed max(log r, 1/2) - 1 exceeds Q at r = 1
        expected: example1_weight(),
        expected_support: vec![[(-0.5f64).exp(); 2]],
        eval_range: (-12.0, 6.0),
    })
}

pub fn example1_relative_2(dim: usize) -> Result<ExtremalFixture> {
    let s_omega = s_of(2.0);
    Ok(ExtremalFixture {
        name: "example 1 relative B(0,2)".into(),
        problem: Problem::relative(dim, profile_weight(1.0, example1_weight(), unit_ball()), 2.0)?,
        // max(Q, log r / log 2 - 1)
        expected: pl(&[(-1.0, -1.5), (0.0, -1.0)], 0.0, 1.0 / s_omega),
        expected_support: vec![[(-0.5f64).exp(); 2], [1.0, 1.0]],
        eval_range: (-12.0, s_omega),
    })
}

pub fn example1_relative_e(dim: usize) -> Result<ExtremalFixture> {
    Ok(ExtremalFixture {
        name: "example 1 relative B(0,e)".into(),
        problem: Problem::relative(dim, profile_weight(1.0, example1_weight(), unit_ball()), E)?,
        expected: example1_weight(),
        expected_support: vec![[(-0.5f64).exp(); 2]],
        eval_range: (-12.0, 2.0),
    })
}

pub fn example2_global(dim: usize) -> Result<ExtremalFixture> {
    Ok(ExtremalFixture {
        name: "example 2 global".into(),
        problem: Problem::global(dim, profile_weight(1.0, example2_weight(), unit_ball()))?,
        // max(Q, log r - 1/2)
        expected: pl(&[(-1.0, -0.75), (0.0, -0.5)], 0.0, 0.5),
        expected_support: vec![[(-0.5f64).exp(); 2], [1.0, 1.0]],
        eval_range: (-12.0, 6.0),
    })
}

pub fn example2_relative(dim: usize) -> Result<ExtremalFixture> {
    Ok(ExtremalFixture {
        name: "example 2 relative B(0,e)".into(),
        problem: Problem::relative(dim, profile_weight(1.0, example2_weight(), unit_ball()), E)?,
        expected: example2_weight(),
        expected_support: vec![[(-0.5f64).exp(); 2]],
        eval_range: (-12.0, 2.0),
    })
}

/// Closed form of `V_{K_m, Q_m}` for the spheres family, as a profile.
pub fn spheres_profile(radii: &[f64], m: usize) -> RadialProfile {
    let mut p = pl(&[(s_of(radii[0]), radii[0].ln())], 0.0, 0.5);
    for &r in &radii[1..m] {
        // (1/2) V_{m-1} inside r_m, then log r + A_m
        let half = p.scale(0.5);
        let s_m = s_of(r);
        let mut pts: Vec<(f64, f64)> = half.breakpoints().into_iter().filter(|&(s, _)| s < s_m).collect();
        pts.push((s_m, half.value(s_m)));
        p = pl(&pts, 0.0, 0.5);
    }
    p
}

pub const SPHERE_RADII: [f64; 4] = [1.0, 2.0, 4.0, 8.0];

pub fn spheres(dim: usize, m: usize) -> Result<ExtremalFixture> {
    let radii = &SPHERE_RADII;
    let r_m = radii[m - 1];
    let weight = if m == 1 {
        RadialWeight::new(WeightKind::Constant { c: radii[0].ln() }, RadialSet::ball(r_m)?)?
    } else {
        profile_weight(0.5, spheres_profile(radii, m - 1), RadialSet::ball(r_m)?)
    };
    Ok(ExtremalFixture {
        name: format!("spheres m = {m}"),
        problem: Problem::global(dim, weight)?,
        expected: spheres_profile(radii, m),
        expected_support: radii[..m].iter().map(|&r| [r, r]).collect(),
        eval_range: (s_of(0.1), s_of(4.0 * r_m)),
    })
}

/// Shell weight `(r - r0 log r - r0 + r0 log R) / (R - r0)` on `r0 <= |z| <= R`.
pub fn shell_weight(r0: f64, big_r: f64) -> WeightKind {
    let d = big_r - r0;
    WeightKind::LogPower { alpha: -r0 / d, a: 1.0 / d, beta: 1.0, c: (r0 * big_r.ln() - r0) / d }
}

pub fn shell(dim: usize, r0: f64, big_r: f64) -> Result<ExtremalFixture> {
    let d = big_r - r0;
    let inner = r0 * (big_r / r0).ln() / d;
    // Flat at Q(r0) inside, the weight on the shell, log(r/R) + 1 outside.
    let expected = RadialProfile::new(
        vec![Knot { s: s_of(r0), value: inner }, Knot { s: s_of(big_r), value: 1.0 }],
        vec![crate::radial::Piece::Curved { curve: Curve::PowerSlope { a: -0.5 * r0 / d, b: 0.5 / d, k: 1.0 } }],
        LeftTail::Linear { slope: 0.0 },
        0.5,
    )?;
    Ok(ExtremalFixture {
        name: format!("shell [{r0}, {big_r:.6}]"),
        problem: Problem::global(dim, RadialWeight::new(shell_weight(r0, big_r), RadialSet::shell(r0, big_r)?)?)?,
        expected,
        expected_support: vec![[r0, big_r]],
        eval_range: (s_of(r0 / 10.0), s_of(10.0 * big_r)),
    })
}

/// `A(|z|^2 - R^2)` on the closed ball of radius `R`, with `2AR^2 <= 1`.
pub fn quadratic_ball(dim: usize, a: f64, big_r: f64) -> Result<ExtremalFixture> {
    let weight = RadialWeight::new(WeightKind::Power { a, beta: 2.0, c: -a * big_r * big_r }, RadialSet::ball(big_r)?)?;
    let expected = RadialProfile::new(
        vec![Knot { s: s_of(big_r), value: 0.0 }],
        vec![],
        LeftTail::Curved { curve: Curve::PowerSlope { a: 0.0, b: a, k: 2.0 } },
        0.5,
    )?;
    Ok(ExtremalFixture {
        name: format!("quadratic ball A = {a}"),
        problem: Problem::global(dim, weight)?,
        expected,
        expected_support: vec![[0.0, big_r]],
        eval_range: (s_of(big_r) - 20.0, s_of(big_r) + 6.0),
    })
}

/// `-|z|^beta` on the closed unit ball: superharmonic, so the support sits
/// on the unit sphere and `V = max(log r, 0) - 1`.
pub fn superharmonic(dim: usize, beta: f64) -> Result<ExtremalFixture> {
    let weight = RadialWeight::new(WeightKind::Power { a: -1.0, beta, c: 0.0 }, unit_ball())?;
    Ok(ExtremalFixture {
        name: format!("superharmonic -r^{beta}"),
        problem: Problem::global(dim, weight)?,
        expected: RadialProfile::log_max(1.0).shift(-1.0),
        expected_support: vec![[1.0, 1.0]],
        eval_range: (-12.0, 6.0),
    })
}

/// The union of the first `k` components of the alternating sphere/shell
/// sequence, with component `i` at radius `1 + (i - 1)/2`.
pub fn union_components(dim: usize, k: usize) -> Result<(RadialSet, Vec<RadialMeasure>)> {
    let mass = lelong_mass(dim);
    let mut intervals = Vec::with_capacity(k);
    let mut comps = Vec::with_capacity(k);
    for i in 0..k {
        let a = 1.0 + 0.5 * i as f64;
        if i % 2 == 0 {
            intervals.push([a, a]);
            comps.push(RadialMeasure::sphere(dim, a, mass)?);
        } else {
            let b = a + 0.25;
            intervals.push([a, b]);
            comps.push(RadialMeasure::shell(dim, a, b, mass)?);
        }
    }
    Ok((RadialSet::new(intervals)?, comps))
}

/// The renormalized truncated series as an extremal fixture: its potential
/// `u` is the weight, and `V = u` with support the whole union.
pub fn countable_union(dim: usize, k: usize) -> Result<ExtremalFixture> {
    let (set, comps) = union_components(dim, k)?;
    let total: f64 = 1.0 - 0.5f64.powi(k as i32);
    let weights: Vec<f64> = (1..=k).map(|i| 0.5f64.powi(i as i32) / total).collect();
    let m = mixture(&comps, &weights)?;
    let u = reconstruct(&m, dim, 0.0)?;
    let expected_support = set.intervals().to_vec();
    let r_max = set.max_radius();
    Ok(ExtremalFixture {
        name: format!("countable union k = {k}"),
        problem: Problem::global(dim, profile_weight(1.0, u.clone(), set))?,
        expected: u,
        expected_support,
        eval_range: (s_of(0.5), s_of(4.0 * r_max)),
    })
}

/// The closed-form extremal fixtures in gallery order.
pub fn extremal_fixtures(dim: usize, truncation: usize) -> Result<Vec<ExtremalFixture>> {
    let mut out = vec![
        example1_global(dim)?,
        example1_relative_2(dim)?,
        example1_relative_e(dim)?,
        example2_global(dim)?,
        example2_relative(dim)?,
    ];
    for m in 1..=4 {
        out.push(spheres(dim, m)?);
    }
    out.push(shell(dim, 1.0, E)?);
    out.push(quadratic_ball(dim, 0.3, 1.0)?);
    out.push(quadratic_ball(dim, 0.5, 1.0)?);
    out.push(superharmonic(dim, 2.0)?);
    out.push(countable_union(dim, truncation)?);
    Ok(out)
}

/// Merges atoms and intervals into closed intervals, joining pieces closer
/// than `cell`.
pub fn support_intervals(s: &SupportReport, cell: f64) -> Vec<[f64; 2]> {
    let mut ivs: Vec<[f64; 2]> = s.atoms.iter().map(|&r| [r, r]).collect();
    ivs.extend(s.density_intervals.iter().copied());
    if s.origin_mass > 0.0 {
        ivs.push([0.0, 0.0]);
    }
    merge_intervals(ivs, cell)
}

fn merge_intervals(mut ivs: Vec<[f64; 2]>, cell: f64) -> Vec<[f64; 2]> {
    ivs.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let mut merged: Vec<[f64; 2]> = Vec::new();
    for iv in ivs {
        match merged.last_mut() {
            Some(last) if iv[0] <= last[1] + cell => last[1] = last[1].max(iv[1]),
            _ => merged.push(iv),
        }
    }
    merged
}

/// Largest endpoint distance; infinite when the interval counts differ.
pub fn support_distance(found: &[[f64; 2]], expected: &[[f64; 2]]) -> f64 {
    if found.len() != expected.len() {
        return f64::INFINITY;
    }
    found
        .iter()
        .zip(expected)
        .map(|(a, b)| (a[0] - b[0]).abs().max((a[1] - b[1]).abs()))
        .fold(0.0, f64::max)
}

/// Sup-distance of two profiles on `points` equally spaced s-values.
pub fn profile_distance(a: &RadialProfile, b: &RadialProfile, range: (f64, f64), points: usize) -> f64 {
    let (lo, hi) = range;
    let n = points.max(2);
    (0..n)
        .map(|i| {
            let s = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            (a.value(s) - b.value(s)).abs()
        })
        .fold(0.0, f64::max)
}

pub fn run_extremal(fx: &ExtremalFixture, opts: &GalleryOptions) -> FixtureReport {
    let start = Instant::now();
    let mut rep = FixtureReport {
        name: fx.name.clone(),
        expected_support: fx.expected_support.clone(),
        problem: Some(fx.problem.clone()),
        ..Default::default()
    };
    let sol = match solve_with(&fx.problem, &opts.grid, opts.exec) {
        Ok(sol) => sol,
        Err(e) => {
            rep.notes.push(format!("solver error: {e}"));
            rep.elapsed = start.elapsed();
            return rep;
        }
    };
    let profile_error = profile_distance(&sol.profile, &fx.expected, fx.eval_range, opts.eval_points);
    let cell = sol.cell_size();
    let found = support_intervals(&sol.support, cell);
    let support_error = support_distance(&found, &fx.expected_support);
    let mut passed = profile_error <= PROFILE_TOL && support_error <= cell * (1.0 + 1e-9);
    if profile_error > PROFILE_TOL {
        rep.notes.push(format!("profile error {profile_error:.3e} above {PROFILE_TOL:e}"));
    }
    if support_error > cell {
        rep.notes.push(format!("support off by {support_error:.3e} with cell {cell:.3e}"));
    }
    if fx.problem.mode() == crate::Mode::Global {
        let target = lelong_mass(fx.problem.dim());
        let err = (sol.measure.total() - target).abs() / target;
        rep.mass_error = Some(err);
        if err > MASS_TOL {
            passed = false;
            rep.notes.push(format!("total mass off by {err:.3e} relative"));
        }
    }
    if !sol.diagnostics.self_check.passed() {
        passed = false;
        rep.notes.extend(sol.diagnostics.self_check.problems.iter().cloned());
    }
    rep.passed = passed;
    rep.profile_error = Some(profile_error);
    rep.support_error = Some(support_error);
    rep.support_cell = Some(cell);
    rep.support = found;
    rep.grid_size = Some(sol.diagnostics.grid_size);
    rep.min_spacing = Some(sol.diagnostics.min_spacing);
    rep.solution = Some(sol);
    rep.elapsed = start.elapsed();
    rep
}

/// Threshold, glue and sub-mean checks for the quadratic ball of radius `R`.
pub fn run_quadratic_glue(big_r: f64, opts: &GalleryOptions) -> FixtureReport {
    let start = Instant::now();
    let mut rep = FixtureReport { name: format!("quadratic glue R = {big_r}"), ..Default::default() };
    let outcome = (|| -> Result<bool> {
        let th = quadratic_threshold(big_r, opts.dim)?;
        rep.notes.push(format!(
            "glue threshold A = {:.12}, solver threshold A = {:.9}, 1/(2R^2) = {:.12}",
            th.glue_threshold,
            th.solver_threshold,
            0.5 / (big_r * big_r)
        ));
        rep.notes.push(format!(
            "at the solver threshold: 2AR <= 1 is {}, 2AR^2 <= 1 is {}",
            th.satisfies_2ar, th.satisfies_2ar2
        ));
        let mut ok = th.satisfies_2ar2 && (th.solver_threshold - th.glue_threshold).abs() <= 1e-6 * th.glue_threshold;
        let range = (0.01 * big_r, 0.2 * big_r);
        let a = th.glue_threshold;
        let check = radial_glue_check(&quadratic_profile(a, big_r), &log_ratio_profile(big_r), big_r);
        ok &= check.derivative_ok == Some(true);
        let g = GluedFunction::radial(opts.dim, big_r, quadratic_profile(a, big_r), log_ratio_profile(big_r))?;
        let valid = submean_check(&g, opts.submean_samples, range, opts.seed, opts.exec)?;
        rep.notes.push(format!(
            "threshold glue: margin {:.3e}, {} violations in {} circles (worst deficit {:.3e})",
            check.margin, valid.violations, valid.samples, valid.worst_deficit
        ));
        ok &= valid.violations == 0;
        let steep = 1.2 * a;
        let g = GluedFunction::radial(opts.dim, big_r, quadratic_profile(steep, big_r), log_ratio_profile(big_r))?;
        let bad = submean_check(&g, opts.submean_samples, range, opts.seed, opts.exec)?;
        let steep_check = radial_glue_check(&quadratic_profile(steep, big_r), &log_ratio_profile(big_r), big_r);
        rep.notes.push(format!(
            "1.2 x threshold: derivative_ok = {:?}, {} violations (worst deficit {:.3e} at |c| = {:.4})",
            steep_check.derivative_ok, bad.violations, bad.worst_deficit, bad.worst_center_radius
        ));
        ok &= bad.violations > 0 && steep_check.derivative_ok == Some(false);
        Ok(ok)
    })();
    rep.passed = match outcome {
        Ok(ok) => ok,
        Err(e) => {
            rep.notes.push(format!("error: {e}"));
            false
        }
    };
    rep.elapsed = start.elapsed();
    rep
}

/// Reflection of `h = (1/2) Re z` across the unit circle.
pub fn run_disc_reflection(opts: &GalleryOptions) -> FixtureReport {
    let start = Instant::now();
    let mut rep = FixtureReport { name: "disc reflection h = Re(z)/2".into(), ..Default::default() };
    let outcome = (|| -> Result<bool> {
        let g = disc_reflection_glue(&TrigHarmonic::real_part(0.5))?;
        let valid = submean_check(&g, opts.submean_samples, (0.01, 0.2), opts.seed, opts.exec)?;
        rep.notes.push(format!(
            "{} violations in {} circles (worst deficit {:.3e})",
            valid.violations, valid.samples, valid.worst_deficit
        ));
        let rejected = disc_reflection_glue(&TrigHarmonic::real_part(1.0)).is_err();
        rep.notes.push(format!("h = Re z rejected: {rejected}"));
        Ok(valid.violations == 0 && rejected)
    })();
    rep.passed = match outcome {
        Ok(ok) => ok,
        Err(e) => {
            rep.notes.push(format!("error: {e}"));
            false
        }
    };
    rep.elapsed = start.elapsed();
    rep
}

/// Mass bookkeeping of the truncated geometric series.
pub fn run_series_mass(opts: &GalleryOptions) -> FixtureReport {
    let start = Instant::now();
    let k = opts.truncation;
    let mut rep = FixtureReport { name: format!("countable union series k = {k}"), ..Default::default() };
    let outcome = (|| -> Result<bool> {
        let (_, comps) = union_components(opts.dim, k)?;
        let series = geometric_series(&comps)?;
        let full = lelong_mass(opts.dim);
        let expected_deficit = full * 0.5f64.powi(k as i32);
        let err = (series.mass_deficit - expected_deficit).abs() / full;
        rep.mass_error = Some(err);
        rep.notes.push(format!(
            "truncated mass {:.12e}, deficit {:.6e} (expected {:.6e})",
            series.measure.total(),
            series.mass_deficit,
            expected_deficit
        ));
        Ok(err <= 1e-12)
    })();
    rep.passed = match outcome {
        Ok(ok) => ok,
        Err(e) => {
            rep.notes.push(format!("error: {e}"));
            false
        }
    };
    rep.elapsed = start.elapsed();
    rep
}

enum Job {
    Extremal(Box<ExtremalFixture>),
    QuadraticGlue,
    Disc,
    Series,
}

/// Runs every fixture, concurrently under a parallel policy, and returns the
/// reports in gallery order.
pub fn run_gallery(opts: &GalleryOptions) -> Result<Vec<FixtureReport>> {
    let mut jobs: Vec<Job> = extremal_fixtures(opts.dim, opts.truncation)?.into_iter().map(|fx| Job::Extremal(Box::new(fx))).collect();
    jobs.push(Job::Series);
    jobs.push(Job::QuadraticGlue);
    jobs.push(Job::Disc);
    Ok(par::map_slice(opts.exec, &jobs, |job| match job {
        Job::Extremal(fx) => run_extremal(fx, opts),
        Job::QuadraticGlue => run_quadratic_glue(1.0, opts),
        Job::Disc => run_disc_reflection(opts),
        Job::Series => run_series_mass(opts),
    }))
}

/// Fixed-width PASS/FAIL table.
pub fn format_table(reports: &[FixtureReport]) -> String {
    let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.2e}"));
    let mut out = format!("{:<34} {:<6} {:>10} {:>10} {:>10}\n", "fixture", "result", "profile", "support", "mass");
    for r in reports {
        out.push_str(&format!(
            "{:<34} {:<6} {:>10} {:>10} {:>10}\n",
            r.name,
            if r.passed { "PASS" } else { "FAIL" },
            fmt(r.profile_error),
            fmt(r.support_error),
            fmt(r.mass_error),
        ));
        if !r.passed {
            for note in &r.notes {
                out.push_str(&format!("    {note}\n"));
            }
            if let (Some(n), Some(h)) = (r.grid_size, r.min_spacing) {
                out.push_str(&format!("    grid: {n} points, min spacing {h:.3e}\n"));
            }
        }
    }
    out
}
