//! Acceptance criteria, one PASS/FAIL line each.

mod common;

use std::f64::consts::E;
use std::process::ExitCode;
use std::time::Instant;

use rand::Rng;
use radeq::extremal::{contact_set, solve, GridSpec, Mode, Problem, Solution};
use radeq::gallery::{self, run_extremal, support_intervals, ExtremalFixture, GalleryOptions};
use radeq::glue::{
    disc_reflection_glue, log_ratio_profile, quadratic_profile, quadratic_threshold, radial_glue_check,
    submean_check, GluedFunction, TrigHarmonic,
};
use radeq::measure::default_tol;
use radeq::par::Exec;
use radeq::{
    boundary_support_check, compare_abs_continuity, lelong_mass, ma_cdf, reconstruct, verify_domination,
    verify_relative_domination, RadialProfile, RadialSet, RadialWeight, WeightKind,
};

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn all_fixtures(dim: usize) -> Vec<ExtremalFixture> {
    gallery::extremal_fixtures(dim, 8).expect("fixtures build")
}

fn criterion_1() -> Verdict {
    let mut worst_err: f64 = 0.0;
    let mut slowest: f64 = 0.0;
    let mut count = 0;
    for dim in 1..=3 {
        let opts = GalleryOptions { dim, ..Default::default() };
        let fixtures = [
            gallery::example1_global(dim),
            gallery::example1_relative_2(dim),
            gallery::example1_relative_e(dim),
            gallery::example2_global(dim),
            gallery::example2_relative(dim),
            gallery::shell(dim, 1.0, E),
            gallery::spheres(dim, 1),
            gallery::spheres(dim, 2),
            gallery::spheres(dim, 3),
            gallery::spheres(dim, 4),
            gallery::quadratic_ball(dim, 0.3, 1.0),
            gallery::quadratic_ball(dim, 0.5, 1.0),
        ];
        for fx in fixtures {
            let fx = fx.map_err(|e| e.to_string())?;
            let rep = run_extremal(&fx, &opts);
            ensure(rep.passed, || format!("{} (n = {dim}): {:?}", fx.name, rep.notes))?;
            let secs = rep.elapsed.as_secs_f64();
            ensure(secs < 1.0, || format!("{} took {secs:.2} s", fx.name))?;
            worst_err = worst_err.max(rep.profile_error.unwrap_or(0.0));
            slowest = slowest.max(secs);
            count += 1;
        }
    }
    Ok(format!("{count} fixtures, max profile error {worst_err:.1e}, slowest {:.0} ms", slowest * 1e3))
}

fn criterion_2() -> Verdict {
    let mut rng = common::rng(2);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for n in 1..=4 {
        let target = lelong_mass(n);
        let mut check = |total: f64, what: &str| -> Result<(), String> {
            let err = (total - target).abs() / target;
            worst = worst.max(err);
            count += 1;
            ensure(err <= 1e-8, || format!("{what} (n = {n}) has mass {total}, relative error {err:.2e}"))
        };
        for fx in all_fixtures(n).iter().filter(|f| f.problem.mode() == Mode::Global) {
            let sol = solve(&fx.problem, &GridSpec::default()).map_err(|e| e.to_string())?;
            check(sol.measure.total(), &fx.name)?;
            check(ma_cdf(&fx.expected, n).map_err(|e| e.to_string())?.total(), "expected profile")?;
        }
        for _ in 0..50 {
            let p = common::random_psh_profile(&mut rng, (-6.0, 4.0), 0.0, 0.5, true);
            check(ma_cdf(&p, n).map_err(|e| e.to_string())?.total(), "random L+ profile")?;
        }
        let (_, comps) = gallery::union_components(n, 5).map_err(|e| e.to_string())?;
        for m in &comps {
            let p = reconstruct(m, n, 0.0).map_err(|e| e.to_string())?;
            check(ma_cdf(&p, n).map_err(|e| e.to_string())?.total(), "reconstructed component")?;
        }
    }
    Ok(format!("{count} profiles in n = 1..4, max relative error {worst:.1e}"))
}

fn criterion_3() -> Verdict {
    let mut rng = common::rng(3);
    let mut worst_cdf: f64 = 0.0;
    for trial in 0..200 {
        let n = 1 + trial % 4;
        let m = common::random_measure(&mut rng, n);
        let p = reconstruct(&m, n, 0.0).map_err(|e| format!("trial {trial}: {e}"))?;
        let back = ma_cdf(&p, n).map_err(|e| format!("trial {trial}: {e}"))?;
        let r_max = 1.2 * m.outer_radius().max(1.0);
        let mut ts: Vec<f64> = (0..=4000).map(|i| r_max * i as f64 / 4000.0).collect();
        // probe just either side of each breakpoint; radii survive the round
        // trip through s only to within an ulp
        ts.extend(m.breakpoints().iter().flat_map(|&b| [b * (1.0 - 1e-9), b * (1.0 + 1e-9)]));
        let d = ts.iter().map(|&t| (m.cdf(t) - back.cdf(t)).abs()).fold(0.0, f64::max);
        let scale = m.total().max(1.0);
        worst_cdf = worst_cdf.max(d / scale);
        ensure(d <= 1e-8 * scale, || format!("trial {trial}: CDF distance {d:.2e}"))?;
    }
    let mut worst_profile: f64 = 0.0;
    for trial in 0..200 {
        let n = 1 + trial % 4;
        let right = rng.random_range(0.05..1.0);
        let p = common::random_psh_profile(&mut rng, (-5.0, 3.0), 0.0, right, true);
        let m = ma_cdf(&p, n).map_err(|e| e.to_string())?;
        let q = reconstruct(&m, n, 0.0).map_err(|e| format!("trial {trial}: {e}"))?;
        let diffs: Vec<f64> = (0..=4000).map(|i| -12.0 + 20.0 * i as f64 / 4000.0).map(|s| p.value(s) - q.value(s)).collect();
        let spread = diffs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - diffs.iter().cloned().fold(f64::INFINITY, f64::min);
        worst_profile = worst_profile.max(spread);
        ensure(spread <= 1e-8, || format!("trial {trial}: profile differs by {spread:.2e} beyond a constant"))?;
    }
    Ok(format!("200 + 200 trials, CDF error {worst_cdf:.1e}, profile error {worst_profile:.1e}"))
}

fn cell_of(sol: &Solution) -> f64 {
    sol.cell_size()
}

fn inclusion(prob: &Problem, sol: &Solution) -> Result<(), String> {
    let contact = contact_set(sol, prob, 1e-9).map_err(|e| e.to_string())?;
    ensure(sol.support.is_subset_of(&contact, cell_of(sol)), || {
        format!("support {:?} not inside contact set {:?}", sol.support, contact)
    })
}

fn criterion_4() -> Verdict {
    let mut checked = 0;
    for fx in all_fixtures(2) {
        let sol = solve(&fx.problem, &GridSpec::default()).map_err(|e| e.to_string())?;
        inclusion(&fx.problem, &sol).map_err(|e| format!("{}: {e}", fx.name))?;
        checked += 1;
    }
    let mut rng = common::rng(4);
    for trial in 0..100 {
        let prob = common::random_problem(&mut rng);
        let sol = solve(&prob, &GridSpec::default()).map_err(|e| format!("random problem {trial}: {e}"))?;
        inclusion(&prob, &sol).map_err(|e| format!("random problem {trial}: {e}"))?;
        checked += 1;
    }
    Ok(format!("{checked} problems, zero exceptions"))
}

fn criterion_5() -> Verdict {
    let n = 2;
    let solve_fx = |fx: radeq::Result<ExtremalFixture>| -> Result<Solution, String> {
        let fx = fx.map_err(|e| e.to_string())?;
        solve(&fx.problem, &GridSpec::default()).map_err(|e| e.to_string())
    };
    let rel = solve_fx(gallery::example1_relative_2(n))?;
    let glob = solve_fx(gallery::example1_global(n))?;
    let ac1 = compare_abs_continuity(&rel.measure, &glob.measure, default_tol(n));
    ensure(!ac1.m1_ll_m2 && ac1.m2_ll_m1, || format!("example 1 gave {ac1:?}"))?;
    let glob = solve_fx(gallery::example2_global(n))?;
    let rel = solve_fx(gallery::example2_relative(n))?;
    let ac2 = compare_abs_continuity(&glob.measure, &rel.measure, default_tol(n));
    ensure(!ac2.m1_ll_m2 && ac2.m2_ll_m1, || format!("example 2 gave {ac2:?}"))?;
    Ok("example 1 {false, true}, example 2 {false, true}".into())
}

fn criterion_6() -> Verdict {
    let start = Instant::now();
    let samples = 100_000;
    let seed = 2024;
    let (big_r, dim) = (1.0, 2);
    let th = quadratic_threshold(big_r, dim).map_err(|e| e.to_string())?;
    let a = th.glue_threshold;
    ensure((th.solver_threshold - a).abs() <= 1e-6 * a, || format!("solver threshold {} vs glue {}", th.solver_threshold, a))?;
    let check = radial_glue_check(&quadratic_profile(a, big_r), &log_ratio_profile(big_r), big_r);
    ensure(check.derivative_ok == Some(true), || format!("threshold glue rejected: {check:?}"))?;
    let range = (0.01 * big_r, 0.2 * big_r);
    let g = GluedFunction::radial(dim, big_r, quadratic_profile(a, big_r), log_ratio_profile(big_r)).map_err(|e| e.to_string())?;
    let valid = submean_check(&g, samples, range, seed, Exec::default()).map_err(|e| e.to_string())?;
    ensure(valid.violations == 0, || format!("{} violations at the threshold", valid.violations))?;

    let disc = disc_reflection_glue(&TrigHarmonic::real_part(0.5)).map_err(|e| e.to_string())?;
    let dv = submean_check(&disc, samples, (0.01, 0.2), seed, Exec::default()).map_err(|e| e.to_string())?;
    ensure(dv.violations == 0, || format!("{} violations for the disc reflection", dv.violations))?;

    let steep = 1.2 * a;
    let bad = GluedFunction::radial(dim, big_r, quadratic_profile(steep, big_r), log_ratio_profile(big_r)).map_err(|e| e.to_string())?;
    let bv = submean_check(&bad, samples, range, seed, Exec::default()).map_err(|e| e.to_string())?;
    ensure(bv.violations >= 1, || "over-steep glue produced no violations".into())?;
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 30.0, || format!("took {secs:.1} s"))?;
    Ok(format!(
        "threshold A = {a:.9}, 0 + 0 violations, {} for 1.2x, {secs:.1} s",
        bv.violations
    ))
}

fn criterion_7() -> Verdict {
    let n = 2;
    let ball = RadialSet::ball(1.0).map_err(|e| e.to_string())?;
    let kinds = [
        ("-r^2", WeightKind::Power { a: -1.0, beta: 2.0, c: 0.0 }),
        ("-r^4", WeightKind::Power { a: -1.0, beta: 4.0, c: 0.0 }),
        ("constant", WeightKind::Constant { c: 0.3 }),
    ];
    for (name, kind) in kinds {
        let prob = Problem::global(n, RadialWeight::new(kind, ball.clone()).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let sol = solve(&prob, &GridSpec::default()).map_err(|e| e.to_string())?;
        let cell = sol.cell_size();
        let found = support_intervals(&sol.support, cell);
        ensure(found.iter().all(|iv| (iv[0] - 1.0).abs() <= cell && (iv[1] - 1.0).abs() <= cell) && !found.is_empty(), || {
            format!("{name}: support {found:?}")
        })?;
        let rep = boundary_support_check(&prob).map_err(|e| e.to_string())?;
        ensure(rep.applies && rep.holds == Some(true), || format!("{name}: proposition check {rep:?}"))?;
    }
    let fx = gallery::quadratic_ball(n, 0.5, 1.0).map_err(|e| e.to_string())?;
    let sol = solve(&fx.problem, &GridSpec::default()).map_err(|e| e.to_string())?;
    let found = support_intervals(&sol.support, sol.cell_size());
    ensure(found == vec![[0.0, 1.0]], || format!("quadratic support {found:?}"))?;
    let rep = boundary_support_check(&fx.problem).map_err(|e| e.to_string())?;
    ensure(!rep.applies, || "proposition should not apply to the subharmonic weight".into())?;
    Ok("support {1} for -r^2, -r^4, constant; [0, 1] for A(r^2 - 1)".into())
}

/// A random competitor shifted down until it satisfies the premise.
fn competitor(rng: &mut impl Rng, sol: &Solution, grid: &[f64]) -> RadialProfile {
    let (lo, hi) = (grid[0], *grid.last().unwrap());
    let left = if rng.random_bool(0.5) { 0.0 } else { rng.random_range(0.0..0.2) };
    let right = rng.random_range(left..=0.5);
    let u = common::random_psh_profile(rng, (lo, hi), left, right, true);
    let supp = &sol.support;
    let mut pts: Vec<f64> = supp.atoms.iter().map(|&r| 2.0 * r.ln()).collect();
    for &[a, b] in &supp.density_intervals {
        let (sa, sb) = (2.0 * a.max(1e-300).ln(), 2.0 * b.ln());
        pts.push(sa.max(lo));
        pts.push(sb);
        pts.extend(grid.iter().copied().filter(|&s| s >= sa && s <= sb));
    }
    if let Mode::Relative(r) = sol.mode {
        pts.push(2.0 * r.ln());
    }
    let excess = pts.iter().map(|&s| u.value(s) - sol.profile.value(s)).fold(f64::NEG_INFINITY, f64::max);
    let shift = if let Mode::Relative(r) = sol.mode { excess.max(u.value(2.0 * r.ln())) } else { excess };
    u.shift(-shift - rng.random_range(0.0..0.1))
}

fn criterion_8() -> Verdict {
    let mut rng = common::rng(8);
    let mut outputs = 0;
    let mut competitors = 0;
    let mut worst = f64::NEG_INFINITY;
    for fx in all_fixtures(2) {
        let sol = solve(&fx.problem, &GridSpec::default()).map_err(|e| e.to_string())?;
        let mut grid = sol.grid_s();
        let (first, last) = (grid[0], *grid.last().unwrap());
        let end = match sol.mode {
            Mode::Global => last + 10.0,
            Mode::Relative(r) => 2.0 * r.ln(),
        };
        grid.extend((0..=500).map(|i| first + (end - first) * i as f64 / 500.0));
        grid.sort_by(f64::total_cmp);
        let check = |u: &RadialProfile| match sol.mode {
            Mode::Global => verify_domination(u, &sol.profile, &sol.measure, &grid),
            Mode::Relative(r) => verify_relative_domination(u, &sol.profile, &sol.measure, &grid, r),
        };
        let me = check(&sol.profile).map_err(|e| format!("{}: {e}", fx.name))?;
        ensure(me.premise_holds && me.consistent, || format!("{}: self-domination {me:?}", fx.name))?;
        outputs += 1;
        for k in 0..100 {
            let u = competitor(&mut rng, &sol, &grid);
            let rep = check(&u).map_err(|e| format!("{} competitor {k}: {e}", fx.name))?;
            ensure(rep.premise_holds, || format!("{} competitor {k}: premise failed", fx.name))?;
            ensure(rep.max_violation <= 1e-10, || {
                format!("{} competitor {k}: u exceeds V by {:.2e}", fx.name, rep.max_violation)
            })?;
            worst = worst.max(rep.max_violation);
            competitors += 1;
        }
    }
    Ok(format!("{outputs} outputs, {competitors} competitors, max u - V = {worst:.1e}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("gallery closed-form reproduction", criterion_1),
        ("mass normalization", criterion_2),
        ("forward/inverse round trip", criterion_3),
        ("support inside contact set", criterion_4),
        ("absolute-continuity counterexamples", criterion_5),
        ("gluing verification", criterion_6),
        ("superharmonic weights", criterion_7),
        ("domination self-check", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = run();
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("criterion {} ({name}): PASS [{detail}; {secs:.2} s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL [{why}]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
