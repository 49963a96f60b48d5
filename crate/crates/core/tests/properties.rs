mod common;

use proptest::prelude::*;
use rand::Rng;
use radeq::extremal::solve_with;
use radeq::glue::{log_ratio_profile, quadratic_profile, submean_check, GluedFunction};
use radeq::par::Exec;
use radeq::{solve, GridSpec, Mode, Problem, RadialProfile, RadialSet, RadialWeight, WeightKind};

fn s_of(r: f64) -> f64 {
    2.0 * r.ln()
}

/// A random competitor in the admissible class, shifted to sit below `Q` on
/// the constraint grid (and below 0 at the anchor in relative mode).
fn feasible_competitor(rng: &mut impl Rng, prob: &Problem, grid: &[radeq::extremal::GridNode]) -> RadialProfile {
    let (lo, hi) = (grid[0].s, grid.last().unwrap().s);
    let right = match prob.mode() {
        Mode::Global => rng.random_range(0.0..=0.5),
        Mode::Relative(_) => rng.random_range(0.0..3.0),
    };
    let u = common::random_psh_profile(rng, (lo - 1.0, hi + 1.0), 0.0, right, true);
    let mut excess = grid.iter().map(|n| u.value(n.s) - n.q).fold(f64::NEG_INFINITY, f64::max);
    if let Mode::Relative(r) = prob.mode() {
        excess = excess.max(u.value(s_of(r)));
    }
    u.shift(-excess)
}

#[test]
fn extremal_function_dominates_feasible_competitors() {
    let mut rng = common::rng(11);
    for trial in 0..60 {
        let prob = common::random_problem(&mut rng);
        let sol = solve(&prob, &GridSpec::default()).unwrap();
        let probe: Vec<f64> = sol.grid_s().into_iter().step_by(7).collect();
        for _ in 0..20 {
            let u = feasible_competitor(&mut rng, &prob, &sol.grid);
            for &s in &probe {
                // the solver's own constraint residual is below 1e-8
                let gap = u.value(s) - sol.profile.value(s);
                assert!(gap <= 1e-8, "trial {trial}: competitor exceeds V by {gap:e} at s = {s}");
            }
        }
    }
}

#[test]
fn solution_is_feasible_and_in_class() {
    let mut rng = common::rng(12);
    for trial in 0..100 {
        let prob = common::random_problem(&mut rng);
        let sol = solve(&prob, &GridSpec::default()).unwrap();
        assert!(sol.diagnostics.self_check.passed(), "trial {trial}: {:?}", sol.diagnostics.self_check);
        for n in &sol.grid {
            assert!(sol.profile.value(n.s) <= n.q + 1e-8, "trial {trial}: V > Q at s = {}", n.s);
        }
        let flags = sol.profile.class_flags();
        assert!(flags.is_psh_radial);
        match prob.mode() {
            Mode::Global => assert!(flags.in_l_plus, "trial {trial}: global solution not in L+"),
            Mode::Relative(r) => {
                assert!(sol.profile.value(s_of(r)).abs() <= 1e-9, "trial {trial}: U(R) != 0");
                for n in &sol.grid {
                    assert!(sol.profile.value(n.s) <= 1e-12);
                }
            }
        }
    }
}

#[test]
fn measure_lives_on_k() {
    let mut rng = common::rng(13);
    for trial in 0..100 {
        let prob = common::random_problem(&mut rng);
        let sol = solve(&prob, &GridSpec::default()).unwrap();
        let cell = sol.cell_size();
        let set = prob.set();
        for &r in &sol.support.atoms {
            assert!(set.distance(r) <= cell, "trial {trial}: atom at {r} off K");
        }
        for &[a, b] in &sol.support.density_intervals {
            assert!(set.distance(a) <= cell && set.distance(b) <= cell, "trial {trial}: density on [{a}, {b}]");
            let mid = 0.5 * (a + b);
            assert!(set.distance(mid) <= cell, "trial {trial}: density straddles a gap of K");
        }
    }
}

#[test]
fn raising_the_weight_raises_the_extremal_function() {
    let set = RadialSet::new(vec![[0.0, 1.0], [2.0, 3.0]]).unwrap();
    for dim in 1..=3 {
        let low = Problem::global(dim, RadialWeight::new(WeightKind::Power { a: 0.2, beta: 2.0, c: 0.0 }, set.clone()).unwrap()).unwrap();
        let high = Problem::global(dim, RadialWeight::new(WeightKind::Power { a: 0.4, beta: 2.0, c: 0.1 }, set.clone()).unwrap()).unwrap();
        let v1 = solve(&low, &GridSpec::default()).unwrap().profile;
        let v2 = solve(&high, &GridSpec::default()).unwrap().profile;
        for i in 0..=400 {
            let s = -10.0 + 16.0 * i as f64 / 400.0;
            assert!(v1.value(s) <= v2.value(s) + 1e-9, "dim {dim}: order fails at s = {s}");
        }
    }
}

#[test]
fn adding_a_constant_shifts_the_global_solution() {
    let set = RadialSet::shell(0.5, 2.0).unwrap();
    let base = |c: f64| {
        let w = RadialWeight::new(WeightKind::Power { a: -0.3, beta: 1.5, c }, set.clone()).unwrap();
        solve(&Problem::global(2, w).unwrap(), &GridSpec::default()).unwrap()
    };
    let (a, b) = (base(0.0), base(0.75));
    for i in 0..=200 {
        let s = -8.0 + 12.0 * i as f64 / 200.0;
        assert!((b.profile.value(s) - a.profile.value(s) - 0.75).abs() <= 1e-10);
    }
    assert_eq!(a.support, b.support);
}

#[test]
fn shrinking_the_relative_domain_raises_the_solution() {
    // restricting to a smaller ball only enlarges the competing class
    let set = RadialSet::shell(0.5, 1.0).unwrap();
    let w = RadialWeight::new(WeightKind::Power { a: 0.3, beta: 2.0, c: -1.0 }, set).unwrap();
    let radii = [1.5, 2.0, std::f64::consts::E, 5.0];
    let sols: Vec<_> = radii
        .iter()
        .map(|&r| solve(&Problem::relative(2, w.clone(), r).unwrap(), &GridSpec::default()).unwrap())
        .collect();
    for (k, pair) in sols.windows(2).enumerate() {
        let limit = s_of(radii[k]);
        for i in 0..=300 {
            let s = -12.0 + (limit + 12.0) * i as f64 / 300.0;
            assert!(pair[1].profile.value(s) <= pair[0].profile.value(s) + 1e-9, "R = {}: order fails at s = {s}", radii[k]);
        }
    }
}

#[test]
fn submean_check_is_policy_independent() {
    let g = GluedFunction::radial(2, 1.0, quadratic_profile(0.6, 1.0), log_ratio_profile(1.0)).unwrap();
    let a = submean_check(&g, 5000, (0.01, 0.2), 9, Exec::Sequential).unwrap();
    let b = submean_check(&g, 5000, (0.01, 0.2), 9, Exec::Parallel).unwrap();
    assert_eq!(a, b);
    assert!(a.violations > 0);
}

fn arb_problem() -> impl Strategy<Value = Problem> {
    (1usize..=4, 0.2f64..2.0, 0.05f64..1.5, -1.5f64..1.5, 0.5f64..3.0, any::<bool>()).prop_map(
        |(dim, a, width, coef, beta, ball)| {
            let lo = if ball { 0.0 } else { a };
            let set = RadialSet::new(vec![[lo, a + width]]).unwrap();
            let w = RadialWeight::new(WeightKind::Power { a: coef, beta, c: 0.0 }, set).unwrap();
            Problem::global(dim, w).unwrap()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn parallel_and_sequential_solutions_agree(prob in arb_problem()) {
        let seq = solve_with(&prob, &GridSpec::default(), Exec::Sequential).unwrap();
        let par = solve_with(&prob, &GridSpec::default(), Exec::Parallel).unwrap();
        prop_assert_eq!(&seq.profile, &par.profile);
        prop_assert_eq!(&seq.measure, &par.measure);
    }

    #[test]
    fn global_mass_is_lelong_mass(prob in arb_problem()) {
        let sol = solve(&prob, &GridSpec::default()).unwrap();
        let target = radeq::lelong_mass(prob.dim());
        prop_assert!((sol.measure.total() - target).abs() <= 1e-8 * target);
    }

    #[test]
    fn problem_documents_round_trip(prob in arb_problem()) {
        let text = serde_json::to_string(&prob).unwrap();
        let back: Problem = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, prob);
    }

    #[test]
    fn scaling_a_profile_scales_its_measure(lambda in 0.1f64..2.0, seed in any::<u64>(), dim in 1usize..=3) {
        let mut rng = common::rng(seed);
        let p = common::random_psh_profile(&mut rng, (-4.0, 3.0), 0.0, 0.5, true);
        let m = radeq::ma_cdf(&p, dim).unwrap();
        let ms = radeq::ma_cdf(&p.scale(lambda), dim).unwrap();
        let factor = lambda.powi(dim as i32);
        for t in [0.3, 0.9, 1.7, 4.0, 100.0] {
            prop_assert!((ms.cdf(t) - factor * m.cdf(t)).abs() <= 1e-9 * (1.0 + m.cdf(t)));
        }
    }
}
