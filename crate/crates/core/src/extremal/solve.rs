use std::collections::BTreeMap;

use super::checks::{contact_report, verify_domination_on};
use super::envelope::{lower_hull, skeleton};
use super::grid::{self, Grid, GridNode, GridSpec};
use super::{Diagnostics, Mode, Problem, SelfCheck, Solution};
use crate::measure::{default_tol, ma_cdf, support, RadialMeasure};
use crate::par::{self, Exec};
use crate::radial::{check_class, r_of, Curve, Knot, LeftTail, Piece, RadialProfile, Region};
use crate::{Error, Result};

/// Contact test between the linear skeleton and the weight.
const CONTACT_TOL: f64 = 1e-12;
/// Slope tolerance at curve junctions.
const JUNCTION_TOL: f64 = 1e-12;
/// Knots between linear pieces whose slopes agree this closely are merged.
const MERGE_TOL: f64 = 1e-13;
/// Contact tolerance used for the reported contact set.
const REPORT_CONTACT_TOL: f64 = 1e-9;

/// Solves in the problem's own mode.
pub fn solve(prob: &Problem, grid: &GridSpec) -> Result<Solution> {
    solve_with(prob, grid, Exec::default())
}

pub fn solve_global(prob: &Problem, grid: &GridSpec) -> Result<Solution> {
    if prob.mode() != Mode::Global {
        return Err(Error::domain("solve_global needs a global problem"));
    }
    solve(prob, grid)
}

pub fn solve_relative(prob: &Problem, grid: &GridSpec) -> Result<Solution> {
    if prob.mode() == Mode::Global {
        return Err(Error::domain("solve_relative needs a relative problem"));
    }
    solve(prob, grid)
}

/// Contact run on grid nodes `i..=j` following `curve`.
#[derive(Clone, Debug)]
struct Run {
    i: usize,
    j: usize,
    curve: Curve,
    region_lo: f64,
}

pub fn solve_with(prob: &Problem, spec: &GridSpec, exec: Exec) -> Result<Solution> {
    let grid = grid::build(prob, spec, exec)?;
    let nodes = &grid.nodes;
    let anchor = prob.anchor();
    if anchor.is_some() {
        if let Some(bad) = nodes.iter().find(|n| n.q > 0.0) {
            return Err(Error::domain(format!(
                "relative problems need Q <= 0 on K, but Q = {} at r = {}",
                bad.q,
                r_of(bad.s)
            )));
        }
    }

    let mut pts: Vec<(f64, f64)> = nodes.iter().map(|n| (n.s, n.q)).collect();
    if let Some(sa) = anchor {
        pts.push((sa, 0.0));
    }
    let (hull, pops) = lower_hull(&pts);
    let cap = if anchor.is_none() { Some(0.5) } else { None };
    let sk = skeleton(&pts, &hull, cap);
    let lin_pts: Vec<(f64, f64)> = sk.vertices.iter().map(|&v| pts[v]).collect();
    let lin = RadialProfile::piecewise_linear(&lin_pts, 0.0, sk.right_slope)?;
    let mut iterations = pops;

    let contact: Vec<bool> = nodes
        .iter()
        .map(|n| lin.value(n.s) >= n.q - CONTACT_TOL * n.q.abs().max(1.0))
        .collect();
    let regions = prob.weight().regions();
    let mut runs = contact_runs(nodes, &contact, &regions);
    for run in &mut runs {
        iterations += trim(run, nodes, &lin);
    }
    runs.retain(|r| r.j > r.i);

    let (mut knots, mut pieces, left) = assemble(&grid, &sk.vertices, &pts, &runs, anchor.is_some());
    iterations += refine_tangencies(&mut knots, &mut pieces, &left, nodes, &runs, cap);

    let profile = RadialProfile::new(knots, pieces, left, sk.right_slope)?.simplify(MERGE_TOL);
    let mut measure = ma_cdf(&profile, prob.dim())?;
    if let Mode::Relative(radius) = prob.mode() {
        measure = restrict_inside(&measure, radius)?;
    }
    let supp = support(&measure, default_tol(prob.dim()));
    let contact_set = contact_report(prob, nodes, &profile, grid.origin_start, REPORT_CONTACT_TOL);

    let max_violation = max_violation(prob, nodes, &profile, exec);
    let check_grid = domination_grid(nodes, anchor);
    let mut problems = Vec::new();
    let feasible = max_violation <= 1e-8;
    if !feasible {
        problems.push(format!("V exceeds Q by {max_violation:.3e} on the grid"));
    }
    let cell = cell_size(nodes);
    let support_in_contact = supp.is_subset_of(&contact_set, cell);
    if !support_in_contact {
        problems.push("support is not contained in the contact set".into());
    }
    let growth_ok = match prob.mode() {
        Mode::Global => check_class(&profile).in_l_plus,
        Mode::Relative(_) => {
            let sa = anchor.unwrap_or_default();
            let boundary = profile.value(sa).abs() <= 1e-9;
            let negative = nodes.iter().all(|n| profile.value(n.s) <= 1e-12);
            boundary && negative && check_class(&profile).is_psh_radial
        }
    };
    if !growth_ok {
        problems.push(match prob.mode() {
            Mode::Global => "V is not in L+".to_string(),
            Mode::Relative(_) => "U fails U(R) = 0 or U <= 0".to_string(),
        });
    }
    let domination_ok = match verify_domination_on(&profile, &profile, &measure, &check_grid, anchor) {
        Ok(rep) => rep.consistent,
        Err(e) => {
            problems.push(format!("domination check could not run: {e}"));
            false
        }
    };
    if !domination_ok {
        problems.push("self-domination failed".into());
    }

    let diagnostics = Diagnostics {
        grid_size: nodes.len(),
        min_spacing: grid.min_spacing,
        hull_vertices: hull.len(),
        iterations,
        max_violation,
        self_check: SelfCheck { feasible, support_in_contact, growth_ok, domination_ok, problems },
    };
    Ok(Solution {
        mode: prob.mode(),
        profile,
        contact_set,
        measure,
        support: supp,
        diagnostics,
        grid: grid.nodes,
    })
}

fn region_at(regions: &[Region], s: f64) -> usize {
    regions.partition_point(|r| r.hi <= s).min(regions.len() - 1)
}

/// Maximal chains of grid edges with both ends in contact, inside one
/// K-interval and one smooth region of the weight.
fn contact_runs(nodes: &[GridNode], contact: &[bool], regions: &[Region]) -> Vec<Run> {
    let mut runs: Vec<(usize, usize, usize)> = Vec::new();
    for k in 0..nodes.len().saturating_sub(1) {
        let (a, b) = (nodes[k], nodes[k + 1]);
        if !(contact[k] && contact[k + 1] && a.interval == b.interval) {
            continue;
        }
        let reg = region_at(regions, 0.5 * (a.s + b.s));
        match &regions[reg].curve {
            Some(c) if c.is_monotone() => {}
            _ => continue,
        }
        match runs.last_mut() {
            Some(last) if last.1 == k && last.2 == reg => last.1 = k + 1,
            _ => runs.push((k, k + 1, reg)),
        }
    }
    runs.into_iter()
        .map(|(i, j, reg)| Run {
            i,
            j,
            curve: regions[reg].curve.clone().expect("curved region"),
            region_lo: regions[reg].lo,
        })
        .collect()
}

/// Shrinks a run until its curve meets the skeleton convexly at both ends.
fn trim(run: &mut Run, nodes: &[GridNode], lin: &RadialProfile) -> usize {
    let mut steps = 0;
    while run.i < run.j && lin.slope_left(nodes[run.i].s) > run.curve.slope(nodes[run.i].s) + JUNCTION_TOL {
        run.i += 1;
        steps += 1;
    }
    while run.j > run.i && run.curve.slope(nodes[run.j].s) > lin.slope_right(nodes[run.j].s) + JUNCTION_TOL {
        run.j -= 1;
        steps += 1;
    }
    steps
}

/// Merges skeleton vertices and contact runs into knots and pieces.
fn assemble(
    grid: &Grid,
    vertices: &[usize],
    pts: &[(f64, f64)],
    runs: &[Run],
    has_anchor: bool,
) -> (Vec<Knot>, Vec<Piece>, LeftTail) {
    let nodes = &grid.nodes;
    let anchor_index = nodes.len();
    let mut tail: Option<&Run> = None;
    let mut values: BTreeMap<usize, f64> = vertices.iter().map(|&v| (v, pts[v].1)).collect();
    if !has_anchor {
        values.remove(&anchor_index);
    }
    let mut curved: BTreeMap<usize, &Run> = BTreeMap::new();
    for run in runs {
        values.retain(|&v, _| v <= run.i || v >= run.j);
        let tail_run = run.i == 0
            && grid.origin_start
            && run.region_lo == f64::NEG_INFINITY
            && run.curve.limit_slope() >= -JUNCTION_TOL
            && run.curve.limit_slope().is_finite();
        if tail_run {
            values.retain(|&v, _| v >= run.j);
            values.insert(run.j, nodes[run.j].q);
            tail = Some(run);
            continue;
        }
        let start = *values.entry(run.i).or_insert(nodes[run.i].q);
        values.insert(run.j, start + run.curve.increment(nodes[run.i].s, nodes[run.j].s));
        curved.insert(run.i, run);
    }
    let keys: Vec<usize> = values.keys().copied().collect();
    let s_of_key = |k: usize| pts[k].0;
    let knots: Vec<Knot> = keys.iter().map(|&k| Knot { s: s_of_key(k), value: values[&k] }).collect();
    let pieces: Vec<Piece> = keys
        .windows(2)
        .map(|w| match curved.get(&w[0]) {
            Some(run) if run.j == w[1] => Piece::Curved { curve: run.curve.clone() },
            _ => Piece::Linear,
        })
        .collect();
    let left = match tail {
        Some(run) => LeftTail::Curved { curve: run.curve.clone() },
        None => LeftTail::Linear { slope: 0.0 },
    };
    (knots, pieces, left)
}

/// Moves curve ends that meet a line of known slope (the flat prefix or the
/// slope cap ray) to the exact tangency point between grid nodes.
fn refine_tangencies(
    knots: &mut [Knot],
    pieces: &mut [Piece],
    left: &LeftTail,
    nodes: &[GridNode],
    runs: &[Run],
    cap: Option<f64>,
) -> usize {
    let mut steps = 0;
    let find_node = |s: f64| nodes.binary_search_by(|n| n.s.total_cmp(&s)).ok();

    // Last knot is the end of a curve, followed by the cap ray.
    if let (Some(cap), Some(Piece::Curved { curve })) = (cap, pieces.last()) {
        let last = knots.len() - 1;
        let s_j = knots[last].s;
        if let Some(j) = find_node(s_j) {
            let same_run = runs.iter().any(|r| r.j == j);
            if same_run && j + 1 < nodes.len() && nodes[j + 1].interval == nodes[j].interval {
                let s_next = nodes[j + 1].s;
                if curve.slope(s_j) < cap - JUNCTION_TOL && curve.slope(s_next) >= cap {
                    let s_t = solve_slope(curve, s_j, s_next, cap);
                    knots[last].value += curve.increment(s_j, s_t);
                    knots[last].s = s_t;
                    steps += 1;
                }
            }
        }
    }

    // First knot starts a curve right after the flat prefix.
    if matches!(left, LeftTail::Linear { .. }) {
        if let Some(Piece::Curved { curve }) = pieces.first() {
            let s_i = knots[0].s;
            if let Some(i) = find_node(s_i) {
                if i > 0 && nodes[i - 1].interval == nodes[i].interval {
                    let s_prev = nodes[i - 1].s;
                    if curve.slope(s_i) > JUNCTION_TOL && curve.slope(s_prev) <= 0.0 {
                        let s_t = solve_slope(curve, s_prev, s_i, 0.0);
                        knots[0].value -= curve.increment(s_t, s_i);
                        knots[0].s = s_t;
                        steps += 1;
                    }
                }
            }
        }
    }
    steps
}

/// Bisection for `curve.slope(s) = target` on `[a, b]` with a monotone slope.
fn solve_slope(curve: &Curve, mut a: f64, mut b: f64, target: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if curve.slope(m) < target {
            a = m;
        } else {
            b = m;
        }
    }
    a
}

fn restrict_inside(m: &RadialMeasure, radius: f64) -> Result<RadialMeasure> {
    let atoms = m.atoms().iter().copied().filter(|a| a.radius < radius * (1.0 - 1e-12)).collect();
    let segments = m.segments().iter().filter(|s| s.lo < radius).cloned().collect();
    RadialMeasure::new(m.dim(), m.origin_mass(), atoms, segments)
}

fn max_violation(prob: &Problem, nodes: &[GridNode], profile: &RadialProfile, exec: Exec) -> f64 {
    let mut probes: Vec<(f64, Option<f64>)> = nodes.iter().map(|n| (n.s, Some(n.q))).collect();
    for w in nodes.windows(2) {
        if w[0].interval == w[1].interval {
            probes.push((0.5 * (w[0].s + w[1].s), None));
        }
    }
    let weight = prob.weight();
    par::map_slice(exec, &probes, |&(s, q)| {
        let q = q.unwrap_or_else(|| weight.value_s(s));
        (profile.value(s) - q).max(0.0)
    })
    .into_iter()
    .fold(0.0, f64::max)
}

/// Grid for the domination checks: the constraint grid plus a coarse sweep
/// beyond K.
fn domination_grid(nodes: &[GridNode], anchor: Option<f64>) -> Vec<f64> {
    let mut g: Vec<f64> = nodes.iter().map(|n| n.s).collect();
    let first = g[0];
    let last = anchor.unwrap_or(g[g.len() - 1] + 10.0);
    let steps = 400;
    for i in 0..=steps {
        g.push(first + (last - first) * i as f64 / steps as f64);
    }
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

/// One grid cell in radius, as used for set comparisons.
pub(crate) fn cell_size(nodes: &[GridNode]) -> f64 {
    let mut cell: f64 = 0.0;
    for w in nodes.windows(2) {
        if w[0].interval == w[1].interval {
            cell = cell.max(r_of(w[1].s) - r_of(w[0].s));
        }
    }
    cell.max(1e-12)
}
