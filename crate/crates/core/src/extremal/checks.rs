use serde::{Deserialize, Serialize};

use super::grid::{self, GridNode, GridSpec};
use super::{solve, Problem, Solution};
use crate::measure::{default_tol, support, RadialMeasure, SupportReport};
use crate::par::Exec;
use crate::radial::{check_class, r_of, s_of, RadialProfile, WeightKind};
use crate::{Error, Result};

/// Violation allowed by the domination checks.
const DOMINATION_TOL: f64 = 1e-10;

/// Contact set `{V >= Q - tol}` on K at grid resolution, as intervals
/// (runs of contact points) and isolated radii.
pub fn contact_set(sol: &Solution, prob: &Problem, tol: f64) -> Result<SupportReport> {
    let rebuilt;
    let nodes: &[GridNode] = if sol.grid.is_empty() {
        rebuilt = grid::build(prob, &GridSpec::default(), Exec::default())?.nodes;
        &rebuilt
    } else {
        &sol.grid
    };
    Ok(contact_report(prob, nodes, &sol.profile, prob.set().includes_origin(), tol))
}

pub(crate) fn contact_report(
    prob: &Problem,
    nodes: &[GridNode],
    profile: &RadialProfile,
    origin_start: bool,
    tol: f64,
) -> SupportReport {
    let image = prob.set().log_image();
    let s_first = nodes.first().map_or(f64::NEG_INFINITY, |n| n.s);
    let mut pts: Vec<(f64, f64, usize)> = nodes.iter().map(|n| (n.s, n.q, n.interval)).collect();
    for k in profile.knots() {
        if let Some(idx) = image.iter().position(|&(lo, hi)| lo.max(s_first) <= k.s && k.s <= hi) {
            pts.push((k.s, prob.weight().value_s(k.s), idx));
        }
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.dedup_by(|b, a| a.0 == b.0);
    let touching: Vec<bool> =
        pts.iter().map(|&(s, q, _)| profile.value(s) >= q - tol * q.abs().max(1.0)).collect();

    let mut report = SupportReport::default();
    let mut k = 0;
    while k < pts.len() {
        if !touching[k] {
            k += 1;
            continue;
        }
        let start = k;
        while k + 1 < pts.len() && touching[k + 1] && pts[k + 1].2 == pts[start].2 {
            k += 1;
        }
        let lo = if start == 0 && origin_start { 0.0 } else { r_of(pts[start].0) };
        let hi = r_of(pts[k].0);
        if k == start && lo > 0.0 {
            report.atoms.push(hi);
        } else {
            report.density_intervals.push([lo, hi]);
        }
        k += 1;
    }
    report
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    /// `u <= v` at every support point of the measure.
    pub premise_holds: bool,
    pub support_violation: f64,
    /// `max (u - v)` over the whole grid.
    pub max_violation: f64,
    /// Premise false, or premise true and `u <= v` everywhere on the grid.
    pub consistent: bool,
    pub points_checked: usize,
}

/// Domination principle check for `u` in `L` against `v` in `L+` with
/// `m = (dd^c v)^n`: if `u <= v` on the support of `m`, then `u <= v` on the
/// whole grid (s-coordinates).
pub fn verify_domination(
    candidate: &RadialProfile,
    v: &RadialProfile,
    m: &RadialMeasure,
    grid: &[f64],
) -> Result<DominationReport> {
    if !check_class(candidate).in_l {
        return Err(Error::domain("candidate is not in the Lelong class L"));
    }
    if !check_class(v).in_l_plus {
        return Err(Error::domain("dominating function is not in L+"));
    }
    verify_domination_on(candidate, v, m, grid, None)
}

/// Relative version on the ball of radius `radius`: `u` plurisubharmonic and
/// nonpositive there, `v` its relative extremal profile.
pub fn verify_relative_domination(
    candidate: &RadialProfile,
    v: &RadialProfile,
    m: &RadialMeasure,
    grid: &[f64],
    radius: f64,
) -> Result<DominationReport> {
    let sa = s_of(radius);
    if !check_class(candidate).is_psh_radial || candidate.value(sa) > 1e-12 {
        return Err(Error::domain("candidate is not plurisubharmonic and nonpositive on the domain"));
    }
    if !check_class(v).is_psh_radial || v.value(sa).abs() > 1e-9 {
        return Err(Error::domain("dominating function does not vanish on the boundary"));
    }
    verify_domination_on(candidate, v, m, grid, Some(sa))
}

pub(crate) fn verify_domination_on(
    u: &RadialProfile,
    v: &RadialProfile,
    m: &RadialMeasure,
    grid: &[f64],
    anchor: Option<f64>,
) -> Result<DominationReport> {
    let limit = anchor.unwrap_or(f64::INFINITY);
    let grid: Vec<f64> = grid.iter().copied().filter(|&s| s <= limit).collect();
    let rep = support(m, default_tol(m.dim()));
    let mut on_support: Vec<f64> = rep.atoms.iter().map(|&r| s_of(r)).collect();
    for &[a, b] in &rep.density_intervals {
        let (sa, sb) = (s_of(a), s_of(b));
        if sa.is_finite() {
            on_support.push(sa);
        }
        on_support.push(sb);
        on_support.extend(grid.iter().copied().filter(|&s| sa <= s && s <= sb));
    }
    let diff = |s: f64| {
        let d = u.value(s) - v.value(s);
        if d.is_nan() {
            0.0
        } else {
            d
        }
    };
    let support_violation = on_support.iter().map(|&s| diff(s)).fold(f64::NEG_INFINITY, f64::max);
    let premise_holds = support_violation <= DOMINATION_TOL;
    let max_violation = grid
        .iter()
        .chain(on_support.iter())
        .map(|&s| diff(s))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(DominationReport {
        premise_holds,
        support_violation,
        max_violation,
        consistent: !premise_holds || max_violation <= DOMINATION_TOL,
        points_checked: grid.len() + on_support.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbsContinuity {
    pub m1_ll_m2: bool,
    pub m2_ll_m1: bool,
}

/// Set-level absolute continuity: `m1 << m2` fails when `m1` puts more than
/// `tol` on an atom `m2` lacks, or on radii outside `m2`'s density intervals.
pub fn compare_abs_continuity(m1: &RadialMeasure, m2: &RadialMeasure, tol: f64) -> AbsContinuity {
    AbsContinuity { m1_ll_m2: dominated_by(m1, m2, tol), m2_ll_m1: dominated_by(m2, m1, tol) }
}

fn dominated_by(a: &RadialMeasure, b: &RadialMeasure, tol: f64) -> bool {
    let sb = support(b, tol);
    if a.origin_mass() > tol && sb.origin_mass == 0.0 {
        return false;
    }
    let same = |x: f64, y: f64| (x - y).abs() <= 1e-9 * x.max(1.0);
    for atom in a.atoms().iter().filter(|at| at.mass > tol) {
        if !sb.atoms.iter().any(|&r| same(r, atom.radius)) {
            return false;
        }
    }
    let mut uncovered = 0.0;
    for seg in a.segments() {
        let mut x = seg.lo;
        for &[c, d] in &sb.density_intervals {
            if d <= x || c >= seg.hi {
                continue;
            }
            if c > x {
                uncovered += seg.increment(c) - seg.increment(x);
            }
            x = x.max(d);
        }
        if x < seg.hi {
            uncovered += seg.increment(seg.hi) - seg.increment(x);
        }
    }
    uncovered <= tol
}

/// Sign of the radial Laplacian `(r^{2n-1} Q'(r))'` in the interior of K.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaplacianSign {
    Superharmonic,
    Harmonic,
    /// `alpha log r` with `alpha > 0` in dimension `n >= 2`: plurisubharmonic
    /// and maximal, though not harmonic.
    MaximalPsh,
    Subharmonic,
    Indefinite,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryReport {
    pub classification: LaplacianSign,
    /// Superharmonic, harmonic or maximal weights, for which the support must
    /// lie on the boundary of K.
    pub applies: bool,
    pub support_on_boundary: bool,
    /// `Some(support_on_boundary)` when the proposition applies.
    pub holds: Option<bool>,
    pub boundary_radii: Vec<f64>,
    pub support: SupportReport,
}

pub fn boundary_support_check(prob: &Problem) -> Result<BoundaryReport> {
    let set = prob.set();
    if !set.has_interior() {
        return Err(Error::domain("K has no interior"));
    }
    let classification = classify(prob)?;
    let applies = matches!(
        classification,
        LaplacianSign::Superharmonic | LaplacianSign::Harmonic | LaplacianSign::MaximalPsh
    );
    let sol = solve(prob, &GridSpec::default())?;
    let boundary = set.boundary_radii();
    let on_boundary = sol.support.density_intervals.is_empty()
        && sol.support.origin_mass == 0.0
        && sol
            .support
            .atoms
            .iter()
            .all(|&r| boundary.iter().any(|&b| (b - r).abs() <= 1e-9 * b.max(1.0)));
    Ok(BoundaryReport {
        classification,
        applies,
        support_on_boundary: on_boundary,
        holds: applies.then_some(on_boundary),
        boundary_radii: boundary,
        support: sol.support,
    })
}

fn classify(prob: &Problem) -> Result<LaplacianSign> {
    let n = prob.dim() as f64;
    let (alpha, a, beta) = match prob.weight().kind() {
        WeightKind::Constant { .. } => return Ok(LaplacianSign::Harmonic),
        WeightKind::ScaledLog { alpha, .. } => (*alpha, 0.0, 1.0),
        WeightKind::Power { a, beta, .. } => (0.0, *a, *beta),
        WeightKind::LogPower { alpha, a, beta, .. } => (*alpha, *a, *beta),
        WeightKind::Table { .. } | WeightKind::ScaledProfile { .. } => {
            return Err(Error::Unsupported(
                "Laplacian sign needs a closed-form twice differentiable weight".into(),
            ))
        }
    };
    if a == 0.0 && alpha > 0.0 && prob.dim() >= 2 {
        return Ok(LaplacianSign::MaximalPsh);
    }
    // r^2 L(r) = alpha (2n - 2) + a beta (2n + beta - 2) r^beta
    let lap = |r: f64| alpha * (2.0 * n - 2.0) + a * beta * (2.0 * n + beta - 2.0) * r.powf(beta);
    let scale = alpha.abs() + (a * beta).abs();
    let (mut neg, mut pos) = (false, false);
    for (lo, hi) in prob.set().interior() {
        let lo = if lo == 0.0 { hi * 1e-6 } else { lo };
        for i in 1..256 {
            let r = lo + (hi - lo) * i as f64 / 256.0;
            let v = lap(r);
            if v < -1e-12 * scale {
                neg = true;
            } else if v > 1e-12 * scale {
                pos = true;
            }
        }
    }
    Ok(match (neg, pos) {
        (false, false) => LaplacianSign::Harmonic,
        (true, false) => LaplacianSign::Superharmonic,
        (false, true) => LaplacianSign::Subharmonic,
        (true, true) => LaplacianSign::Indefinite,
    })
}
