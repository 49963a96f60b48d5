use serde::{Deserialize, Serialize};

use super::Problem;
use crate::par::{self, Exec};
use crate::radial::s_of;
use crate::{Error, Result};

/// Base spacing in s where the weight is affine.
const BASE_SPACING: f64 = 0.01;
/// Target for the envelope error `h^2 sup|Q''| / 8`.
const ENVELOPE_TOL: f64 = 1e-8;
const BLOCK: f64 = 0.5;
const MAX_NODES: usize = 2_000_000;

/// Grid resolution. The default is adaptive; `points` forces a uniform grid
/// of that many points over `[s_min, s_max]` (interval ends and spheres are
/// always kept, weight kinks are not inserted).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default)]
    pub s_min: Option<f64>,
    #[serde(default)]
    pub s_max: Option<f64>,
    #[serde(default)]
    pub points: Option<usize>,
}

impl GridSpec {
    pub fn uniform(points: usize) -> Self {
        GridSpec { points: Some(points), ..Default::default() }
    }
}

/// A constraint point `(s, Q~(s))` on the log-image of K.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridNode {
    pub s: f64,
    pub q: f64,
    /// Index of the K-interval the node belongs to.
    pub interval: usize,
}

pub(crate) struct Grid {
    pub nodes: Vec<GridNode>,
    /// Node 0 stands in for the origin (start of a ball component).
    pub origin_start: bool,
    pub min_spacing: f64,
}

pub(crate) fn default_s_min(prob: &Problem) -> f64 {
    (-40f64).min(s_of(prob.set().min_positive_radius()) - 10.0)
}

pub(crate) fn build(prob: &Problem, spec: &GridSpec, exec: Exec) -> Result<Grid> {
    let set = prob.set();
    let weight = prob.weight();
    let s_min = spec.s_min.unwrap_or_else(|| default_s_min(prob));
    let image = set.log_image();
    let mut raw: Vec<(f64, usize)> = Vec::new();

    for (idx, &(lo, hi)) in image.iter().enumerate() {
        let lo = if lo == f64::NEG_INFINITY {
            if s_min >= hi {
                return Err(Error::domain(format!("grid start {s_min} does not reach into the ball of K")));
            }
            s_min
        } else {
            if spec.s_min.is_some() && s_min > lo {
                return Err(Error::domain(format!("grid start {s_min} does not cover s = {lo}")));
            }
            lo
        };
        if lo == hi {
            raw.push((lo, idx));
            continue;
        }
        if spec.points.is_some() {
            raw.push((lo, idx));
            raw.push((hi, idx));
            continue;
        }
        let mut cuts = vec![lo];
        cuts.extend(weight.kinks().into_iter().filter(|&k| k > lo && k < hi));
        cuts.push(hi);
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let blocks = ((b - a) / BLOCK).ceil().max(1.0) as usize;
            for j in 0..blocks {
                let ba = a + (b - a) * j as f64 / blocks as f64;
                let bb = if j + 1 == blocks { b } else { a + (b - a) * (j + 1) as f64 / blocks as f64 };
                let bound = weight.curvature_bound(ba, bb);
                let h = if bound > 0.0 {
                    BASE_SPACING.min((8.0 * ENVELOPE_TOL / bound).sqrt())
                } else {
                    BASE_SPACING
                };
                let count = ((bb - ba) / h).ceil().max(1.0);
                if !(count.is_finite() && (raw.len() as f64 + count) < MAX_NODES as f64) {
                    return Err(Error::domain("weight curvature too large for the grid budget"));
                }
                let count = count as usize;
                for i in 0..count {
                    raw.push((ba + (bb - ba) * i as f64 / count as f64, idx));
                }
            }
            raw.push((b, idx));
        }
    }

    if let Some(points) = spec.points {
        if points < 2 {
            return Err(Error::domain("a uniform grid needs at least two points"));
        }
        let s_hi = spec.s_max.unwrap_or_else(|| s_of(set.max_radius()));
        for i in 0..points {
            let s = s_min + (s_hi - s_min) * i as f64 / (points - 1) as f64;
            let near_end = |e: f64| (s - e).abs() <= 1e-9 * (1.0 + s.abs());
            if image.iter().any(|&(lo, hi)| near_end(lo) || near_end(hi)) {
                continue;
            }
            if let Some(idx) = image.iter().position(|&(lo, hi)| lo.max(s_min) <= s && s <= hi) {
                raw.push((s, idx));
            }
        }
    }

    raw.sort_by(|a, b| a.0.total_cmp(&b.0));
    raw.dedup_by(|b, a| b.0 == a.0);
    let values = par::map_slice(exec, &raw, |&(s, _)| weight.value_s(s));
    let mut nodes = Vec::with_capacity(raw.len());
    for (&(s, interval), q) in raw.iter().zip(values) {
        if q == f64::NEG_INFINITY || q.is_nan() {
            return Err(Error::inadmissible(format!("weight is unbounded below on K near s = {s}")));
        }
        if !q.is_finite() {
            return Err(Error::inadmissible(format!("weight is not finite on K at s = {s}")));
        }
        nodes.push(GridNode { s, q, interval });
    }
    let min_spacing = nodes
        .windows(2)
        .filter(|w| w[0].interval == w[1].interval)
        .map(|w| w[1].s - w[0].s)
        .fold(f64::INFINITY, f64::min);
    // spheres only: no spacing to report
    let min_spacing = if min_spacing.is_finite() { min_spacing } else { 0.0 };
    Ok(Grid { origin_start: set.includes_origin(), nodes, min_spacing })
}
