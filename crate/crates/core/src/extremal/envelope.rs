//! Lower convex hulls of sorted point sets and the slope-constrained
//! skeleton built from them.

/// Andrew's monotone chain, lower part only. `pts` must be sorted by
/// strictly increasing x. Returns vertex indices and the number of pops.
pub(crate) fn lower_hull(pts: &[(f64, f64)]) -> (Vec<usize>, usize) {
    let mut hull: Vec<usize> = Vec::with_capacity(pts.len());
    let mut pops = 0;
    for (k, &p) in pts.iter().enumerate() {
        while hull.len() >= 2 {
            let o = pts[hull[hull.len() - 2]];
            let a = pts[hull[hull.len() - 1]];
            if turns_left(o, a, p) {
                break;
            }
            hull.pop();
            pops += 1;
        }
        hull.push(k);
    }
    (hull, pops)
}

/// Strict counter-clockwise turn at `a`, with a relative collinearity
/// tolerance so that points on a common line are dropped.
fn turns_left(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> bool {
    let (ax, ay) = (a.0 - o.0, a.1 - o.1);
    let (bx, by) = (b.0 - o.0, b.1 - o.1);
    let cross = ax * by - ay * bx;
    let scale = ax.hypot(ay) * bx.hypot(by);
    cross > 1e-15 * scale
}

/// Hull vertices kept after the slope constraints, with the final slope.
#[derive(Debug, PartialEq)]
pub(crate) struct Skeleton {
    pub vertices: Vec<usize>,
    pub right_slope: f64,
}

/// Restricts the hull to slopes in `[0, cap]`: the negative-slope prefix is
/// flattened to the minimum, and with a cap the envelope leaves along a ray
/// of slope `cap` from the first vertex whose outgoing edge is steeper.
/// Without a cap the last edge slope continues to the right.
pub(crate) fn skeleton(pts: &[(f64, f64)], hull: &[usize], cap: Option<f64>) -> Skeleton {
    let slope = |j: usize| {
        let (a, b) = (pts[hull[j]], pts[hull[j + 1]]);
        (b.1 - a.1) / (b.0 - a.0)
    };
    let edges = hull.len().saturating_sub(1);
    let first = (0..edges).find(|&j| slope(j) >= 0.0).unwrap_or(edges);
    match cap {
        Some(cap) => {
            let last = (first..edges).find(|&j| slope(j) > cap).unwrap_or(edges);
            Skeleton { vertices: hull[first..=last].to_vec(), right_slope: cap }
        }
        None => {
            let right_slope = if first < edges { slope(edges - 1) } else { 0.0 };
            Skeleton { vertices: hull[first..].to_vec(), right_slope }
        }
    }
}
