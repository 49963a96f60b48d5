use serde::{Deserialize, Serialize};

use super::coord::s_of;
use crate::{Error, Result};

/// A radially symmetric compact set: a finite union of closed radius
/// intervals `[a, b]`. Spheres are degenerate intervals `a = b`; an interval
/// starting at `0` is a closed ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct RadialSet {
    intervals: Vec<[f64; 2]>,
}

impl TryFrom<Vec<[f64; 2]>> for RadialSet {
    type Error = Error;
    fn try_from(intervals: Vec<[f64; 2]>) -> Result<Self> {
        RadialSet::new(intervals)
    }
}

impl From<RadialSet> for Vec<[f64; 2]> {
    fn from(set: RadialSet) -> Self {
        set.intervals
    }
}

impl RadialSet {
    pub fn new(intervals: Vec<[f64; 2]>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::structural("radial set must be nonempty"));
        }
        for [a, b] in &intervals {
            if !(a.is_finite() && b.is_finite()) || *a < 0.0 || a > b {
                return Err(Error::structural(format!("invalid radius interval [{a}, {b}]")));
            }
        }
        for w in intervals.windows(2) {
            if w[0][1] >= w[1][0] {
                return Err(Error::structural(format!(
                    "intervals must be sorted and disjoint: [{}, {}] then [{}, {}]",
                    w[0][0], w[0][1], w[1][0], w[1][1]
                )));
            }
        }
        // A set of radius zero is just the origin, which is pluripolar.
        if intervals.iter().all(|iv| iv[1] <= 0.0) {
            return Err(Error::structural("set is pluripolar: it contains no sphere of positive radius"));
        }
        Ok(RadialSet { intervals })
    }

    pub fn ball(radius: f64) -> Result<Self> {
        Self::new(vec![[0.0, radius]])
    }

    pub fn shell(inner: f64, outer: f64) -> Result<Self> {
        Self::new(vec![[inner, outer]])
    }

    pub fn sphere(radius: f64) -> Result<Self> {
        Self::new(vec![[radius, radius]])
    }

    pub fn intervals(&self) -> &[[f64; 2]] {
        &self.intervals
    }

    pub fn includes_origin(&self) -> bool {
        self.intervals[0][0] == 0.0
    }

    pub fn has_interior(&self) -> bool {
        self.intervals.iter().any(|[a, b]| b > a)
    }

    pub fn max_radius(&self) -> f64 {
        self.intervals[self.intervals.len() - 1][1]
    }

    /// Positive radius of the innermost sphere in the set.
    pub fn min_positive_radius(&self) -> f64 {
        let [a, b] = self.intervals[0];
        if a > 0.0 {
            a
        } else {
            // b > 0 when a = 0 unless the first interval is the origin alone
            if b > 0.0 {
                b
            } else {
                self.intervals[1][0]
            }
        }
    }

    /// Intervals in s = log r^2; the origin maps to `-inf`.
    pub fn log_image(&self) -> Vec<(f64, f64)> {
        self.intervals.iter().map(|&[a, b]| (s_of(a), s_of(b))).collect()
    }

    /// Radii of the topological boundary in `C^n`.
    pub fn boundary_radii(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for &[a, b] in &self.intervals {
            if a > 0.0 {
                out.push(a);
            }
            if (b > a || a > 0.0) && out.last() != Some(&b) {
                out.push(b);
            }
        }
        out
    }

    /// Interiors as open radius intervals (the origin belongs to the
    /// interior of a ball component).
    pub fn interior(&self) -> Vec<(f64, f64)> {
        self.intervals.iter().filter(|[a, b]| b > a).map(|&[a, b]| (a, b)).collect()
    }

    pub fn contains(&self, r: f64) -> bool {
        self.intervals.iter().any(|&[a, b]| a <= r && r <= b)
    }

    /// Distance from `r` to the set.
    pub fn distance(&self, r: f64) -> f64 {
        self.intervals
            .iter()
            .map(|&[a, b]| if r < a { a - r } else if r > b { r - b } else { 0.0 })
            .fold(f64::INFINITY, f64::min)
    }
}
