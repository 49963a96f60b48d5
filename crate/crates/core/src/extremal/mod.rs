//! Weighted extremal functions of radial problems.
//!
//! In s-coordinates `V_{K,Q}` is the largest convex nondecreasing function
//! below `Q~` on the log-image of `K` with terminal slope at most 1/2; the
//! relative function `U_{K,Q,Omega}` replaces the slope cap by the anchor
//! `U(log R^2) = 0`. Both are computed as lower convex hulls of constraint
//! points, with the weight's own curve substituted wherever the hull is in
//! contact with a smooth part of the weight.

mod checks;
mod envelope;
mod grid;
mod solve;

use serde::{Deserialize, Serialize};

use crate::measure::{RadialMeasure, SupportReport};
use crate::radial::{s_of, RadialProfile, RadialSet, RadialWeight};
use crate::{Error, Result};

pub use checks::{
    boundary_support_check, compare_abs_continuity, contact_set, verify_domination,
    verify_relative_domination, AbsContinuity, BoundaryReport, DominationReport, LaplacianSign,
};
pub use grid::{GridNode, GridSpec};
pub use solve::{solve, solve_global, solve_relative, solve_with};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Global,
    /// Relative to the ball of the given radius.
    Relative(f64),
}

/// A radial weighted extremal problem; `K` is the weight's domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProblemDoc", into = "ProblemDoc")]
pub struct Problem {
    dim: usize,
    weight: RadialWeight,
    mode: Mode,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemDoc {
    dim: usize,
    weight: RadialWeight,
    mode: Mode,
}

impl TryFrom<ProblemDoc> for Problem {
    type Error = Error;
    fn try_from(doc: ProblemDoc) -> Result<Self> {
        Problem::new(doc.dim, doc.weight, doc.mode)
    }
}

impl From<Problem> for ProblemDoc {
    fn from(p: Problem) -> Self {
        ProblemDoc { dim: p.dim, weight: p.weight, mode: p.mode }
    }
}

impl Problem {
    pub fn new(dim: usize, weight: RadialWeight, mode: Mode) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("dimension must be positive"));
        }
        if let Mode::Relative(radius) = mode {
            let k_max = weight.domain().max_radius();
            if !(radius.is_finite() && radius > k_max) {
                return Err(Error::domain(format!(
                    "relative domain radius {radius} must exceed every radius of K (max {k_max})"
                )));
            }
        }
        Ok(Problem { dim, weight, mode })
    }

    pub fn global(dim: usize, weight: RadialWeight) -> Result<Self> {
        Self::new(dim, weight, Mode::Global)
    }

    pub fn relative(dim: usize, weight: RadialWeight, radius: f64) -> Result<Self> {
        Self::new(dim, weight, Mode::Relative(radius))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weight(&self) -> &RadialWeight {
        &self.weight
    }

    pub fn set(&self) -> &RadialSet {
        self.weight.domain()
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub(crate) fn anchor(&self) -> Option<f64> {
        match self.mode {
            Mode::Global => None,
            Mode::Relative(r) => Some(s_of(r)),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SelfCheck {
    /// `V <= Q` on grid points and midpoints within 1e-8.
    pub feasible: bool,
    /// Support inside the contact set at grid resolution.
    pub support_in_contact: bool,
    /// Global: `V` in `L+`. Relative: `U(R) = 0` and `U <= 0` on K.
    pub growth_ok: bool,
    /// `V` dominates itself through its own measure.
    pub domination_ok: bool,
    pub problems: Vec<String>,
}

impl SelfCheck {
    pub fn passed(&self) -> bool {
        self.feasible && self.support_in_contact && self.growth_ok && self.domination_ok
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub grid_size: usize,
    /// Smallest grid spacing in s.
    pub min_spacing: f64,
    pub hull_vertices: usize,
    /// Hull pops plus junction and tangency adjustments.
    pub iterations: usize,
    /// `max (V - Q)^+` over grid points and midpoints.
    pub max_violation: f64,
    pub self_check: SelfCheck,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub mode: Mode,
    pub profile: RadialProfile,
    /// Where `V >= Q` on K (the set `S_w*` intersected with K).
    pub contact_set: SupportReport,
    pub measure: RadialMeasure,
    pub support: SupportReport,
    pub diagnostics: Diagnostics,
    /// Constraint grid the solution was computed on.
    #[serde(skip)]
    pub grid: Vec<GridNode>,
}

impl Solution {
    /// s-coordinates of the constraint grid.
    pub fn grid_s(&self) -> Vec<f64> {
        self.grid.iter().map(|n| n.s).collect()
    }

    /// Largest grid step in radius inside one component of K.
    pub fn cell_size(&self) -> f64 {
        solve::cell_size(&self.grid)
    }
}
