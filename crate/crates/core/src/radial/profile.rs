use serde::{Deserialize, Serialize};

use super::coord::s_of;
use super::curve::Curve;
use crate::{Error, Result, SLOPE_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Knot {
    pub s: f64,
    pub value: f64,
}

/// Shape of the profile between two consecutive knots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Piece {
    Linear,
    Curved { curve: Curve },
}

/// Shape of the profile left of the first knot, down to `s = -inf`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LeftTail {
    Linear { slope: f64 },
    Curved { curve: Curve },
}

/// A radial function `u(z) = p(log|z|^2)` encoded by its profile `p`.
///
/// Knots are strictly increasing in `s`; between knots the profile is either
/// affine or follows a [`Curve`]. Right of the last knot it is affine with
/// `right_slope`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileDoc", into = "ProfileDoc")]
pub struct RadialProfile {
    knots: Vec<Knot>,
    pieces: Vec<Piece>,
    left: LeftTail,
    right_slope: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileDoc {
    knots: Vec<[f64; 2]>,
    #[serde(default)]
    pieces: Option<Vec<Piece>>,
    left: LeftTail,
    right_slope: f64,
}

impl TryFrom<ProfileDoc> for RadialProfile {
    type Error = Error;
    fn try_from(doc: ProfileDoc) -> Result<Self> {
        let knots: Vec<Knot> = doc.knots.iter().map(|k| Knot { s: k[0], value: k[1] }).collect();
        let pieces = doc
            .pieces
            .unwrap_or_else(|| vec![Piece::Linear; knots.len().saturating_sub(1)]);
        RadialProfile::new(knots, pieces, doc.left, doc.right_slope)
    }
}

impl From<RadialProfile> for ProfileDoc {
    fn from(p: RadialProfile) -> Self {
        let all_linear = p.pieces.iter().all(|piece| *piece == Piece::Linear);
        ProfileDoc {
            knots: p.knots.iter().map(|k| [k.s, k.value]).collect(),
            pieces: if all_linear { None } else { Some(p.pieces) },
            left: p.left,
            right_slope: p.right_slope,
        }
    }
}

/// Class memberships of a radial profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassFlags {
    /// Convex and nondecreasing in s, i.e. the radial function is plurisubharmonic.
    pub is_psh_radial: bool,
    /// Lelong class: plurisubharmonic with `right_slope <= 1/2`.
    pub in_l: bool,
    /// Lelong class with exact logarithmic growth, `right_slope = 1/2`.
    pub in_l_plus: bool,
    /// Finite at the origin.
    pub bounded_below: bool,
}

impl RadialProfile {
    pub fn new(knots: Vec<Knot>, pieces: Vec<Piece>, left: LeftTail, right_slope: f64) -> Result<Self> {
        let p = Self::from_parts(knots, pieces, left, right_slope)?;
        p.check_consistency()?;
        Ok(p)
    }

    /// Validates structure but skips the value consistency check of curved
    /// pieces. For builders that compute knot values from the curves.
    pub(crate) fn from_parts(
        knots: Vec<Knot>,
        pieces: Vec<Piece>,
        left: LeftTail,
        right_slope: f64,
    ) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::structural("profile needs at least one knot"));
        }
        if pieces.len() + 1 != knots.len() {
            return Err(Error::structural(format!(
                "{} knots need {} pieces, got {}",
                knots.len(),
                knots.len() - 1,
                pieces.len()
            )));
        }
        for k in &knots {
            if !(k.s.is_finite() && k.value.is_finite()) {
                return Err(Error::structural("knots must be finite"));
            }
        }
        for w in knots.windows(2) {
            if w[1].s <= w[0].s {
                return Err(Error::structural(format!(
                    "breakpoints must be strictly increasing in s ({} then {})",
                    w[0].s, w[1].s
                )));
            }
        }
        if !right_slope.is_finite() {
            return Err(Error::structural("right slope must be finite"));
        }
        match &left {
            LeftTail::Linear { slope } if !slope.is_finite() => {
                return Err(Error::structural("left slope must be finite"));
            }
            LeftTail::Curved { curve } => curve.validate()?,
            _ => {}
        }
        for piece in &pieces {
            if let Piece::Curved { curve } = piece {
                curve.validate()?;
            }
        }
        Ok(RadialProfile { knots, pieces, left, right_slope })
    }

    fn check_consistency(&self) -> Result<()> {
        for (i, piece) in self.pieces.iter().enumerate() {
            if let Piece::Curved { curve } = piece {
                let (a, b) = (self.knots[i], self.knots[i + 1]);
                let predicted = a.value + curve.increment(a.s, b.s);
                if (predicted - b.value).abs() > 1e-7 * (1.0 + b.value.abs()) {
                    return Err(Error::structural(format!(
                        "curved piece on [{}, {}] integrates to {} but knot value is {}",
                        a.s, b.s, predicted, b.value
                    )));
                }
            }
        }
        Ok(())
    }

    /// Piecewise-linear profile through `(s_i, v_i)`.
    pub fn piecewise_linear(breakpoints: &[(f64, f64)], left_slope: f64, right_slope: f64) -> Result<Self> {
        let knots = breakpoints.iter().map(|&(s, value)| Knot { s, value }).collect::<Vec<_>>();
        let pieces = vec![Piece::Linear; knots.len().saturating_sub(1)];
        Self::from_parts(knots, pieces, LeftTail::Linear { slope: left_slope }, right_slope)
    }

    pub fn constant(c: f64) -> Self {
        RadialProfile {
            knots: vec![Knot { s: 0.0, value: c }],
            pieces: vec![],
            left: LeftTail::Linear { slope: 0.0 },
            right_slope: 0.0,
        }
    }

    /// `max(log|z|, log r1)`, equivalently a single kink at `s = log r1^2`.
    pub fn log_max(r1: f64) -> Self {
        RadialProfile {
            knots: vec![Knot { s: s_of(r1), value: r1.ln() }],
            pieces: vec![],
            left: LeftTail::Linear { slope: 0.0 },
            right_slope: 0.5,
        }
    }

    pub fn knots(&self) -> &[Knot] {
        &self.knots
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn left_tail(&self) -> &LeftTail {
        &self.left
    }

    /// `(s_i, v_i)` pairs.
    pub fn breakpoints(&self) -> Vec<(f64, f64)> {
        self.knots.iter().map(|k| (k.s, k.value)).collect()
    }

    /// Slope as `s -> -inf`.
    pub fn left_slope(&self) -> f64 {
        match &self.left {
            LeftTail::Linear { slope } => *slope,
            LeftTail::Curved { curve } => curve.limit_slope(),
        }
    }

    pub fn right_slope(&self) -> f64 {
        self.right_slope
    }

    pub fn is_piecewise_linear(&self) -> bool {
        matches!(self.left, LeftTail::Linear { .. }) && self.pieces.iter().all(|p| *p == Piece::Linear)
    }

    /// Index of the last knot with `knot.s <= s`, or `None` left of the first.
    fn locate(&self, s: f64) -> Option<usize> {
        match self.knots.partition_point(|k| k.s <= s) {
            0 => None,
            i => Some(i - 1),
        }
    }

    /// Profile value at `s`; `s = -inf` gives the value at the origin
    /// (possibly `-inf`).
    pub fn value(&self, s: f64) -> f64 {
        let first = self.knots[0];
        match self.locate(s) {
            None => match &self.left {
                LeftTail::Linear { slope } => {
                    if s == f64::NEG_INFINITY {
                        if *slope == 0.0 {
                            first.value
                        } else {
                            f64::NEG_INFINITY
                        }
                    } else {
                        first.value + slope * (s - first.s)
                    }
                }
                LeftTail::Curved { curve } => first.value - curve.increment(s, first.s),
            },
            Some(i) if i + 1 == self.knots.len() => {
                let last = self.knots[i];
                last.value + self.right_slope * (s - last.s)
            }
            Some(i) => {
                let (a, b) = (self.knots[i], self.knots[i + 1]);
                match &self.pieces[i] {
                    Piece::Linear => a.value + (b.value - a.value) * (s - a.s) / (b.s - a.s),
                    Piece::Curved { curve } => a.value + curve.increment(a.s, s),
                }
            }
        }
    }

    /// Value at radius `r >= 0`.
    pub fn value_at_radius(&self, r: f64) -> f64 {
        if r < 0.0 {
            return f64::NAN;
        }
        self.value(s_of(r))
    }

    /// Slope of piece `i` (0-based between knots) at its two ends.
    fn piece_end_slopes(&self, i: usize) -> (f64, f64) {
        let (a, b) = (self.knots[i], self.knots[i + 1]);
        match &self.pieces[i] {
            Piece::Linear => {
                let m = (b.value - a.value) / (b.s - a.s);
                (m, m)
            }
            Piece::Curved { curve } => (curve.slope(a.s), curve.slope(b.s)),
        }
    }

    /// Slopes immediately left and right of knot `i`.
    pub fn knot_slopes(&self, i: usize) -> (f64, f64) {
        let left = if i == 0 {
            match &self.left {
                LeftTail::Linear { slope } => *slope,
                LeftTail::Curved { curve } => curve.slope(self.knots[0].s),
            }
        } else {
            self.piece_end_slopes(i - 1).1
        };
        let right = if i + 1 == self.knots.len() {
            self.right_slope
        } else {
            self.piece_end_slopes(i).0
        };
        (left, right)
    }

    /// Right derivative in s.
    pub fn slope_right(&self, s: f64) -> f64 {
        match self.locate(s) {
            None => match &self.left {
                LeftTail::Linear { slope } => *slope,
                LeftTail::Curved { curve } => curve.slope(s),
            },
            Some(i) if i + 1 == self.knots.len() => self.right_slope,
            Some(i) => match &self.pieces[i] {
                Piece::Linear => self.piece_end_slopes(i).0,
                Piece::Curved { curve } => curve.slope(s),
            },
        }
    }

    /// Left derivative in s.
    pub fn slope_left(&self, s: f64) -> f64 {
        match self.knots.binary_search_by(|k| k.s.total_cmp(&s)) {
            Ok(i) => self.knot_slopes(i).0,
            Err(_) => self.slope_right(s),
        }
    }

    /// Radial derivative `du/dr` at `r > 0`, from the side given.
    pub fn radial_derivative(&self, r: f64, from_left: bool) -> f64 {
        let s = s_of(r);
        let slope = if from_left { self.slope_left(s) } else { self.slope_right(s) };
        2.0 * slope / r
    }

    pub fn scale(&self, lambda: f64) -> Self {
        RadialProfile {
            knots: self.knots.iter().map(|k| Knot { s: k.s, value: lambda * k.value }).collect(),
            pieces: self
                .pieces
                .iter()
                .map(|p| match p {
                    Piece::Linear => Piece::Linear,
                    Piece::Curved { curve } => Piece::Curved { curve: curve.scale(lambda) },
                })
                .collect(),
            left: match &self.left {
                LeftTail::Linear { slope } => LeftTail::Linear { slope: lambda * slope },
                LeftTail::Curved { curve } => LeftTail::Curved { curve: curve.scale(lambda) },
            },
            right_slope: lambda * self.right_slope,
        }
    }

    /// Adds a constant.
    pub fn shift(&self, c: f64) -> Self {
        let mut p = self.clone();
        for k in &mut p.knots {
            k.value += c;
        }
        p
    }

    pub fn class_flags(&self) -> ClassFlags {
        let mut slopes = Vec::with_capacity(2 * self.knots.len() + 2);
        let mut monotone = true;
        match &self.left {
            LeftTail::Linear { slope } => slopes.push(*slope),
            LeftTail::Curved { curve } => {
                monotone &= curve.is_monotone();
                slopes.push(curve.limit_slope());
                slopes.push(curve.slope(self.knots[0].s));
            }
        }
        for i in 0..self.pieces.len() {
            if let Piece::Curved { curve } = &self.pieces[i] {
                monotone &= curve.is_monotone();
            }
            let (a, b) = self.piece_end_slopes(i);
            slopes.push(a);
            slopes.push(b);
        }
        slopes.push(self.right_slope);
        let nonnegative = slopes.iter().all(|&m| m >= -SLOPE_TOL);
        let convex = slopes.windows(2).all(|w| w[1] >= w[0] - SLOPE_TOL);
        let is_psh_radial = monotone && nonnegative && convex;
        let in_l = is_psh_radial && self.right_slope <= 0.5 + SLOPE_TOL;
        let in_l_plus = in_l && (self.right_slope - 0.5).abs() <= SLOPE_TOL;
        let bounded_below = self.left_slope().abs() <= SLOPE_TOL
            && self.value(f64::NEG_INFINITY).is_finite();
        ClassFlags { is_psh_radial, in_l, in_l_plus, bounded_below }
    }

    /// All s-locations where the profile is not smooth, plus curved-piece ends.
    pub fn knot_coordinates(&self) -> Vec<f64> {
        self.knots.iter().map(|k| k.s).collect()
    }

    /// Drops knots between collinear linear pieces. The outer slopes are kept
    /// as they are, so a cap of exactly 1/2 survives.
    pub(crate) fn simplify(mut self, tol: f64) -> Self {
        let mut i = 0;
        while i < self.knots.len() && self.knots.len() > 1 {
            let last = self.knots.len() - 1;
            let left_linear = if i == 0 {
                matches!(self.left, LeftTail::Linear { .. })
            } else {
                self.pieces[i - 1] == Piece::Linear
            };
            let right_linear = i == last || self.pieces[i] == Piece::Linear;
            let (l, r) = self.knot_slopes(i);
            if left_linear && right_linear && (r - l).abs() <= tol {
                self.knots.remove(i);
                // the merged piece keeps one linear slot
                self.pieces.remove(if i == 0 { 0 } else { i - 1 });
            } else {
                i += 1;
            }
        }
        self
    }
}

/// `u(r) = p(log r^2)`; the origin gives the limit value, `-inf` when the
/// profile is unbounded below.
pub fn eval_profile(p: &RadialProfile, r: f64) -> f64 {
    p.value_at_radius(r)
}

pub fn check_class(p: &RadialProfile) -> ClassFlags {
    p.class_flags()
}

pub fn scale_profile(p: &RadialProfile, lambda: f64) -> Result<RadialProfile> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::domain(format!("scale factor must be positive, got {lambda}")));
    }
    Ok(p.scale(lambda))
}
