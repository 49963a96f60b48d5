use serde::{Deserialize, Serialize};

use super::coord::s_of;
use super::curve::Curve;
use super::profile::{LeftTail, Piece, RadialProfile};
use super::set::RadialSet;
use crate::{Error, Result};

/// Closed-form weights `Q(r)` plus sampled tables. Table samples are
/// `(s, Q~(s))` pairs, interpolated linearly in s and held constant outside
/// the sampled range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightKind {
    Constant { c: f64 },
    /// `alpha log r + c`
    ScaledLog { alpha: f64, c: f64 },
    /// `a r^beta + c`
    Power { a: f64, beta: f64, c: f64 },
    /// `alpha log r + a r^beta + c`
    LogPower { alpha: f64, a: f64, beta: f64, c: f64 },
    Table { samples: Vec<[f64; 2]> },
    /// `scale * u` for a radial profile `u`.
    ScaledProfile { scale: f64, profile: RadialProfile },
}

/// A maximal s-interval on which the weight profile is either affine
/// (`curve = None`) or follows a smooth curve.
#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    pub lo: f64,
    pub hi: f64,
    pub curve: Option<Curve>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WeightDoc", into = "WeightDoc")]
pub struct RadialWeight {
    kind: WeightKind,
    domain: RadialSet,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightDoc {
    kind: WeightKind,
    domain: RadialSet,
}

impl TryFrom<WeightDoc> for RadialWeight {
    type Error = Error;
    fn try_from(doc: WeightDoc) -> Result<Self> {
        RadialWeight::new(doc.kind, doc.domain)
    }
}

impl From<RadialWeight> for WeightDoc {
    fn from(w: RadialWeight) -> Self {
        WeightDoc { kind: w.kind, domain: w.domain }
    }
}

impl WeightKind {
    fn validate(&self) -> Result<()> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        match self {
            WeightKind::Constant { c } if !finite(&[*c]) => Err(Error::structural("constant must be finite")),
            WeightKind::ScaledLog { alpha, c } if !finite(&[*alpha, *c]) => {
                Err(Error::structural("log weight coefficients must be finite"))
            }
            WeightKind::Power { a, beta, c } | WeightKind::LogPower { a, beta, c, .. } => {
                if !finite(&[*a, *beta, *c]) {
                    return Err(Error::structural("power weight coefficients must be finite"));
                }
                if let WeightKind::LogPower { alpha, .. } = self {
                    if !alpha.is_finite() {
                        return Err(Error::structural("log weight coefficients must be finite"));
                    }
                }
                if *beta == 0.0 {
                    return Err(Error::structural("power exponent must be nonzero"));
                }
                Ok(())
            }
            WeightKind::Table { samples } => {
                if samples.is_empty() {
                    return Err(Error::structural("weight table is empty"));
                }
                if !samples.iter().all(|p| finite(p)) {
                    return Err(Error::structural("weight table must be finite-valued"));
                }
                if samples.windows(2).any(|w| w[1][0] <= w[0][0]) {
                    return Err(Error::structural("weight table abscissae must be strictly increasing"));
                }
                Ok(())
            }
            WeightKind::ScaledProfile { scale, .. } if !(scale.is_finite() && *scale > 0.0) => {
                Err(Error::domain("profile weight scale must be positive"))
            }
            _ => Ok(()),
        }
    }

    /// `Q~(s)`.
    pub fn value_s(&self, s: f64) -> f64 {
        let half = 0.5 * s;
        let log_term = |alpha: f64| if alpha == 0.0 { 0.0 } else { alpha * half };
        let power_term = |a: f64, beta: f64| if a == 0.0 { 0.0 } else { a * (beta * half).exp() };
        match self {
            WeightKind::Constant { c } => *c,
            WeightKind::ScaledLog { alpha, c } => log_term(*alpha) + c,
            WeightKind::Power { a, beta, c } => power_term(*a, *beta) + c,
            WeightKind::LogPower { alpha, a, beta, c } => log_term(*alpha) + power_term(*a, *beta) + c,
            WeightKind::Table { samples } => interpolate(samples, s),
            WeightKind::ScaledProfile { scale, profile } => scale * profile.value(s),
        }
    }

    /// Smooth regions partitioning the whole line, ordered.
    pub fn regions(&self) -> Vec<Region> {
        let all = |curve| vec![Region { lo: f64::NEG_INFINITY, hi: f64::INFINITY, curve }];
        let power = |alpha: f64, a: f64, beta: f64| {
            if a == 0.0 {
                None
            } else {
                Some(Curve::PowerSlope { a: 0.5 * alpha, b: 0.5 * a * beta, k: beta })
            }
        };
        match self {
            WeightKind::Constant { .. } | WeightKind::ScaledLog { .. } => all(None),
            WeightKind::Power { a, beta, .. } => all(power(0.0, *a, *beta)),
            WeightKind::LogPower { alpha, a, beta, .. } => all(power(*alpha, *a, *beta)),
            WeightKind::Table { samples } => {
                let mut cuts = vec![f64::NEG_INFINITY];
                cuts.extend(samples.iter().map(|p| p[0]));
                cuts.push(f64::INFINITY);
                cuts.windows(2).map(|w| Region { lo: w[0], hi: w[1], curve: None }).collect()
            }
            WeightKind::ScaledProfile { scale, profile } => {
                let knots = profile.knots();
                let mut out = Vec::with_capacity(knots.len() + 1);
                let left = match profile.left_tail() {
                    LeftTail::Linear { .. } => None,
                    LeftTail::Curved { curve } => Some(curve.scale(*scale)),
                };
                out.push(Region { lo: f64::NEG_INFINITY, hi: knots[0].s, curve: left });
                for (i, piece) in profile.pieces().iter().enumerate() {
                    let curve = match piece {
                        Piece::Linear => None,
                        Piece::Curved { curve } => Some(curve.scale(*scale)),
                    };
                    out.push(Region { lo: knots[i].s, hi: knots[i + 1].s, curve });
                }
                out.push(Region { lo: knots[knots.len() - 1].s, hi: f64::INFINITY, curve: None });
                out
            }
        }
    }
}

fn interpolate(samples: &[[f64; 2]], s: f64) -> f64 {
    let first = samples[0];
    let last = samples[samples.len() - 1];
    if s <= first[0] {
        return first[1];
    }
    if s >= last[0] {
        return last[1];
    }
    let i = samples.partition_point(|p| p[0] <= s);
    let (a, b) = (samples[i - 1], samples[i]);
    a[1] + (b[1] - a[1]) * (s - a[0]) / (b[0] - a[0])
}

impl RadialWeight {
    /// Validates the parameters and that the weight is finite on the whole
    /// domain (so `w = exp(-Q)` is positive on a non-pluripolar set).
    pub fn new(kind: WeightKind, domain: RadialSet) -> Result<Self> {
        kind.validate()?;
        let w = RadialWeight { kind, domain };
        for &[a, b] in w.domain.intervals() {
            for r in [a, b] {
                let q = w.value_radius(r);
                if q == f64::NEG_INFINITY {
                    return Err(Error::inadmissible(format!("weight is unbounded below at radius {r}")));
                }
                if !q.is_finite() {
                    return Err(Error::inadmissible(format!("weight is not finite at radius {r}")));
                }
            }
        }
        Ok(w)
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    pub fn domain(&self) -> &RadialSet {
        &self.domain
    }

    pub fn value_s(&self, s: f64) -> f64 {
        self.kind.value_s(s)
    }

    pub fn value_radius(&self, r: f64) -> f64 {
        self.kind.value_s(s_of(r))
    }

    pub fn regions(&self) -> Vec<Region> {
        self.kind.regions()
    }

    /// Finite region boundaries (points where `Q~` may fail to be smooth).
    pub fn kinks(&self) -> Vec<f64> {
        self.regions().iter().skip(1).map(|r| r.lo).collect()
    }

    /// `sup |Q~''|` over `[lo, hi]` (finite ends), for grid refinement.
    pub fn curvature_bound(&self, lo: f64, hi: f64) -> f64 {
        let mut bound: f64 = 0.0;
        for region in self.regions() {
            let (a, b) = (region.lo.max(lo), region.hi.min(hi));
            if a > b {
                continue;
            }
            if let Some(curve) = &region.curve {
                bound = bound.max(curve.curvature_bound(a, b));
            }
        }
        bound
    }
}
