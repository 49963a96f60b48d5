//! Radial measures as ball-mass functions `f(t) = mu(B(0, t))`, and the
//! forward map from a radial profile to its Monge-Ampère measure.

use serde::{Deserialize, Serialize};

use crate::radial::{check_class, Curve, LeftTail, Piece, RadialProfile};
use crate::radial::{r_of, RadialSet};
use crate::{lelong_mass, ma_normalization, Error, Result};

/// Closed-form or tabulated ball-mass law on a density segment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CdfLaw {
    /// `scale * (a + b t^k)^n`; the law produced by a profile piece with
    /// slope `a + b t^k`.
    SlopePower { scale: f64, a: f64, b: f64, k: f64, n: usize },
    /// `coeff * (t - origin)^exponent` for `t >= origin`.
    Power { coeff: f64, origin: f64, exponent: f64 },
    /// Linear interpolation through `(t, F)` points.
    Table { points: Vec<[f64; 2]> },
}

impl CdfLaw {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            CdfLaw::SlopePower { scale, a, b, k, n } => {
                let slope = a + if *b == 0.0 { 0.0 } else { b * t.powf(*k) };
                scale * slope.powi(*n as i32)
            }
            CdfLaw::Power { coeff, origin, exponent } => {
                if t <= *origin {
                    0.0
                } else {
                    coeff * (t - origin).powf(*exponent)
                }
            }
            CdfLaw::Table { points } => {
                let (first, last) = (points[0], points[points.len() - 1]);
                if t <= first[0] {
                    return first[1];
                }
                if t >= last[0] {
                    return last[1];
                }
                let i = points.partition_point(|p| p[0] <= t);
                let (p, q) = (points[i - 1], points[i]);
                p[1] + (q[1] - p[1]) * (t - p[0]) / (q[0] - p[0])
            }
        }
    }

    fn scaled(&self, factor: f64) -> CdfLaw {
        match self {
            CdfLaw::SlopePower { scale, a, b, k, n } => {
                CdfLaw::SlopePower { scale: scale * factor, a: *a, b: *b, k: *k, n: *n }
            }
            CdfLaw::Power { coeff, origin, exponent } => {
                CdfLaw::Power { coeff: coeff * factor, origin: *origin, exponent: *exponent }
            }
            CdfLaw::Table { points } => {
                CdfLaw::Table { points: points.iter().map(|p| [p[0], p[1] * factor]).collect() }
            }
        }
    }
}

/// A point mass on the sphere of the given radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub radius: f64,
    pub mass: f64,
}

/// Absolutely continuous part on `[lo, hi]`. Contributes
/// `law(min(t, hi)) - law(lo)` to `f(t)` for `t >= lo`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySegment {
    pub lo: f64,
    pub hi: f64,
    pub law: CdfLaw,
}

impl DensitySegment {
    pub fn new(lo: f64, hi: f64, law: CdfLaw) -> Self {
        DensitySegment { lo, hi, law }
    }

    pub fn increment(&self, t: f64) -> f64 {
        if t <= self.lo {
            return 0.0;
        }
        self.law.eval(t.min(self.hi)) - self.law.eval(self.lo)
    }

    pub fn mass(&self) -> f64 {
        self.increment(self.hi)
    }

    pub fn scale(&self, factor: f64) -> Self {
        DensitySegment { lo: self.lo, hi: self.hi, law: self.law.scaled(factor) }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = (self.lo, self.hi);
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo < hi) {
            return Err(Error::structural(format!("invalid density segment [{lo}, {hi}]")));
        }
        match &self.law {
            CdfLaw::SlopePower { scale, a, b, k, n } => {
                if !(scale.is_finite() && a.is_finite() && b.is_finite() && k.is_finite()) || *n == 0 {
                    return Err(Error::structural("slope-power law parameters must be finite"));
                }
                if *scale < 0.0 || b * k < 0.0 {
                    return Err(Error::structural("slope-power law must be nondecreasing"));
                }
                let base = a + if *b == 0.0 { 0.0 } else { b * lo.powf(*k) };
                if base < -1e-12 || !base.is_finite() {
                    return Err(Error::structural("slope-power law has a negative slope"));
                }
            }
            CdfLaw::Power { coeff, origin, exponent } => {
                if !(coeff.is_finite() && origin.is_finite() && exponent.is_finite()) {
                    return Err(Error::structural("power law parameters must be finite"));
                }
                if *coeff < 0.0 {
                    return Err(Error::structural("negative mass: power law coefficient is negative"));
                }
                if *exponent <= 0.0 || *origin > lo {
                    return Err(Error::structural("power law needs a positive exponent and origin <= lo"));
                }
            }
            CdfLaw::Table { points } => {
                if points.len() < 2 || points.iter().any(|p| !(p[0].is_finite() && p[1].is_finite())) {
                    return Err(Error::structural("cdf table needs at least two finite points"));
                }
                if points.windows(2).any(|w| w[1][0] <= w[0][0]) {
                    return Err(Error::structural("cdf table abscissae must be increasing"));
                }
                if points.windows(2).any(|w| w[1][1] < w[0][1]) {
                    return Err(Error::structural("negative mass: cdf table decreases"));
                }
            }
        }
        Ok(())
    }
}

/// A radially symmetric positive measure on `C^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureDoc", into = "MeasureDoc")]
pub struct RadialMeasure {
    dim: usize,
    origin_mass: f64,
    atoms: Vec<Atom>,
    segments: Vec<DensitySegment>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureDoc {
    dim: usize,
    #[serde(default)]
    origin_mass: f64,
    #[serde(default)]
    atoms: Vec<Atom>,
    #[serde(default)]
    segments: Vec<DensitySegment>,
}

impl TryFrom<MeasureDoc> for RadialMeasure {
    type Error = Error;
    fn try_from(doc: MeasureDoc) -> Result<Self> {
        RadialMeasure::new(doc.dim, doc.origin_mass, doc.atoms, doc.segments)
    }
}

impl From<RadialMeasure> for MeasureDoc {
    fn from(m: RadialMeasure) -> Self {
        MeasureDoc { dim: m.dim, origin_mass: m.origin_mass, atoms: m.atoms, segments: m.segments }
    }
}

impl RadialMeasure {
    /// Validates and normalizes: atoms sorted with equal radii merged,
    /// segments sorted by left end.
    pub fn new(dim: usize, origin_mass: f64, mut atoms: Vec<Atom>, mut segments: Vec<DensitySegment>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::structural("dimension must be positive"));
        }
        if !(origin_mass.is_finite() && origin_mass >= 0.0) {
            return Err(Error::structural(format!("negative mass at the origin: {origin_mass}")));
        }
        for a in &atoms {
            if !(a.radius.is_finite() && a.radius > 0.0) {
                return Err(Error::structural(format!("atom radius must be positive, got {}", a.radius)));
            }
            if !(a.mass.is_finite() && a.mass >= 0.0) {
                return Err(Error::structural(format!("negative mass {} at radius {}", a.mass, a.radius)));
            }
        }
        for seg in &segments {
            seg.validate()?;
        }
        atoms.sort_by(|a, b| a.radius.total_cmp(&b.radius));
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match merged.last_mut() {
                Some(last) if last.radius == a.radius => last.mass += a.mass,
                _ => merged.push(a),
            }
        }
        segments.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        Ok(RadialMeasure { dim, origin_mass, atoms: merged, segments })
    }

    pub fn zero(dim: usize) -> Self {
        RadialMeasure { dim, origin_mass: 0.0, atoms: vec![], segments: vec![] }
    }

    /// Mass `mass` spread uniformly on the sphere of radius `r`.
    pub fn sphere(dim: usize, r: f64, mass: f64) -> Result<Self> {
        Self::new(dim, 0.0, vec![Atom { radius: r, mass }], vec![])
    }

    /// The shell law `((2 pi / (b - a)) (t - a))^n` on `[a, b]` scaled to
    /// total mass `mass`.
    pub fn shell(dim: usize, a: f64, b: f64, mass: f64) -> Result<Self> {
        let coeff = mass / (b - a).powi(dim as i32);
        let law = CdfLaw::Power { coeff, origin: a, exponent: dim as f64 };
        Self::new(dim, 0.0, vec![], vec![DensitySegment::new(a, b, law)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn origin_mass(&self) -> f64 {
        self.origin_mass
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn segments(&self) -> &[DensitySegment] {
        &self.segments
    }

    /// `f(t) = mu(B(0, t))`, right-continuous (closed-ball convention at atoms).
    pub fn cdf(&self, t: f64) -> f64 {
        let atoms: f64 = self.atoms.iter().take_while(|a| a.radius <= t).map(|a| a.mass).sum();
        self.origin_mass + atoms + self.density_cdf(t)
    }

    /// Left limit `f(t-)`.
    pub fn cdf_left(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let atoms: f64 = self.atoms.iter().take_while(|a| a.radius < t).map(|a| a.mass).sum();
        self.origin_mass + atoms + self.density_cdf(t)
    }

    fn density_cdf(&self, t: f64) -> f64 {
        self.segments.iter().take_while(|s| s.lo < t).map(|s| s.increment(t)).sum()
    }

    pub fn total(&self) -> f64 {
        self.origin_mass
            + self.atoms.iter().map(|a| a.mass).sum::<f64>()
            + self.segments.iter().map(DensitySegment::mass).sum::<f64>()
    }

    pub fn scale(&self, factor: f64) -> Self {
        RadialMeasure {
            dim: self.dim,
            origin_mass: self.origin_mass * factor,
            atoms: self.atoms.iter().map(|a| Atom { radius: a.radius, mass: a.mass * factor }).collect(),
            segments: self.segments.iter().map(|s| s.scale(factor)).collect(),
        }
    }

    /// Largest radius carrying mass (0 for the zero measure).
    pub fn outer_radius(&self) -> f64 {
        let a = self.atoms.last().map_or(0.0, |a| a.radius);
        let s = self.segments.iter().map(|s| s.hi).fold(0.0, f64::max);
        a.max(s)
    }

    /// Radii where `f` may fail to be smooth: atoms and segment ends.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self.atoms.iter().map(|a| a.radius).collect();
        for s in &self.segments {
            pts.push(s.lo);
            pts.push(s.hi);
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}

/// Where a radial measure lives: the support `S_w`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupportReport {
    /// Radii of spheres carrying an atom.
    pub atoms: Vec<f64>,
    /// Closed radius intervals on which `f` increases continuously.
    pub density_intervals: Vec<[f64; 2]>,
    pub origin_mass: f64,
}

impl SupportReport {
    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty() && self.density_intervals.is_empty() && self.origin_mass == 0.0
    }

    /// Whether radius `r` lies in the report, up to `cell` in radius.
    pub fn contains(&self, r: f64, cell: f64) -> bool {
        self.atoms.iter().any(|&a| (a - r).abs() <= cell)
            || self.density_intervals.iter().any(|&[a, b]| a - cell <= r && r <= b + cell)
            || (r <= cell && self.origin_mass > 0.0)
    }

    /// Set inclusion `self ⊆ other` at resolution `cell`.
    pub fn is_subset_of(&self, other: &SupportReport, cell: f64) -> bool {
        let atoms_ok = self.atoms.iter().all(|&a| other.contains(a, cell));
        let intervals_ok = self.density_intervals.iter().all(|&[a, b]| {
            other.density_intervals.iter().any(|&[c, d]| c - cell <= a && b <= d + cell)
        });
        let origin_ok = self.origin_mass == 0.0 || other.contains(0.0, cell);
        atoms_ok && intervals_ok && origin_ok
    }

    /// The report as a radial set, when it is nonempty and not just the origin.
    pub fn to_set(&self) -> Option<RadialSet> {
        let mut ivs: Vec<[f64; 2]> = self.atoms.iter().map(|&r| [r, r]).collect();
        ivs.extend(self.density_intervals.iter().copied());
        ivs.sort_by(|a, b| a[0].total_cmp(&b[0]));
        let mut merged: Vec<[f64; 2]> = Vec::new();
        for iv in ivs {
            match merged.last_mut() {
                Some(last) if iv[0] <= last[1] => last[1] = last[1].max(iv[1]),
                _ => merged.push(iv),
            }
        }
        RadialSet::new(merged).ok()
    }
}

/// Default atom threshold `1e-9 (2 pi)^n`.
pub fn default_tol(n: usize) -> f64 {
    1e-9 * lelong_mass(n)
}

/// Monge-Ampère measure of a radial plurisubharmonic profile, as its
/// ball-mass function `f(t) = (4 pi)^n (u'(log t^2))^n` with `u'` the right
/// derivative. Slope jumps become atoms; curved pieces become density segments.
pub fn ma_cdf(p: &RadialProfile, n: usize) -> Result<RadialMeasure> {
    if n == 0 {
        return Err(Error::domain("dimension must be positive"));
    }
    if !check_class(p).is_psh_radial {
        return Err(Error::domain("profile is not convex and nondecreasing in s"));
    }
    let c = ma_normalization(n);
    let power = |slope: f64| c * slope.max(0.0).powi(n as i32);
    let knots = p.knots();
    let mut segments = Vec::new();

    let origin_mass = match p.left_tail() {
        LeftTail::Linear { slope } => power(*slope),
        LeftTail::Curved { curve } => {
            let t0 = r_of(knots[0].s);
            push_curve_segments(&mut segments, curve, 0.0, t0, n)?;
            match curve {
                Curve::PowerSlope { .. } => power(curve.limit_slope()),
                Curve::MeasureRoot { base, segments: segs, .. } => {
                    // Restricted to [0, t0] the curve's mass at 0+ is its base plus
                    // whatever its own segments have accumulated by then.
                    base + segs.iter().map(|s| s.increment(0.0)).sum::<f64>()
                }
            }
        }
    };

    let mut atoms = Vec::new();
    for (i, knot) in knots.iter().enumerate() {
        let (left, right) = p.knot_slopes(i);
        let jump = power(right) - power(left);
        if jump < -1e-9 * c {
            return Err(Error::domain(format!("negative slope jump at s = {}", knot.s)));
        }
        if jump > 0.0 {
            atoms.push(Atom { radius: r_of(knot.s), mass: jump });
        }
    }
    for (i, piece) in p.pieces().iter().enumerate() {
        if let Piece::Curved { curve } = piece {
            push_curve_segments(&mut segments, curve, r_of(knots[i].s), r_of(knots[i + 1].s), n)?;
        }
    }
    segments.retain(|s| s.hi > s.lo && s.mass() > 0.0);
    RadialMeasure::new(n, origin_mass, atoms, segments)
}

fn push_curve_segments(out: &mut Vec<DensitySegment>, curve: &Curve, lo: f64, hi: f64, n: usize) -> Result<()> {
    match curve {
        Curve::PowerSlope { a, b, k } => {
            if *b != 0.0 {
                let law = CdfLaw::SlopePower { scale: ma_normalization(n), a: *a, b: *b, k: *k, n };
                out.push(DensitySegment::new(lo, hi, law));
            }
        }
        Curve::MeasureRoot { segments, dim, .. } => {
            if *dim != n {
                return Err(Error::Unsupported(format!(
                    "profile was reconstructed in dimension {dim} and cannot be measured in dimension {n}"
                )));
            }
            for seg in segments {
                let (a, b) = (seg.lo.max(lo), seg.hi.min(hi));
                if a < b {
                    out.push(DensitySegment::new(a, b, seg.law.clone()));
                }
            }
        }
    }
    Ok(())
}

/// Atoms above `tol`, density intervals with increase above `tol` (adjacent
/// ones merged), and the mass at the origin.
pub fn support(m: &RadialMeasure, tol: f64) -> SupportReport {
    let atoms = m.atoms.iter().filter(|a| a.mass > tol).map(|a| a.radius).collect();
    let mut density_intervals: Vec<[f64; 2]> = Vec::new();
    for seg in m.segments.iter().filter(|s| s.mass() > tol) {
        match density_intervals.last_mut() {
            Some(last) if seg.lo <= last[1] * (1.0 + 1e-12) => last[1] = last[1].max(seg.hi),
            _ => density_intervals.push([seg.lo, seg.hi]),
        }
    }
    let origin_mass = if m.origin_mass > tol { m.origin_mass } else { 0.0 };
    SupportReport { atoms, density_intervals, origin_mass }
}

/// Sum of atom masses and density integrals.
pub fn total_mass(m: &RadialMeasure) -> f64 {
    m.total()
}
