//! Inverse map: from a radial measure to the radial plurisubharmonic
//! function it generates,
//!
//! `u(z) = u0 + int_0^{|z|} (2/t) (f(t) / (4 pi)^n)^{1/n} dt`,
//!
//! plus admissibility of the measure and finite mixtures.

use serde::{Deserialize, Serialize};

use crate::measure::{Atom, CdfLaw, DensitySegment, RadialMeasure};
use crate::radial::{s_of, Curve, Knot, LeftTail, Piece, RadialProfile};
use crate::{lelong_mass, ma_normalization, quad, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Admissibility {
    pub admissible: bool,
    /// Names the offending piece when not admissible.
    pub diagnostic: Option<String>,
}

/// Whether `int_0 f(t)^{1/n} / t dt` converges, i.e. the measure generates a
/// function bounded below.
pub fn admissible(m: &RadialMeasure, n: usize) -> Admissibility {
    let reject = |msg: String| Admissibility { admissible: false, diagnostic: Some(msg) };
    if m.dim() != n {
        return reject(format!("measure lives in dimension {} but {} was requested", m.dim(), n));
    }
    if m.origin_mass() > 0.0 {
        return reject(format!(
            "atom of mass {} at the origin: f(0+) > 0 makes the integral diverge logarithmically",
            m.origin_mass()
        ));
    }
    let inv = 1.0 / n as f64;
    for (i, seg) in m.segments().iter().enumerate().filter(|(_, s)| s.lo == 0.0) {
        let r = quad::integrate(|t| seg.increment(t).max(0.0).powf(inv) / t, 0.0, seg.hi, 1e-9);
        if !(r.converged && r.value.is_finite()) {
            return reject(format!(
                "density segment {i} on [0, {}] is too heavy at the origin for the integral to converge",
                seg.hi
            ));
        }
    }
    Admissibility { admissible: true, diagnostic: None }
}

/// Reconstructs the radial profile whose Monge-Ampère measure is `m`, with
/// `u(0) = u0`. Power-law pieces integrate in closed form, everything else
/// through adaptive quadrature of the measure-root slope.
pub fn reconstruct(m: &RadialMeasure, n: usize, u0: f64) -> Result<RadialProfile> {
    let verdict = admissible(m, n);
    if !verdict.admissible {
        return Err(Error::domain(verdict.diagnostic.unwrap_or_default()));
    }
    if !u0.is_finite() {
        return Err(Error::domain("u(0) must be finite"));
    }
    let c = ma_normalization(n);
    let slope_of = |mass: f64| (mass.max(0.0) / c).powf(1.0 / n as f64);

    let mut radii = m.breakpoints();
    radii.retain(|&t| t > 0.0);
    if radii.is_empty() {
        return Ok(RadialProfile::constant(u0));
    }

    let curve_on = |lo: f64, hi: f64| -> Option<Curve> {
        let active: Vec<&DensitySegment> = m.segments().iter().filter(|s| s.lo < hi && s.hi > lo).collect();
        if active.is_empty() {
            return None;
        }
        let mass_lo = m.cdf(lo);
        Some(closed_form(&active, mass_lo, lo, n, c).unwrap_or_else(|| Curve::MeasureRoot {
            dim: n,
            base: mass_lo - active.iter().map(|s| s.increment(lo)).sum::<f64>(),
            segments: active.into_iter().cloned().collect(),
        }))
    };

    let s0 = s_of(radii[0]);
    let left = match curve_on(0.0, radii[0]) {
        Some(curve) => LeftTail::Curved { curve },
        None => LeftTail::Linear { slope: 0.0 },
    };
    let v0 = match &left {
        LeftTail::Curved { curve } => u0 + curve.increment(f64::NEG_INFINITY, s0),
        LeftTail::Linear { .. } => u0,
    };
    let mut knots = vec![Knot { s: s0, value: v0 }];
    let mut pieces = Vec::with_capacity(radii.len());
    for w in radii.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (sa, sb) = (s_of(a), s_of(b));
        let prev = knots[knots.len() - 1].value;
        let (piece, value) = match curve_on(a, b) {
            Some(curve) => {
                let v = prev + curve.increment(sa, sb);
                (Piece::Curved { curve }, v)
            }
            None => (Piece::Linear, prev + slope_of(m.cdf(a)) * (sb - sa)),
        };
        pieces.push(piece);
        knots.push(Knot { s: sb, value });
    }
    let right_slope = slope_of(m.total());
    RadialProfile::from_parts(knots, pieces, left, right_slope)
}

/// Slope curve in closed form when exactly one power-type segment is active
/// on `[lo, ..]` and it accounts for all the mass `f(lo)`.
fn closed_form(active: &[&DensitySegment], mass_lo: f64, lo: f64, n: usize, c: f64) -> Option<Curve> {
    let [seg] = active else { return None };
    let matches = |law_lo: f64| (law_lo - mass_lo).abs() <= 1e-13 * mass_lo.abs().max(c);
    let root = |x: f64| (x / c).powf(1.0 / n as f64);
    match &seg.law {
        CdfLaw::SlopePower { scale, a, b, k, n: law_n } if *law_n == n && matches(seg.law.eval(lo)) => {
            let lambda = root(*scale);
            Some(Curve::PowerSlope { a: lambda * a, b: lambda * b, k: *k })
        }
        CdfLaw::Power { coeff, origin, exponent } if matches(seg.law.eval(lo)) => {
            let lambda = root(*coeff);
            let k = exponent / n as f64;
            if *origin == 0.0 {
                Some(Curve::PowerSlope { a: 0.0, b: lambda, k })
            } else if k == 1.0 {
                Some(Curve::PowerSlope { a: -lambda * origin, b: lambda, k: 1.0 })
            } else {
                None
            }
        }
        _ => None,
    }
}

/// `sum_i w_i mu_i` for weights summing to one.
pub fn mixture(components: &[RadialMeasure], weights: &[f64]) -> Result<RadialMeasure> {
    if components.is_empty() || components.len() != weights.len() {
        return Err(Error::structural("mixture needs one positive weight per component"));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::structural("mixture weights must be positive"));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(Error::domain(format!("mixture weights sum to {sum}, not 1")));
    }
    combine(components, weights)
}

fn combine(components: &[RadialMeasure], weights: &[f64]) -> Result<RadialMeasure> {
    let n = components[0].dim();
    if components.iter().any(|m| m.dim() != n) {
        return Err(Error::domain("mixture components live in different dimensions"));
    }
    let mut origin = 0.0;
    let mut atoms: Vec<Atom> = Vec::new();
    let mut segments = Vec::new();
    for (m, &w) in components.iter().zip(weights) {
        let scaled = m.scale(w);
        origin += scaled.origin_mass();
        atoms.extend_from_slice(scaled.atoms());
        segments.extend_from_slice(scaled.segments());
    }
    RadialMeasure::new(n, origin, atoms, segments)
}

/// Truncated series `sum_{i=1}^k mu_i / 2^i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesMixture {
    pub measure: RadialMeasure,
    pub terms: usize,
    /// `(2 pi)^n - total`, which is `(2 pi)^n 2^{-k}` when every component
    /// has mass `(2 pi)^n`.
    pub mass_deficit: f64,
}

pub fn geometric_series(components: &[RadialMeasure]) -> Result<SeriesMixture> {
    if components.is_empty() {
        return Err(Error::structural("series needs at least one term"));
    }
    let weights: Vec<f64> = (1..=components.len()).map(|i| 0.5f64.powi(i as i32)).collect();
    let measure = combine(components, &weights)?;
    let mass_deficit = lelong_mass(measure.dim()) - measure.total();
    Ok(SeriesMixture { measure, terms: components.len(), mass_deficit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{ma_cdf, support, default_tol};
    use crate::radial::check_class;

    #[test]
    fn sphere_measure_reconstructs_log_plus_shift() {
        for n in 1..=4 {
            let r1 = 1.5;
            let m = RadialMeasure::sphere(n, r1, lelong_mass(n)).unwrap();
            let p = reconstruct(&m, n, 0.0).unwrap();
            for &r in &[0.1f64, 1.0, 1.5, 2.0, 10.0] {
                let expected = (r.ln() - r1.ln()).max(0.0);
                assert!((p.value_at_radius(r) - expected).abs() < 1e-14);
            }
            assert!(check_class(&p).in_l_plus);
        }
    }

    #[test]
    fn zero_measure_gives_constant() {
        let p = reconstruct(&RadialMeasure::zero(2), 2, 1.25).unwrap();
        assert_eq!(p.value_at_radius(3.0), 1.25);
        assert_eq!(p.right_slope(), 0.0);
    }

    #[test]
    fn shell_measure_reconstructs_shifted_weight() {
        // With u(0) = 0 the reconstruction is the shell weight minus its value
        // at the inner radius, r0 log(R / r0) / (R - r0).
        let e = std::f64::consts::E;
        let (r0, big_r) = (1.0, e);
        let d = big_r - r0;
        for n in 1..=4 {
            let m = RadialMeasure::shell(n, r0, big_r, lelong_mass(n)).unwrap();
            let p = reconstruct(&m, n, 0.0).unwrap();
            assert!(p.pieces().iter().all(|piece| matches!(piece, Piece::Curved { curve: Curve::PowerSlope { .. } })));
            let q = |r: f64| (r - r0 * r.ln() - r0 + r0 * big_r.ln()) / d;
            let shift = q(r0);
            for i in 0..=100 {
                let r = r0 + d * i as f64 / 100.0;
                assert!((p.value_at_radius(r) - (q(r) - shift)).abs() < 1e-13);
            }
            assert_eq!(p.value_at_radius(0.5), 0.0);
            let outer = big_r.ln() - big_r.ln() + (big_r - r0 * big_r.ln() - r0 + r0 * big_r.ln()) / d - shift;
            assert!((p.value_at_radius(big_r) - outer).abs() < 1e-13);
            assert!(check_class(&p).in_l_plus);
        }
    }

    #[test]
    fn admissibility_examples() {
        let n = 2;
        assert!(admissible(&RadialMeasure::zero(n), n).admissible);
        let heavy = RadialMeasure::new(n, 1.0, vec![], vec![]).unwrap();
        let verdict = admissible(&heavy, n);
        assert!(!verdict.admissible);
        assert!(verdict.diagnostic.unwrap().contains("origin"));
        assert!(matches!(reconstruct(&heavy, n, 0.0), Err(Error::Domain(_))));
        for alpha in [0.1, 0.5, 2.0] {
            let law = CdfLaw::Power { coeff: lelong_mass(n), origin: 0.0, exponent: alpha * n as f64 };
            let m = RadialMeasure::new(n, 0.0, vec![], vec![DensitySegment::new(0.0, 1.0, law)]).unwrap();
            assert!(admissible(&m, n).admissible);
            // f = (2 pi)^n t^{alpha n}  =>  slope = t^alpha / 2, u = t^alpha / alpha
            let p = reconstruct(&m, n, 0.0).unwrap();
            let t: f64 = 0.6;
            assert!((p.value_at_radius(t) - t.powf(alpha) / alpha).abs() < 1e-12);
        }
    }

    #[test]
    fn mixture_examples() {
        let n = 3;
        let a = RadialMeasure::sphere(n, 1.0, lelong_mass(n)).unwrap();
        let b = RadialMeasure::sphere(n, 2.0, lelong_mass(n)).unwrap();
        assert_eq!(mixture(std::slice::from_ref(&a), &[1.0]).unwrap(), a);
        let mix = mixture(&[a.clone(), b.clone()], &[0.5, 0.5]).unwrap();
        assert_eq!(mix.atoms().len(), 2);
        for atom in mix.atoms() {
            assert!((atom.mass - lelong_mass(n) / 2.0).abs() < 1e-12);
        }
        assert!(mixture(&[a.clone(), b.clone()], &[0.5, 0.6]).is_err());
        let other = RadialMeasure::sphere(2, 1.0, 1.0).unwrap();
        assert!(matches!(mixture(&[a, other], &[0.5, 0.5]), Err(Error::Domain(_))));
    }

    #[test]
    fn geometric_series_deficit() {
        let n = 2;
        let comps: Vec<RadialMeasure> =
            (1..=6).map(|i| RadialMeasure::sphere(n, i as f64, lelong_mass(n)).unwrap()).collect();
        let series = geometric_series(&comps).unwrap();
        let expected = lelong_mass(n) * (1.0 - 0.5f64.powi(6));
        assert!((series.measure.total() - expected).abs() < 1e-12);
        assert!((series.mass_deficit - lelong_mass(n) * 0.5f64.powi(6)).abs() < 1e-12);
    }

    #[test]
    fn general_table_round_trip() {
        let n = 2;
        let pts: Vec<[f64; 2]> = (0..=20).map(|i| {
            let t = 1.0 + i as f64 * 0.05;
            [t, 4.0 * (t - 1.0).powi(2) + (t - 1.0)]
        }).collect();
        let law = CdfLaw::Table { points: pts };
        let seg = DensitySegment::new(1.0, 2.0, law);
        let m = RadialMeasure::new(n, 0.0, vec![Atom { radius: 0.5, mass: 2.0 }], vec![seg]).unwrap();
        let p = reconstruct(&m, n, -1.0).unwrap();
        let back = ma_cdf(&p, n).unwrap();
        for i in 0..=400 {
            let t = 0.01 * i as f64;
            assert!((back.cdf(t) - m.cdf(t)).abs() < 1e-8, "t = {t}");
        }
        assert_eq!(support(&back, default_tol(n)), support(&m, default_tol(n)));
    }
}
