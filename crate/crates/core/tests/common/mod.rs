//! Random generators shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use radeq::radial::{Curve, Knot, LeftTail, Piece};
use radeq::{Atom, CdfLaw, DensitySegment, Problem, RadialMeasure, RadialProfile, RadialSet, RadialWeight, WeightKind};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` sorted s-values in `[lo, hi]` at least `gap` apart.
fn sorted_points<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64, gap: f64) -> Vec<f64> {
    let mut pts: Vec<f64> = (0..n).map(|_| rng.random_range(lo..hi)).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|b, a| *b - *a < gap);
    pts
}

/// Random bounded increments summing to `total`.
fn split<R: Rng>(rng: &mut R, parts: usize, total: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..parts).map(|_| if rng.random_bool(0.25) { 0.0 } else { rng.random::<f64>() }).collect();
    let sum: f64 = raw.iter().sum();
    if sum == 0.0 {
        let mut v = vec![0.0; parts];
        v[parts - 1] = total;
        return v;
    }
    raw.iter().map(|x| x * total / sum).collect()
}

/// A convex nondecreasing profile with knots in `window`, left slope
/// `left_slope` and right slope exactly `right_slope`. With `curved`, some
/// pieces follow power-slope curves.
pub fn random_psh_profile<R: Rng>(
    rng: &mut R,
    window: (f64, f64),
    left_slope: f64,
    right_slope: f64,
    curved: bool,
) -> RadialProfile {
    let m = rng.random_range(1..=6);
    let s = sorted_points(rng, m, window.0, window.1, 0.05);
    let m = s.len();
    // one jump per knot, one increase per piece
    let incs = split(rng, 2 * m, right_slope - left_slope);
    let mut slope = left_slope;
    let mut value = rng.random_range(-2.0..1.0);
    let mut knots = vec![];
    let mut pieces = vec![];
    for i in 0..m {
        knots.push(Knot { s: s[i], value });
        slope += incs[2 * i];
        if i + 1 == m {
            break;
        }
        let rise = incs[2 * i + 1];
        if curved && rise > 0.0 && rng.random_bool(0.5) {
            let k = rng.random_range(0.5..3.0);
            let (e0, e1) = ((0.5 * k * s[i]).exp(), (0.5 * k * s[i + 1]).exp());
            let b = rise / (e1 - e0);
            let curve = Curve::PowerSlope { a: slope - b * e0, b, k };
            value += curve.increment(s[i], s[i + 1]);
            pieces.push(Piece::Curved { curve });
            slope += rise;
        } else {
            // a linear piece passes its rise on as a jump at the next knot
            value += slope * (s[i + 1] - s[i]);
            pieces.push(Piece::Linear);
            slope += rise;
        }
    }
    RadialProfile::new(knots, pieces, LeftTail::Linear { slope: left_slope }, right_slope).expect("valid random profile")
}

/// A random measure built from atoms and power-law density segments.
pub fn random_measure<R: Rng>(rng: &mut R, n: usize) -> RadialMeasure {
    let parts = rng.random_range(1..=5);
    let cuts = sorted_points(rng, 2 * parts, 0.05, 4.0, 0.02);
    let mut atoms = vec![];
    let mut segments = vec![];
    for w in cuts.chunks(2) {
        let mass = rng.random_range(0.05..3.0) * radeq::lelong_mass(n) / parts as f64;
        if w.len() == 1 || rng.random_bool(0.4) {
            atoms.push(Atom { radius: w[0], mass });
        } else {
            let (lo, hi) = (w[0], w[1]);
            let exponent = rng.random_range(0.5..4.0);
            let coeff = mass / (hi - lo).powf(exponent);
            segments.push(DensitySegment::new(lo, hi, CdfLaw::Power { coeff, origin: lo, exponent }));
        }
    }
    if rng.random_bool(0.3) {
        // a ball-type segment starting at the origin
        let hi = cuts[0] * 0.9;
        let exponent = rng.random_range(0.5..4.0);
        let coeff = rng.random_range(0.1..2.0) * radeq::lelong_mass(n) / hi.powf(exponent);
        segments.push(DensitySegment::new(0.0, hi, CdfLaw::Power { coeff, origin: 0.0, exponent }));
    }
    RadialMeasure::new(n, 0.0, atoms, segments).expect("valid random measure")
}

/// A random compact radial set with one to three components.
pub fn random_set<R: Rng>(rng: &mut R) -> RadialSet {
    let comps = rng.random_range(1..=3);
    let cuts = sorted_points(rng, 2 * comps, 0.2, 5.0, 0.05);
    let mut ivs = vec![];
    for (i, w) in cuts.chunks(2).enumerate() {
        let a = if i == 0 && rng.random_bool(0.4) { 0.0 } else { w[0] };
        let b = *w.last().unwrap();
        if a > 0.0 && rng.random_bool(0.3) {
            ivs.push([b, b]);
        } else {
            ivs.push([a, b]);
        }
    }
    RadialSet::new(ivs).expect("valid random set")
}

/// A random weight on `set`, with an additive constant where the kind has one.
pub fn random_weight<R: Rng>(rng: &mut R, set: &RadialSet) -> RadialWeight {
    let origin = set.includes_origin();
    let s_hi = 2.0 * set.max_radius().ln();
    loop {
        let kind = match rng.random_range(0..6) {
            0 => WeightKind::Constant { c: rng.random_range(-1.0..1.0) },
            1 | 2 => WeightKind::Power { a: rng.random_range(-1.5..1.5), beta: rng.random_range(0.5..3.0), c: rng.random_range(-1.0..1.0) },
            3 if !origin => WeightKind::LogPower {
                alpha: rng.random_range(-1.0..1.0),
                a: rng.random_range(-0.5..0.5),
                beta: rng.random_range(0.5..2.0),
                c: rng.random_range(-1.0..1.0),
            },
            4 => {
                let pts = sorted_points(rng, 8, s_hi - 6.0, s_hi + 0.5, 0.05);
                WeightKind::Table { samples: pts.iter().map(|&s| [s, rng.random_range(-1.0..1.0)]).collect() }
            }
            5 => {
                let pts = sorted_points(rng, 6, s_hi - 6.0, s_hi, 0.05);
                let bp: Vec<(f64, f64)> = pts.iter().map(|&s| (s, rng.random_range(-1.0..1.0))).collect();
                let profile = RadialProfile::piecewise_linear(&bp, 0.0, rng.random_range(-0.5..1.0)).unwrap();
                WeightKind::ScaledProfile { scale: rng.random_range(0.2..2.0), profile }
            }
            _ => continue,
        };
        if let Ok(w) = RadialWeight::new(kind, set.clone()) {
            return w;
        }
    }
}

/// Sampled maximum of the weight on its domain.
pub fn weight_max(w: &RadialWeight) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for &[a, b] in w.domain().intervals() {
        for i in 0..=2000 {
            let r = a + (b - a) * i as f64 / 2000.0;
            best = best.max(w.value_radius(r));
        }
    }
    best
}

/// Random global (70%) or relative problem in dimension 1..=4.
pub fn random_problem<R: Rng>(rng: &mut R) -> Problem {
    let n = rng.random_range(1..=4);
    let set = random_set(rng);
    let w = random_weight(rng, &set);
    if rng.random_bool(0.3) {
        let shift = weight_max(&w) + rng.random_range(0.05..1.0);
        let kind = match w.kind().clone() {
            WeightKind::Constant { c } => Some(WeightKind::Constant { c: c - shift }),
            WeightKind::Power { a, beta, c } => Some(WeightKind::Power { a, beta, c: c - shift }),
            WeightKind::LogPower { alpha, a, beta, c } => Some(WeightKind::LogPower { alpha, a, beta, c: c - shift }),
            _ => None,
        };
        if let Some(kind) = kind {
            let w = RadialWeight::new(kind, set.clone()).unwrap();
            let radius = set.max_radius() * rng.random_range(1.2..3.0);
            return Problem::relative(n, w, radius).unwrap();
        }
    }
    Problem::global(n, w).unwrap()
}
