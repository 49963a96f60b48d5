//! Gluing plurisubharmonic functions across spheres: the normal-derivative
//! criterion, the unit-disc reflection `h(1/z̄) + log|z|`, and a Monte Carlo
//! sub-mean-value checker on complex lines.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::extremal::{solve, GridSpec, Problem};
use crate::par::{self, Exec};
use crate::radial::{s_of, Curve, Knot, LeftTail, RadialProfile, RadialSet, RadialWeight, WeightKind};
use crate::{Error, Result};

/// Slack in the derivative comparison.
const DERIVATIVE_TOL: f64 = 1e-12;
const CONTINUITY_TOL: f64 = 1e-10;
const CIRCLE_NODES: usize = 512;
const SUBMEAN_TOL: f64 = 1e-9;
const BATCH: usize = 1024;
const BOUNDARY_SAMPLES: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlueCheck {
    pub continuous: bool,
    /// `None` when the functions do not agree on the interface.
    pub derivative_ok: Option<bool>,
    /// `dv/dr(R+) - du/dr(R-)`.
    pub margin: f64,
    /// `|u(R) - v(R)|`.
    pub jump: f64,
}

/// Normal-derivative criterion at the sphere of radius `radius`: the glued
/// function is plurisubharmonic iff `du/dr(R-) <= dv/dr(R+)`.
pub fn radial_glue_check(inner: &RadialProfile, outer: &RadialProfile, radius: f64) -> GlueCheck {
    let jump = (inner.value_at_radius(radius) - outer.value_at_radius(radius)).abs();
    let continuous = jump <= CONTINUITY_TOL;
    let du = inner.radial_derivative(radius, true);
    let dv = outer.radial_derivative(radius, false);
    let margin = dv - du;
    GlueCheck {
        continuous,
        derivative_ok: continuous.then_some(du <= dv + DERIVATIVE_TOL),
        margin,
        jump,
    }
}

/// `A (|z|^2 - R^2)` as a profile: slope `A t^2` in s, extended past `R`
/// with the slope it has there.
pub fn quadratic_profile(a: f64, radius: f64) -> RadialProfile {
    RadialProfile::new(
        vec![Knot { s: s_of(radius), value: 0.0 }],
        vec![],
        LeftTail::Curved { curve: Curve::PowerSlope { a: 0.0, b: a, k: 2.0 } },
        a * radius * radius,
    )
    .expect("quadratic profile is well formed")
}

/// `log(|z| / R)`.
pub fn log_ratio_profile(radius: f64) -> RadialProfile {
    RadialProfile::piecewise_linear(&[(s_of(radius), 0.0)], 0.5, 0.5).expect("single knot")
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigTerm {
    pub k: u32,
    pub a: f64,
    pub b: f64,
}

/// `a0 + sum_k rho^k (a_k cos k theta + b_k sin k theta)`, harmonic on the disc.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigHarmonic {
    pub a0: f64,
    #[serde(default)]
    pub terms: Vec<TrigTerm>,
}

impl TrigHarmonic {
    pub fn constant(c: f64) -> Self {
        TrigHarmonic { a0: c, terms: vec![] }
    }

    /// `a Re z`.
    pub fn real_part(a: f64) -> Self {
        TrigHarmonic { a0: 0.0, terms: vec![TrigTerm { k: 1, a, b: 0.0 }] }
    }

    /// Value at polar point `(rho, theta)`.
    pub fn eval_polar(&self, rho: f64, theta: f64) -> f64 {
        self.a0
            + self
                .terms
                .iter()
                .map(|t| {
                    let k = t.k as f64;
                    rho.powi(t.k as i32) * (t.a * (k * theta).cos() + t.b * (k * theta).sin())
                })
                .sum::<f64>()
    }

    /// Outward normal derivative on the unit circle.
    pub fn normal_derivative(&self, theta: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let k = t.k as f64;
                k * (t.a * (k * theta).cos() + t.b * (k * theta).sin())
            })
            .sum()
    }
}

/// A function on `C^n` glued from an inner and an outer piece along a sphere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GluedFunction {
    Radial { dim: usize, radius: f64, inner: RadialProfile, outer: RadialProfile },
    /// `h` on the closed unit disc, `h(1/z̄) + log|z|` outside; `n = 1`.
    Disc { h: TrigHarmonic },
}

impl GluedFunction {
    pub fn radial(dim: usize, radius: f64, inner: RadialProfile, outer: RadialProfile) -> Result<Self> {
        if dim == 0 || !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::domain("glue needs a positive dimension and interface radius"));
        }
        let g = GluedFunction::Radial { dim, radius, inner, outer };
        let jump = g.interface_jump();
        if jump > CONTINUITY_TOL {
            return Err(Error::domain(format!("pieces differ by {jump:.3e} on the interface")));
        }
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        match self {
            GluedFunction::Radial { dim, .. } => *dim,
            GluedFunction::Disc { .. } => 1,
        }
    }

    pub fn interface_radius(&self) -> f64 {
        match self {
            GluedFunction::Radial { radius, .. } => *radius,
            GluedFunction::Disc { .. } => 1.0,
        }
    }

    pub fn eval(&self, z: &[Complex64]) -> f64 {
        match self {
            GluedFunction::Radial { radius, inner, outer, .. } => {
                let r = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                if r <= *radius {
                    inner.value_at_radius(r)
                } else {
                    outer.value_at_radius(r)
                }
            }
            GluedFunction::Disc { h } => {
                let (rho, theta) = z[0].to_polar();
                if rho <= 1.0 {
                    h.eval_polar(rho, theta)
                } else {
                    h.eval_polar(1.0 / rho, theta) + rho.ln()
                }
            }
        }
    }

    /// Largest `|inner - outer|` over sampled interface points.
    pub fn interface_jump(&self) -> f64 {
        match self {
            GluedFunction::Radial { radius, inner, outer, .. } => {
                (inner.value_at_radius(*radius) - outer.value_at_radius(*radius)).abs()
            }
            // h(1/z̄) = h(z) on the unit circle and log|z| vanishes there
            GluedFunction::Disc { .. } => 0.0,
        }
    }
}

/// Builds `h` inside / `h(1/z̄) + log|z|` outside, after checking
/// `|dh/dn| <= 1/2` on the unit circle at 10^4 points.
pub fn disc_reflection_glue(h: &TrigHarmonic) -> Result<GluedFunction> {
    let (mut worst, mut worst_theta) = (0.0f64, 0.0);
    for i in 0..BOUNDARY_SAMPLES {
        let theta = std::f64::consts::TAU * i as f64 / BOUNDARY_SAMPLES as f64;
        let d = h.normal_derivative(theta).abs();
        if d > worst {
            worst = d;
            worst_theta = theta;
        }
    }
    if worst > 0.5 + DERIVATIVE_TOL {
        return Err(Error::inadmissible(format!(
            "boundary normal derivative {worst} exceeds 1/2 at theta = {worst_theta}"
        )));
    }
    Ok(GluedFunction::Disc { h: h.clone() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubmeanReport {
    pub samples: usize,
    pub violations: usize,
    /// Largest `g(center) - average` seen (negative when every circle passes).
    pub worst_deficit: f64,
    /// `|center|` and circle radius at the worst sample.
    pub worst_center_radius: f64,
    pub worst_circle_radius: f64,
    pub seed: u64,
}

#[derive(Clone, Copy)]
struct Worst {
    deficit: f64,
    center: f64,
    rho: f64,
}

/// Checks `g(c) <= (1/2pi) int g(c + rho e^{i theta} w) d theta` on `samples`
/// random circles in complex lines. Centers cluster at the interface
/// (90% within 5% of its radius, 10% uniform in the ball of twice the radius).
/// Deterministic for a given seed under every execution policy.
pub fn submean_check(
    g: &GluedFunction,
    samples: usize,
    radius_range: (f64, f64),
    seed: u64,
    exec: Exec,
) -> Result<SubmeanReport> {
    let (rho_min, rho_max) = radius_range;
    if samples == 0 {
        return Err(Error::domain("need at least one sample"));
    }
    if !(rho_min > 0.0 && rho_max >= rho_min && rho_max.is_finite()) {
        return Err(Error::domain("circle radius range must be positive and ordered"));
    }
    let batches = samples.div_ceil(BATCH);
    let results = par::map_indexed(exec, batches, |b| {
        let count = BATCH.min(samples - b * BATCH);
        run_batch(g, count, rho_min, rho_max, seed, b as u64)
    });
    let mut violations = 0;
    let mut worst = Worst { deficit: f64::NEG_INFINITY, center: 0.0, rho: 0.0 };
    for (v, w) in results {
        violations += v;
        if w.deficit > worst.deficit {
            worst = w;
        }
    }
    Ok(SubmeanReport {
        samples,
        violations,
        worst_deficit: worst.deficit,
        worst_center_radius: worst.center,
        worst_circle_radius: worst.rho,
        seed,
    })
}

fn run_batch(g: &GluedFunction, count: usize, rho_min: f64, rho_max: f64, seed: u64, stream: u64) -> (usize, Worst) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let n = g.dim();
    let big_r = g.interface_radius();
    let mut center = vec![Complex64::new(0.0, 0.0); n];
    let mut dir = vec![Complex64::new(0.0, 0.0); n];
    let mut point = vec![Complex64::new(0.0, 0.0); n];
    let mut violations = 0;
    let mut worst = Worst { deficit: f64::NEG_INFINITY, center: 0.0, rho: 0.0 };
    for _ in 0..count {
        unit_vector(&mut rng, &mut center);
        let radius = if rng.random::<f64>() < 0.9 {
            big_r * (1.0 + rng.random_range(-0.05..=0.05))
        } else {
            2.0 * big_r * rng.random::<f64>().powf(1.0 / (2 * n) as f64)
        };
        center.iter_mut().for_each(|c| *c *= radius);
        unit_vector(&mut rng, &mut dir);
        let rho = rng.random_range(rho_min..=rho_max);

        let mut total = 0.0;
        for k in 0..CIRCLE_NODES {
            let phase = Complex64::from_polar(rho, std::f64::consts::TAU * k as f64 / CIRCLE_NODES as f64);
            for ((p, c), w) in point.iter_mut().zip(&center).zip(&dir) {
                *p = c + phase * w;
            }
            total += g.eval(&point);
        }
        let deficit = g.eval(&center) - total / CIRCLE_NODES as f64;
        if deficit > SUBMEAN_TOL {
            violations += 1;
        }
        if deficit > worst.deficit {
            worst = Worst { deficit, center: radius, rho };
        }
    }
    (violations, worst)
}

/// Uniform point on the unit sphere of `C^n = R^{2n}`.
fn unit_vector<R: Rng>(rng: &mut R, out: &mut [Complex64]) {
    loop {
        for c in out.iter_mut() {
            *c = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        }
        let norm = out.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-12 {
            out.iter_mut().for_each(|c| *c /= norm);
            return;
        }
    }
}

/// Where the quadratic weight `A(|z|^2 - R^2)` on the closed ball stops
/// being its own extremal function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub radius: f64,
    /// Largest `A` passing the derivative criterion against `log(|z|/R)`.
    pub glue_threshold: f64,
    /// Largest `A` for which the solved support still reaches `|z| = R`.
    pub solver_threshold: f64,
    /// Whether `2 A R <= 1` holds at the solver threshold.
    pub satisfies_2ar: bool,
    /// Whether `2 A R^2 <= 1` holds at the solver threshold.
    pub satisfies_2ar2: bool,
}

pub fn quadratic_threshold(radius: f64, dim: usize) -> Result<ThresholdReport> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::domain("radius must be positive"));
    }
    let hi0 = 4.0 / (radius * radius);
    let glue_ok = |a: f64| {
        let check = radial_glue_check(&quadratic_profile(a, radius), &log_ratio_profile(radius), radius);
        check.derivative_ok == Some(true)
    };
    let glue_threshold = bisect(0.0, hi0, 60, |a| Ok(glue_ok(a)))?;
    let ball = RadialSet::ball(radius)?;
    let reaches = |a: f64| -> Result<bool> {
        let c = -a * radius * radius;
        let w = RadialWeight::new(WeightKind::Power { a, beta: 2.0, c }, ball.clone())?;
        let sol = solve(&Problem::global(dim, w)?, &GridSpec::default())?;
        Ok(sol.support.density_intervals.last().is_some_and(|iv| iv[1] >= radius * (1.0 - 1e-12)))
    };
    let solver_threshold = bisect(0.0, hi0, 40, reaches)?;
    let tol = 1e-8;
    Ok(ThresholdReport {
        radius,
        glue_threshold,
        solver_threshold,
        satisfies_2ar: 2.0 * solver_threshold * radius <= 1.0 + tol,
        satisfies_2ar2: 2.0 * solver_threshold * radius * radius <= 1.0 + tol,
    })
}

/// Largest point of `[lo, hi]` where a monotone predicate (true then false) holds.
fn bisect(mut lo: f64, mut hi: f64, steps: usize, pred: impl Fn(f64) -> Result<bool>) -> Result<f64> {
    for _ in 0..steps {
        let mid = 0.5 * (lo + hi);
        if pred(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}
