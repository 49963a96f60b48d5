use serde::{Deserialize, Serialize};

use super::coord::r_of;
use crate::measure::DensitySegment;
use crate::quad;

/// A smooth profile piece described by its slope in s as a function of the
/// radius `t = exp(s/2)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Curve {
    /// Slope `a + b t^k`; integrates in closed form.
    PowerSlope { a: f64, b: f64, k: f64 },
    /// Slope `((base + sum of segment increments at t) / (4 pi)^dim)^(1/dim)`,
    /// i.e. the slope generated by a ball-mass function. Integrated numerically.
    MeasureRoot {
        dim: usize,
        base: f64,
        segments: Vec<DensitySegment>,
    },
}

impl Curve {
    pub fn validate(&self) -> crate::Result<()> {
        match self {
            Curve::PowerSlope { a, b, k } => {
                if !(a.is_finite() && b.is_finite() && k.is_finite()) {
                    return Err(crate::Error::structural("power slope coefficients must be finite"));
                }
                if *k == 0.0 {
                    return Err(crate::Error::structural("power slope exponent must be nonzero"));
                }
                Ok(())
            }
            Curve::MeasureRoot { dim, base, segments } => {
                if *dim == 0 {
                    return Err(crate::Error::structural("measure root dimension must be positive"));
                }
                if !(base.is_finite() && *base >= 0.0) {
                    return Err(crate::Error::structural("measure root base mass must be nonnegative"));
                }
                for seg in segments {
                    seg.validate()?;
                }
                Ok(())
            }
        }
    }

    /// Slope in s at radius `t > 0`.
    pub fn slope_at_radius(&self, t: f64) -> f64 {
        match self {
            Curve::PowerSlope { a, b, k } => a + b * t.powf(*k),
            Curve::MeasureRoot { dim, base, segments } => {
                let mass = base + segments.iter().map(|seg| seg.increment(t)).sum::<f64>();
                root_slope(mass, *dim)
            }
        }
    }

    /// Slope in s at `s`.
    pub fn slope(&self, s: f64) -> f64 {
        match self {
            Curve::PowerSlope { a, b, k } => a + b * (0.5 * k * s).exp(),
            _ => self.slope_at_radius(r_of(s)),
        }
    }

    /// Derivative of the slope with respect to s.
    pub fn curvature(&self, s: f64) -> f64 {
        match self {
            Curve::PowerSlope { b, k, .. } => b * 0.5 * k * (0.5 * k * s).exp(),
            _ => {
                let h = 1e-5 * (1.0 + s.abs());
                (self.slope(s + h) - self.slope(s - h)) / (2.0 * h)
            }
        }
    }

    /// `sup |slope'|` over `[lo, hi]`; `lo` may be `-inf`.
    pub fn curvature_bound(&self, lo: f64, hi: f64) -> f64 {
        match self {
            // |b k / 2| e^{ks/2} is monotone in s, so the sup sits at an end.
            Curve::PowerSlope { .. } => {
                let at = |s: f64| if s.is_finite() { self.curvature(s).abs() } else { 0.0 };
                let upper = if lo == f64::NEG_INFINITY && self.limit_slope().is_infinite() {
                    f64::INFINITY
                } else {
                    at(lo)
                };
                upper.max(at(hi))
            }
            Curve::MeasureRoot { .. } => {
                let lo = lo.max(hi - 40.0);
                (0..=64)
                    .map(|i| self.curvature(lo + (hi - lo) * i as f64 / 64.0).abs())
                    .fold(0.0, f64::max)
            }
        }
    }

    /// Slope as `s -> -inf`.
    pub fn limit_slope(&self) -> f64 {
        match self {
            Curve::PowerSlope { a, b, k } => {
                if *k > 0.0 || *b == 0.0 {
                    *a
                } else {
                    b.signum() * f64::INFINITY
                }
            }
            Curve::MeasureRoot { .. } => self.slope_at_radius(0.0),
        }
    }

    /// Whether the slope is nondecreasing in s.
    pub fn is_monotone(&self) -> bool {
        match self {
            Curve::PowerSlope { b, k, .. } => b * k >= 0.0,
            // Segment laws are validated nondecreasing.
            Curve::MeasureRoot { .. } => true,
        }
    }

    /// `int_{s0}^{s1} slope ds`. `s0` may be `-inf`.
    pub fn increment(&self, s0: f64, s1: f64) -> f64 {
        if s0 == s1 {
            return 0.0;
        }
        match self {
            Curve::PowerSlope { a, b, k } => {
                let linear = if *a == 0.0 { 0.0 } else { a * (s1 - s0) };
                let (x0, x1) = (0.5 * k * s0, 0.5 * k * s1);
                // (2b/k)(e^{x1} - e^{x0}), written to keep precision for close x0, x1
                let power = if s0 == f64::NEG_INFINITY {
                    if *k > 0.0 {
                        x1.exp()
                    } else {
                        f64::INFINITY
                    }
                } else {
                    x0.exp() * (x1 - x0).exp_m1()
                };
                let power = if *b == 0.0 { 0.0 } else { 2.0 * b / k * power };
                linear + power
            }
            Curve::MeasureRoot { .. } => {
                let (t0, t1) = (r_of(s0), r_of(s1));
                let tol = quad::DEFAULT_ABS_TOL;
                quad::integrate(|t| 2.0 * self.slope_at_radius(t) / t, t0, t1, tol).value
            }
        }
    }

    /// The curve whose slope is `lambda` times this one.
    pub fn scale(&self, lambda: f64) -> Curve {
        match self {
            Curve::PowerSlope { a, b, k } => Curve::PowerSlope { a: lambda * a, b: lambda * b, k: *k },
            Curve::MeasureRoot { dim, base, segments } => {
                let factor = lambda.powi(*dim as i32);
                Curve::MeasureRoot {
                    dim: *dim,
                    base: factor * base,
                    segments: segments.iter().map(|seg| seg.scale(factor)).collect(),
                }
            }
        }
    }
}

/// `(mass / (4 pi)^n)^(1/n)`, clamped at zero.
pub(crate) fn root_slope(mass: f64, n: usize) -> f64 {
    let c = crate::ma_normalization(n);
    (mass.max(0.0) / c).powf(1.0 / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::CdfLaw;

    #[test]
    fn power_slope_increment_matches_quadrature() {
        let c = Curve::PowerSlope { a: 0.1, b: 0.3, k: 1.5 };
        let exact = c.increment(-1.0, 2.0);
        let numeric = quad::integrate(|s| c.slope(s), -1.0, 2.0, 1e-13).value;
        assert!((exact - numeric).abs() < 1e-12);
    }

    #[test]
    fn power_slope_from_minus_infinity() {
        // int_{-inf}^{0} 0.25 e^{s} ds = 0.25
        let c = Curve::PowerSlope { a: 0.0, b: 0.25, k: 2.0 };
        assert!((c.increment(f64::NEG_INFINITY, 0.0) - 0.25).abs() < 1e-15);
        assert_eq!(c.limit_slope(), 0.0);
    }

    #[test]
    fn measure_root_inverts_power_law() {
        // f(t) = (4 pi)^n (t/2)^n on [0, 1]  =>  slope t/2
        let n = 2;
        let c_n = crate::ma_normalization(n);
        let seg = DensitySegment::new(
            0.0,
            1.0,
            CdfLaw::Power { coeff: c_n / 4.0, origin: 0.0, exponent: 2.0 },
        );
        let curve = Curve::MeasureRoot { dim: n, base: 0.0, segments: vec![seg] };
        assert!((curve.slope_at_radius(0.6) - 0.3).abs() < 1e-14);
        // int slope ds = int (t/2)(2/t) dt = t
        assert!((curve.increment(2.0 * 0.2f64.ln(), 2.0 * 0.7f64.ln()) - 0.5).abs() < 1e-10);
    }

    #[test]
    fn scaling_multiplies_slope() {
        let seg = DensitySegment::new(1.0, 2.0, CdfLaw::Power { coeff: 3.0, origin: 1.0, exponent: 1.0 });
        let curve = Curve::MeasureRoot { dim: 3, base: 0.5, segments: vec![seg] };
        let scaled = curve.scale(0.5);
        let t = 1.4;
        assert!((scaled.slope_at_radius(t) - 0.5 * curve.slope_at_radius(t)).abs() < 1e-15);
    }
}
