use serde::{Deserialize, Serialize};

/// The coordinate `s = log|z|^2`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LogCoordinate(pub f64);

impl LogCoordinate {
    /// `r = 0` maps to `-inf`.
    pub fn from_radius(r: f64) -> Self {
        LogCoordinate(2.0 * r.ln())
    }

    pub fn radius(self) -> f64 {
        (0.5 * self.0).exp()
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<f64> for LogCoordinate {
    fn from(s: f64) -> Self {
        LogCoordinate(s)
    }
}

/// `2 ln r`, the coordinate of a radius.
#[inline]
pub(crate) fn s_of(r: f64) -> f64 {
    2.0 * r.ln()
}

/// `exp(s / 2)`, the radius of a coordinate.
#[inline]
pub(crate) fn r_of(s: f64) -> f64 {
    (0.5 * s).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn radius_round_trip(exp10 in -12.0f64..12.0) {
            let r = 10f64.powf(exp10);
            let back = LogCoordinate::from_radius(r).radius();
            prop_assert!(((back - r) / r).abs() <= 4e-14);
        }
    }

    #[test]
    fn origin_is_minus_infinity() {
        assert_eq!(LogCoordinate::from_radius(0.0).value(), f64::NEG_INFINITY);
        assert_eq!(LogCoordinate(f64::NEG_INFINITY).radius(), 0.0);
    }
}
