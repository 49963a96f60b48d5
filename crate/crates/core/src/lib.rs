//! Weighted extremal functions and equilibrium measures for radially
//! symmetric compact sets in `C^n`.
//!
//! Everything is expressed in the logarithmic coordinate `s = log|z|^2`, in
//! which a radial function is plurisubharmonic exactly when its profile is
//! convex and nondecreasing. The Monge-Ampère measure of a radial profile is
//! then a one-dimensional object, its ball-mass function
//! `f(t) = mu(B(0, t)) = (4 pi)^n (u'(log t^2))^n`.
//!
//! Module map:
//!
//! - [`radial`]: coordinates, profiles, radial sets and weights.
//! - [`measure`]: the forward map profile -> measure, supports and masses.
//! - [`persson`]: the inverse map measure -> profile and measure mixtures.
//! - [`extremal`]: global and relative weighted extremal functions as
//!   constrained convex envelopes, with the comparison diagnostics.
//! - [`glue`]: gluing criteria and a Monte Carlo sub-mean-value checker.
//! - [`gallery`]: the closed-form example fixtures.
//! - [`io`]: the on-disk problem, measure, profile and glue documents.

pub mod error;
pub mod extremal;
pub mod gallery;
pub mod glue;
pub mod io;
pub mod measure;
pub mod par;
pub mod persson;
pub mod quad;
pub mod radial;

pub use error::{Error, Result};
pub use extremal::{
    boundary_support_check, compare_abs_continuity, contact_set, solve, solve_global,
    solve_relative, verify_domination, verify_relative_domination, GridSpec, Mode, Problem,
    Solution,
};
pub use measure::{ma_cdf, support, total_mass, Atom, CdfLaw, DensitySegment, RadialMeasure, SupportReport};
pub use persson::{admissible, geometric_series, mixture, reconstruct};
pub use radial::{
    check_class, eval_profile, scale_profile, ClassFlags, Curve, LogCoordinate, Piece,
    RadialProfile, RadialSet, RadialWeight, WeightKind,
};

/// Absolute tolerance for comparing slopes in s-units.
pub const SLOPE_TOL: f64 = 1e-10;

/// `4^n n! omega_{2n}`, where `omega_{2n} = pi^n / n!` is the volume of the
/// unit ball of `R^{2n}`. Equals `(4 pi)^n`.
pub fn ma_normalization(n: usize) -> f64 {
    let factorial: f64 = (1..=n).map(|k| k as f64).product();
    let omega = std::f64::consts::PI.powi(n as i32) / factorial;
    4f64.powi(n as i32) * factorial * omega
}

/// Total Monge-Ampère mass of any function of logarithmic growth, `(2 pi)^n`.
pub fn lelong_mass(n: usize) -> f64 {
    (2.0 * std::f64::consts::PI).powi(n as i32)
}
