//! Radial data model: the logarithmic coordinate, convex profiles, radial
//! sets and weights, and the plurisubharmonicity / Lelong class tests.

mod coord;
mod curve;
mod profile;
mod set;
mod weight;

pub use coord::LogCoordinate;
pub(crate) use coord::{r_of, s_of};
pub use curve::Curve;
pub use profile::{check_class, eval_profile, scale_profile, ClassFlags, Knot, LeftTail, Piece, RadialProfile};
pub use set::RadialSet;
pub use weight::{RadialWeight, Region, WeightKind};
