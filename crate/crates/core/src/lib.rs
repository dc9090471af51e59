//! Numerical laboratory for anisotropic Michael–Simon type inequalities.
//!
//! Modules follow the data flow: [`integrand`] defines `F`, [`normalize`] finds the
//! volume-maximizing change of coordinates, [`varifold`] computes first variations of
//! triangle varifolds and projects them to the plane, [`planefield`] holds staggered-grid
//! planar fields and the planar inequality checkers, and [`flowdecomp`] runs the flow-line
//! constructions behind those inequalities on smooth fields.

// `!(x < y)` comparisons are written to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geom;
pub mod integrand;
pub mod flowdecomp;
pub mod normalize;
pub mod planefield;
pub mod report;
pub mod varifold;

pub use error::{Error, Result};
pub use geom::{Mat2, Mat3, Vec2, Vec3};
pub use integrand::Integrand;
pub use report::Report;
