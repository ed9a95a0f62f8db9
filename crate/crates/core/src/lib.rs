//! Numerical toolkit for weighted anisotropic isoperimetric inequalities in
//! convex cones.
//!
//! The crate builds cones, gauges with their Wulff shapes, and homogeneous
//! weights; measures weighted volumes and anisotropic perimeters; and runs
//! the checks that make the sharp inequality falsifiable: quotient searches,
//! the ABP construction on a masked grid, the planar Wirtinger-type
//! stability test and the dimension-lifting construction for integer degrees.

pub mod abp;
pub mod cli;
pub mod cone;
pub mod error;
pub mod gauge;
pub mod isoperimetry;
pub mod lifting;
pub mod linalg;
pub mod measure;
pub mod quadrature;
pub mod rng;
pub mod sphere;
pub mod weights;
pub mod wirtinger;

pub use cone::{ConeKind, ConvexCone};
pub use error::{Error, Result};
pub use gauge::{dual_gauge, restricted_gauge, wulff_membership, Gauge, WulffBody};
pub use weights::{Weight, WeightSpec};
