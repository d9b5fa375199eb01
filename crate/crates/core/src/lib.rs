//! Conflict sets of finite collections of disjoint closed sets.
//!
//! The conflict set of `X = {X_1, ..., X_k}` is the locus of points that are
//! simultaneously nearest to two or more of the sets. This crate extracts it
//! on grids (polylines in the plane, triangle meshes in space), computes
//! supports and spherical conflict sets at a base point, estimates tangent
//! cones from rescaled sphere slices, and measures inner-vs-outer metric
//! behaviour of the extracted complexes.
//!
//! All geometry is generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`, which is what the CLI uses.

// `!(a > b)` is used on purpose so that NaN inputs fall into the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::type_complexity)]

pub mod cli;
pub mod config;
pub mod conflict;
pub mod geom;
pub mod metrics;
pub mod scalar;
pub mod scene;
pub mod scenes;
pub mod spherical;
pub mod tangent;

pub use geom::{AxisBox, Vec3};
pub use scalar::Real;

pub type Point = geom::Vec3<f64>;
pub type Window = geom::AxisBox<f64>;
pub type Scene = scene::Scene<f64>;
pub type Site = scene::Site<f64>;
pub type Primitive = scene::Primitive<f64>;
pub type ConflictComplex = conflict::ConflictComplex<f64>;
pub type SupportSet = spherical::SupportSet<f64>;
pub type SphericalComplex = spherical::SphericalComplex<f64>;
pub type GeodesicGraph = metrics::GeodesicGraph<f64>;

pub type Scene32 = scene::Scene<f32>;
pub type ConflictComplex32 = conflict::ConflictComplex<f32>;
