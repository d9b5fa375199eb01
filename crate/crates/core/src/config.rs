//! Numeric defaults.
//!
//! Every tolerance and threshold used by the library, the CLI and the
//! acceptance suite is defined here.

/// Sites closer than this are rejected as not disjoint.
pub const DISJOINT_TOL: f64 = 1e-9;
/// Hyperplane normals must have unit norm within this.
pub const UNIT_NORMAL_TOL: f64 = 1e-12;
/// Default tie tolerance for territory labels.
pub const TIE_TOL: f64 = 1e-9;
/// Maximum `|d_i - d_j|` at an extracted vertex.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Tie tolerance for the global-minimality check at extracted vertices.
pub const MEMBERSHIP_TOL: f64 = 1e-8;
/// Residual target of [`crate::conflict::refine_point`].
pub const REFINE_TOL: f64 = 1e-12;
/// Iteration cap of [`crate::conflict::refine_point`].
pub const REFINE_MAX_ITER: usize = 100;
/// Iteration cap for edge roots inside the grid extractors.
pub const EXTRACT_MAX_ITER: usize = 80;
/// Smallest accepted grid resolution (cells per axis).
pub const MIN_RESOLUTION: usize = 8;
/// Tolerance used when a closed form is replaced by iterative minimization.
pub const MINIMIZE_TOL: f64 = 1e-10;

/// Unit-vector check for geodesic distances.
pub const UNIT_DIRECTION_TOL: f64 = 1e-10;
/// Angular residual target for spherical conflict points.
pub const ANGULAR_RESIDUAL_TOL: f64 = 1e-9;
/// Default number of samples on S^1.
pub const CIRCLE_SAMPLES: usize = 3600;
/// Default icosphere subdivision level on S^2.
pub const ICOSPHERE_LEVEL: usize = 6;
/// Samples used for a support that covers a whole circle.
pub const SUPPORT_CIRCLE_SAMPLES: usize = 256;
/// Samples used for a support that covers a whole 2-sphere.
pub const SUPPORT_SPHERE_SAMPLES: usize = 2048;
/// Arc step used when densifying spherical curves for Hausdorff comparisons.
pub const SPHERE_DENSIFY_STEP: f64 = 0.004;

/// Slices must stay at least this many grid spacings away from the apex.
pub const SLICE_MIN_SPACINGS: f64 = 3.0;
/// Samples along each triangle/sphere intersection arc.
pub const ARC_SAMPLES: usize = 8;
/// Accept tolerance on the final rescaled slice (chordal).
pub const TANGENT_ACCEPT_TOL: f64 = 0.05;
/// Allowed relative increase between consecutive slice distances.
pub const TANGENT_JITTER: f64 = 0.2;
/// Extraction window half-width relative to the largest slice radius.
pub const TANGENT_WINDOW_FACTOR: f64 = 1.25;
/// Default grid resolution for tangent-cone verification.
pub const TANGENT_RESOLUTION: usize = 96;

/// Vertices closer than this are merged when building the inner-metric graph.
pub const SNAP_TOL: f64 = 1e-7;
/// Candidate probe pairs evaluated per scale.
pub const PROBE_PAIRS: usize = 64;
/// Consecutive ratio growth that counts as divergence.
pub const DIVERGENCE_GROWTH: f64 = 1.5;
/// Extraction window half-width relative to the probe scale.
pub const EMBEDDING_WINDOW_FACTOR: f64 = 1.5;
/// Default grid resolution for embedding scans.
pub const EMBEDDING_RESOLUTION: usize = 96;
/// Angular single-linkage threshold for branch clustering (degrees).
pub const BRANCH_LINKAGE_DEG: f64 = 10.0;
/// Minimum angle between distinct branches (degrees).
pub const MIN_BRANCH_ANGLE_DEG: f64 = 2.0;
/// Default grid resolution for planar branch analysis.
pub const BRANCH_RESOLUTION: usize = 128;

/// Default seed for randomized probes.
pub const DEFAULT_SEED: u64 = 7;
