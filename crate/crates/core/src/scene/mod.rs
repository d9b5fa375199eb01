//! Sites, scenes and exact distance evaluation.
//!
//! A [`Scene`] is an ordered collection of pairwise-disjoint [`Site`]s, each
//! a finite union of [`Primitive`]s. Distances are exact (closed form) for
//! the Euclidean metric and for the L1 metric on the primitives that support
//! it.

mod clip;
mod io;
mod primitive;

use std::cmp::Ordering;

pub use clip::{clip_scene, ClippedPrimitive, ClippedScene};
pub use io::{parse_scene, scene_to_json, PrimitiveSpec, SceneFile, SiteSpec};
pub use primitive::{primitive_distance, Primitive};

use crate::config;
use crate::geom::Vec3;
use crate::scalar::{lit, Real};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SceneError {
    #[error("scene syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },

    #[error("dimension must be 2 or 3, got {0}")]
    BadDimension(usize),

    #[error("site {site}: expected {expected} coordinates, got {got}")]
    DimensionMismatch { site: String, expected: usize, got: usize },

    #[error("site {site}: {message}")]
    InvalidPrimitive { site: String, message: String },

    #[error("site {0} has no primitives")]
    EmptySite(String),

    #[error("a scene needs at least two sites, got {0}")]
    TooFewSites(usize),

    #[error("sites {first} and {second} are not disjoint (distance {distance:e})")]
    NotDisjoint { first: String, second: String, distance: f64 },

    #[error("taxicab distance is not implemented for {0} primitives")]
    TaxicabUnsupported(&'static str),

    #[error("clip radius must be positive, got {0}")]
    BadRadius(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Metric {
    Euclidean,
    Taxicab,
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Taxicab => "taxicab",
        }
    }
}

/// A closed set given as a union of primitives.
#[derive(Clone, Debug, PartialEq)]
pub struct Site<T> {
    pub id: String,
    pub primitives: Vec<Primitive<T>>,
}

impl<T: Real> Site<T> {
    pub fn new(id: impl Into<String>, primitives: Vec<Primitive<T>>) -> Self {
        Self { id: id.into(), primitives }
    }

    pub fn distance(&self, x: &Vec3<T>) -> T {
        self.primitives.iter().map(|p| p.distance(x)).fold(T::infinity(), T::min)
    }

    pub fn distance_in(&self, x: &Vec3<T>, metric: Metric) -> Result<T, SceneError> {
        match metric {
            Metric::Euclidean => Ok(self.distance(x)),
            Metric::Taxicab => self.primitives.iter().try_fold(T::infinity(), |acc, p| {
                p.l1_distance(x).map(|d| acc.min(d)).ok_or(SceneError::TaxicabUnsupported(p.kind()))
            }),
        }
    }

    /// Nearest point of the site; ties go to the first primitive in
    /// declaration order (and within it, to the lexicographically smallest).
    pub fn nearest_point(&self, x: &Vec3<T>) -> Vec3<T> {
        let mut best: Option<(T, Vec3<T>)> = None;
        for p in &self.primitives {
            let d = p.distance(x);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, p.nearest(x)));
            }
        }
        best.expect("site has primitives").1
    }

    /// Euclidean distance between two sites.
    pub fn set_distance(&self, other: &Site<T>) -> T {
        let mut best = T::infinity();
        for a in &self.primitives {
            for b in &other.primitives {
                best = best.min(primitive_distance(a, b));
            }
        }
        best
    }

    pub fn map_points(&self, f: &impl Fn(Vec3<T>) -> Vec3<T>, linear: &impl Fn(Vec3<T>) -> Vec3<T>) -> Self {
        let primitives = self
            .primitives
            .iter()
            .map(|p| match p {
                Primitive::Point(q) => Primitive::Point(f(*q)),
                Primitive::PointSet(qs) => Primitive::PointSet(qs.iter().map(|q| f(*q)).collect()),
                Primitive::Hyperplane { normal, offset } => {
                    let foot = *normal * *offset;
                    let n = linear(*normal).normalized().expect("nonzero normal");
                    Primitive::Hyperplane { normal: n, offset: n.dot(&f(foot)) }
                }
                Primitive::Sphere { center, radius } => {
                    Primitive::Sphere { center: f(*center), radius: *radius * linear(Vec3::axis(0)).norm() }
                }
                Primitive::Ball { center, radius } => {
                    Primitive::Ball { center: f(*center), radius: *radius * linear(Vec3::axis(0)).norm() }
                }
                Primitive::Segment { a, b } => Primitive::Segment { a: f(*a), b: f(*b) },
                Primitive::Box { min, max } => {
                    let (p, q) = (f(*min), f(*max));
                    Primitive::Box { min: p.zip(&q, T::min), max: p.zip(&q, T::max) }
                }
            })
            .collect();
        Self { id: self.id.clone(), primitives }
    }
}

/// Anything that assigns distances from points to an indexed family of sets.
pub trait DistanceField<T: Real>: Sync {
    fn dimension(&self) -> usize;
    fn site_count(&self) -> usize;
    fn site_distance(&self, i: usize, x: &Vec3<T>) -> T;

    fn distances(&self, x: &Vec3<T>) -> Vec<T> {
        (0..self.site_count()).map(|i| self.site_distance(i, x)).collect()
    }
}

/// An ordered collection of pairwise-disjoint sites.
#[derive(Clone, Debug, PartialEq)]
pub struct Scene<T> {
    dimension: usize,
    metric: Metric,
    sites: Vec<Site<T>>,
}

impl<T: Real> Scene<T> {
    /// Validates invariants: dimension, primitive shapes, metric support, and
    /// pairwise disjointness.
    pub fn new(dimension: usize, metric: Metric, sites: Vec<Site<T>>) -> Result<Self, SceneError> {
        if dimension != 2 && dimension != 3 {
            return Err(SceneError::BadDimension(dimension));
        }
        if sites.len() < 2 {
            return Err(SceneError::TooFewSites(sites.len()));
        }
        for s in &sites {
            if s.primitives.is_empty() {
                return Err(SceneError::EmptySite(s.id.clone()));
            }
            for p in &s.primitives {
                p.validate(dimension)
                    .map_err(|message| SceneError::InvalidPrimitive { site: s.id.clone(), message })?;
                if metric == Metric::Taxicab && !p.supports_taxicab() {
                    return Err(SceneError::TaxicabUnsupported(p.kind()));
                }
            }
        }
        let tol = lit::<T>(config::DISJOINT_TOL);
        for i in 0..sites.len() {
            for j in i + 1..sites.len() {
                let d = sites[i].set_distance(&sites[j]);
                if !(d >= tol) {
                    return Err(SceneError::NotDisjoint {
                        first: sites[i].id.clone(),
                        second: sites[j].id.clone(),
                        distance: crate::scalar::to_f64(d),
                    });
                }
            }
        }
        Ok(Self { dimension, metric, sites })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn sites(&self) -> &[Site<T>] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Distance from `x` to site `i` under the scene metric.
    pub fn distance(&self, i: usize, x: &Vec3<T>) -> T {
        match self.metric {
            Metric::Euclidean => self.sites[i].distance(x),
            // Construction guarantees every primitive has an L1 formula.
            Metric::Taxicab => self.sites[i].distance_in(x, Metric::Taxicab).unwrap_or(T::infinity()),
        }
    }

    /// Same scene with a different metric (re-validated).
    pub fn with_metric(&self, metric: Metric) -> Result<Self, SceneError> {
        Self::new(self.dimension, metric, self.sites.clone())
    }

    /// Image of the scene under the affine map `x -> linear(x) + shift`
    /// where `linear` is a similarity (rotation/reflection times scale).
    pub fn transformed(&self, linear: impl Fn(Vec3<T>) -> Vec3<T>, shift: Vec3<T>) -> Result<Self, SceneError> {
        let f = |x: Vec3<T>| linear(x) + shift;
        let sites = self.sites.iter().map(|s| s.map_points(&f, &linear)).collect();
        Self::new(self.dimension, self.metric, sites)
    }
}

impl<T: Real> DistanceField<T> for Scene<T> {
    fn dimension(&self) -> usize {
        self.dimension
    }
    fn site_count(&self) -> usize {
        self.sites.len()
    }
    fn site_distance(&self, i: usize, x: &Vec3<T>) -> T {
        self.distance(i, x)
    }
}

/// Euclidean distance from `x` to `site`.
pub fn distance<T: Real>(site: &Site<T>, x: &Vec3<T>, metric: Metric) -> Result<T, SceneError> {
    site.distance_in(x, metric)
}

/// Nearest point of `site` to `x` (Euclidean).
pub fn nearest_point<T: Real>(site: &Site<T>, x: &Vec3<T>) -> Vec3<T> {
    site.nearest_point(x)
}

/// Sorts indices by distance, ties by index.
pub(crate) fn order_by_distance<T: Real>(d: &[T]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..d.len()).collect();
    idx.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p2(x: f64, y: f64) -> Vec3<f64> {
        Vec3::new(x, y, 0.0)
    }

    #[test]
    fn nearest_point_prefers_first_primitive_on_ties() {
        let site = Site::new("s", vec![Primitive::Point(p2(0.0, 1.0)), Primitive::Point(p2(0.0, -1.0))]);
        assert_eq!(site.nearest_point(&Vec3::zero()), p2(0.0, 1.0));
        let set = Site::new("t", vec![Primitive::PointSet(vec![p2(1.0, 0.0), p2(-1.0, 0.0)])]);
        assert_eq!(set.nearest_point(&p2(0.2, 0.0)), p2(1.0, 0.0));
        assert_eq!(set.nearest_point(&p2(0.0, 0.0)), p2(-1.0, 0.0));
    }

    #[test]
    fn overlapping_sites_rejected() {
        let a = Site::new("a", vec![Primitive::Point(p2(0.0, 0.0))]);
        let b = Site::new("b", vec![Primitive::Ball { center: p2(0.5, 0.0), radius: 1.0 }]);
        match Scene::new(2, Metric::Euclidean, vec![a, b]) {
            Err(SceneError::NotDisjoint { first, second, distance }) => {
                assert_eq!((first.as_str(), second.as_str()), ("a", "b"));
                assert_eq!(distance, 0.0);
            }
            other => panic!("expected disjointness error, got {other:?}"),
        }
    }

    #[test]
    fn taxicab_rejects_spheres() {
        let a = Site::new("a", vec![Primitive::Point(p2(0.0, 0.0))]);
        let b = Site::new("b", vec![Primitive::Sphere { center: p2(5.0, 0.0), radius: 1.0 }]);
        assert_eq!(
            Scene::new(2, Metric::Taxicab, vec![a.clone(), b.clone()]).unwrap_err(),
            SceneError::TaxicabUnsupported("sphere")
        );
        assert!(matches!(
            distance(&b, &Vec3::zero(), Metric::Taxicab),
            Err(SceneError::TaxicabUnsupported("sphere"))
        ));
    }

    #[test]
    fn transformed_hyperplane_keeps_distances() {
        let plane = Site::new("h", vec![Primitive::Hyperplane { normal: Vec3::new(0.0, 0.0, 1.0), offset: 1.0 }]);
        let pt = Site::new("p", vec![Primitive::Point(Vec3::new(1.0, 0.0, 0.0))]);
        let scene = Scene::new(3, Metric::Euclidean, vec![pt, plane]).unwrap();
        // Rotation by 90 degrees about x, then shift.
        let rot = |v: Vec3<f64>| Vec3::new(v.x, -v.z, v.y);
        let shift = Vec3::new(0.5, -2.0, 3.0);
        let moved = scene.transformed(rot, shift).unwrap();
        for x in [Vec3::new(0.1, 0.2, 0.3), Vec3::new(-1.0, 2.0, 0.5)] {
            for i in 0..2 {
                let d0 = scene.distance(i, &x);
                let d1 = moved.distance(i, &(rot(x) + shift));
                assert!((d0 - d1).abs() < 1e-12);
            }
        }
    }
}
