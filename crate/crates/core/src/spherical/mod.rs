//! Supports, geodesic conflict sets on spheres, cones and annular shadows.
//!
//! At a base point `x0` with `r0 = min_i d(x0, X_i)`, the support of `X_i`
//! is `X_i ∩ S(x0, r0)`. Supports are stored as unit directions
//! `(y - x0) / r0`, and the spherical conflict set is computed on the unit
//! sphere under the great-circle metric.

mod icosphere;

use std::collections::HashMap;

use rayon::prelude::*;

pub use icosphere::{fibonacci_sphere, Icosphere};

use crate::conflict::{bisect_pair, globally_minimal, label, position_key, vertex_label, Cell, ComplexVertex};
use crate::config;
use crate::geom::Vec3;
use crate::scalar::{lit, to_f64, Real};
use crate::scene::{DistanceField, Metric, Primitive, Scene, SceneError, Site};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SphericalError {
    #[error("base point lies in site `{0}` (r0 = 0)")]
    InsideSite(String),

    #[error("support analysis needs the euclidean metric")]
    MetricUnsupported,

    #[error("expected a unit vector, got norm {0}")]
    NotUnit(f64),

    #[error("need at least two nonempty supports, found {0}")]
    TooFewSupports(usize),

    #[error("radius must be positive, got {0}")]
    BadRadius(f64),

    #[error("resolution {0} is out of range")]
    BadResolution(usize),

    #[error("annular shadow is not a valid scene: {0}")]
    Shadow(#[from] SceneError),
}

/// `r0 = min_i d(x0, X_i)` and every site achieving it within 1e-9.
pub fn min_distance_profile<T: Real>(scene: &Scene<T>, x0: &Vec3<T>) -> Result<(T, Vec<usize>), SphericalError> {
    let l = label(scene, x0, lit(config::TIE_TOL));
    if l.min_distance <= lit(1e-12) {
        return Err(SphericalError::InsideSite(scene.sites()[l.argmin[0]].id.clone()));
    }
    Ok((l.min_distance, l.argmin))
}

/// Great-circle distance between unit vectors.
pub fn geodesic_distance<T: Real>(u: &Vec3<T>, v: &Vec3<T>) -> Result<T, SphericalError> {
    let tol = lit::<T>(config::UNIT_DIRECTION_TOL);
    for w in [u, v] {
        if (w.norm() - T::one()).abs() > tol {
            return Err(SphericalError::NotUnit(to_f64(w.norm())));
        }
    }
    Ok(angle(u, v))
}

/// Angle between two nonzero vectors, accurate near 0 and π.
pub(crate) fn angle<T: Real>(u: &Vec3<T>, v: &Vec3<T>) -> T {
    u.cross(v).norm().atan2(u.dot(v))
}

/// The support of one site.
#[derive(Clone, Debug, PartialEq)]
pub struct Support<T> {
    pub site: usize,
    pub id: String,
    /// Contact points on `S(x0, r0)`.
    pub points: Vec<Vec3<T>>,
    /// `(points - x0) / r0`.
    pub directions: Vec<Vec3<T>>,
    /// True when the support is a sample of a continuum (a sphere concentric with `x0`).
    pub sampled: bool,
}

impl<T> Support<T> {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Supports of every site at a base point.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportSet<T> {
    pub dimension: usize,
    pub x0: Vec3<T>,
    pub r0: T,
    /// Sites at distance `r0` (within the tie tolerance).
    pub achieving: Vec<usize>,
    /// One entry per scene site, in scene order.
    pub supports: Vec<Support<T>>,
}

impl<T: Real> SupportSet<T> {
    /// Indices of sites with a nonempty support.
    pub fn nonempty(&self) -> Vec<usize> {
        self.supports.iter().filter(|s| !s.is_empty()).map(|s| s.site).collect()
    }

    /// Indices of sites left out of spherical analysis (empty support).
    pub fn excluded(&self) -> Vec<usize> {
        self.supports.iter().filter(|s| s.is_empty()).map(|s| s.site).collect()
    }

    /// Geodesic distance field of the supports on the unit sphere.
    pub fn field(&self) -> SupportField<'_, T> {
        SupportField { set: self }
    }
}

/// Distance from a direction to each support, measured along great circles.
/// Input points are normalized first; empty supports are infinitely far.
pub struct SupportField<'a, T> {
    set: &'a SupportSet<T>,
}

impl<T: Real> DistanceField<T> for SupportField<'_, T> {
    fn dimension(&self) -> usize {
        self.set.dimension
    }

    fn site_count(&self) -> usize {
        self.set.supports.len()
    }

    fn site_distance(&self, i: usize, x: &Vec3<T>) -> T {
        self.set.supports[i].directions.iter().map(|d| angle(x, d)).fold(T::infinity(), T::min)
    }
}

/// Analytic supports: every site at distance `r0` contributes its nearest
/// points on the minimal sphere; a sphere primitive centered at `x0` is sampled.
pub fn support_sets<T: Real>(scene: &Scene<T>, x0: &Vec3<T>) -> Result<SupportSet<T>, SphericalError> {
    if scene.metric() != Metric::Euclidean {
        return Err(SphericalError::MetricUnsupported);
    }
    let (r0, achieving) = min_distance_profile(scene, x0)?;
    let tol = lit::<T>(config::TIE_TOL);
    let dim = scene.dimension();
    let supports = scene
        .sites()
        .iter()
        .enumerate()
        .map(|(i, site)| {
            let (points, sampled) =
                if achieving.contains(&i) { contact_points(site, x0, r0, tol, dim) } else { (Vec::new(), false) };
            let directions = points.iter().map(|p| (*p - *x0) / r0).collect();
            Support { site: i, id: site.id.clone(), points, directions, sampled }
        })
        .collect();
    Ok(SupportSet { dimension: dim, x0: *x0, r0, achieving, supports })
}

fn contact_points<T: Real>(site: &Site<T>, x0: &Vec3<T>, r0: T, tol: T, dim: usize) -> (Vec<Vec3<T>>, bool) {
    let mut points: Vec<Vec3<T>> = Vec::new();
    let mut sampled = false;
    for p in &site.primitives {
        if p.distance(x0) > r0 + tol {
            continue;
        }
        match p {
            Primitive::PointSet(qs) => points.extend(qs.iter().filter(|q| x0.dist(q) <= r0 + tol)),
            Primitive::Sphere { center, radius } if x0.dist(center) <= lit::<T>(1e-12) * radius.max(T::one()) => {
                sampled = true;
                points.extend(unit_samples::<T>(dim).into_iter().map(|u| *center + u * *radius));
            }
            _ => points.push(p.nearest(x0)),
        }
    }
    let mut seen = std::collections::HashSet::new();
    points.retain(|q| seen.insert(position_key(q)));
    (points, sampled)
}

fn unit_samples<T: Real>(dim: usize) -> Vec<Vec3<T>> {
    if dim == 2 {
        let n = config::SUPPORT_CIRCLE_SAMPLES;
        (0..n)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / n as f64;
                Vec3::new(lit(t.cos()), lit(t.sin()), T::zero())
            })
            .collect()
    } else {
        fibonacci_sphere(config::SUPPORT_SPHERE_SAMPLES)
    }
}

/// Conflict set of the supports on the unit sphere `S^{n-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SphericalComplex<T> {
    /// Ambient dimension `n`.
    pub dimension: usize,
    pub x0: Vec3<T>,
    pub r0: T,
    /// Unit directions; `residual` is the geodesic equidistance gap.
    pub vertices: Vec<ComplexVertex<T>>,
    /// Single vertices on `S^1`, great-circle arcs on `S^2`.
    pub cells: Vec<Cell>,
    /// Icosphere triangles where three supports meet and no junction was found.
    pub flagged: usize,
    /// Sites with empty support.
    pub excluded: Vec<usize>,
}

impl<T: Real> SphericalComplex<T> {
    pub fn directions(&self) -> Vec<Vec3<T>> {
        self.vertices.iter().map(|v| v.position).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Vertices plus points along every arc, spaced at most `step` radians apart.
    pub fn densify(&self, step: T) -> Vec<Vec3<T>> {
        let mut out = self.directions();
        for c in &self.cells {
            if c.vertices.len() != 2 {
                continue;
            }
            let (a, b) = (self.vertices[c.vertices[0]].position, self.vertices[c.vertices[1]].position);
            let n = (angle(&a, &b) / step).ceil().to_usize().unwrap_or(0);
            for k in 1..n {
                let t = T::from_usize(k).unwrap() / T::from_usize(n).unwrap();
                if let Some(p) = a.lerp(&b, t).normalized() {
                    out.push(p);
                }
            }
        }
        out
    }
}

/// Extracts the geodesic conflict set of the nonempty supports.
///
/// On `S^1` `resolution` is the number of angular samples; on `S^2` it is the
/// icosphere subdivision level.
pub fn spherical_conflict<T: Real>(support: &SupportSet<T>, resolution: usize) -> Result<SphericalComplex<T>, SphericalError> {
    let nonempty = support.nonempty().len();
    if nonempty < 2 {
        return Err(SphericalError::TooFewSupports(nonempty));
    }
    let field = support.field();
    let mut complex = SphericalComplex {
        dimension: support.dimension,
        x0: support.x0,
        r0: support.r0,
        vertices: Vec::new(),
        cells: Vec::new(),
        flagged: 0,
        excluded: support.excluded(),
    };
    if support.dimension == 2 {
        if resolution < 8 {
            return Err(SphericalError::BadResolution(resolution));
        }
        circle_conflict(&field, resolution, &mut complex);
    } else {
        if resolution > 9 {
            return Err(SphericalError::BadResolution(resolution));
        }
        sphere_conflict(&field, support, resolution, &mut complex);
    }
    Ok(complex)
}

/// Root of `d_i - d_j` on the chord `[a, b]`, projected back to the sphere.
fn arc_root<T: Real>(field: &SupportField<'_, T>, a: Vec3<T>, b: Vec3<T>, i: usize, j: usize) -> Option<ComplexVertex<T>> {
    let (p, _) = bisect_pair(field, a, b, i, j, lit(config::REFINE_TOL), config::EXTRACT_MAX_ITER);
    let u = p.normalized()?;
    let residual = (field.site_distance(i, &u) - field.site_distance(j, &u)).abs();
    let (lo, hi) = (i.min(j), i.max(j));
    (residual <= lit(config::ANGULAR_RESIDUAL_TOL) && globally_minimal(field, &u, lo, hi))
        .then(|| ComplexVertex { position: u, residual, sites: vec![lo, hi] })
}

fn circle_conflict<T: Real>(field: &SupportField<'_, T>, n: usize, out: &mut SphericalComplex<T>) {
    let tie = lit::<T>(config::TIE_TOL);
    let at = |k: usize| {
        let t = std::f64::consts::TAU * (k % n) as f64 / n as f64;
        Vec3::new(lit(t.cos()), lit(t.sin()), T::zero())
    };
    let labels: Vec<u32> = (0..n).into_par_iter().map(|k| vertex_label(field, &at(k), tie).site).collect();
    let roots: Vec<Option<ComplexVertex<T>>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (labels[k] as usize, labels[(k + 1) % n] as usize);
            (i != j).then(|| arc_root(field, at(k), at(k + 1), i, j)).flatten()
        })
        .collect();
    let mut seen = HashMap::new();
    for v in roots.into_iter().flatten() {
        if seen.insert(position_key(&v.position), ()).is_none() {
            let pair = v.pair();
            out.vertices.push(v);
            out.cells.push(Cell { vertices: vec![out.vertices.len() - 1], pair });
        }
    }
}

fn sphere_conflict<T: Real>(field: &SupportField<'_, T>, support: &SupportSet<T>, level: usize, out: &mut SphericalComplex<T>) {
    let ico = Icosphere::<T>::new(level);
    let tie = lit::<T>(config::TIE_TOL);
    let labels: Vec<u32> = ico.vertices.par_iter().map(|u| vertex_label(field, u, tie).site).collect();
    let edges = ico.edges();
    let roots: Vec<Option<ComplexVertex<T>>> = edges
        .par_iter()
        .map(|&(a, b)| {
            let (i, j) = (labels[a] as usize, labels[b] as usize);
            (i != j).then(|| arc_root(field, ico.vertices[a], ico.vertices[b], i, j)).flatten()
        })
        .collect();
    let mut by_position: HashMap<[u64; 3], usize> = HashMap::new();
    let mut edge_vertex: HashMap<(usize, usize), usize> = HashMap::new();
    for (e, r) in edges.iter().zip(roots) {
        if let Some(v) = r {
            let id = *by_position.entry(position_key(&v.position)).or_insert_with(|| {
                out.vertices.push(v);
                out.vertices.len() - 1
            });
            edge_vertex.insert(*e, id);
        }
    }
    let mut seen = std::collections::HashSet::new();
    let mut push = |a: usize, b: usize, pair: (usize, usize), cells: &mut Vec<Cell>| {
        if a != b && seen.insert((a.min(b), a.max(b))) {
            cells.push(Cell { vertices: vec![a, b], pair });
        }
    };
    for t in &ico.triangles {
        let mut sites: Vec<usize> = t.iter().map(|&v| labels[v] as usize).collect();
        sites.sort_unstable();
        sites.dedup();
        if sites.len() < 2 {
            continue;
        }
        let crossing: Vec<usize> = [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])]
            .iter()
            .filter_map(|&(a, b)| edge_vertex.get(&(a.min(b), a.max(b))).copied())
            .collect();
        if sites.len() == 2 {
            if crossing.len() == 2 {
                push(crossing[0], crossing[1], (sites[0], sites[1]), &mut out.cells);
            }
            continue;
        }
        let centroid = (ico.vertices[t[0]] + ico.vertices[t[1]] + ico.vertices[t[2]]).normalized();
        match centroid.and_then(|c| spherical_junction(field, support, &c, [sites[0], sites[1], sites[2]])) {
            Some(v) => {
                let id = *by_position.entry(position_key(&v.position)).or_insert_with(|| {
                    out.vertices.push(v);
                    out.vertices.len() - 1
                });
                for &c in &crossing {
                    let pair = out.vertices[c].pair();
                    push(c, id, pair, &mut out.cells);
                }
            }
            None => out.flagged += 1,
        }
    }
}

/// Direction equidistant from the supports of three sites near `guess`:
/// the spherical circumcenter of their nearest support directions.
fn spherical_junction<T: Real>(
    field: &SupportField<'_, T>,
    support: &SupportSet<T>,
    guess: &Vec3<T>,
    sites: [usize; 3],
) -> Option<ComplexVertex<T>> {
    let nearest = |i: usize| {
        support.supports[i]
            .directions
            .iter()
            .copied()
            .min_by(|a, b| angle(guess, a).partial_cmp(&angle(guess, b)).unwrap())
    };
    let (a, b, c) = (nearest(sites[0])?, nearest(sites[1])?, nearest(sites[2])?);
    let mut u = (b - a).cross(&(c - a)).normalized()?;
    if u.dot(guess) < T::zero() {
        u = -u;
    }
    let d: Vec<T> = sites.iter().map(|&i| field.site_distance(i, &u)).collect();
    let residual = (d[0] - d[1]).abs().max((d[0] - d[2]).abs()).max((d[1] - d[2]).abs());
    let l = label(field, &u, lit(config::MEMBERSHIP_TOL));
    let ok = residual <= lit(config::ANGULAR_RESIDUAL_TOL)
        && sites.iter().all(|&i| l.contains(i))
        && angle(&u, guess) <= lit(0.1);
    ok.then(|| ComplexVertex { position: u, residual, sites: sites.to_vec() })
}

/// Points `x0 + r u` for every vertex direction `u` and radius `r`.
pub fn cone<T: Real>(x0: &Vec3<T>, spherical: &SphericalComplex<T>, radii: &[T]) -> Result<Vec<Vec3<T>>, SphericalError> {
    if let Some(r) = radii.iter().find(|r| !(**r > T::zero())) {
        return Err(SphericalError::BadRadius(to_f64(*r)));
    }
    Ok(spherical
        .vertices
        .iter()
        .flat_map(|v| radii.iter().map(move |&r| *x0 + v.position * r))
        .collect())
}

/// Radial thickenings `{x0 + t u : r0 <= t <= r0 + eps}` of the nonempty
/// supports, one segment per support direction. Site order and ids follow
/// the original scene with empty supports dropped.
pub fn annular_shadow<T: Real>(support: &SupportSet<T>, eps: T) -> Result<Scene<T>, SphericalError> {
    if !(eps > T::zero()) {
        return Err(SphericalError::BadRadius(to_f64(eps)));
    }
    let sites: Vec<Site<T>> = support
        .supports
        .iter()
        .filter(|s| !s.is_empty())
        .map(|s| {
            let primitives = s
                .directions
                .iter()
                .map(|u| Primitive::Segment { a: support.x0 + *u * support.r0, b: support.x0 + *u * (support.r0 + eps) })
                .collect();
            Site::new(s.id.clone(), primitives)
        })
        .collect();
    if sites.len() < 2 {
        return Err(SphericalError::TooFewSupports(sites.len()));
    }
    Ok(Scene::new(support.dimension, Metric::Euclidean, sites)?)
}
