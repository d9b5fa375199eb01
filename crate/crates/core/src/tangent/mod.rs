//! Rescaled sphere slices, Hausdorff distances and tangent-cone checks.
//!
//! The slice of a complex `Y` at scale `eps` is `Y ∩ S(x0, eps)`, stored as
//! unit directions `(y - x0) / eps`. As `eps` shrinks the slices converge (in
//! the Hausdorff sense) to the directions of the tangent cone, which should
//! coincide with the geodesic conflict set of the supports.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config;
use crate::conflict::{extract_conflict_2d, extract_conflict_3d, label, ConflictComplex, ExtractError};
use crate::geom::{AxisBox, Vec3};
use crate::scalar::{lit, to_f64, Real};
use crate::scene::Scene;
use crate::spherical::{spherical_conflict, support_sets, SphericalComplex, SphericalError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TangentError {
    #[error("eps = {eps} is below {min} (three grid spacings); re-extract in a smaller window")]
    BelowResolution { eps: f64, min: f64 },

    #[error("the sphere of radius {eps} leaves the extraction window")]
    OutsideWindow { eps: f64 },

    #[error("Hausdorff distance of an empty point cloud")]
    EmptyCloud,

    #[error("eps schedule must be positive and strictly decreasing")]
    BadSchedule,

    #[error("not a conflict point: only site(s) {0:?} achieve the minimum distance")]
    NotConflictPoint(Vec<usize>),

    #[error("the slice at eps = {0} is empty")]
    EmptySlice(f64),

    #[error(transparent)]
    Extract(#[from] ExtractError),

    #[error(transparent)]
    Spherical(#[from] SphericalError),
}

/// Intersection of a complex with `S(x0, eps)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RescaledSlice<T> {
    pub x0: Vec3<T>,
    pub eps: T,
    /// Points on the sphere.
    pub points: Vec<Vec3<T>>,
    /// `(points - x0) / eps`, renormalized.
    pub directions: Vec<Vec3<T>>,
    /// Pairs of point indices joined along the slice (arcs of triangle crossings).
    pub links: Vec<(usize, usize)>,
}

impl<T: Real> RescaledSlice<T> {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Connected components of the slice, counting isolated points.
    pub fn component_count(&self) -> usize {
        let labels = self.components();
        (0..labels.len()).filter(|&i| labels[i] == i).count()
    }

    /// Component label of every point (the smallest point index in its component).
    pub fn components(&self) -> Vec<usize> {
        let mut uf = UnionFind::new(self.points.len());
        for &(a, b) in &self.links {
            uf.union(a, b);
        }
        (0..self.points.len()).map(|i| uf.find(i)).collect()
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    pub fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Smaller root wins so labels are deterministic.
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi] = lo;
        }
    }
}

/// Intersects every cell of `complex` with the sphere `S(x0, eps)`.
///
/// Edges are cut by solving the quadratic `|a + t (b - a) - x0|² = eps²`;
/// each triangle that crosses the sphere contributes the arc of the
/// plane-sphere circle lying inside it, sampled at [`config::ARC_SAMPLES`] points.
pub fn sphere_slice<T: Real>(complex: &ConflictComplex<T>, x0: &Vec3<T>, eps: T) -> Result<RescaledSlice<T>, TangentError> {
    let min = complex.spacing * lit(config::SLICE_MIN_SPACINGS);
    if !(eps >= min) {
        return Err(TangentError::BelowResolution { eps: to_f64(eps), min: to_f64(min) });
    }
    if complex.window.inner_margin(x0, complex.dimension) < eps {
        return Err(TangentError::OutsideWindow { eps: to_f64(eps) });
    }
    let inside: Vec<bool> = complex.vertices.iter().map(|v| v.position.dist(x0) < eps).collect();
    let mut slice = RescaledSlice { x0: *x0, eps, points: Vec::new(), directions: Vec::new(), links: Vec::new() };
    let mut edge_point: HashMap<(usize, usize), usize> = HashMap::new();
    let mut cut = |a: usize, b: usize, slice: &mut RescaledSlice<T>| -> usize {
        let key = (a.min(b), a.max(b));
        *edge_point.entry(key).or_insert_with(|| {
            let p = edge_sphere_root(complex.vertices[key.0].position, complex.vertices[key.1].position, x0, eps);
            slice.push(p);
            slice.points.len() - 1
        })
    };
    for cell in &complex.cells {
        let vs = &cell.vertices;
        if vs.len() == 2 {
            if inside[vs[0]] != inside[vs[1]] {
                cut(vs[0], vs[1], &mut slice);
            }
            continue;
        }
        let crossing: Vec<(usize, usize)> = (0..vs.len())
            .map(|k| (vs[k], vs[(k + 1) % vs.len()]))
            .filter(|&(a, b)| inside[a] != inside[b])
            .collect();
        if crossing.len() != 2 {
            continue;
        }
        let p = cut(crossing[0].0, crossing[0].1, &mut slice);
        let q = cut(crossing[1].0, crossing[1].1, &mut slice);
        let tri: Vec<Vec3<T>> = vs.iter().map(|&v| complex.vertices[v].position).collect();
        let arc = triangle_arc(&tri, slice.points[p], slice.points[q], x0, eps);
        let mut prev = p;
        for point in arc {
            slice.push(point);
            let id = slice.points.len() - 1;
            slice.links.push((prev, id));
            prev = id;
        }
        slice.links.push((prev, q));
    }
    Ok(slice)
}

impl<T: Real> RescaledSlice<T> {
    fn push(&mut self, p: Vec3<T>) {
        let d = ((p - self.x0) / self.eps).normalized().unwrap_or(Vec3::axis(0));
        self.points.push(p);
        self.directions.push(d);
    }
}

/// Point of segment `[a, b]` at distance `eps` from `x0`; exactly one
/// endpoint is assumed inside the sphere.
fn edge_sphere_root<T: Real>(a: Vec3<T>, b: Vec3<T>, x0: &Vec3<T>, eps: T) -> Vec3<T> {
    let d = b - a;
    let f = a - *x0;
    let (qa, qb, qc) = (d.norm_sq(), lit::<T>(2.0) * f.dot(&d), f.norm_sq() - eps * eps);
    let disc = (qb * qb - lit::<T>(4.0) * qa * qc).max(T::zero()).sqrt();
    let two_a = lit::<T>(2.0) * qa;
    let (t1, t2) = ((-qb - disc) / two_a, (-qb + disc) / two_a);
    let unit = |t: T| t >= T::zero() && t <= T::one();
    let t = if unit(t1) && !unit(t2) {
        t1
    } else if unit(t2) && !unit(t1) {
        t2
    } else if (t1 - lit(0.5)).abs() < (t2 - lit(0.5)).abs() {
        t1
    } else {
        t2
    };
    a + d * t.max(T::zero()).min(T::one())
}

/// Interior samples of the arc from `p` to `q` of the circle where the
/// triangle's plane meets the sphere, choosing the arc that runs inside the triangle.
fn triangle_arc<T: Real>(tri: &[Vec3<T>], p: Vec3<T>, q: Vec3<T>, x0: &Vec3<T>, eps: T) -> Vec<Vec3<T>> {
    let Some(n) = (tri[1] - tri[0]).cross(&(tri[2] - tri[0])).normalized() else {
        return Vec::new();
    };
    let c = *x0 + n * n.dot(&(tri[0] - *x0));
    let rho = (eps * eps - c.dist(x0).powi(2)).max(T::zero()).sqrt();
    if rho <= eps * lit(1e-9) {
        return Vec::new();
    }
    let Some(e1) = (p - c).normalized() else { return Vec::new() };
    let e2 = n.cross(&e1);
    let phi = (q - c).dot(&e2).atan2((q - c).dot(&e1));
    let at = |t: T| c + (e1 * t.cos() + e2 * t.sin()) * rho;
    let half = lit::<T>(0.5);
    let two_pi = T::PI() + T::PI();
    let other = if phi > T::zero() { phi - two_pi } else { phi + two_pi };
    let sweep = if in_triangle(tri, &at(phi * half)) || !in_triangle(tri, &at(other * half)) { phi } else { other };
    let n_samples = config::ARC_SAMPLES;
    (1..n_samples - 1)
        .map(|k| at(sweep * T::from_usize(k).unwrap() / T::from_usize(n_samples - 1).unwrap()))
        .collect()
}

fn in_triangle<T: Real>(tri: &[Vec3<T>], p: &Vec3<T>) -> bool {
    let (a, b, c) = (tri[0], tri[1], tri[2]);
    let n = (b - a).cross(&(c - a));
    let area = n.norm_sq();
    let slack = lit::<T>(-1e-6);
    let w0 = (c - b).cross(&(*p - b)).dot(&n) / area;
    let w1 = (a - c).cross(&(*p - c)).dot(&n) / area;
    let w2 = T::one() - w0 - w1;
    w0 >= slack && w1 >= slack && w2 >= slack
}

/// Symmetric Hausdorff distance between two finite point clouds.
pub fn hausdorff<T: Real>(a: &[Vec3<T>], b: &[Vec3<T>]) -> Result<T, TangentError> {
    if a.is_empty() || b.is_empty() {
        return Err(TangentError::EmptyCloud);
    }
    Ok(directed(a, b).max(directed(b, a)))
}

fn directed<T: Real>(a: &[Vec3<T>], b: &[Vec3<T>]) -> T {
    a.par_iter()
        .map(|p| b.iter().map(|q| p.dist(q)).fold(T::infinity(), T::min))
        .reduce(T::zero, T::max)
}

/// Cone at `x0` spanned by unit directions.
#[derive(Clone, Debug, PartialEq)]
pub struct ConeApprox<T> {
    pub x0: Vec3<T>,
    pub directions: Vec<Vec3<T>>,
}

impl<T: Real> ConeApprox<T> {
    /// Points `x0 + r u` for each direction and radius.
    pub fn sample(&self, radii: &[T]) -> Vec<Vec3<T>> {
        self.directions.iter().flat_map(|u| radii.iter().map(move |&r| self.x0 + *u * r)).collect()
    }
}

/// Convergence record of rescaled slices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangentReport {
    pub eps: Vec<f64>,
    /// Hausdorff distance of each slice to the spherical conflict set (empty
    /// when no reference is available).
    pub d_to_spherical: Vec<f64>,
    /// Hausdorff distance between consecutive slices.
    pub d_successive: Vec<f64>,
    pub verdict: String,
    pub resolution: usize,
    pub spacing: f64,
    pub accept_tol: f64,
    /// Sites whose support at the base point is empty.
    pub excluded_sites: Vec<usize>,
}

fn check_schedule<T: Real>(schedule: &[T]) -> Result<(), TangentError> {
    let positive = schedule.iter().all(|e| *e > T::zero());
    let decreasing = schedule.windows(2).all(|w| w[1] < w[0]);
    if schedule.is_empty() || !positive || !decreasing {
        return Err(TangentError::BadSchedule);
    }
    Ok(())
}

/// Slices `complex` at every scale; returns the finest slice as the cone
/// estimate and the consecutive-slice Hausdorff distances.
pub fn tangent_cone_estimate<T: Real>(
    complex: &ConflictComplex<T>,
    x0: &Vec3<T>,
    schedule: &[T],
) -> Result<(ConeApprox<T>, TangentReport), TangentError> {
    check_schedule(schedule)?;
    let slices = schedule.iter().map(|&e| sphere_slice(complex, x0, e)).collect::<Result<Vec<_>, _>>()?;
    if let Some(s) = slices.iter().find(|s| s.is_empty()) {
        return Err(TangentError::EmptySlice(to_f64(s.eps)));
    }
    let d_successive = slices
        .windows(2)
        .map(|w| hausdorff(&w[0].directions, &w[1].directions).map(to_f64))
        .collect::<Result<Vec<_>, _>>()?;
    let cone = ConeApprox { x0: *x0, directions: slices.last().expect("nonempty schedule").directions.clone() };
    let report = TangentReport {
        eps: schedule.iter().map(|e| to_f64(*e)).collect(),
        d_to_spherical: Vec::new(),
        d_successive,
        verdict: "n/a".to_string(),
        resolution: complex.resolution,
        spacing: to_f64(complex.spacing),
        accept_tol: config::TANGENT_ACCEPT_TOL,
        excluded_sites: Vec::new(),
    };
    Ok((cone, report))
}

/// PASS when the distances are non-increasing up to the relative jitter and
/// the last one is within `tol`. Values below `tol / 10` count as converged.
pub fn convergence_verdict(d: &[f64], tol: f64, jitter: f64) -> bool {
    let floor = tol / 10.0;
    let monotone = d.windows(2).all(|w| w[1] <= w[0] * (1.0 + jitter) || w[1] <= floor);
    monotone && d.last().is_some_and(|&x| x <= tol)
}

/// Numerical check that the tangent cone of the conflict set at `x0` is the
/// cone over the geodesic conflict set of the supports.
///
/// The conflict set is extracted in the window `x0 ± 1.25 eps_max` at the
/// given resolution, sliced at every scale, and each slice is compared with
/// the densified spherical conflict set.
pub fn verify_tangent_cone<T: Real>(
    scene: &Scene<T>,
    x0: &Vec3<T>,
    schedule: &[T],
    resolution: usize,
    tol: f64,
) -> Result<TangentReport, TangentError> {
    check_schedule(schedule)?;
    let support = support_sets(scene, x0)?;
    if support.achieving.len() < 2 {
        return Err(TangentError::NotConflictPoint(support.achieving.clone()));
    }
    let dim = scene.dimension();
    let half = schedule[0] * lit(config::TANGENT_WINDOW_FACTOR);
    let spacing = half * lit(2.0) / T::from_usize(resolution.max(1)).unwrap();
    let finest = *schedule.last().unwrap();
    let min = spacing * lit(config::SLICE_MIN_SPACINGS);
    if finest < min {
        return Err(TangentError::BelowResolution { eps: to_f64(finest), min: to_f64(min) });
    }
    let window = AxisBox::centered(*x0, half, dim);
    let complex = if dim == 2 {
        extract_conflict_2d(scene, window, resolution)?
    } else {
        extract_conflict_3d(scene, window, resolution)?
    };
    let spherical = reference_conflict(&support)?;
    let reference = spherical.densify(lit(config::SPHERE_DENSIFY_STEP));
    let (_, mut report) = tangent_cone_estimate(&complex, x0, schedule)?;
    report.d_to_spherical = schedule
        .iter()
        .map(|&e| {
            let s = sphere_slice(&complex, x0, e)?;
            hausdorff(&s.directions, &reference).map(to_f64)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let pass = convergence_verdict(&report.d_to_spherical, tol, config::TANGENT_JITTER);
    report.verdict = if pass { "PASS" } else { "FAIL" }.to_string();
    report.accept_tol = tol;
    report.excluded_sites = support.excluded();
    Ok(report)
}

/// Spherical conflict set of the supports at the default resolution.
pub fn reference_conflict<T: Real>(
    support: &crate::spherical::SupportSet<T>,
) -> Result<SphericalComplex<T>, SphericalError> {
    let res = if support.dimension == 2 { config::CIRCLE_SAMPLES } else { config::ICOSPHERE_LEVEL };
    spherical_conflict(support, res)
}

/// Uniformly distributed unit vectors in the plane (`dim == 2`) or in space.
pub fn random_directions<T: Real>(dim: usize, n: usize, seed: u64) -> Vec<Vec3<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            if dim == 2 {
                let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                return Vec3::new(lit(t.cos()), lit(t.sin()), T::zero());
            }
            loop {
                let v = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0f64..1.0)];
                let n2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
                if n2 > 1e-4 && n2 <= 1.0 {
                    let s = n2.sqrt();
                    return Vec3::new(lit(v[0] / s), lit(v[1] / s), lit(v[2] / s));
                }
            }
        })
        .collect()
}

/// Agreement between Euclidean territories near `x0` and geodesic
/// territories of the supports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TerritoryAgreement {
    pub sampled: usize,
    /// Directions within the boundary band (skipped).
    pub excluded: usize,
    pub agreed: usize,
    pub fraction: f64,
}

/// Classifies random directions `u` twice: by the nearest site at
/// `x0 + delta u`, and by the nearest support to `u` on the unit sphere.
/// Directions whose geodesic margin is below `band` are skipped.
pub fn territory_direction_agreement<T: Real>(
    scene: &Scene<T>,
    x0: &Vec3<T>,
    samples: usize,
    delta: T,
    band: T,
    seed: u64,
) -> Result<TerritoryAgreement, TangentError> {
    let support = support_sets(scene, x0)?;
    let field = support.field();
    let tie = lit::<T>(config::TIE_TOL);
    let mut excluded = 0;
    let mut agreed = 0;
    for u in random_directions::<T>(scene.dimension(), samples, seed) {
        let s = label(&field, &u, tie);
        if s.margin < band {
            excluded += 1;
            continue;
        }
        let e = label(scene, &(*x0 + u * delta), tie);
        if e.argmin == s.argmin {
            agreed += 1;
        }
    }
    let compared = samples - excluded;
    let fraction = if compared == 0 { 1.0 } else { agreed as f64 / compared as f64 };
    Ok(TerritoryAgreement { sampled: samples, excluded, agreed, fraction })
}

/// For every site achieving `r0`, the fraction of random directions `u`
/// with `x0 + eps u` strictly inside that site's territory.
pub fn territory_cap_fractions<T: Real>(
    scene: &Scene<T>,
    x0: &Vec3<T>,
    eps: T,
    samples: usize,
    seed: u64,
) -> Result<Vec<(usize, f64)>, TangentError> {
    let support = support_sets(scene, x0)?;
    let dirs = random_directions::<T>(scene.dimension(), samples, seed);
    let tie = lit::<T>(config::TIE_TOL);
    Ok(support
        .achieving
        .iter()
        .map(|&i| {
            let hits = dirs
                .iter()
                .filter(|u| {
                    let l = label(scene, &(*x0 + **u * eps), tie);
                    l.argmin == [i]
                })
                .count();
            (i, hits as f64 / samples as f64)
        })
        .collect())
}
