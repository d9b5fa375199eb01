//! Sites intersected with a closed ball.
//!
//! Distances to a clipped site are exact for every primitive except boxes
//! that straddle the ball boundary, where the projection onto the
//! intersection is computed with Dykstra's alternating projections.

use super::primitive::{clamp_box, segment_foot};
use super::{DistanceField, Primitive, Scene, SceneError};
use crate::config;
use crate::geom::Vec3;
use crate::scalar::{lit, to_f64, Real};

/// One primitive intersected with a closed ball.
#[derive(Clone, Debug, PartialEq)]
pub enum ClippedPrimitive<T> {
    Empty,
    Point(Vec3<T>),
    PointSet(Vec<Vec3<T>>),
    /// Hyperplane piece: disk of `radius` around `center` in the plane with unit `normal`.
    Disk { center: Vec3<T>, normal: Vec3<T>, radius: T },
    /// Points `c + r u` of a sphere with `u . axis >= min_cos`.
    Cap { center: Vec3<T>, radius: T, axis: Vec3<T>, min_cos: T },
    Ball { center: Vec3<T>, radius: T },
    /// Intersection of two overlapping balls.
    Lens { c1: Vec3<T>, r1: T, c2: Vec3<T>, r2: T },
    Segment { a: Vec3<T>, b: Vec3<T> },
    Box { min: Vec3<T>, max: Vec3<T> },
    /// Box straddling the ball boundary.
    BoxBall { min: Vec3<T>, max: Vec3<T>, center: Vec3<T>, radius: T },
}

fn project_ball<T: Real>(c: &Vec3<T>, r: T, x: &Vec3<T>) -> Vec3<T> {
    let d = *x - *c;
    let n = d.norm();
    if n <= r {
        *x
    } else {
        *c + d * (r / n)
    }
}

/// Nearest point on the circle with given center, unit normal and radius.
fn circle_nearest<T: Real>(center: &Vec3<T>, normal: &Vec3<T>, radius: T, x: &Vec3<T>) -> Vec3<T> {
    let w = *x - *center;
    let in_plane = w - *normal * normal.dot(&w);
    let dir = in_plane.normalized().unwrap_or_else(|| normal.any_orthogonal());
    *center + dir * radius
}

impl<T: Real> ClippedPrimitive<T> {
    /// Intersects `p` with the closed ball `B(center, radius)`.
    pub fn clip(p: &Primitive<T>, center: &Vec3<T>, radius: T) -> Self {
        let zero = T::zero();
        let inside = |q: &Vec3<T>| q.dist(center) <= radius;
        match p {
            Primitive::Point(q) => {
                if inside(q) {
                    Self::Point(*q)
                } else {
                    Self::Empty
                }
            }
            Primitive::PointSet(qs) => {
                let kept: Vec<_> = qs.iter().copied().filter(|q| inside(q)).collect();
                if kept.is_empty() {
                    Self::Empty
                } else {
                    Self::PointSet(kept)
                }
            }
            Primitive::Hyperplane { normal, offset } => {
                let h = normal.dot(center) - *offset;
                if h.abs() > radius {
                    Self::Empty
                } else {
                    Self::Disk {
                        center: *center - *normal * h,
                        normal: *normal,
                        radius: (radius * radius - h * h).max(zero).sqrt(),
                    }
                }
            }
            Primitive::Sphere { center: c, radius: r } => {
                let d = c.dist(center);
                if d == zero {
                    return if *r <= radius {
                        Self::Cap { center: *c, radius: *r, axis: Vec3::axis(0), min_cos: -T::one() }
                    } else {
                        Self::Empty
                    };
                }
                let k = (*r * *r + d * d - radius * radius) / (lit::<T>(2.0) * *r * d);
                if k > T::one() {
                    Self::Empty
                } else {
                    Self::Cap {
                        center: *c,
                        radius: *r,
                        axis: (*center - *c) / d,
                        min_cos: k.max(-T::one()),
                    }
                }
            }
            Primitive::Ball { center: c, radius: r } => {
                let d = c.dist(center);
                if d > *r + radius {
                    Self::Empty
                } else if d == *r + radius {
                    Self::Point(*c + (*center - *c) * (*r / d))
                } else if d + *r <= radius {
                    Self::Ball { center: *c, radius: *r }
                } else if d + radius <= *r {
                    Self::Ball { center: *center, radius }
                } else {
                    Self::Lens { c1: *c, r1: *r, c2: *center, r2: radius }
                }
            }
            Primitive::Segment { a, b } => {
                let d = *b - *a;
                let f = *a - *center;
                let qa = d.norm_sq();
                let qb = lit::<T>(2.0) * d.dot(&f);
                let qc = f.norm_sq() - radius * radius;
                let disc = qb * qb - lit::<T>(4.0) * qa * qc;
                if disc < zero {
                    return Self::Empty;
                }
                let s = disc.sqrt();
                let two_a = lit::<T>(2.0) * qa;
                let lo = ((-qb - s) / two_a).max(zero);
                let hi = ((-qb + s) / two_a).min(T::one());
                if lo > hi {
                    Self::Empty
                } else if lo == hi {
                    Self::Point(a.lerp(b, lo))
                } else {
                    Self::Segment { a: a.lerp(b, lo), b: a.lerp(b, hi) }
                }
            }
            Primitive::Box { min, max } => {
                if clamp_box(min, max, center).dist(center) > radius {
                    return Self::Empty;
                }
                let far = (0..8)
                    .map(|m| {
                        Vec3::new(
                            if m & 1 == 0 { min.x } else { max.x },
                            if m & 2 == 0 { min.y } else { max.y },
                            if m & 4 == 0 { min.z } else { max.z },
                        )
                        .dist(center)
                    })
                    .fold(zero, T::max);
                if far <= radius {
                    Self::Box { min: *min, max: *max }
                } else {
                    Self::BoxBall { min: *min, max: *max, center: *center, radius }
                }
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Self::Empty)
    }

    /// Nearest point of the clipped set, `None` when empty.
    pub fn nearest(&self, x: &Vec3<T>) -> Option<Vec3<T>> {
        Some(match self {
            Self::Empty => return None,
            Self::Point(q) => *q,
            Self::PointSet(qs) => *qs
                .iter()
                .min_by(|a, b| x.dist(a).partial_cmp(&x.dist(b)).unwrap().then(a.lex_cmp(b)))
                .expect("nonempty"),
            Self::Disk { center, normal, radius } => {
                let q = *x - *normal * normal.dot(&(*x - *center));
                let w = q - *center;
                let n = w.norm();
                if n <= *radius {
                    q
                } else {
                    *center + w * (*radius / n)
                }
            }
            Self::Cap { center, radius, axis, min_cos } => {
                let w = *x - *center;
                let n = w.norm();
                if n == T::zero() {
                    *center + *axis * *radius
                } else if w.dot(axis) / n >= *min_cos {
                    *center + w * (*radius / n)
                } else {
                    let perp = w - *axis * w.dot(axis);
                    let e = perp.normalized().unwrap_or_else(|| axis.any_orthogonal());
                    let s = (T::one() - *min_cos * *min_cos).max(T::zero()).sqrt();
                    *center + (*axis * *min_cos + e * s) * *radius
                }
            }
            Self::Ball { center, radius } => project_ball(center, *radius, x),
            Self::Lens { c1, r1, c2, r2 } => lens_nearest(c1, *r1, c2, *r2, x),
            Self::Segment { a, b } => segment_foot(a, b, x),
            Self::Box { min, max } => clamp_box(min, max, x),
            Self::BoxBall { min, max, center, radius } => box_ball_nearest(min, max, center, *radius, x),
        })
    }

    pub fn distance(&self, x: &Vec3<T>) -> T {
        self.nearest(x).map_or(T::infinity(), |q| x.dist(&q))
    }
}

fn lens_nearest<T: Real>(c1: &Vec3<T>, r1: T, c2: &Vec3<T>, r2: T, x: &Vec3<T>) -> Vec3<T> {
    let slack = lit::<T>(1e-12) * (T::one() + r1.max(r2));
    let p1 = project_ball(c1, r1, x);
    if p1.dist(c2) <= r2 + slack {
        return p1;
    }
    let p2 = project_ball(c2, r2, x);
    if p2.dist(c1) <= r1 + slack {
        return p2;
    }
    let d = c1.dist(c2);
    let axis = (*c2 - *c1) / d;
    let t = (d * d + r1 * r1 - r2 * r2) / (lit::<T>(2.0) * d);
    let rim_center = *c1 + axis * t;
    let rim_radius = (r1 * r1 - t * t).max(T::zero()).sqrt();
    circle_nearest(&rim_center, &axis, rim_radius, x)
}

fn box_ball_nearest<T: Real>(min: &Vec3<T>, max: &Vec3<T>, c: &Vec3<T>, r: T, x: &Vec3<T>) -> Vec3<T> {
    let in_box = clamp_box(min, max, x) == *x;
    if in_box && x.dist(c) <= r {
        return *x;
    }
    // Dykstra's projection onto the intersection of two convex sets.
    let tol = lit::<T>(config::MINIMIZE_TOL) * lit(1e-3);
    let mut y = *x;
    let mut p = Vec3::zero();
    let mut q = Vec3::zero();
    for _ in 0..20_000 {
        let a = clamp_box(min, max, &(y + p));
        p = y + p - a;
        let b = project_ball(c, r, &(a + q));
        q = a + q - b;
        let moved = b.dist(&y);
        y = b;
        if moved <= tol && a.dist(&b) <= tol {
            break;
        }
    }
    y
}

/// A scene whose sites have been intersected with `B(center, radius)`.
#[derive(Clone, Debug)]
pub struct ClippedScene<T> {
    pub base: Scene<T>,
    pub center: Vec3<T>,
    pub radius: T,
    pub sites: Vec<Vec<ClippedPrimitive<T>>>,
}

impl<T: Real> ClippedScene<T> {
    pub fn is_site_empty(&self, i: usize) -> bool {
        self.sites[i].iter().all(ClippedPrimitive::is_empty)
    }

    /// Indices of sites with nothing left inside the ball.
    pub fn empty_sites(&self) -> Vec<usize> {
        (0..self.sites.len()).filter(|&i| self.is_site_empty(i)).collect()
    }

    /// Euclidean distance to clipped site `i` (`inf` if empty).
    pub fn distance(&self, i: usize, x: &Vec3<T>) -> T {
        self.sites[i].iter().map(|p| p.distance(x)).fold(T::infinity(), T::min)
    }
}

impl<T: Real> DistanceField<T> for ClippedScene<T> {
    fn dimension(&self) -> usize {
        self.base.dimension()
    }
    fn site_count(&self) -> usize {
        self.sites.len()
    }
    fn site_distance(&self, i: usize, x: &Vec3<T>) -> T {
        self.distance(i, x)
    }
}

/// Intersects every site of `scene` with the closed ball `B(x0, radius)`.
/// Distances against the result are Euclidean.
pub fn clip_scene<T: Real>(scene: &Scene<T>, x0: Vec3<T>, radius: T) -> Result<ClippedScene<T>, SceneError> {
    if !(radius > T::zero()) {
        return Err(SceneError::BadRadius(to_f64(radius)));
    }
    let sites = scene
        .sites()
        .iter()
        .map(|s| s.primitives.iter().map(|p| ClippedPrimitive::clip(p, &x0, radius)).collect())
        .collect();
    Ok(ClippedScene { base: scene.clone(), center: x0, radius, sites })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{Metric, Site};

    fn v(x: f64, y: f64, z: f64) -> Vec3<f64> {
        Vec3::new(x, y, z)
    }

    /// Brute-force distance to `p ∩ B(c, r)` from dense samples of a box around the ball.
    fn sampled_clip_distance(p: &Primitive<f64>, c: Vec3<f64>, r: f64, x: Vec3<f64>, n: usize) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..=n {
            for j in 0..=n {
                for k in 0..=n {
                    let q = c + v(
                        -r + 2.0 * r * i as f64 / n as f64,
                        -r + 2.0 * r * j as f64 / n as f64,
                        -r + 2.0 * r * k as f64 / n as f64,
                    );
                    let q = p.nearest(&q);
                    if q.dist(&c) <= r {
                        best = best.min(q.dist(&x));
                    }
                }
            }
        }
        best
    }

    #[test]
    fn planes_become_disks() {
        let plane = Primitive::Hyperplane { normal: v(0.0, 0.0, 1.0), offset: 1.0 };
        match ClippedPrimitive::clip(&plane, &Vec3::zero(), 1.5) {
            ClippedPrimitive::Disk { center, radius, .. } => {
                assert_eq!(center, v(0.0, 0.0, 1.0));
                assert!((radius - (1.5f64 * 1.5 - 1.0).sqrt()).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn two_sheet_clip_keeps_points() {
        let points = Site::new("X2", vec![Primitive::PointSet(vec![v(1.0, 0.0, 0.0), v(-1.0, 0.0, 0.0)])]);
        let planes = Site::new(
            "X1",
            vec![
                Primitive::Hyperplane { normal: v(0.0, 0.0, 1.0), offset: 1.0 },
                Primitive::Hyperplane { normal: v(0.0, 0.0, -1.0), offset: 1.0 },
            ],
        );
        let scene = Scene::new(3, Metric::Euclidean, vec![points, planes]).unwrap();
        let c = clip_scene(&scene, Vec3::zero(), 1.5).unwrap();
        assert!(c.empty_sites().is_empty());
        assert_eq!(c.sites[0][0], ClippedPrimitive::PointSet(vec![v(1.0, 0.0, 0.0), v(-1.0, 0.0, 0.0)]));
        // Outside the disk rim the clipped distance exceeds the plane distance.
        let far = v(3.0, 0.0, 0.9);
        assert!(c.distance(1, &far) > scene.distance(1, &far) + 1.0);

        let tiny = clip_scene(&scene, Vec3::zero(), 0.5).unwrap();
        assert_eq!(tiny.empty_sites(), vec![0, 1]);
        assert!(clip_scene(&scene, Vec3::zero(), 0.0).is_err());
    }

    #[test]
    fn exact_clips_match_sampling() {
        let c = v(0.2, -0.1, 0.3);
        let r = 1.3;
        let prims = [
            Primitive::Sphere { center: v(1.0, 0.5, 0.0), radius: 0.8 },
            Primitive::Ball { center: v(1.2, 0.0, 0.2), radius: 0.7 },
            Primitive::Segment { a: v(-2.0, 0.3, 0.0), b: v(2.0, 0.1, 0.5) },
            Primitive::Box { min: v(0.5, 0.5, -0.5), max: v(2.0, 1.5, 0.5) },
            Primitive::Hyperplane { normal: v(0.6, 0.0, 0.8), offset: 0.4 },
        ];
        let queries = [v(2.5, 0.0, 0.0), v(-1.0, 1.5, 0.4), v(0.0, 0.0, 2.0), v(0.5, 0.2, 0.1)];
        for p in &prims {
            let clipped = ClippedPrimitive::clip(p, &c, r);
            for x in &queries {
                let exact = clipped.distance(x);
                let approx = sampled_clip_distance(p, c, r, *x, 40);
                // Sampling can only overestimate, by at most about one sample spacing.
                assert!(exact <= approx + 1e-9, "{p:?} at {x:?}: {exact} > {approx}");
                assert!(approx - exact < 0.08, "{p:?} at {x:?}: {exact} vs {approx}");
                let q = clipped.nearest(x).unwrap();
                assert!(q.dist(&c) <= r + 1e-9);
                assert!(p.distance(&q) < 1e-9);
            }
        }
    }
}
