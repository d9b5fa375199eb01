//! Closed primitive sets with closed-form distances.

use crate::geom::Vec3;
use crate::scalar::{lit, Real};

/// One closed, nonempty primitive set.
#[derive(Clone, Debug, PartialEq)]
pub enum Primitive<T> {
    Point(Vec3<T>),
    PointSet(Vec<Vec3<T>>),
    /// `{x : normal . x = offset}` with a unit normal.
    Hyperplane { normal: Vec3<T>, offset: T },
    Sphere { center: Vec3<T>, radius: T },
    Ball { center: Vec3<T>, radius: T },
    Segment { a: Vec3<T>, b: Vec3<T> },
    Box { min: Vec3<T>, max: Vec3<T> },
}

impl<T: Real> Primitive<T> {
    pub fn kind(&self) -> &'static str {
        match self {
            Primitive::Point(_) => "point",
            Primitive::PointSet(_) => "point_set",
            Primitive::Hyperplane { .. } => "hyperplane",
            Primitive::Sphere { .. } => "sphere",
            Primitive::Ball { .. } => "ball",
            Primitive::Segment { .. } => "segment",
            Primitive::Box { .. } => "box",
        }
    }

    /// Euclidean distance from `x`.
    pub fn distance(&self, x: &Vec3<T>) -> T {
        match self {
            Primitive::Point(p) => x.dist(p),
            Primitive::PointSet(ps) => ps.iter().map(|p| x.dist(p)).fold(T::infinity(), T::min),
            Primitive::Hyperplane { normal, offset } => (normal.dot(x) - *offset).abs(),
            Primitive::Sphere { center, radius } => (x.dist(center) - *radius).abs(),
            Primitive::Ball { center, radius } => (x.dist(center) - *radius).max(T::zero()),
            Primitive::Segment { a, b } => x.dist(&segment_foot(a, b, x)),
            Primitive::Box { min, max } => x.dist(&clamp_box(min, max, x)),
        }
    }

    /// A point of the primitive realizing [`Primitive::distance`].
    ///
    /// Ties (point sets, sphere centers) resolve to the lexicographically
    /// smallest candidate.
    pub fn nearest(&self, x: &Vec3<T>) -> Vec3<T> {
        match self {
            Primitive::Point(p) => *p,
            Primitive::PointSet(ps) => {
                let best = self.distance(x);
                *ps.iter()
                    .filter(|p| x.dist(p) <= best)
                    .min_by(|a, b| a.lex_cmp(b))
                    .expect("nonempty point set")
            }
            Primitive::Hyperplane { normal, offset } => *x - *normal * (normal.dot(x) - *offset),
            Primitive::Sphere { center, radius } => match (*x - *center).normalized() {
                Some(u) => *center + u * *radius,
                None => *center - Vec3::axis(0) * *radius,
            },
            Primitive::Ball { center, radius } => {
                let d = *x - *center;
                let n = d.norm();
                if n <= *radius {
                    *x
                } else {
                    *center + d * (*radius / n)
                }
            }
            Primitive::Segment { a, b } => segment_foot(a, b, x),
            Primitive::Box { min, max } => clamp_box(min, max, x),
        }
    }

    /// L1 distance; `None` for primitives without an implemented formula.
    pub fn l1_distance(&self, x: &Vec3<T>) -> Option<T> {
        match self {
            Primitive::Point(p) => Some(x.l1_dist(p)),
            Primitive::PointSet(ps) => Some(ps.iter().map(|p| x.l1_dist(p)).fold(T::infinity(), T::min)),
            Primitive::Box { min, max } => Some(x.l1_dist(&clamp_box(min, max, x))),
            _ => None,
        }
    }

    pub fn supports_taxicab(&self) -> bool {
        matches!(self, Primitive::Point(_) | Primitive::PointSet(_) | Primitive::Box { .. })
    }

    /// Checks the shape invariants; returns a message on failure.
    pub fn validate(&self, dim: usize) -> Result<(), String> {
        let finite = |v: &Vec3<T>| v.is_finite() && (dim == 3 || v.z == T::zero());
        match self {
            Primitive::Point(p) if !finite(p) => Err("point has non-finite coordinates".into()),
            Primitive::PointSet(ps) if ps.is_empty() => Err("empty point set".into()),
            Primitive::PointSet(ps) if !ps.iter().all(finite) => Err("point set has non-finite coordinates".into()),
            Primitive::Hyperplane { normal, offset } => {
                if !finite(normal) || !offset.is_finite() {
                    Err("hyperplane has non-finite parameters".into())
                } else if (normal.norm() - T::one()).abs() > lit(crate::config::UNIT_NORMAL_TOL) {
                    Err(format!("hyperplane normal has norm {}, expected 1", normal.norm()))
                } else {
                    Ok(())
                }
            }
            Primitive::Sphere { center, radius } | Primitive::Ball { center, radius } => {
                if !finite(center) {
                    Err(format!("{} center is not finite", self.kind()))
                } else if !(*radius > T::zero()) || !radius.is_finite() {
                    Err(format!("{} radius must be positive, got {}", self.kind(), radius))
                } else {
                    Ok(())
                }
            }
            Primitive::Segment { a, b } => {
                if !finite(a) || !finite(b) {
                    Err("segment endpoints not finite".into())
                } else if a == b {
                    Err("segment endpoints coincide".into())
                } else {
                    Ok(())
                }
            }
            Primitive::Box { min, max } => {
                if !finite(min) || !finite(max) {
                    Err("box corners not finite".into())
                } else if (0..dim).any(|i| !(min[i] < max[i])) {
                    Err("box min must be below max in every coordinate".into())
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Applies `f` to every defining point (used for rigid motions and scaling).
    /// Hyperplanes are handled by the caller.
    fn corners(&self) -> Vec<Vec3<T>> {
        match self {
            Primitive::Box { min, max } => (0..8)
                .map(|m| {
                    Vec3::new(
                        if m & 1 == 0 { min.x } else { max.x },
                        if m & 2 == 0 { min.y } else { max.y },
                        if m & 4 == 0 { min.z } else { max.z },
                    )
                })
                .collect(),
            Primitive::Segment { a, b } => vec![*a, *b],
            _ => Vec::new(),
        }
    }

    /// Largest distance from `x` to a point of a bounded convex primitive.
    fn far_distance(&self, x: &Vec3<T>) -> T {
        self.corners().iter().map(|c| x.dist(c)).fold(T::zero(), T::max)
    }

    fn is_convex(&self) -> bool {
        !matches!(self, Primitive::Sphere { .. } | Primitive::PointSet(_))
    }
}

/// Foot of the perpendicular from `x` onto segment `[a, b]`.
pub(crate) fn segment_foot<T: Real>(a: &Vec3<T>, b: &Vec3<T>, x: &Vec3<T>) -> Vec3<T> {
    let d = *b - *a;
    let t = ((*x - *a).dot(&d) / d.norm_sq()).max(T::zero()).min(T::one());
    *a + d * t
}

pub(crate) fn clamp_box<T: Real>(min: &Vec3<T>, max: &Vec3<T>, x: &Vec3<T>) -> Vec3<T> {
    Vec3::new(
        x.x.max(min.x).min(max.x),
        x.y.max(min.y).min(max.y),
        x.z.max(min.z).min(max.z),
    )
}

/// Minimizes a convex function on `[0, 1]` by golden-section search.
pub(crate) fn golden_min<T: Real>(f: impl Fn(T) -> T) -> T {
    let inv_phi = lit::<T>(0.618_033_988_749_894_8);
    let (mut lo, mut hi) = (T::zero(), T::one());
    let mut c = hi - (hi - lo) * inv_phi;
    let mut d = lo + (hi - lo) * inv_phi;
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if hi - lo <= lit(1e-15) {
            break;
        }
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - (hi - lo) * inv_phi;
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + (hi - lo) * inv_phi;
            fd = f(d);
        }
    }
    f(T::zero()).min(f(T::one())).min(fc).min(fd)
}

fn rank<T>(p: &Primitive<T>) -> u8 {
    match p {
        Primitive::Point(_) => 0,
        Primitive::PointSet(_) => 1,
        Primitive::Hyperplane { .. } => 2,
        Primitive::Sphere { .. } => 3,
        Primitive::Ball { .. } => 4,
        Primitive::Segment { .. } => 5,
        Primitive::Box { .. } => 6,
    }
}

/// Euclidean distance between two primitive sets, `inf_{a in A, b in B} |a - b|`.
pub fn primitive_distance<T: Real>(a: &Primitive<T>, b: &Primitive<T>) -> T {
    if rank(a) > rank(b) {
        return primitive_distance(b, a);
    }
    let zero = T::zero();
    match (a, b) {
        (Primitive::Point(p), other) => other.distance(p),
        (Primitive::PointSet(ps), other) => ps.iter().map(|p| other.distance(p)).fold(T::infinity(), T::min),
        (Primitive::Hyperplane { normal: n1, offset: o1 }, Primitive::Hyperplane { normal: n2, offset: o2 }) => {
            let c = n1.dot(n2);
            if (c.abs() - T::one()).abs() <= lit(1e-12) {
                (*o1 - c.signum() * *o2).abs()
            } else {
                zero
            }
        }
        (Primitive::Hyperplane { normal, offset }, other) => {
            let signed = |x: &Vec3<T>| normal.dot(x) - *offset;
            match other {
                Primitive::Sphere { center, radius } => (signed(center).abs() - *radius).max(zero),
                Primitive::Ball { center, radius } => (signed(center).abs() - *radius).max(zero),
                _ => {
                    let s: Vec<T> = other.corners().iter().map(signed).collect();
                    let lo = s.iter().copied().fold(T::infinity(), T::min);
                    let hi = s.iter().copied().fold(T::neg_infinity(), T::max);
                    if lo <= zero && hi >= zero {
                        zero
                    } else {
                        lo.abs().min(hi.abs())
                    }
                }
            }
        }
        (Primitive::Sphere { center: c1, radius: r1 }, Primitive::Sphere { center: c2, radius: r2 }) => {
            let d = c1.dist(c2);
            if d >= *r1 + *r2 {
                d - *r1 - *r2
            } else if d <= (*r1 - *r2).abs() {
                (*r1 - *r2).abs() - d
            } else {
                zero
            }
        }
        (Primitive::Sphere { center: c1, radius: r1 }, Primitive::Ball { center: c2, radius: r2 }) => {
            let d = c1.dist(c2);
            if d >= *r1 + *r2 {
                d - *r1 - *r2
            } else if d + *r2 <= *r1 {
                *r1 - d - *r2
            } else {
                zero
            }
        }
        (Primitive::Sphere { center, radius }, other) => {
            let near = other.distance(center);
            let far = other.far_distance(center);
            if near >= *radius {
                near - *radius
            } else if far <= *radius {
                *radius - far
            } else {
                zero
            }
        }
        (Primitive::Ball { center, radius }, other) => (other.distance(center) - *radius).max(zero),
        (Primitive::Segment { a: s0, b: s1 }, other) => {
            debug_assert!(other.is_convex());
            golden_min(|t| other.distance(&s0.lerp(s1, t)))
        }
        (Primitive::Box { min: a0, max: a1 }, Primitive::Box { min: b0, max: b1 }) => {
            let gap = |i: usize| (b0[i] - a1[i]).max(a0[i] - b1[i]).max(zero);
            Vec3::new(gap(0), gap(1), gap(2)).norm()
        }
        _ => unreachable!("primitive pair ordering"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: f64, y: f64, z: f64) -> Vec3<f64> {
        Vec3::new(x, y, z)
    }

    #[test]
    fn plane_distance_and_foot() {
        let h = Primitive::Hyperplane { normal: v(0.0, 0.0, 1.0), offset: 1.0 };
        assert_eq!(h.distance(&Vec3::zero()), 1.0);
        assert_eq!(h.nearest(&v(0.3, 0.7, 0.0)), v(0.3, 0.7, 1.0));
    }

    #[test]
    fn segment_distance_matches_brute_force() {
        let s = Primitive::Segment { a: v(0.0, 0.0, 0.0), b: v(2.0, 0.0, 0.0) };
        let x = v(3.0, 1.0, 0.0);
        let brute = (0..=200_000)
            .map(|k| x.dist(&v(2.0 * k as f64 / 200_000.0, 0.0, 0.0)))
            .fold(f64::INFINITY, f64::min);
        assert!((s.distance(&x) - brute).abs() < 1e-12);
        assert!((s.distance(&x) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn sphere_center_tie_breaks_lexicographically() {
        let s = Primitive::Sphere { center: v(1.0, 1.0, 0.0), radius: 2.0 };
        assert_eq!(s.nearest(&v(1.0, 1.0, 0.0)), v(-1.0, 1.0, 0.0));
    }

    #[test]
    fn ball_inside_is_zero() {
        let b = Primitive::Ball { center: Vec3::zero(), radius: 1.0 };
        assert_eq!(b.distance(&v(0.5, 0.0, 0.0)), 0.0);
        assert_eq!(b.distance(&v(3.0, 0.0, 0.0)), 2.0);
    }

    #[test]
    fn taxicab_only_for_supported() {
        let b = Primitive::Box { min: v(0.0, 0.0, 0.0), max: v(1.0, 1.0, 0.0) };
        assert_eq!(b.l1_distance(&v(2.0, 3.0, 0.0)), Some(3.0));
        let s = Primitive::Sphere { center: Vec3::zero(), radius: 1.0 };
        assert!(s.l1_distance(&Vec3::zero()).is_none());
    }

    #[test]
    fn pairwise_distances() {
        let plane = Primitive::Hyperplane { normal: v(0.0, 0.0, 1.0), offset: 1.0 };
        let plane2 = Primitive::Hyperplane { normal: v(0.0, 0.0, -1.0), offset: 1.0 };
        assert!((primitive_distance(&plane, &plane2) - 2.0).abs() < 1e-15);
        let tilted = Primitive::Hyperplane { normal: v(0.6, 0.0, 0.8), offset: 0.0 };
        assert_eq!(primitive_distance(&plane, &tilted), 0.0);

        let sphere = Primitive::Sphere { center: Vec3::zero(), radius: 3.0f64 };
        let ball = Primitive::Ball { center: Vec3::zero(), radius: 1.0 };
        assert!((primitive_distance(&sphere, &ball) - 2.0).abs() < 1e-15);
        assert!((primitive_distance(&ball, &plane)).abs() < 1e-15);

        let seg1 = Primitive::Segment { a: v(0.0, 0.0, 0.0), b: v(1.0, 0.0, 0.0) };
        let seg2 = Primitive::Segment { a: v(0.5, 1.0, -1.0), b: v(0.5, 1.0, 1.0) };
        assert!((primitive_distance(&seg1, &seg2) - 1.0).abs() < 1e-9);

        let bx1 = Primitive::Box { min: v(0.0, 0.0, 0.0), max: v(1.0, 1.0, 1.0) };
        let bx2 = Primitive::Box { min: v(2.0, 3.0, 0.0), max: v(3.0, 4.0, 1.0) };
        assert!((primitive_distance(&bx1, &bx2) - 5f64.sqrt()).abs() < 1e-15);
        assert!((primitive_distance(&seg2, &bx1) - 0.0).abs() < 1e-9);

        let inner_seg = Primitive::Segment { a: v(-0.5, 0.0, 0.0), b: v(0.5, 0.0, 0.0) };
        assert!((primitive_distance(&sphere, &inner_seg) - 2.5).abs() < 1e-15);
    }

    #[test]
    fn validation_rejects_bad_shapes() {
        assert!(Primitive::Sphere { center: Vec3::<f64>::zero(), radius: 0.0 }.validate(3).is_err());
        assert!(Primitive::Segment { a: v(1.0, 0.0, 0.0), b: v(1.0, 0.0, 0.0) }.validate(3).is_err());
        assert!(Primitive::Hyperplane { normal: v(0.0, 0.0, 2.0), offset: 0.0 }.validate(3).is_err());
        assert!(Primitive::Box { min: v(0.0, 0.0, 0.0), max: v(1.0, 1.0, 0.0) }.validate(3).is_err());
        assert!(Primitive::Box { min: v(0.0, 0.0, 0.0), max: v(1.0, 1.0, 0.0) }.validate(2).is_ok());
    }
}
