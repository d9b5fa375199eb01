//! Built-in scenes and synthetic complexes used by the demo, the CLI and tests.

use crate::conflict::{Cell, ComplexVertex, ConflictComplex};
use crate::geom::{AxisBox, Vec3};
use crate::scalar::{lit, Real};
use crate::scene::{Metric, Primitive, Scene, Site};

fn v<T: Real>(x: f64, y: f64, z: f64) -> Vec3<T> {
    Vec3::new(lit(x), lit(y), lit(z))
}

/// Two horizontal planes `x3 = ±1` against the two points `(±1, 0, 0)`.
///
/// Site 0 (`X1`) is the pair of planes, site 1 (`X2`) the pair of points.
pub fn two_sheet_example<T: Real>() -> Scene<T> {
    let planes = Site::new(
        "X1",
        vec![
            Primitive::Hyperplane { normal: v(0.0, 0.0, 1.0), offset: T::one() },
            Primitive::Hyperplane { normal: v(0.0, 0.0, -1.0), offset: T::one() },
        ],
    );
    let points = Site::new("X2", vec![Primitive::PointSet(vec![v(1.0, 0.0, 0.0), v(-1.0, 0.0, 0.0)])]);
    Scene::new(3, Metric::Euclidean, vec![planes, points]).expect("valid built-in scene")
}

/// Point sites `(1, 0)` and `(-1, 0)`.
pub fn two_points_2d<T: Real>() -> Scene<T> {
    points_2d(&[(1.0, 0.0), (-1.0, 0.0)])
}

/// Point sites `(1, 0, 0)` and `(-1, 0, 0)`.
pub fn two_points_3d<T: Real>() -> Scene<T> {
    let a = Site::new("a", vec![Primitive::Point(v(1.0, 0.0, 0.0))]);
    let b = Site::new("b", vec![Primitive::Point(v(-1.0, 0.0, 0.0))]);
    Scene::new(3, Metric::Euclidean, vec![a, b]).expect("valid built-in scene")
}

/// One site per point, ids `p0, p1, ...`.
pub fn points_2d<T: Real>(pts: &[(f64, f64)]) -> Scene<T> {
    let sites = pts
        .iter()
        .enumerate()
        .map(|(k, &(x, y))| Site::new(format!("p{k}"), vec![Primitive::Point(v(x, y, 0.0))]))
        .collect();
    Scene::new(2, Metric::Euclidean, sites).expect("distinct points")
}

/// Points on the unit circle at the given angles (radians).
pub fn points_on_circle<T: Real>(angles: &[f64]) -> Scene<T> {
    let pts: Vec<(f64, f64)> = angles.iter().map(|a| (a.cos(), a.sin())).collect();
    points_2d(&pts)
}

/// Points at 90°, 210° and 330° on the unit circle; circumcenter at the origin.
pub fn equilateral_three_points<T: Real>() -> Scene<T> {
    let d = std::f64::consts::PI / 180.0;
    points_on_circle(&[90.0 * d, 210.0 * d, 330.0 * d])
}

/// Point `(0, 0, 1)` against the plane `x3 = -1`; the conflict set is the
/// paraboloid `x3 = (x1² + x2²) / 4`.
pub fn point_and_plane<T: Real>() -> Scene<T> {
    let p = Site::new("focus", vec![Primitive::Point(v(0.0, 0.0, 1.0))]);
    let h = Site::new("directrix", vec![Primitive::Hyperplane { normal: v(0.0, 0.0, 1.0), offset: -T::one() }]);
    Scene::new(3, Metric::Euclidean, vec![p, h]).expect("valid built-in scene")
}

/// Point sites `(0, 0)` and `(1, 1)` under the L1 metric.
pub fn taxicab_pair<T: Real>() -> Scene<T> {
    points_2d::<T>(&[(0.0, 0.0), (1.0, 1.0)]).with_metric(Metric::Taxicab).expect("points support L1")
}

/// Triangle mesh of the two planes `x3 = x1` and `x3 = -x1` inside
/// `[-h, h]³`, sharing their vertices along the `x2` axis.
pub fn transversal_planes_complex<T: Real>(half_width: f64, n: usize) -> ConflictComplex<T> {
    let dirs = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];
    let mut vertices: Vec<ComplexVertex<T>> = Vec::new();
    let mut cells = Vec::new();
    // Axis vertices shared by the four half-planes.
    let axis: Vec<usize> = (0..=n)
        .map(|row| {
            let y = -half_width + 2.0 * half_width * row as f64 / n as f64;
            vertices.push(ComplexVertex { position: v(0.0, y, 0.0), residual: T::zero(), sites: vec![0, 1] });
            vertices.len() - 1
        })
        .collect();
    for &(sx, sz) in &dirs {
        // Half-plane {x3 = (sz/sx) x1, sx * x1 >= 0} parametrized by s in [0, h], y.
        let mut ids = vec![vec![0usize; n + 1]; n + 1];
        for row in 0..=n {
            ids[row][0] = axis[row];
            for j in 1..=n {
                let s = half_width * j as f64 / n as f64;
                let y = -half_width + 2.0 * half_width * row as f64 / n as f64;
                vertices.push(ComplexVertex { position: v(sx * s, y, sz * s), residual: T::zero(), sites: vec![0, 1] });
                ids[row][j] = vertices.len() - 1;
            }
        }
        for row in 0..n {
            for j in 0..n {
                let (a, b, c, d) = (ids[row][j], ids[row][j + 1], ids[row + 1][j + 1], ids[row + 1][j]);
                cells.push(Cell { vertices: vec![a, b, c], pair: (0, 1) });
                cells.push(Cell { vertices: vec![a, c, d], pair: (0, 1) });
            }
        }
    }
    let h = lit::<T>(half_width);
    let window = AxisBox::new(Vec3::new(-h, -h, -h), Vec3::new(h, h, h));
    let spacing = lit::<T>(half_width / n as f64);
    ConflictComplex::from_parts(3, window, 0, spacing, vertices, cells)
}

/// Polyline complex of the unit circles centered at `(±1, 0)`, tangent at the
/// origin, each sampled with `n` vertices (the origin is shared).
pub fn tangent_circles_complex<T: Real>(n: usize) -> ConflictComplex<T> {
    let mut vertices = vec![ComplexVertex { position: Vec3::zero(), residual: T::zero(), sites: vec![0, 1] }];
    let mut cells = Vec::new();
    for &side in &[1.0f64, -1.0] {
        let first = vertices.len();
        for k in 1..n {
            let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            // Start at the origin: angle measured from the direction pointing back to it.
            let p = (side * (1.0 - t.cos()), t.sin());
            vertices.push(ComplexVertex { position: v(p.0, p.1, 0.0), residual: T::zero(), sites: vec![0, 1] });
        }
        let ring: Vec<usize> = std::iter::once(0).chain(first..vertices.len()).collect();
        for k in 0..ring.len() {
            cells.push(Cell { vertices: vec![ring[k], ring[(k + 1) % ring.len()]], pair: (0, 1) });
        }
    }
    let window = AxisBox::new(v(-2.0, -1.0, 0.0), v(2.0, 1.0, 0.0));
    let spacing = lit::<T>(2.0 * std::f64::consts::PI / n as f64);
    ConflictComplex::from_parts(2, window, 0, spacing, vertices, cells)
}
