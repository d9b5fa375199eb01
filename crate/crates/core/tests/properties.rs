#![allow(clippy::needless_range_loop)]

use conflict_sets::conflict::{extract_conflict_2d, extract_conflict_3d, label, ConflictComplex};
use conflict_sets::geom::{AxisBox, Vec3};
use conflict_sets::metrics::{inner_distance, GeodesicGraph};
use conflict_sets::scene::{clip_scene, Metric, Primitive, Scene, Site};
use conflict_sets::spherical::{annular_shadow, spherical_conflict, support_sets};
use conflict_sets::tangent::hausdorff;
use conflict_sets::scenes;
use proptest::prelude::*;

type V = Vec3<f64>;

fn v3() -> impl Strategy<Value = V> {
    (-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn unit3() -> impl Strategy<Value = V> {
    v3().prop_filter_map("nonzero", |p| p.normalized())
}

fn primitive() -> impl Strategy<Value = Primitive<f64>> {
    prop_oneof![
        v3().prop_map(Primitive::Point),
        (v3(), v3()).prop_filter("distinct", |(a, b)| a.dist(b) > 1e-3).prop_map(|(a, b)| Primitive::Segment { a, b }),
        (v3(), 0.1..1.0f64).prop_map(|(center, radius)| Primitive::Ball { center, radius }),
        (v3(), 0.1..1.0f64).prop_map(|(center, radius)| Primitive::Sphere { center, radius }),
        (v3(), 0.1..1.0f64, 0.1..1.0f64, 0.1..1.0f64)
            .prop_map(|(min, a, b, c)| Primitive::Box { min, max: min + Vec3::new(a, b, c) }),
        (unit3(), -2.0..2.0f64).prop_map(|(normal, offset)| Primitive::Hyperplane { normal, offset }),
    ]
}

/// Scenes of 2 to 4 single-primitive sites; overlapping draws are discarded.
fn scene3() -> impl Strategy<Value = Scene<f64>> {
    prop::collection::vec(primitive(), 2..5).prop_filter_map("disjoint", |prims| {
        let sites = prims.into_iter().enumerate().map(|(k, p)| Site::new(format!("s{k}"), vec![p])).collect();
        Scene::new(3, Metric::Euclidean, sites).ok()
    })
}

fn ball_point(x0: V, radius: f64, u: V, t: f64) -> V {
    x0 + u * (radius * t)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn distance_is_lipschitz_and_nearest_points_realize_it(p in primitive(), x in v3(), y in v3()) {
        let site = Site::new("s", vec![p]);
        let (dx, dy) = (site.distance(&x), site.distance(&y));
        prop_assert!((dx - dy).abs() <= x.dist(&y) + 1e-12);
        let n = site.nearest_point(&x);
        prop_assert!((x.dist(&n) - dx).abs() <= 1e-10);
        prop_assert!(site.distance(&n) <= 1e-10);
        if dx > 1e-12 {
            prop_assert!(x.dist(&n) > 0.0);
        }
    }

    #[test]
    fn clipping_preserves_nearby_labels(s in scene3(), x0 in v3(), eps in 0.05..1.0f64, dirs in prop::collection::vec((unit3(), 0.0..1.0f64), 100)) {
        let d0 = s.sites().iter().map(|site| site.distance(&x0)).collect::<Vec<_>>();
        let r0 = d0.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assume!(r0 > 1e-6);
        let clipped = clip_scene(&s, x0, r0 + eps).unwrap();
        for (u, t) in dirs {
            let x = ball_point(x0, eps / 3.0, u, t);
            for j in 0..s.len() {
                // Sites within r0 + eps/3 of x0 keep their nearest points inside the ball.
                if d0[j] <= r0 + eps / 3.0 {
                    let (a, b) = (clipped.distance(j, &x), s.distance(j, &x));
                    prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b), "site {} at {:?}: {} vs {}", j, x, a, b);
                }
            }
            prop_assert_eq!(label(&clipped, &x, 1e-9).argmin, label(&s, &x, 1e-9).argmin);
        }
    }

    #[test]
    fn hausdorff_is_a_metric(a in prop::collection::vec(unit3(), 1..20), b in prop::collection::vec(unit3(), 1..20), c in prop::collection::vec(unit3(), 1..20)) {
        let ab = hausdorff(&a, &b).unwrap();
        prop_assert_eq!(ab, hausdorff(&b, &a).unwrap());
        prop_assert_eq!(hausdorff(&a, &a).unwrap(), 0.0);
        prop_assert!(ab <= hausdorff(&a, &c).unwrap() + hausdorff(&c, &b).unwrap() + 1e-12);
    }

    #[test]
    fn territories_partition_the_grid(s in scene3(), x in v3()) {
        let l = label(&s, &x, 1e-9);
        prop_assert!(!l.argmin.is_empty());
        if l.argmin.len() == 1 {
            prop_assert!(l.margin > 0.0);
        }
    }
}

fn points_2d() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.5..1.5f64, -1.5..1.5f64), 3..5).prop_filter("separated", |pts| {
        pts.iter().enumerate().all(|(i, a)| pts[i + 1..].iter().all(|b| (a.0 - b.0).hypot(a.1 - b.1) > 0.2))
    })
}

fn vertex_sets_match(a: &[V], b: &[V], tol: f64) -> bool {
    a.len() == b.len() && a.iter().all(|p| b.iter().any(|q| p.dist(q) <= tol))
}

fn positions(c: &ConflictComplex<f64>) -> Vec<V> {
    c.vertices.iter().map(|v| v.position).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn extraction_commutes_with_rigid_motions(pts in points_2d(), tx in -1.0..1.0f64, ty in -1.0..1.0f64, swap in any::<bool>()) {
        let s = scenes::points_2d::<f64>(&pts);
        let w = AxisBox::new(Vec3::new(-2.0, -2.0, 0.0), Vec3::new(2.0, 2.0, 0.0));
        let motion = |p: V| {
            let q = if swap { Vec3::new(p.y, p.x, 0.0) } else { p };
            q + Vec3::new(tx, ty, 0.0)
        };
        let linear = |p: V| if swap { Vec3::new(p.y, p.x, p.z) } else { p };
        let moved = s.transformed(linear, Vec3::new(tx, ty, 0.0)).unwrap();
        let mw = AxisBox::new(motion(w.min), motion(w.max));
        let a = extract_conflict_2d(&s, w, 32).unwrap();
        let b = extract_conflict_2d(&moved, mw, 32).unwrap();
        let mapped: Vec<V> = positions(&a).into_iter().map(motion).collect();
        prop_assert!(vertex_sets_match(&mapped, &positions(&b), 1e-8));
    }

    #[test]
    fn extraction_commutes_with_scaling(pts in points_2d(), scale in 0.2..5.0f64) {
        let s = scenes::points_2d::<f64>(&pts);
        let w = AxisBox::new(Vec3::new(-2.0, -2.0, 0.0), Vec3::new(2.0, 2.0, 0.0));
        let scaled = s.transformed(|p| p * scale, Vec3::zero()).unwrap();
        let a = extract_conflict_2d(&s, w, 32).unwrap();
        let b = extract_conflict_2d(&scaled, AxisBox::new(w.min * scale, w.max * scale), 32).unwrap();
        let mapped: Vec<V> = positions(&a).into_iter().map(|p| p * scale).collect();
        prop_assert!(vertex_sets_match(&mapped, &positions(&b), 1e-8 * scale));
    }

    #[test]
    fn spherical_conflict_rotates_with_supports(angles in prop::collection::vec(0.0..std::f64::consts::TAU, 3..6), phi in 0.0..std::f64::consts::TAU) {
        let mut sorted = angles.clone();
        sorted.sort_by(f64::total_cmp);
        let gaps_ok = sorted.windows(2).all(|w| w[1] - w[0] > 0.3) && sorted[0] + std::f64::consts::TAU - sorted[sorted.len() - 1] > 0.3;
        prop_assume!(gaps_ok);
        let s = scenes::points_on_circle::<f64>(&angles);
        let rotated: Vec<f64> = angles.iter().map(|a| a + phi).collect();
        let r = scenes::points_on_circle::<f64>(&rotated);
        let a = spherical_conflict(&support_sets(&s, &Vec3::zero()).unwrap(), 3600).unwrap();
        let b = spherical_conflict(&support_sets(&r, &Vec3::zero()).unwrap(), 3600).unwrap();
        let (c, sn) = (phi.cos(), phi.sin());
        let mapped: Vec<V> = a.directions().into_iter().map(|u| Vec3::new(c * u.x - sn * u.y, sn * u.x + c * u.y, 0.0)).collect();
        prop_assert!(vertex_sets_match(&mapped, &b.directions(), 1e-8));
    }

    #[test]
    fn shadows_keep_labels_near_the_base_point(angles in prop::collection::vec((0.0..std::f64::consts::PI, 0.0..std::f64::consts::TAU), 3..6), r0 in 0.5..2.0f64, c in v3(), dirs in prop::collection::vec((unit3(), 0.0..1.0f64), 200)) {
        // Point sites on S(c, r0) already lie in their own shadow.
        let pts: Vec<V> = angles.iter().map(|(t, p)| c + Vec3::new(t.sin() * p.cos(), t.sin() * p.sin(), t.cos()) * r0).collect();
        let separated = pts.iter().enumerate().all(|(i, a)| pts[i + 1..].iter().all(|b| a.dist(b) > 0.05));
        prop_assume!(separated);
        let sites = pts.iter().enumerate().map(|(k, p)| Site::new(format!("p{k}"), vec![Primitive::Point(*p)])).collect();
        let s = Scene::new(3, Metric::Euclidean, sites).unwrap();
        let support = support_sets(&s, &c).unwrap();
        prop_assert_eq!(support.nonempty().len(), pts.len());
        let shadow = annular_shadow(&support, 0.5).unwrap();
        for (u, t) in dirs {
            let x = ball_point(c, r0 / 3.0, u, t);
            prop_assert_eq!(label(&s, &x, 1e-9).argmin, label(&shadow, &x, 1e-9).argmin);
        }
    }
}

fn plane_graph(res: usize) -> (ConflictComplex<f64>, GeodesicGraph<f64>) {
    let s = scenes::two_points_3d::<f64>();
    let w = AxisBox::new(Vec3::new(-1.0, -1.0, -1.0), Vec3::new(1.0, 1.0, 1.0));
    let c = extract_conflict_3d(&s, w, res).unwrap();
    let g = GeodesicGraph::new(&c);
    (c, g)
}

fn on_plane() -> impl Strategy<Value = V> {
    (-0.9..0.9f64, -0.9..0.9f64).prop_map(|(y, z)| Vec3::new(0.0, y, z))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inner_distance_dominates_outer_and_is_symmetric(p in on_plane(), q in on_plane(), r in on_plane()) {
        let (c, g) = plane_graph(12);
        let pq = inner_distance(&g, &p, &q).unwrap();
        prop_assert!(pq >= p.dist(&q) - 1e-9);
        prop_assert!((pq - inner_distance(&g, &q, &p).unwrap()).abs() <= 1e-12);
        // Snapping offsets at the middle point can add up to two spacings each way.
        let slack = 4.0 * c.spacing;
        prop_assert!(inner_distance(&g, &p, &r).unwrap() <= pq + inner_distance(&g, &q, &r).unwrap() + slack);
    }

    #[test]
    fn graph_distances_satisfy_the_triangle_inequality(a in 0usize..1000, b in 0usize..1000, m in 0usize..1000) {
        let (_, g) = plane_graph(8);
        let n = g.node_count();
        let (a, b, m) = (a % n, b % n, m % n);
        let da = g.distances_from(a);
        let dm = g.distances_from(m);
        prop_assert!(da[b] <= da[m] + dm[b] + 1e-12);
        prop_assert!((da[m] - dm[a]).abs() <= 1e-12);
    }
}

#[test]
fn refinement_does_not_lengthen_paths() {
    let (p, q) = (Vec3::new(0.0, -0.7, 0.55), Vec3::new(0.0, 0.6, -0.65));
    let d: Vec<f64> = [10, 20, 40]
        .iter()
        .map(|&res| {
            let (_, g) = plane_graph(res);
            inner_distance(&g, &p, &q).unwrap()
        })
        .collect();
    for w in d.windows(2) {
        assert!(w[1] <= w[0] * 1.02, "{d:?}");
    }
    assert!((d[2] / p.dist(&q) - 1.0).abs() < 0.1, "{d:?}");
}
