//! Planar extraction: marching squares on the nearest-site labels.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;

use super::{
    bisect_pair, globally_minimal, is_euclidean, label, position_key, vertex_label, Cell, ComplexVertex,
    ConflictComplex, ExtractError, FlagKind, FlaggedCell, Grid, VertexLabel,
};
use crate::config;
use crate::geom::{AxisBox, Vec3};
use crate::scalar::{lit, Real};
use crate::scene::Scene;

/// Root found on a grid edge.
#[derive(Clone, Copy, Debug)]
struct Crossing<T> {
    position: Vec3<T>,
    residual: T,
    pair: (usize, usize),
}

/// Extracts the conflict set of a planar scene as a polyline complex.
///
/// Every grid edge whose endpoints carry different nearest sites is bisected;
/// roots that are not globally nearest to both sites are dropped. Cells where
/// three territories meet get a junction vertex from a Newton solve of the
/// two equidistance equations (Euclidean metric), otherwise they are flagged.
pub fn extract_conflict_2d<T: Real>(
    scene: &Scene<T>,
    window: AxisBox<T>,
    resolution: usize,
) -> Result<ConflictComplex<T>, ExtractError> {
    if scene.dimension() != 2 {
        return Err(ExtractError::WrongDimension { scene: scene.dimension(), expected: 2 });
    }
    let mut window = window;
    window.min.z = T::zero();
    window.max.z = T::zero();
    let grid = Grid::new(window, resolution, 2)?;
    let res = resolution;
    let n = res + 1;
    let tie_tol = lit::<T>(config::TIE_TOL);

    let labels: Vec<VertexLabel> = (0..n * n)
        .into_par_iter()
        .map(|k| vertex_label(scene, &grid.point([k % n, k / n, 0], res), tie_tol))
        .collect();
    let lab = |i: usize, j: usize| labels[j * n + i];

    // Horizontal edges (i, j)-(i+1, j) first, then vertical (i, j)-(i, j+1).
    let horizontal = n * res;
    let edge_count = horizontal + res * n;
    let edge_ends = |e: usize| -> ([usize; 2], [usize; 2]) {
        if e < horizontal {
            let (i, j) = (e % res, e / res);
            ([i, j], [i + 1, j])
        } else {
            let k = e - horizontal;
            let (i, j) = (k % n, k / n);
            ([i, j], [i, j + 1])
        }
    };

    let crossings: Vec<Option<Crossing<T>>> = (0..edge_count)
        .into_par_iter()
        .map(|e| {
            let (a, b) = edge_ends(e);
            let (la, lb) = (lab(a[0], a[1]).site as usize, lab(b[0], b[1]).site as usize);
            if la == lb {
                return None;
            }
            let pa = grid.point([a[0], a[1], 0], res);
            let pb = grid.point([b[0], b[1], 0], res);
            let (position, residual) =
                bisect_pair(scene, pa, pb, la, lb, lit(config::REFINE_TOL), config::EXTRACT_MAX_ITER);
            let pair = (la.min(lb), la.max(lb));
            globally_minimal(scene, &position, pair.0, pair.1).then_some(Crossing { position, residual, pair })
        })
        .collect();

    let mut vertices: Vec<ComplexVertex<T>> = Vec::new();
    let mut by_position: HashMap<[u64; 3], usize> = HashMap::new();
    let mut edge_vertex = vec![usize::MAX; edge_count];
    for (e, c) in crossings.iter().enumerate() {
        if let Some(c) = c {
            let id = *by_position.entry(position_key(&c.position)).or_insert_with(|| {
                vertices.push(ComplexVertex {
                    position: c.position,
                    residual: c.residual,
                    sites: vec![c.pair.0, c.pair.1],
                });
                vertices.len() - 1
            });
            edge_vertex[e] = id;
        }
    }

    let mut cells: Vec<Cell> = Vec::new();
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    let mut flagged: Vec<FlaggedCell> = Vec::new();
    let mut ambiguous = 0usize;
    let mut push = |a: usize, b: usize, pair: (usize, usize), cells: &mut Vec<Cell>| {
        if a != b && seen.insert((a.min(b), a.max(b))) {
            cells.push(Cell { vertices: vec![a, b], pair });
        }
    };

    for cj in 0..res {
        for ci in 0..res {
            let corners = [lab(ci, cj), lab(ci + 1, cj), lab(ci + 1, cj + 1), lab(ci, cj + 1)];
            if corners.iter().all(|l| l.tie) {
                ambiguous += 1;
                flagged.push(FlaggedCell { cell: [ci, cj, 0], kind: FlagKind::Ambiguous });
                continue;
            }
            let mut sites: Vec<usize> = corners.iter().map(|l| l.site as usize).collect();
            sites.sort_unstable();
            sites.dedup();
            if sites.len() < 2 {
                continue;
            }
            // Bottom, right, top, left.
            let edges = [
                cj * res + ci,
                horizontal + cj * n + ci + 1,
                (cj + 1) * res + ci,
                horizontal + cj * n + ci,
            ];
            let present: Vec<(usize, usize)> = edges
                .iter()
                .enumerate()
                .filter(|(_, &e)| edge_vertex[e] != usize::MAX)
                .map(|(slot, &e)| (slot, e))
                .collect();
            let pair_of = |e: usize| crossings[e].as_ref().expect("present crossing").pair;

            if sites.len() == 2 {
                let pair = (sites[0], sites[1]);
                match present.len() {
                    0 => {}
                    2 => push(edge_vertex[present[0].1], edge_vertex[present[1].1], pair, &mut cells),
                    4 => {
                        let center = grid.point([2 * ci + 1, 2 * cj + 1, 0], 2 * res);
                        let c = vertex_label(scene, &center, tie_tol).site;
                        let v = |slot: usize| edge_vertex[edges[slot]];
                        if c == corners[0].site {
                            // Corners 1 and 3 are cut off.
                            push(v(0), v(1), pair, &mut cells);
                            push(v(2), v(3), pair, &mut cells);
                        } else {
                            push(v(3), v(0), pair, &mut cells);
                            push(v(1), v(2), pair, &mut cells);
                        }
                    }
                    _ => flagged.push(FlaggedCell { cell: [ci, cj, 0], kind: FlagKind::Junction }),
                }
                continue;
            }

            let junction = if sites.len() == 3 && is_euclidean(scene) {
                solve_junction(scene, &grid, [ci, cj], [sites[0], sites[1], sites[2]])
            } else {
                None
            };
            match junction {
                Some((position, residual)) => {
                    let jid = attach_junction(
                        &mut vertices,
                        &present.iter().map(|&(_, e)| edge_vertex[e]).collect::<Vec<_>>(),
                        position,
                        residual,
                        &sites,
                    );
                    for &(_, e) in &present {
                        push(edge_vertex[e], jid, pair_of(e), &mut cells);
                    }
                }
                None => {
                    // Connect crossings of the same pair; leftovers stay unconnected.
                    let mut by_pair: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
                    for &(_, e) in &present {
                        by_pair.entry(pair_of(e)).or_default().push(edge_vertex[e]);
                    }
                    let mut pairs: Vec<_> = by_pair.into_iter().collect();
                    pairs.sort();
                    for (pair, vs) in pairs {
                        if vs.len() == 2 {
                            push(vs[0], vs[1], pair, &mut cells);
                        }
                    }
                    flagged.push(FlaggedCell { cell: [ci, cj, 0], kind: FlagKind::Junction });
                }
            }
        }
    }

    let mut complex = ConflictComplex::from_parts(2, window, res, grid.spacing(), vertices, cells);
    complex.flagged = flagged;
    complex.tie_area_fraction = ambiguous as f64 / (res * res) as f64;
    Ok(complex)
}

/// Newton iteration for the point equidistant from three sites inside a cell.
fn solve_junction<T: Real>(scene: &Scene<T>, grid: &Grid<T>, cell: [usize; 2], s: [usize; 3]) -> Option<(Vec3<T>, T)> {
    let res = grid.res;
    let lo = grid.point([cell[0], cell[1], 0], res);
    let hi = grid.point([cell[0] + 1, cell[1] + 1, 0], res);
    let mut x = lo.lerp(&hi, lit(0.5));
    let sites = scene.sites();
    let grad = |i: usize, x: &Vec3<T>| -> Option<(T, Vec3<T>)> {
        let d = sites[s[i]].distance(x);
        if d <= T::zero() {
            return None;
        }
        Some((d, (*x - sites[s[i]].nearest_point(x)) / d))
    };
    let tol = lit::<T>(config::RESIDUAL_TOL);
    for _ in 0..60 {
        let (d0, g0) = grad(0, &x)?;
        let (d1, g1) = grad(1, &x)?;
        let (d2, g2) = grad(2, &x)?;
        let (f1, f2) = (d0 - d1, d0 - d2);
        let residual = (d0 - d1).abs().max((d0 - d2).abs()).max((d1 - d2).abs());
        if residual <= tol {
            break;
        }
        let (a, b) = (g0.x - g1.x, g0.y - g1.y);
        let (c, d) = (g0.x - g2.x, g0.y - g2.y);
        let det = a * d - b * c;
        if det == T::zero() || !det.is_finite() {
            return None;
        }
        let dx = (d * f1 - b * f2) / det;
        let dy = (a * f2 - c * f1) / det;
        x = Vec3::new(x.x - dx, x.y - dy, T::zero());
        if !x.is_finite() {
            return None;
        }
    }
    let d: Vec<T> = s.iter().map(|&i| sites[i].distance(&x)).collect();
    let residual = (d[0] - d[1]).abs().max((d[0] - d[2]).abs()).max((d[1] - d[2]).abs());
    let slack = grid.spacing() * lit(1e-6);
    let inside = x.x >= lo.x - slack && x.x <= hi.x + slack && x.y >= lo.y - slack && x.y <= hi.y + slack;
    if residual > tol || !inside {
        return None;
    }
    let l = label(scene, &x, lit(config::MEMBERSHIP_TOL));
    (l.contains(s[0]) && l.contains(s[1]) && l.contains(s[2])).then_some((x, residual))
}

/// Reuses a crossing or earlier junction at the same spot, otherwise appends
/// a new vertex. Returns its id.
fn attach_junction<T: Real>(
    vertices: &mut Vec<ComplexVertex<T>>,
    crossings: &[usize],
    position: Vec3<T>,
    residual: T,
    sites: &[usize],
) -> usize {
    let merge = lit::<T>(config::RESIDUAL_TOL);
    let near = crossings
        .iter()
        .copied()
        .find(|&v| vertices[v].position.dist(&position) <= merge)
        .or_else(|| {
            vertices
                .iter()
                .position(|v| v.sites.len() >= 3 && v.position.dist(&position) <= merge)
        });
    match near {
        Some(id) => {
            let v = &mut vertices[id];
            for &s in sites {
                if !v.sites.contains(&s) {
                    v.sites.push(s);
                }
            }
            v.sites.sort_unstable();
            v.residual = v.residual.max(residual);
            id
        }
        None => {
            vertices.push(ComplexVertex { position, residual, sites: sites.to_vec() });
            vertices.len() - 1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenes;

    fn square(h: f64) -> AxisBox<f64> {
        AxisBox::new(Vec3::new(-h, -h, 0.0), Vec3::new(h, h, 0.0))
    }

    #[test]
    fn bisector_of_two_points() {
        let s = scenes::two_points_2d::<f64>();
        let c = extract_conflict_2d(&s, square(2.0), 128).unwrap();
        assert!(!c.is_empty());
        for v in &c.vertices {
            assert!(v.position.x.abs() < 1e-6);
            assert!(v.residual <= 1e-9);
        }
        // One straight polyline spanning the window.
        assert_eq!(c.cells.len(), 128);
        assert!(c.flagged.is_empty());
        assert_eq!(c.tie_area_fraction, 0.0);
    }

    #[test]
    fn three_points_meet_at_circumcenter() {
        let s = scenes::equilateral_three_points::<f64>();
        let c = extract_conflict_2d(&s, square(2.0), 101).unwrap();
        let junctions: Vec<_> = c.vertices.iter().filter(|v| v.sites.len() == 3).collect();
        assert_eq!(junctions.len(), 1, "{:?}", c.flagged);
        assert!(junctions[0].position.norm() < 1e-9);
        for v in &c.vertices {
            let l = label(&s, &v.position, 1e-8);
            assert!(l.argmin.len() >= 2);
        }
    }

    #[test]
    fn rejects_wrong_inputs() {
        let s = scenes::two_points_2d::<f64>();
        assert_eq!(
            extract_conflict_2d(&s, square(1.0), 4).unwrap_err(),
            ExtractError::BadResolution { min: 8, got: 4 }
        );
        assert_eq!(extract_conflict_2d(&s, square(0.0), 16).unwrap_err(), ExtractError::BadWindow);
        let s3 = scenes::two_points_3d::<f64>();
        assert!(matches!(extract_conflict_2d(&s3, square(1.0), 16), Err(ExtractError::WrongDimension { .. })));
    }

    #[test]
    fn taxicab_ties_fill_regions() {
        let s = scenes::taxicab_pair::<f64>();
        let w = AxisBox::new(Vec3::new(-1.0, -1.0, 0.0), Vec3::new(2.0, 2.0, 0.0));
        let c = extract_conflict_2d(&s, w, 60).unwrap();
        // Two unit squares of ties out of a 3x3 window.
        assert!((c.tie_area_fraction - 2.0 / 9.0).abs() < 0.05, "{}", c.tie_area_fraction);
        assert!(c.flag_count(FlagKind::Ambiguous) > 0);
    }

    #[test]
    fn works_in_single_precision() {
        let s = scenes::two_points_2d::<f32>();
        let w = AxisBox::new(Vec3::new(-2.0f32, -2.0, 0.0), Vec3::new(2.0, 2.0, 0.0));
        let c = extract_conflict_2d(&s, w, 32).unwrap();
        assert!(!c.is_empty());
        assert!(c.vertices.iter().all(|v| v.position.x.abs() < 1e-5));
    }
}
