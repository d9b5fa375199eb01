//! Spatial extraction: marching tetrahedra on the nearest-site labels.
//!
//! Cubes are split into six Kuhn tetrahedra along the main diagonal. Lattice
//! points are addressed on the doubled lattice so that cubes with three or
//! more labels can be subdivided once without re-indexing.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;

use super::{
    bisect_pair, globally_minimal, is_euclidean, position_key, vertex_label, Cell, ComplexVertex, ConflictComplex,
    ExtractError, FlagKind, FlaggedCell, Grid, VertexLabel,
};
use crate::config;
use crate::geom::{AxisBox, Vec3};
use crate::scalar::{lit, Real};
use crate::scene::Scene;

/// Axis orders of the six Kuhn tetrahedra.
const KUHN: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

type Key = u64;

struct Lattice {
    /// Points per axis on the doubled lattice.
    side: u64,
}

impl Lattice {
    fn key(&self, p: [usize; 3]) -> Key {
        (p[2] as u64 * self.side + p[1] as u64) * self.side + p[0] as u64
    }

    fn coords(&self, k: Key) -> [usize; 3] {
        let s = self.side;
        [(k % s) as usize, ((k / s) % s) as usize, (k / (s * s)) as usize]
    }
}

/// A tetrahedron whose corners carry exactly two labels.
type Tet = [(Key, u32); 4];

#[derive(Default)]
struct CubeOutput {
    tets: Vec<Tet>,
    ambiguous: bool,
    junction: bool,
}

/// Extracts the conflict set of a spatial scene as a triangle mesh.
pub fn extract_conflict_3d<T: Real>(
    scene: &Scene<T>,
    window: AxisBox<T>,
    resolution: usize,
) -> Result<ConflictComplex<T>, ExtractError> {
    if scene.dimension() != 3 {
        return Err(ExtractError::WrongDimension { scene: scene.dimension(), expected: 3 });
    }
    if !is_euclidean(scene) {
        return Err(ExtractError::MetricUnsupported);
    }
    let grid = Grid::new(window, resolution, 3)?;
    let res = resolution;
    let den = 2 * res;
    let n = res + 1;
    let lattice = Lattice { side: (den + 1) as u64 };
    let tie_tol = lit::<T>(config::TIE_TOL);

    let coarse: Vec<VertexLabel> = (0..n * n * n)
        .into_par_iter()
        .map(|k| vertex_label(scene, &grid.point([2 * (k % n), 2 * ((k / n) % n), 2 * (k / (n * n))], den), tie_tol))
        .collect();
    let label_at = |p: [usize; 3]| -> VertexLabel {
        if p.iter().all(|c| c % 2 == 0) {
            coarse[(p[2] / 2 * n + p[1] / 2) * n + p[0] / 2]
        } else {
            vertex_label(scene, &grid.point(p, den), tie_tol)
        }
    };

    let cubes: Vec<CubeOutput> = (0..res * res * res)
        .into_par_iter()
        .map(|c| {
            let base = [2 * (c % res), 2 * ((c / res) % res), 2 * (c / (res * res))];
            let mut out = CubeOutput::default();
            let corners: Vec<VertexLabel> = (0..8).map(|m| label_at(offset(base, m, 2))).collect();
            if corners.iter().all(|l| l.tie) {
                out.ambiguous = true;
                return out;
            }
            let distinct = count_distinct(corners.iter().map(|l| l.site));
            if distinct < 2 {
                return out;
            }
            if distinct == 2 {
                march_cube(&lattice, base, 2, &|p| label_at(p), &mut out);
            } else {
                for m in 0..8 {
                    let sub = offset(base, m, 1);
                    march_cube(&lattice, sub, 1, &|p| label_at(p), &mut out);
                }
            }
            out
        })
        .collect();

    // Unique crossing edges, keyed by endpoint keys (label-lower site first).
    let mut edge_set: HashSet<(Key, Key)> = HashSet::new();
    for cube in &cubes {
        for tet in &cube.tets {
            for a in 0..4 {
                for b in a + 1..4 {
                    if tet[a].1 != tet[b].1 {
                        edge_set.insert(edge_key(tet[a], tet[b]));
                    }
                }
            }
        }
    }
    let mut edges: Vec<(Key, Key)> = edge_set.into_iter().collect();
    edges.sort_unstable();
    let site_of = |k: Key| label_at(lattice.coords(k)).site as usize;
    let roots: Vec<Option<(Vec3<T>, T, (usize, usize))>> = edges
        .par_iter()
        .map(|&(ka, kb)| {
            let (i, j) = (site_of(ka), site_of(kb));
            let pa = grid.point(lattice.coords(ka), den);
            let pb = grid.point(lattice.coords(kb), den);
            let (p, r) = bisect_pair(scene, pa, pb, i, j, lit(config::REFINE_TOL), config::EXTRACT_MAX_ITER);
            let pair = (i.min(j), i.max(j));
            globally_minimal(scene, &p, pair.0, pair.1).then_some((p, r, pair))
        })
        .collect();

    let mut vertices: Vec<ComplexVertex<T>> = Vec::new();
    let mut by_position: HashMap<[u64; 3], usize> = HashMap::new();
    let mut edge_vertex: HashMap<(Key, Key), usize> = HashMap::with_capacity(edges.len());
    for (e, root) in edges.iter().zip(&roots) {
        if let Some((p, r, pair)) = root {
            let id = *by_position.entry(position_key(p)).or_insert_with(|| {
                vertices.push(ComplexVertex { position: *p, residual: *r, sites: vec![pair.0, pair.1] });
                vertices.len() - 1
            });
            edge_vertex.insert(*e, id);
        }
    }

    let mut cells: Vec<Cell> = Vec::new();
    let mut seen: HashSet<[usize; 3]> = HashSet::new();
    let mut flagged = Vec::new();
    let mut ambiguous = 0usize;
    for (c, cube) in cubes.iter().enumerate() {
        let index = [c % res, (c / res) % res, c / (res * res)];
        if cube.ambiguous {
            ambiguous += 1;
            flagged.push(FlaggedCell { cell: index, kind: FlagKind::Ambiguous });
        }
        if cube.junction {
            flagged.push(FlaggedCell { cell: index, kind: FlagKind::Junction });
        }
        for tet in &cube.tets {
            for tri in tet_triangles(tet) {
                let ids: Option<Vec<usize>> = tri.iter().map(|e| edge_vertex.get(e).copied()).collect();
                let Some(mut ids) = ids else { continue };
                let mut sorted = [ids[0], ids[1], ids[2]];
                sorted.sort_unstable();
                if sorted[0] == sorted[1] || sorted[1] == sorted[2] || !seen.insert(sorted) {
                    continue;
                }
                orient(&mut ids, tet, &vertices, &lattice, &grid, den);
                let lo = tet.iter().map(|t| t.1).min().unwrap() as usize;
                let hi = tet.iter().map(|t| t.1).max().unwrap() as usize;
                cells.push(Cell { vertices: ids, pair: (lo, hi) });
            }
        }
    }

    let mut complex = ConflictComplex::from_parts(3, window, res, grid.spacing(), vertices, cells);
    complex.flagged = flagged;
    complex.tie_area_fraction = ambiguous as f64 / (res * res * res) as f64;
    Ok(complex)
}

/// Corner `m` (bit 0 = x, bit 1 = y, bit 2 = z) of the cube at `base` with side `step`.
fn offset(base: [usize; 3], m: usize, step: usize) -> [usize; 3] {
    [base[0] + step * (m & 1), base[1] + step * ((m >> 1) & 1), base[2] + step * ((m >> 2) & 1)]
}

fn count_distinct(sites: impl Iterator<Item = u32>) -> usize {
    let mut v: Vec<u32> = sites.collect();
    v.sort_unstable();
    v.dedup();
    v.len()
}

/// Collects the two-label Kuhn tetrahedra of one cube; tetrahedra with three
/// or more labels mark the cube as a junction.
fn march_cube(lattice: &Lattice, base: [usize; 3], step: usize, label_at: &dyn Fn([usize; 3]) -> VertexLabel, out: &mut CubeOutput) {
    let corners: Vec<(Key, u32)> = (0..8)
        .map(|m| {
            let p = offset(base, m, step);
            (lattice.key(p), label_at(p).site)
        })
        .collect();
    let distinct = count_distinct(corners.iter().map(|c| c.1));
    if distinct < 2 {
        return;
    }
    for order in KUHN {
        let mut m = 0usize;
        let mut tet = [corners[0]; 4];
        for (k, &axis) in order.iter().enumerate() {
            m |= 1 << axis;
            tet[k + 1] = corners[m];
        }
        match count_distinct(tet.iter().map(|c| c.1)) {
            2 => out.tets.push(tet),
            1 => {}
            _ => out.junction = true,
        }
    }
    if distinct > 2 && step == 1 {
        out.junction = true;
    }
}

/// Edge key with the lower-labelled endpoint first (ties by key).
fn edge_key(a: (Key, u32), b: (Key, u32)) -> (Key, Key) {
    if (a.1, a.0) < (b.1, b.0) {
        (a.0, b.0)
    } else {
        (b.0, a.0)
    }
}

/// Triangles of a two-label tetrahedron, as triples of crossing edges.
fn tet_triangles(tet: &Tet) -> Vec<[(Key, Key); 3]> {
    let low = tet.iter().map(|t| t.1).min().unwrap();
    let neg: Vec<(Key, u32)> = tet.iter().copied().filter(|t| t.1 == low).collect();
    let pos: Vec<(Key, u32)> = tet.iter().copied().filter(|t| t.1 != low).collect();
    let e = |a: (Key, u32), b: (Key, u32)| edge_key(a, b);
    match (neg.len(), pos.len()) {
        (1, 3) => vec![[e(neg[0], pos[0]), e(neg[0], pos[1]), e(neg[0], pos[2])]],
        (3, 1) => vec![[e(neg[0], pos[0]), e(neg[1], pos[0]), e(neg[2], pos[0])]],
        (2, 2) => {
            let (a, b, c, d) = (e(neg[0], pos[0]), e(neg[0], pos[1]), e(neg[1], pos[1]), e(neg[1], pos[0]));
            vec![[a, b, c], [a, c, d]]
        }
        _ => Vec::new(),
    }
}

/// Orients a triangle so its normal points from the lower-labelled corners
/// toward the higher-labelled ones.
fn orient<T: Real>(ids: &mut [usize], tet: &Tet, vertices: &[ComplexVertex<T>], lattice: &Lattice, grid: &Grid<T>, den: usize) {
    let low = tet.iter().map(|t| t.1).min().unwrap();
    let mut toward = Vec3::zero();
    for t in tet {
        let p = grid.point(lattice.coords(t.0), den);
        if t.1 == low {
            toward -= p;
        } else {
            toward += p;
        }
    }
    let (p0, p1, p2) = (vertices[ids[0]].position, vertices[ids[1]].position, vertices[ids[2]].position);
    let normal = (p1 - p0).cross(&(p2 - p0));
    if normal.dot(&toward) < T::zero() {
        ids.swap(1, 2);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenes;

    fn cube(h: f64) -> AxisBox<f64> {
        AxisBox::new(Vec3::new(-h, -h, -h), Vec3::new(h, h, h))
    }

    #[test]
    fn plane_between_two_points() {
        let s = scenes::two_points_3d::<f64>();
        let c = extract_conflict_3d(&s, cube(2.0), 16).unwrap();
        assert!(!c.is_empty());
        for v in &c.vertices {
            assert!(v.position.x.abs() < 1e-6);
            assert!(v.residual <= 1e-9);
        }
        assert!(c.cells.iter().all(|cell| cell.vertices.len() == 3 && cell.pair == (0, 1)));
        // Triangles face from site 0 (at x = 1) toward site 1.
        for cell in &c.cells {
            let p: Vec<_> = cell.vertices.iter().map(|&v| c.vertices[v].position).collect();
            let nrm = (p[1] - p[0]).cross(&(p[2] - p[0]));
            assert!(nrm.x < 0.0);
        }
    }

    #[test]
    fn paraboloid_is_equidistant() {
        let s = scenes::point_and_plane::<f64>();
        let c = extract_conflict_3d(&s, cube(2.0), 24).unwrap();
        assert!(c.vertices.len() > 100);
        for v in &c.vertices {
            let p = v.position;
            assert!((s.distance(0, &p) - s.distance(1, &p)).abs() <= 1e-8);
            assert!((p.z - (p.x * p.x + p.y * p.y) / 4.0).abs() < 1e-8);
        }
    }

    #[test]
    fn three_sites_are_subdivided() {
        let s: Scene<f64> = crate::scene::parse_scene(
            r#"{"dimension": 3, "sites": [
                {"id": "a", "primitives": [{"type": "point", "coords": [1, 0, 0]}]},
                {"id": "b", "primitives": [{"type": "point", "coords": [-0.5, 0.866, 0]}]},
                {"id": "c", "primitives": [{"type": "point", "coords": [-0.5, -0.866, 0]}]}]}"#,
        )
        .unwrap();
        let c = extract_conflict_3d(&s, cube(1.5), 12).unwrap();
        assert!(c.flag_count(FlagKind::Junction) > 0);
        for v in &c.vertices {
            assert!(v.residual <= 1e-9);
        }
        let pairs: HashSet<_> = c.cells.iter().map(|cell| cell.pair).collect();
        assert_eq!(pairs.len(), 3);
    }

    #[test]
    fn requires_euclidean_three_dimensional_scene() {
        let s = scenes::two_points_2d::<f64>();
        assert!(matches!(extract_conflict_3d(&s, cube(1.0), 16), Err(ExtractError::WrongDimension { .. })));
    }
}
