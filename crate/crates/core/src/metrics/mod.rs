//! Inner metric, normal-embedding scans, branch tangents and topology checks
//! on extracted complexes.

mod branches;
mod embedding;
mod topology;

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};

use petgraph::algo::dijkstra;
use petgraph::graph::{NodeIndex, UnGraph};
use petgraph::visit::EdgeRef;
use petgraph::unionfind::UnionFind;

pub use branches::{branch_tangents, no_cusp_check, no_cusp_on_complex, BranchCluster, NoCuspReport};
pub use embedding::{embedding_scan, embedding_scan_scene, probe_radius, EmbeddingReport, ProbePair};
pub use topology::{dimension_check, link_components, spherical_cells_are_curves, DimensionReport};

use crate::config;
use crate::conflict::{ConflictComplex, ExtractError};
use crate::geom::Vec3;
use crate::scalar::{lit, to_f64, Real};
use crate::spherical::SphericalError;
use crate::tangent::TangentError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("point is {distance} away from the complex (allowed {allowed})")]
    TooFar { distance: f64, allowed: f64 },

    #[error("the complex is empty")]
    EmptyComplex,

    #[error("unresolved branching: {first} clusters at eps = {eps_first}, {second} at eps = {eps_second}")]
    UnresolvedBranching { first: usize, second: usize, eps_first: f64, eps_second: f64 },

    #[error("no-cusp analysis needs a 2-dimensional euclidean scene")]
    NotPlanar,

    #[error("the slice at eps = {0} is empty")]
    EmptySlice(f64),

    #[error("scales must be positive and strictly decreasing")]
    BadScales,

    #[error(transparent)]
    Tangent(#[from] TangentError),

    #[error(transparent)]
    Extract(#[from] ExtractError),

    #[error(transparent)]
    Spherical(#[from] SphericalError),
}

/// Weighted 1-skeleton of a complex: edge weights are Euclidean lengths.
///
/// Triangulated complexes get a Steiner point at every edge midpoint, joined
/// to the other boundary points of each triangle.
#[derive(Clone, Debug)]
pub struct GeodesicGraph<T: Real> {
    pub dimension: usize,
    /// Node positions (vertices closer than the snap tolerance are merged),
    /// followed by Steiner points.
    pub positions: Vec<Vec3<T>>,
    /// Node of every complex vertex.
    pub node_of_vertex: Vec<usize>,
    /// Connected-component label per node (smallest node index in the component).
    pub component: Vec<usize>,
    /// Largest grid spacing of the source complex; points farther than twice
    /// this from every node are rejected.
    pub spacing: T,
    graph: UnGraph<(), T>,
    bucket: T,
    buckets: HashMap<[i64; 3], Vec<usize>>,
}

impl<T: Real> GeodesicGraph<T> {
    pub fn new(complex: &ConflictComplex<T>) -> Self {
        let snap = lit::<T>(config::SNAP_TOL);
        let mut positions: Vec<Vec3<T>> = Vec::new();
        let mut snap_cells: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
        let mut node_of_vertex = Vec::with_capacity(complex.vertices.len());
        for v in &complex.vertices {
            let p = v.position;
            let key = cell_key(&p, snap);
            let found = neighbours(key)
                .filter_map(|k| snap_cells.get(&k))
                .flatten()
                .copied()
                .find(|&n| positions[n].dist(&p) <= snap);
            let id = found.unwrap_or_else(|| {
                positions.push(p);
                snap_cells.entry(key).or_default().push(positions.len() - 1);
                positions.len() - 1
            });
            node_of_vertex.push(id);
        }
        // One Steiner point per triangle edge, joined to every other boundary
        // point of the triangle, so paths are not confined to grid directions.
        let mut edges: Vec<(usize, usize)> = Vec::new();
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        for c in &complex.cells {
            let nodes: Vec<usize> = c.vertices.iter().map(|&v| node_of_vertex[v]).collect();
            if nodes.len() != 3 {
                edges.extend(nodes.windows(2).map(|w| (w[0], w[1])));
                continue;
            }
            let mut ring = nodes.clone();
            for k in 0..3 {
                let (a, b) = (nodes[k], nodes[(k + 1) % 3]);
                if a == b {
                    continue;
                }
                let key = (a.min(b), a.max(b));
                let m = *midpoint.entry(key).or_insert_with(|| {
                    positions.push((positions[a] + positions[b]) * lit(0.5));
                    positions.len() - 1
                });
                ring.push(m);
            }
            for x in 0..ring.len() {
                for y in x + 1..ring.len() {
                    edges.push((ring[x], ring[y]));
                }
            }
        }
        let mut graph = UnGraph::<(), T>::with_capacity(positions.len(), edges.len());
        for _ in 0..positions.len() {
            graph.add_node(());
        }
        let mut uf = UnionFind::<usize>::new(positions.len());
        for (na, nb) in edges {
            if na != nb {
                graph.update_edge(NodeIndex::new(na), NodeIndex::new(nb), positions[na].dist(&positions[nb]));
                uf.union(na, nb);
            }
        }
        let mut smallest: HashMap<usize, usize> = HashMap::new();
        for n in 0..positions.len() {
            smallest.entry(uf.find(n)).or_insert(n);
        }
        let component = (0..positions.len()).map(|n| smallest[&uf.find(n)]).collect();
        let spacing = if complex.spacing > T::zero() { complex.spacing } else { T::one() };
        let bucket = spacing * lit(2.0);
        let mut buckets: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
        for (n, p) in positions.iter().enumerate() {
            buckets.entry(cell_key(p, bucket)).or_default().push(n);
        }
        Self { dimension: complex.dimension, positions, node_of_vertex, component, spacing, graph, bucket, buckets }
    }

    pub fn node_count(&self) -> usize {
        self.positions.len()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn component_count(&self) -> usize {
        let mut c = self.component.clone();
        c.sort_unstable();
        c.dedup();
        c.len()
    }

    /// Nearest node within twice the grid spacing.
    pub fn snap(&self, p: &Vec3<T>) -> Result<usize, MetricsError> {
        let allowed = self.spacing * lit(2.0);
        let best = neighbours(cell_key(p, self.bucket))
            .filter_map(|k| self.buckets.get(&k))
            .flatten()
            .map(|&n| (self.positions[n].dist(p), n))
            .min_by(|a, b| a.partial_cmp(b).unwrap());
        match best {
            Some((d, n)) if d <= allowed => Ok(n),
            Some((d, _)) => Err(MetricsError::TooFar { distance: to_f64(d), allowed: to_f64(allowed) }),
            None => Err(MetricsError::TooFar { distance: f64::INFINITY, allowed: to_f64(allowed) }),
        }
    }

    /// Shortest-path lengths from `node` to every reachable node.
    pub fn distances_from(&self, node: usize) -> Vec<T> {
        let map = dijkstra(&self.graph, NodeIndex::new(node), None, |e| *e.weight());
        let mut out = vec![T::infinity(); self.positions.len()];
        for (n, d) in map {
            out[n.index()] = d;
        }
        out
    }
}

fn cell_key<T: Real>(p: &Vec3<T>, size: T) -> [i64; 3] {
    let k = |x: T| (to_f64(x) / to_f64(size)).floor() as i64;
    [k(p.x), k(p.y), k(p.z)]
}

fn neighbours(key: [i64; 3]) -> impl Iterator<Item = [i64; 3]> {
    (0..27).map(move |m: i64| [key[0] + m % 3 - 1, key[1] + (m / 3) % 3 - 1, key[2] + m / 9 - 1])
}

/// Length of the shortest path in the complex from `p` to `q`.
///
/// Every node within twice the grid spacing of `p` is a start node (at its
/// straight-line offset) and every node near `q` an end node, so the result
/// never undercuts `|p - q|`. Points in different components are infinitely
/// far apart.
pub fn inner_distance<T: Real>(graph: &GeodesicGraph<T>, p: &Vec3<T>, q: &Vec3<T>) -> Result<T, MetricsError> {
    let (np, nq) = (graph.snap(p)?, graph.snap(q)?);
    if graph.component[np] != graph.component[nq] {
        return Ok(T::infinity());
    }
    let near = |x: &Vec3<T>| -> Vec<(usize, T)> {
        let allowed = graph.spacing * lit(2.0);
        neighbours(cell_key(x, graph.bucket))
            .filter_map(|k| graph.buckets.get(&k))
            .flatten()
            .map(|&n| (n, graph.positions[n].dist(x)))
            .filter(|&(_, d)| d <= allowed)
            .collect()
    };
    let ends: HashMap<usize, T> = near(q).into_iter().collect();
    // A* with the straight-line distance to `q` as the (admissible) heuristic.
    let h = |n: usize| graph.positions[n].dist(q);
    let mut dist = vec![T::infinity(); graph.positions.len()];
    let mut heap = BinaryHeap::new();
    for (n, d) in near(p) {
        if d < dist[n] {
            dist[n] = d;
            heap.push(Reverse(Key(d + h(n), n)));
        }
    }
    let mut best = T::infinity();
    while let Some(Reverse(Key(f, n))) = heap.pop() {
        if f >= best {
            break;
        }
        let d = dist[n];
        if f > d + h(n) {
            continue;
        }
        if let Some(tail) = ends.get(&n) {
            best = best.min(d + *tail);
        }
        for e in graph.graph.edges(NodeIndex::new(n)) {
            let m = e.target().index();
            let nd = d + *e.weight();
            if nd < dist[m] {
                dist[m] = nd;
                heap.push(Reverse(Key(nd + h(m), m)));
            }
        }
    }
    Ok(best)
}

/// Heap entry ordered by distance, then node.
#[derive(PartialEq)]
struct Key<T>(T, usize);

impl<T: Real> Eq for Key<T> {}

impl<T: Real> PartialOrd for Key<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Real> Ord for Key<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.partial_cmp(&other.0).unwrap_or(Ordering::Equal).then(self.1.cmp(&other.1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conflict::{extract_conflict_2d, Cell, ComplexVertex};
    use crate::geom::AxisBox;
    use crate::scenes;

    #[test]
    fn straight_line_inner_distance() {
        let s = scenes::two_points_2d::<f64>();
        let w = AxisBox::new(Vec3::new(-2.0, -2.0, 0.0), Vec3::new(2.0, 2.0, 0.0));
        let c = extract_conflict_2d(&s, w, 64).unwrap();
        let g = GeodesicGraph::new(&c);
        let d = inner_distance(&g, &Vec3::new(0.0, -1.0, 0.0), &Vec3::new(0.0, 1.0, 0.0)).unwrap();
        assert!((d - 2.0).abs() < 1e-6, "{d}");
        assert_eq!(g.component_count(), 1);
    }

    #[test]
    fn tangent_circles_path_passes_the_origin() {
        let c = scenes::tangent_circles_complex::<f64>(2000);
        let g = GeodesicGraph::new(&c);
        let t = 0.2f64;
        let p = Vec3::new(1.0 - t.cos(), t.sin(), 0.0);
        let q = Vec3::new(-(1.0 - t.cos()), t.sin(), 0.0);
        let d = inner_distance(&g, &p, &q).unwrap();
        assert!((d - 0.4).abs() < 0.4 * 0.03, "{d}");
    }

    #[test]
    fn disconnected_points_are_infinitely_far() {
        let v = |x: f64, y: f64| ComplexVertex { position: Vec3::new(x, y, 0.0), residual: 0.0, sites: vec![0, 1] };
        let vertices = vec![v(0.0, 0.0), v(0.1, 0.0), v(0.0, 1.0), v(0.1, 1.0)];
        let cells = vec![Cell { vertices: vec![0, 1], pair: (0, 1) }, Cell { vertices: vec![2, 3], pair: (0, 1) }];
        let w = AxisBox::new(Vec3::new(-1.0, -1.0, 0.0), Vec3::new(1.0, 1.0, 0.0));
        let c = ConflictComplex::from_parts(2, w, 0, 0.1, vertices, cells);
        let g = GeodesicGraph::new(&c);
        assert_eq!(g.component_count(), 2);
        let d = inner_distance(&g, &Vec3::new(0.0, 0.0, 0.0), &Vec3::new(0.0, 1.0, 0.0)).unwrap();
        assert!(d.is_infinite());
        assert!(matches!(inner_distance(&g, &Vec3::new(0.9, 0.5, 0.0), &Vec3::zero()), Err(MetricsError::TooFar { .. })));
    }

    #[test]
    fn snapping_merges_close_vertices() {
        let v = |x: f64| ComplexVertex { position: Vec3::new(x, 0.0, 0.0), residual: 0.0, sites: vec![0, 1] };
        let vertices = vec![v(0.0), v(1.0), v(1.0 + 1e-9), v(2.0)];
        let cells = vec![Cell { vertices: vec![0, 1], pair: (0, 1) }, Cell { vertices: vec![2, 3], pair: (0, 1) }];
        let w = AxisBox::new(Vec3::new(-1.0, -1.0, 0.0), Vec3::new(3.0, 1.0, 0.0));
        let c = ConflictComplex::from_parts(2, w, 0, 0.5, vertices, cells);
        let g = GeodesicGraph::new(&c);
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.component_count(), 1);
    }
}
