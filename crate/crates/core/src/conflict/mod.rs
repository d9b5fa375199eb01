//! Territory labels and grid extraction of conflict sets.
//!
//! Extraction labels every grid vertex by its nearest site, bisects
//! `d_i - d_j` along grid (or tetrahedron) edges whose endpoints carry
//! different labels, keeps only roots where `{i, j}` is globally nearest,
//! and connects the roots cell by cell into a polyline (plane) or a
//! triangle mesh (space).

mod export;
mod grid2d;
mod grid3d;

use std::collections::HashMap;

pub use export::{complex_to_csv, complex_to_obj, ComplexSidecar};
pub use grid2d::extract_conflict_2d;
pub use grid3d::extract_conflict_3d;

use crate::config;
use crate::geom::{AxisBox, Vec3};
use crate::scalar::{lit, to_f64, Real};
use crate::scene::{DistanceField, Metric, Scene};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExtractError {
    #[error("no sign change of d_{i} - d_{j} between the bracket endpoints")]
    NoSignChange { i: usize, j: usize },

    #[error("extraction window is empty or not finite")]
    BadWindow,

    #[error("resolution must be at least {min}, got {got}")]
    BadResolution { min: usize, got: usize },

    #[error("scene has dimension {scene}, extractor expects {expected}")]
    WrongDimension { scene: usize, expected: usize },

    #[error("3D extraction supports the euclidean metric only")]
    MetricUnsupported,
}

/// Nearest-site information at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct TerritoryLabel<T> {
    /// Every site within the tie tolerance of the minimum, ascending.
    pub argmin: Vec<usize>,
    pub min_distance: T,
    /// Second-smallest distance minus the smallest.
    pub margin: T,
}

impl<T: Real> TerritoryLabel<T> {
    pub fn is_tie(&self) -> bool {
        self.argmin.len() >= 2
    }

    pub fn contains(&self, i: usize) -> bool {
        self.argmin.contains(&i)
    }
}

/// Labels `x` by its nearest sites.
pub fn label<T: Real, F: DistanceField<T> + ?Sized>(field: &F, x: &Vec3<T>, tie_tol: T) -> TerritoryLabel<T> {
    let d = field.distances(x);
    label_from_distances(&d, tie_tol)
}

pub(crate) fn label_from_distances<T: Real>(d: &[T], tie_tol: T) -> TerritoryLabel<T> {
    let order = crate::scene::order_by_distance(d);
    let min = d[order[0]];
    let mut argmin: Vec<usize> = (0..d.len()).filter(|&i| d[i] <= min + tie_tol).collect();
    argmin.sort_unstable();
    let margin = if order.len() > 1 { d[order[1]] - min } else { T::infinity() };
    TerritoryLabel { argmin, min_distance: min, margin }
}

/// Grid-vertex label: exact nearest site (lowest index on exact ties) plus a
/// flag for ties within the tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct VertexLabel {
    pub site: u32,
    pub tie: bool,
}

pub(crate) fn vertex_label<T: Real, F: DistanceField<T> + ?Sized>(field: &F, x: &Vec3<T>, tie_tol: T) -> VertexLabel {
    let mut best = T::infinity();
    let mut site = 0usize;
    let d = field.distances(x);
    for (i, &di) in d.iter().enumerate() {
        if di < best {
            best = di;
            site = i;
        }
    }
    let tie = d.iter().enumerate().any(|(i, &di)| i != site && di <= best + tie_tol);
    VertexLabel { site: site as u32, tie }
}

/// Root of `d_i - d_j` on `[a, b]`, assuming `d_i <= d_j` at `a` and
/// `d_i >= d_j` at `b`. Returns the point and its residual.
pub(crate) fn bisect_pair<T: Real, F: DistanceField<T> + ?Sized>(
    field: &F,
    a: Vec3<T>,
    b: Vec3<T>,
    i: usize,
    j: usize,
    tol: T,
    max_iter: usize,
) -> (Vec3<T>, T) {
    let g = |p: &Vec3<T>| field.site_distance(i, p) - field.site_distance(j, p);
    let (ga, gb) = (g(&a), g(&b));
    if ga.abs() <= tol {
        return (a, ga.abs());
    }
    if gb.abs() <= tol {
        return (b, gb.abs());
    }
    let (mut lo, mut hi) = (T::zero(), T::one());
    let half = lit::<T>(0.5);
    for _ in 0..max_iter {
        let mid = (lo + hi) * half;
        let p = a.lerp(&b, mid);
        let gm = g(&p);
        if gm.abs() <= tol {
            return (p, gm.abs());
        }
        if gm < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p = a.lerp(&b, (lo + hi) * half);
    (p, g(&p).abs())
}

/// Locates a point of the bisector of sites `i` and `j` on the segment `[a, b]`.
///
/// Bisection runs until `|d_i - d_j| <= 1e-12` or 100 iterations and returns
/// the midpoint of the final bracket.
pub fn refine_point<T: Real>(scene: &Scene<T>, a: Vec3<T>, b: Vec3<T>, pair: (usize, usize)) -> Result<Vec3<T>, ExtractError> {
    let (i, j) = pair;
    let g = |p: &Vec3<T>| scene.distance(i, p) - scene.distance(j, p);
    let (ga, gb) = (g(&a), g(&b));
    let zero = T::zero();
    if ga * gb > zero || (ga == zero && gb == zero) {
        return Err(ExtractError::NoSignChange { i, j });
    }
    let (neg, pos) = if ga <= zero { (a, b) } else { (b, a) };
    Ok(bisect_pair(scene, neg, pos, i, j, lit(config::REFINE_TOL), config::REFINE_MAX_ITER).0)
}

/// One vertex of a conflict complex.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexVertex<T> {
    pub position: Vec3<T>,
    /// `|d_i - d_j|` for the tagged pair (largest pairwise gap at junctions).
    pub residual: T,
    /// Sites equidistant at this vertex, ascending; at least two.
    pub sites: Vec<usize>,
}

impl<T: Real> ComplexVertex<T> {
    pub fn pair(&self) -> (usize, usize) {
        (self.sites[0], self.sites[1])
    }
}

/// An edge (2D) or triangle (3D) separating the territories of `pair`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub vertices: Vec<usize>,
    pub pair: (usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FlagKind {
    /// Every corner of the grid cell is a tie.
    Ambiguous,
    /// Three or more territories meet and could not be resolved.
    Junction,
}

impl FlagKind {
    pub fn name(&self) -> &'static str {
        match self {
            FlagKind::Ambiguous => "ambiguous",
            FlagKind::Junction => "junction",
        }
    }
}

/// A grid cell (or sub-cell) that extraction flagged.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct FlaggedCell {
    /// Grid index of the cell; sub-cells use the parent's index.
    pub cell: [usize; 3],
    pub kind: FlagKind,
}

/// Extracted approximation of a conflict set.
#[derive(Clone, Debug, PartialEq)]
pub struct ConflictComplex<T> {
    pub dimension: usize,
    pub window: AxisBox<T>,
    /// Cells per axis of the extraction grid (0 for synthetic complexes).
    pub resolution: usize,
    /// Largest grid spacing.
    pub spacing: T,
    pub vertices: Vec<ComplexVertex<T>>,
    pub cells: Vec<Cell>,
    /// Cells sharing a vertex (2D) or an edge (3D).
    pub adjacency: Vec<Vec<usize>>,
    pub flagged: Vec<FlaggedCell>,
    /// Fraction of the window covered by grid cells whose corners all tie.
    pub tie_area_fraction: f64,
    /// Vertices not used by any cell (removed before assembly).
    pub isolated_removed: usize,
}

impl<T: Real> ConflictComplex<T> {
    /// Assembles a complex, dropping unreferenced vertices and computing adjacency.
    pub fn from_parts(
        dimension: usize,
        window: AxisBox<T>,
        resolution: usize,
        spacing: T,
        vertices: Vec<ComplexVertex<T>>,
        cells: Vec<Cell>,
    ) -> Self {
        let mut used = vec![false; vertices.len()];
        for c in &cells {
            for &v in &c.vertices {
                used[v] = true;
            }
        }
        let mut remap = vec![usize::MAX; vertices.len()];
        let mut kept = Vec::with_capacity(vertices.len());
        for (k, v) in vertices.into_iter().enumerate() {
            if used[k] {
                remap[k] = kept.len();
                kept.push(v);
            }
        }
        let isolated_removed = used.iter().filter(|u| !**u).count();
        let cells: Vec<Cell> = cells
            .into_iter()
            .map(|c| Cell { vertices: c.vertices.iter().map(|&v| remap[v]).collect(), pair: c.pair })
            .collect();
        let adjacency = compute_adjacency(dimension, &cells);
        Self {
            dimension,
            window,
            resolution,
            spacing,
            vertices: kept,
            cells,
            adjacency,
            flagged: Vec::new(),
            tie_area_fraction: 0.0,
            isolated_removed,
        }
    }

    pub fn positions(&self) -> Vec<Vec3<T>> {
        self.vertices.iter().map(|v| v.position).collect()
    }

    pub fn max_residual(&self) -> T {
        self.vertices.iter().map(|v| v.residual).fold(T::zero(), T::max)
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Distinct undirected edges of the cells (the 1-skeleton).
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<(usize, usize)> = Vec::new();
        for c in &self.cells {
            let n = c.vertices.len();
            if n == 2 {
                e.push(ordered(c.vertices[0], c.vertices[1]));
            } else {
                for k in 0..n {
                    e.push(ordered(c.vertices[k], c.vertices[(k + 1) % n]));
                }
            }
        }
        e.sort_unstable();
        e.dedup();
        e
    }

    /// Number of flagged cells of the given kind.
    pub fn flag_count(&self, kind: FlagKind) -> usize {
        self.flagged.iter().filter(|f| f.kind == kind).count()
    }
}

fn ordered(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn compute_adjacency(dimension: usize, cells: &[Cell]) -> Vec<Vec<usize>> {
    let mut by_key: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (ci, c) in cells.iter().enumerate() {
        if dimension == 2 {
            for &v in &c.vertices {
                by_key.entry((v, v)).or_default().push(ci);
            }
        } else {
            let n = c.vertices.len();
            for k in 0..n {
                by_key.entry(ordered(c.vertices[k], c.vertices[(k + 1) % n])).or_default().push(ci);
            }
        }
    }
    let mut adj = vec![Vec::new(); cells.len()];
    for group in by_key.values() {
        for &a in group {
            for &b in group {
                if a != b {
                    adj[a].push(b);
                }
            }
        }
    }
    for a in &mut adj {
        a.sort_unstable();
        a.dedup();
    }
    adj
}

/// Regular grid over a window; vertex `(i, j, k)` sits at `min + ext * (i / res)`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Grid<T> {
    pub window: AxisBox<T>,
    pub res: usize,
    pub dim: usize,
}

impl<T: Real> Grid<T> {
    pub fn new(window: AxisBox<T>, res: usize, dim: usize) -> Result<Self, ExtractError> {
        if !window.is_valid(dim) {
            return Err(ExtractError::BadWindow);
        }
        if res < config::MIN_RESOLUTION {
            return Err(ExtractError::BadResolution { min: config::MIN_RESOLUTION, got: res });
        }
        Ok(Self { window, res, dim })
    }

    /// Coordinate along `axis` at fractional lattice index `num / den`.
    #[inline]
    pub fn coord(&self, axis: usize, num: usize, den: usize) -> T {
        let t = T::from_usize(num).unwrap() / T::from_usize(den).unwrap();
        self.window.min[axis] + self.window.extent(axis) * t
    }

    pub fn point(&self, idx: [usize; 3], den: usize) -> Vec3<T> {
        let mut p = self.window.min;
        for a in 0..self.dim {
            p.set(a, self.coord(a, idx[a], den));
        }
        p
    }

    pub fn spacing(&self) -> T {
        (0..self.dim)
            .map(|a| self.window.extent(a) / T::from_usize(self.res).unwrap())
            .fold(T::zero(), T::max)
    }
}

/// Checks that `x` is globally nearest to both `i` and `j`.
pub(crate) fn globally_minimal<T: Real, F: DistanceField<T> + ?Sized>(field: &F, x: &Vec3<T>, i: usize, j: usize) -> bool {
    let l = label(field, x, lit(config::MEMBERSHIP_TOL));
    l.contains(i) && l.contains(j)
}

/// Bit pattern of a position, used for exact deduplication.
pub(crate) fn position_key<T: Real>(p: &Vec3<T>) -> [u64; 3] {
    // Normalize -0.0 so that symmetric roots merge.
    let b = |x: T| {
        let f = to_f64(x);
        if f == 0.0 {
            0u64
        } else {
            f.to_bits()
        }
    };
    [b(p.x), b(p.y), b(p.z)]
}

/// Keeps a scene's metric in mind when choosing how to interpret ties.
pub(crate) fn is_euclidean<T: Real>(scene: &Scene<T>) -> bool {
    scene.metric() == Metric::Euclidean
}
