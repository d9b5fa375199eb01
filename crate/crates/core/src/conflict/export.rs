//! CSV (2D), OBJ (3D) and JSON sidecar output for conflict complexes.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{ConflictComplex, FlaggedCell};
use crate::scalar::{to_f64, Real};

/// Polyline CSV: `vx,vy,residual,pair_i,pair_j,polyline_id`, vertices listed
/// in order along each polyline. Polylines break at vertices whose degree is
/// not two, so junction and end vertices are repeated once per polyline.
pub fn complex_to_csv<T: Real>(complex: &ConflictComplex<T>) -> String {
    let mut out = String::from("vx,vy,residual,pair_i,pair_j,polyline_id\n");
    for (id, (pair, path)) in polylines(complex).into_iter().enumerate() {
        for v in path {
            let vx = &complex.vertices[v];
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                to_f64(vx.position.x),
                to_f64(vx.position.y),
                to_f64(vx.residual),
                pair.0,
                pair.1,
                id
            );
        }
    }
    out
}

/// Splits the edge cells of a planar complex into maximal polylines.
pub(crate) fn polylines<T: Real>(complex: &ConflictComplex<T>) -> Vec<((usize, usize), Vec<usize>)> {
    let nv = complex.vertices.len();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for (ci, c) in complex.cells.iter().enumerate() {
        if c.vertices.len() == 2 {
            incident[c.vertices[0]].push(ci);
            incident[c.vertices[1]].push(ci);
        }
    }
    let mut used = vec![false; complex.cells.len()];
    let mut lines = Vec::new();
    let other = |ci: usize, v: usize| {
        let c = &complex.cells[ci].vertices;
        if c[0] == v {
            c[1]
        } else {
            c[0]
        }
    };
    let walk = |start: usize, first: usize, used: &mut Vec<bool>| {
        let pair = complex.cells[first].pair;
        let mut path = vec![start];
        let (mut v, mut ci) = (start, first);
        loop {
            used[ci] = true;
            v = other(ci, v);
            path.push(v);
            if incident[v].len() != 2 {
                break;
            }
            match incident[v].iter().copied().find(|&c| !used[c]) {
                Some(next) => ci = next,
                None => break,
            }
        }
        (pair, path)
    };
    // Open chains and branches first, then closed loops.
    for v in 0..nv {
        if incident[v].len() != 2 {
            for k in 0..incident[v].len() {
                let ci = incident[v][k];
                if !used[ci] {
                    lines.push(walk(v, ci, &mut used));
                }
            }
        }
    }
    for v in 0..nv {
        for k in 0..incident[v].len() {
            let ci = incident[v][k];
            if !used[ci] {
                lines.push(walk(v, ci, &mut used));
            }
        }
    }
    lines
}

/// Wavefront OBJ with one group `pair_i_j` per site pair.
pub fn complex_to_obj<T: Real>(complex: &ConflictComplex<T>) -> String {
    let mut out = String::new();
    for v in &complex.vertices {
        let p = v.position;
        let _ = writeln!(out, "v {} {} {}", to_f64(p.x), to_f64(p.y), to_f64(p.z));
    }
    let mut groups: BTreeMap<(usize, usize), Vec<&[usize]>> = BTreeMap::new();
    for c in &complex.cells {
        groups.entry(c.pair).or_default().push(&c.vertices);
    }
    for ((i, j), faces) in groups {
        let _ = writeln!(out, "g pair_{i}_{j}");
        for f in faces {
            let idx: Vec<String> = f.iter().map(|v| (v + 1).to_string()).collect();
            let kind = if f.len() == 2 { "l" } else { "f" };
            let _ = writeln!(out, "{kind} {}", idx.join(" "));
        }
    }
    out
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SidecarFlag {
    pub cell: [usize; 3],
    pub kind: String,
}

/// Metadata written next to an exported mesh.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ComplexSidecar {
    pub dimension: usize,
    pub resolution: usize,
    pub window_min: Vec<f64>,
    pub window_max: Vec<f64>,
    pub spacing: f64,
    pub vertex_count: usize,
    pub cell_count: usize,
    pub max_residual: f64,
    pub residuals: Vec<f64>,
    pub flags: Vec<SidecarFlag>,
    pub tie_area_fraction: f64,
    pub isolated_removed: usize,
}

impl ComplexSidecar {
    pub fn from_complex<T: Real>(c: &ConflictComplex<T>) -> Self {
        let mut flags: Vec<&FlaggedCell> = c.flagged.iter().collect();
        flags.sort();
        Self {
            dimension: c.dimension,
            resolution: c.resolution,
            window_min: c.window.min.to_f64_vec(c.dimension),
            window_max: c.window.max.to_f64_vec(c.dimension),
            spacing: to_f64(c.spacing),
            vertex_count: c.vertices.len(),
            cell_count: c.cells.len(),
            max_residual: to_f64(c.max_residual()),
            residuals: c.vertices.iter().map(|v| to_f64(v.residual)).collect(),
            flags: flags.into_iter().map(|f| SidecarFlag { cell: f.cell, kind: f.kind.name().to_string() }).collect(),
            tie_area_fraction: c.tie_area_fraction,
            isolated_removed: c.isolated_removed,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sidecar serializes")
    }
}
