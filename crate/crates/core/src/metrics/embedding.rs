//! Inner-versus-outer distance ratios near a point.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{inner_distance, GeodesicGraph, MetricsError};
use crate::config;
use crate::conflict::{extract_conflict_2d, extract_conflict_3d, ConflictComplex};
use crate::geom::{AxisBox, Vec3};
use crate::scalar::{lit, to_f64, Real};
use crate::scene::Scene;
use crate::tangent::sphere_slice;

/// Radius of the probe sphere for the angular scale `theta`: the chord of a
/// unit-circle arc of angle `theta`.
pub fn probe_radius(theta: f64) -> f64 {
    2.0 * (theta / 2.0).sin()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbePair {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub inner: f64,
    pub outer: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub x0: Vec<f64>,
    pub scales: Vec<f64>,
    pub radii: Vec<f64>,
    /// Connected pieces of the slice at each scale (local sheets).
    pub sheets: Vec<usize>,
    /// Pair with the largest inner/outer ratio at each scale.
    pub probes: Vec<ProbePair>,
    pub ratios: Vec<f64>,
    /// `ratios[k + 1] / ratios[k]`.
    pub growth: Vec<f64>,
    /// `diverging` or `embedded`.
    pub verdict: String,
}

fn check_scales(thetas: &[f64]) -> Result<(), MetricsError> {
    let ok = !thetas.is_empty() && thetas.iter().all(|t| *t > 0.0) && thetas.windows(2).all(|w| w[1] < w[0]);
    if ok {
        Ok(())
    } else {
        Err(MetricsError::BadScales)
    }
}

/// Ratio scan on a single complex.
///
/// At each scale the complex is sliced by the probe sphere; candidate pairs
/// are the closest pairs of slice points lying on different slice pieces
/// (or seeded random pairs at least `r / 2` apart when the slice is
/// connected), and the pair with
/// the largest inner/outer ratio is reported.
pub fn embedding_scan<T: Real>(
    complex: &ConflictComplex<T>,
    x0: &Vec3<T>,
    thetas: &[f64],
    seed: u64,
) -> Result<EmbeddingReport, MetricsError> {
    check_scales(thetas)?;
    let graph = GeodesicGraph::new(complex);
    let scans = thetas
        .iter()
        .map(|&t| scan_scale(complex, &graph, x0, t, seed))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(assemble(complex.dimension, x0, thetas, scans))
}

/// Ratio scan that re-extracts the conflict set for every scale in the
/// window `x0 ± 1.5 r` so the grid keeps pace with the shrinking probes.
pub fn embedding_scan_scene<T: Real>(
    scene: &Scene<T>,
    x0: &Vec3<T>,
    thetas: &[f64],
    resolution: usize,
    seed: u64,
) -> Result<EmbeddingReport, MetricsError> {
    check_scales(thetas)?;
    let dim = scene.dimension();
    let mut scans = Vec::with_capacity(thetas.len());
    for &t in thetas {
        let half = lit::<T>(probe_radius(t) * config::EMBEDDING_WINDOW_FACTOR);
        let window = AxisBox::centered(*x0, half, dim);
        let complex = if dim == 2 {
            extract_conflict_2d(scene, window, resolution)?
        } else {
            extract_conflict_3d(scene, window, resolution)?
        };
        let graph = GeodesicGraph::new(&complex);
        scans.push(scan_scale(&complex, &graph, x0, t, seed)?);
    }
    Ok(assemble(dim, x0, thetas, scans))
}

fn assemble<T: Real>(dim: usize, x0: &Vec3<T>, thetas: &[f64], scans: Vec<(ProbePair, usize)>) -> EmbeddingReport {
    let ratios: Vec<f64> = scans.iter().map(|(p, _)| p.ratio).collect();
    let growth: Vec<f64> = ratios.windows(2).map(|w| w[1] / w[0]).collect();
    let diverging = !growth.is_empty() && growth.iter().all(|g| *g >= config::DIVERGENCE_GROWTH);
    EmbeddingReport {
        x0: x0.to_f64_vec(dim),
        scales: thetas.to_vec(),
        radii: thetas.iter().map(|t| probe_radius(*t)).collect(),
        sheets: scans.iter().map(|(_, s)| *s).collect(),
        probes: scans.into_iter().map(|(p, _)| p).collect(),
        ratios,
        growth,
        verdict: if diverging { "diverging" } else { "embedded" }.to_string(),
    }
}

fn scan_scale<T: Real>(
    complex: &ConflictComplex<T>,
    graph: &GeodesicGraph<T>,
    x0: &Vec3<T>,
    theta: f64,
    seed: u64,
) -> Result<(ProbePair, usize), MetricsError> {
    let r = lit::<T>(probe_radius(theta));
    let slice = sphere_slice(complex, x0, r)?;
    if slice.is_empty() {
        return Err(MetricsError::EmptySlice(to_f64(r)));
    }
    let labels = slice.components();
    let mut pieces = labels.clone();
    pieces.sort_unstable();
    pieces.dedup();
    let pts = &slice.points;
    let n = pts.len();

    let mut pairs: Vec<(T, usize, usize)> = Vec::new();
    if pieces.len() >= 2 {
        pairs = (0..n)
            .into_par_iter()
            .filter_map(|i| {
                (0..n)
                    .filter(|&j| labels[j] != labels[i])
                    .map(|j| (pts[i].dist(&pts[j]), j))
                    .min_by(|a, b| a.partial_cmp(b).unwrap())
                    .map(|(d, j)| (d, i.min(j), i.max(j)))
            })
            .collect();
        pairs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pairs.dedup_by(|a, b| a.1 == b.1 && a.2 == b.2);
        pairs.truncate(config::PROBE_PAIRS);
    } else if n >= 2 {
        // Pairs much closer than the scale only measure snapping noise.
        let min_outer = r * lit(0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..config::PROBE_PAIRS * 16 {
            if pairs.len() == config::PROBE_PAIRS {
                break;
            }
            let i = rng.gen_range(0..n);
            let j = (i + rng.gen_range(1..n)) % n;
            let d = pts[i].dist(&pts[j]);
            if d >= min_outer {
                pairs.push((d, i, j));
            }
        }
    }

    let measured = pairs
        .par_iter()
        .filter(|(outer, _, _)| *outer > T::zero())
        .map(|&(outer, i, j)| inner_distance(graph, &pts[i], &pts[j]).map(|inner| (outer, i, j, inner)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut best: Option<ProbePair> = None;
    for (outer, i, j, inner) in measured {
        let ratio = to_f64(inner) / to_f64(outer);
        if best.as_ref().is_none_or(|b| ratio > b.ratio) {
            best = Some(ProbePair {
                p: pts[i].to_f64_vec(complex.dimension),
                q: pts[j].to_f64_vec(complex.dimension),
                inner: to_f64(inner),
                outer: to_f64(outer),
                ratio,
            });
        }
    }
    let best = best.ok_or(MetricsError::EmptySlice(to_f64(r)))?;
    Ok((best, pieces.len()))
}
