//! Branch tangents of planar complexes and the no-cusp check.

use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::config;
use crate::conflict::{extract_conflict_2d, ConflictComplex};
use crate::geom::{AxisBox, Vec3};
use crate::scalar::{lit, to_f64, Real};
use crate::scene::Scene;
use crate::spherical::min_distance_profile;
use crate::tangent::{sphere_slice, TangentError};

/// One branch of a planar complex leaving a point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchCluster {
    /// Mean unit direction at the smallest scale.
    pub direction: [f64; 2],
    /// Slice points in the cluster at each scale.
    pub members: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoCuspReport {
    pub y0: Vec<f64>,
    pub eps: Vec<f64>,
    pub branches: Vec<BranchCluster>,
    /// Angles between every pair of branch directions, in degrees.
    pub angles_deg: Vec<f64>,
    pub min_angle_deg: f64,
    pub threshold_deg: f64,
    /// Whether some branch collects more than one slice point at the smallest
    /// scale (two curves leaving tangentially).
    pub merged: bool,
    pub verdict: String,
}

/// Clusters circular angles (radians) by single linkage; returns groups of
/// indices ordered by their first angle.
fn circular_clusters(angles: &[f64], linkage: f64) -> Vec<Vec<usize>> {
    let n = angles.len();
    if n == 0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| angles[a].total_cmp(&angles[b]));
    let tau = std::f64::consts::TAU;
    // Gap after each sorted position, wrapping around.
    let gaps: Vec<f64> = (0..n)
        .map(|k| {
            let (a, b) = (angles[order[k]], angles[order[(k + 1) % n]]);
            if k + 1 == n { b + tau - a } else { b - a }
        })
        .collect();
    let breaks: Vec<usize> = (0..n).filter(|&k| gaps[k] > linkage).collect();
    if breaks.is_empty() {
        return vec![order];
    }
    // Start right after a break so no cluster wraps around the seam.
    let start = (breaks[0] + 1) % n;
    let mut clusters = Vec::new();
    let mut current = Vec::new();
    for s in 0..n {
        let k = (start + s) % n;
        current.push(order[k]);
        if gaps[k] > linkage {
            clusters.push(std::mem::take(&mut current));
        }
    }
    clusters.sort_by(|a, b| angles[a[0]].total_cmp(&angles[b[0]]));
    clusters
}

fn mean_direction(dirs: &[[f64; 2]], members: &[usize]) -> [f64; 2] {
    let (sx, sy) = members.iter().fold((0.0, 0.0), |(x, y), &m| (x + dirs[m][0], y + dirs[m][1]));
    let n = sx.hypot(sy);
    if n > 0.0 { [sx / n, sy / n] } else { dirs[members[0]] }
}

/// Limiting directions of the branches of a planar complex at `y0`.
///
/// Slice directions at each `eps` are clustered with 10° single linkage;
/// the cluster count must agree at the two smallest scales.
pub fn branch_tangents<T: Real>(complex: &ConflictComplex<T>, y0: &Vec3<T>, eps: &[f64]) -> Result<Vec<BranchCluster>, MetricsError> {
    if complex.dimension != 2 {
        return Err(MetricsError::NotPlanar);
    }
    if eps.is_empty() || eps.iter().any(|e| *e <= 0.0) || eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(MetricsError::BadScales);
    }
    let linkage = config::BRANCH_LINKAGE_DEG.to_radians();
    let mut per_scale = Vec::with_capacity(eps.len());
    for &e in eps {
        let slice = sphere_slice(complex, y0, lit::<T>(e))?;
        if slice.is_empty() {
            return Err(MetricsError::EmptySlice(e));
        }
        let dirs: Vec<[f64; 2]> = slice.directions.iter().map(|d| [to_f64(d.x), to_f64(d.y)]).collect();
        let angles: Vec<f64> = dirs.iter().map(|d| d[1].atan2(d[0])).collect();
        let clusters = circular_clusters(&angles, linkage);
        per_scale.push((dirs, clusters));
    }
    let k = per_scale.len();
    if k >= 2 && per_scale[k - 1].1.len() != per_scale[k - 2].1.len() {
        return Err(MetricsError::UnresolvedBranching {
            first: per_scale[k - 2].1.len(),
            second: per_scale[k - 1].1.len(),
            eps_first: eps[k - 2],
            eps_second: eps[k - 1],
        });
    }
    let (last_dirs, last_clusters) = &per_scale[k - 1];
    let finals: Vec<[f64; 2]> = last_clusters.iter().map(|c| mean_direction(last_dirs, c)).collect();
    // Match each final branch to the nearest cluster at every scale for the member counts.
    let branches = finals
        .iter()
        .map(|f| {
            let members = per_scale
                .iter()
                .map(|(dirs, clusters)| {
                    clusters
                        .iter()
                        .map(|c| {
                            let m = mean_direction(dirs, c);
                            (-(m[0] * f[0] + m[1] * f[1]), c.len())
                        })
                        .min_by(|a, b| a.0.total_cmp(&b.0))
                        .map_or(0, |(_, n)| n)
                })
                .collect();
            BranchCluster { direction: *f, members }
        })
        .collect();
    Ok(branches)
}

/// Checks that the branches of a planar complex leave `y0` in pairwise
/// distinct directions.
pub fn no_cusp_on_complex<T: Real>(complex: &ConflictComplex<T>, y0: &Vec3<T>, eps: &[f64], min_angle_deg: f64) -> Result<NoCuspReport, MetricsError> {
    let branches = branch_tangents(complex, y0, eps)?;
    let mut angles_deg = Vec::new();
    for a in 0..branches.len() {
        for b in a + 1..branches.len() {
            let (u, v) = (branches[a].direction, branches[b].direction);
            let cross = u[0] * v[1] - u[1] * v[0];
            let dot = u[0] * v[0] + u[1] * v[1];
            angles_deg.push(cross.abs().atan2(dot).to_degrees());
        }
    }
    let min_angle = angles_deg.iter().copied().fold(f64::INFINITY, f64::min);
    let merged = branches.iter().any(|b| b.members.last().copied().unwrap_or(0) > 1);
    let pass = branches.len() >= 2 && min_angle >= min_angle_deg && !merged;
    Ok(NoCuspReport {
        y0: y0.to_f64_vec(2),
        eps: eps.to_vec(),
        branches,
        angles_deg,
        min_angle_deg: min_angle,
        threshold_deg: min_angle_deg,
        merged,
        verdict: if pass { "PASS" } else { "FAIL" }.to_string(),
    })
}

/// Extracts the conflict set of a planar Euclidean scene around `y0` and runs
/// [`no_cusp_on_complex`].
pub fn no_cusp_check<T: Real>(
    scene: &Scene<T>,
    y0: &Vec3<T>,
    eps: &[f64],
    min_angle_deg: f64,
    resolution: usize,
) -> Result<NoCuspReport, MetricsError> {
    if scene.dimension() != 2 || !crate::conflict::is_euclidean(scene) {
        return Err(MetricsError::NotPlanar);
    }
    let (_, achieving) = min_distance_profile(scene, y0)?;
    if achieving.len() < 2 {
        return Err(TangentError::NotConflictPoint(achieving).into());
    }
    let eps_max = eps.iter().copied().fold(0.0, f64::max);
    if eps_max <= 0.0 {
        return Err(MetricsError::BadScales);
    }
    let window = AxisBox::centered(*y0, lit::<T>(eps_max * config::TANGENT_WINDOW_FACTOR), 2);
    let complex = extract_conflict_2d(scene, window, resolution)?;
    no_cusp_on_complex(&complex, y0, eps, min_angle_deg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenes;

    #[test]
    fn clusters_wrap_around() {
        let a = [3.1, -3.1, 0.0, 0.05, 1.5];
        let c = circular_clusters(&a, 10f64.to_radians());
        assert_eq!(c.len(), 3);
        assert!(c.iter().any(|g| g.len() == 2 && g.contains(&0) && g.contains(&1)));
    }

    #[test]
    fn bisector_has_two_opposite_branches() {
        let s = scenes::two_points_2d::<f64>();
        let r = no_cusp_check(&s, &Vec3::zero(), &[0.4, 0.2, 0.1], 2.0, 128).unwrap();
        assert_eq!(r.branches.len(), 2);
        assert!((r.angles_deg[0] - 180.0).abs() < 1e-6, "{r:?}");
        assert_eq!(r.verdict, "PASS");
    }

    #[test]
    fn equilateral_triple_point() {
        let s = scenes::equilateral_three_points::<f64>();
        let r = no_cusp_check(&s, &Vec3::zero(), &[0.2, 0.1, 0.05], 2.0, 128).unwrap();
        assert_eq!(r.branches.len(), 3);
        for a in &r.angles_deg {
            assert!((a - 120.0).abs() < 2.0, "{r:?}");
        }
        assert_eq!(r.verdict, "PASS");
    }

    #[test]
    fn tangent_circles_merge_into_two_branches() {
        let c = scenes::tangent_circles_complex::<f64>(4000);
        let b = branch_tangents(&c, &Vec3::zero(), &[0.2, 0.1, 0.05]).unwrap();
        assert_eq!(b.len(), 2);
        for br in &b {
            assert!(br.direction[0].abs() < 0.05 && br.direction[1].abs() > 0.99, "{br:?}");
            assert_eq!(*br.members.last().unwrap(), 2);
        }
        let r = no_cusp_on_complex(&c, &Vec3::zero(), &[0.2, 0.1, 0.05], 2.0).unwrap();
        assert!(r.merged);
        assert_eq!(r.verdict, "FAIL");
    }

    #[test]
    fn off_set_point_is_rejected() {
        let s = scenes::two_points_2d::<f64>();
        let e = no_cusp_check(&s, &Vec3::new(0.5, 0.0, 0.0), &[0.2, 0.1], 2.0, 64).unwrap_err();
        assert!(matches!(e, MetricsError::Tangent(TangentError::NotConflictPoint(_))));
    }
}
