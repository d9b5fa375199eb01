//! Link components and dimension diagnostics.

use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::conflict::ConflictComplex;
use crate::geom::Vec3;
use crate::scalar::{lit, to_f64, Real};
use crate::spherical::SphericalComplex;
use crate::tangent::sphere_slice;

/// Number of connected components of `complex ∩ S(x0, eps)`.
pub fn link_components<T: Real>(complex: &ConflictComplex<T>, x0: &Vec3<T>, eps: T) -> Result<usize, MetricsError> {
    let slice = sphere_slice(complex, x0, eps)?;
    if slice.is_empty() {
        return Err(MetricsError::EmptySlice(to_f64(eps)));
    }
    Ok(slice.component_count())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub dimension: usize,
    pub cells: usize,
    /// Cells without exactly `n` vertices.
    pub wrong_arity: usize,
    /// Cells of zero length or area.
    pub degenerate: usize,
    pub isolated_vertices: usize,
    pub tie_area_fraction: f64,
    pub warning: Option<String>,
    pub verdict: String,
}

/// Structural check that the complex is made of `(n-1)`-cells and that no
/// grid cell lies entirely in a tie region.
pub fn dimension_check<T: Real>(complex: &ConflictComplex<T>) -> DimensionReport {
    let n = complex.dimension;
    let floor = complex.spacing * lit(1e-9);
    let mut used = vec![false; complex.vertices.len()];
    let (mut wrong_arity, mut degenerate) = (0, 0);
    for c in &complex.cells {
        for &v in &c.vertices {
            used[v] = true;
        }
        if c.vertices.len() != n {
            wrong_arity += 1;
            continue;
        }
        let p: Vec<Vec3<T>> = c.vertices.iter().map(|&v| complex.vertices[v].position).collect();
        let size = if n == 2 { p[0].dist(&p[1]) } else { (p[1] - p[0]).cross(&(p[2] - p[0])).norm().sqrt() };
        if !(size > floor) {
            degenerate += 1;
        }
    }
    let isolated_vertices = used.iter().filter(|u| !**u).count();
    let warning = complex.is_empty().then(|| "no conflict cells in the window".to_string());
    let pass = wrong_arity == 0 && degenerate == 0 && isolated_vertices == 0 && complex.tie_area_fraction == 0.0;
    DimensionReport {
        dimension: n,
        cells: complex.cells.len(),
        wrong_arity,
        degenerate,
        isolated_vertices,
        tie_area_fraction: complex.tie_area_fraction,
        warning,
        verdict: if pass { "PASS" } else { "FAIL" }.to_string(),
    }
}

/// Whether a spherical conflict set on `S^2` consists of arcs only (and of
/// isolated directions on `S^1`).
pub fn spherical_cells_are_curves<T: Real>(spherical: &SphericalComplex<T>) -> bool {
    let arity = spherical.dimension - 1;
    spherical.cells.iter().all(|c| {
        c.vertices.len() == arity
            && (arity == 1 || spherical.vertices[c.vertices[0]].position.dist(&spherical.vertices[c.vertices[1]].position) > T::zero())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conflict::{extract_conflict_2d, extract_conflict_3d};
    use crate::geom::AxisBox;
    use crate::scenes;
    use crate::spherical::{spherical_conflict, support_sets};

    #[test]
    fn two_sheet_link_splits() {
        let s = scenes::two_sheet_example::<f64>();
        let w = AxisBox::new(Vec3::new(-0.5, -0.5, -0.5), Vec3::new(0.5, 0.5, 0.5));
        let c = extract_conflict_3d(&s, w, 96).unwrap();
        assert_eq!(link_components(&c, &Vec3::zero(), 0.2).unwrap(), 2);
    }

    #[test]
    fn transversal_planes_link_is_connected() {
        let c = scenes::transversal_planes_complex::<f64>(0.5, 48);
        assert_eq!(link_components(&c, &Vec3::zero(), 0.2).unwrap(), 1);
    }

    #[test]
    fn plane_link_is_connected_and_empty_slice_errors() {
        let s = scenes::two_points_3d::<f64>();
        let w = AxisBox::new(Vec3::new(-1.0, -1.0, -1.0), Vec3::new(1.0, 1.0, 1.0));
        let c = extract_conflict_3d(&s, w, 24).unwrap();
        assert_eq!(link_components(&c, &Vec3::zero(), 0.5).unwrap(), 1);
        assert!(matches!(link_components(&c, &Vec3::new(0.5, 0.0, 0.0), 0.3), Err(MetricsError::EmptySlice(_))));
    }

    #[test]
    fn euclidean_passes_taxicab_fails() {
        let s = scenes::equilateral_three_points::<f64>();
        let w = AxisBox::new(Vec3::new(-2.0, -2.0, 0.0), Vec3::new(2.0, 2.0, 0.0));
        assert_eq!(dimension_check(&extract_conflict_2d(&s, w, 64).unwrap()).verdict, "PASS");
        let t = scenes::taxicab_pair::<f64>();
        let r = dimension_check(&extract_conflict_2d(&t, w, 64).unwrap());
        assert_eq!(r.verdict, "FAIL");
        assert!(r.tie_area_fraction > 0.0);
    }

    #[test]
    fn empty_window_passes_with_warning() {
        let s = scenes::two_points_2d::<f64>();
        let w = AxisBox::new(Vec3::new(0.5, -1.0, 0.0), Vec3::new(2.0, 1.0, 0.0));
        let r = dimension_check(&extract_conflict_2d(&s, w, 16).unwrap());
        assert_eq!(r.verdict, "PASS");
        assert!(r.warning.is_some());
    }

    #[test]
    fn two_sheet_sphere_set_is_curves() {
        let s = scenes::two_sheet_example::<f64>();
        let sup = support_sets(&s, &Vec3::zero()).unwrap();
        let sc = spherical_conflict(&sup, 3).unwrap();
        assert!(!sc.is_empty());
        assert!(spherical_cells_are_curves(&sc));
    }
}
