//! Scene-file JSON format.
//!
//! ```json
//! {
//!   "dimension": 3,
//!   "metric": "euclidean",
//!   "sites": [
//!     {"id": "points", "primitives": [{"type": "point_set", "points": [[1,0,0],[-1,0,0]]}]},
//!     {"id": "planes", "primitives": [
//!       {"type": "hyperplane", "normal": [0,0,1], "offset": 1},
//!       {"type": "hyperplane", "normal": [0,0,-1], "offset": 1}
//!     ]}
//!   ]
//! }
//! ```

use serde::{Deserialize, Serialize};

use super::{Metric, Primitive, Scene, SceneError, Site};
use crate::geom::Vec3;
use crate::scalar::{lit, to_f64, Real};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub dimension: usize,
    #[serde(default = "default_metric")]
    pub metric: String,
    pub sites: Vec<SiteSpec>,
}

fn default_metric() -> String {
    "euclidean".to_string()
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SiteSpec {
    pub id: String,
    pub primitives: Vec<PrimitiveSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PrimitiveSpec {
    Point { coords: Vec<f64> },
    PointSet { points: Vec<Vec<f64>> },
    Hyperplane { normal: Vec<f64>, offset: f64 },
    Sphere { center: Vec<f64>, radius: f64 },
    Ball { center: Vec<f64>, radius: f64 },
    Segment { a: Vec<f64>, b: Vec<f64> },
    Box { min: Vec<f64>, max: Vec<f64> },
}

/// Parses and validates a scene file.
pub fn parse_scene<T: Real>(text: &str) -> Result<Scene<T>, SceneError> {
    let file: SceneFile = serde_json::from_str(text).map_err(|e| SceneError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    file.into_scene()
}

impl SceneFile {
    pub fn into_scene<T: Real>(self) -> Result<Scene<T>, SceneError> {
        let dim = self.dimension;
        if dim != 2 && dim != 3 {
            return Err(SceneError::BadDimension(dim));
        }
        let metric = match self.metric.as_str() {
            "euclidean" => Metric::Euclidean,
            "taxicab" => Metric::Taxicab,
            other => {
                return Err(SceneError::Syntax {
                    line: 0,
                    column: 0,
                    message: format!("unknown metric `{other}` (expected euclidean or taxicab)"),
                })
            }
        };
        let sites = self
            .sites
            .into_iter()
            .map(|s| {
                let coords = |c: &[f64]| -> Result<Vec3<T>, SceneError> {
                    if c.len() != dim {
                        return Err(SceneError::DimensionMismatch { site: s.id.clone(), expected: dim, got: c.len() });
                    }
                    Ok(Vec3::from_f64_slice(c).expect("length checked"))
                };
                let primitives = s
                    .primitives
                    .iter()
                    .map(|p| {
                        Ok(match p {
                            PrimitiveSpec::Point { coords: c } => Primitive::Point(coords(c)?),
                            PrimitiveSpec::PointSet { points } => {
                                Primitive::PointSet(points.iter().map(|c| coords(c)).collect::<Result<_, _>>()?)
                            }
                            PrimitiveSpec::Hyperplane { normal, offset } => {
                                Primitive::Hyperplane { normal: coords(normal)?, offset: lit(*offset) }
                            }
                            PrimitiveSpec::Sphere { center, radius } => {
                                Primitive::Sphere { center: coords(center)?, radius: lit(*radius) }
                            }
                            PrimitiveSpec::Ball { center, radius } => {
                                Primitive::Ball { center: coords(center)?, radius: lit(*radius) }
                            }
                            PrimitiveSpec::Segment { a, b } => Primitive::Segment { a: coords(a)?, b: coords(b)? },
                            PrimitiveSpec::Box { min, max } => Primitive::Box { min: coords(min)?, max: coords(max)? },
                        })
                    })
                    .collect::<Result<Vec<_>, SceneError>>()?;
                Ok(Site::new(s.id.clone(), primitives))
            })
            .collect::<Result<Vec<_>, SceneError>>()?;
        Scene::new(dim, metric, sites)
    }

    pub fn from_scene<T: Real>(scene: &Scene<T>) -> Self {
        let dim = scene.dimension();
        let c = |v: &Vec3<T>| v.to_f64_vec(dim);
        let sites = scene
            .sites()
            .iter()
            .map(|s| SiteSpec {
                id: s.id.clone(),
                primitives: s
                    .primitives
                    .iter()
                    .map(|p| match p {
                        Primitive::Point(q) => PrimitiveSpec::Point { coords: c(q) },
                        Primitive::PointSet(qs) => PrimitiveSpec::PointSet { points: qs.iter().map(c).collect() },
                        Primitive::Hyperplane { normal, offset } => {
                            PrimitiveSpec::Hyperplane { normal: c(normal), offset: to_f64(*offset) }
                        }
                        Primitive::Sphere { center, radius } => {
                            PrimitiveSpec::Sphere { center: c(center), radius: to_f64(*radius) }
                        }
                        Primitive::Ball { center, radius } => {
                            PrimitiveSpec::Ball { center: c(center), radius: to_f64(*radius) }
                        }
                        Primitive::Segment { a, b } => PrimitiveSpec::Segment { a: c(a), b: c(b) },
                        Primitive::Box { min, max } => PrimitiveSpec::Box { min: c(min), max: c(max) },
                    })
                    .collect(),
            })
            .collect();
        SceneFile { dimension: dim, metric: scene.metric().name().to_string(), sites }
    }
}

/// Pretty-printed scene file.
pub fn scene_to_json<T: Real>(scene: &Scene<T>) -> String {
    serde_json::to_string_pretty(&SceneFile::from_scene(scene)).expect("scene serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_SHEETS: &str = r#"{
        "dimension": 3, "metric": "euclidean",
        "sites": [
          {"id": "X2", "primitives": [{"type": "point", "coords": [1,0,0]}, {"type": "point", "coords": [-1,0,0]}]},
          {"id": "X1", "primitives": [
             {"type": "hyperplane", "normal": [0,0,1], "offset": 1},
             {"type": "hyperplane", "normal": [0,0,-1], "offset": 1}]}
        ]}"#;

    #[test]
    fn parses_planes_and_points() {
        let s: Scene<f64> = parse_scene(TWO_SHEETS).unwrap();
        assert_eq!(s.dimension(), 3);
        assert_eq!(s.len(), 2);
        assert_eq!(s.sites()[1].id, "X1");
        assert_eq!(s.distance(1, &Vec3::zero()), 1.0);
        assert_eq!(s.distance(0, &Vec3::zero()), 1.0);
    }

    #[test]
    fn parses_two_points_2d() {
        let text = r#"{"dimension": 2, "sites": [
            {"id": "a", "primitives": [{"type": "point", "coords": [1, 0]}]},
            {"id": "b", "primitives": [{"type": "point", "coords": [-1, 0]}]}]}"#;
        let s: Scene<f64> = parse_scene(text).unwrap();
        assert_eq!((s.dimension(), s.len(), s.metric()), (2, 2, Metric::Euclidean));
    }

    #[test]
    fn shared_point_is_not_disjoint() {
        let text = r#"{"dimension": 2, "sites": [
            {"id": "a", "primitives": [{"type": "point_set", "points": [[0, 0], [3, 3]]}]},
            {"id": "b", "primitives": [{"type": "point", "coords": [0, 0]}]}]}"#;
        assert!(matches!(parse_scene::<f64>(text), Err(SceneError::NotDisjoint { .. })));
    }

    #[test]
    fn syntax_errors_report_position() {
        let text = "{\n  \"dimension\": 2,\n  \"sites\": [,]\n}";
        match parse_scene::<f64>(text) {
            Err(SceneError::Syntax { line, column, .. }) => {
                assert_eq!(line, 3);
                assert!(column > 0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn coordinate_count_must_match_dimension() {
        let text = r#"{"dimension": 2, "sites": [
            {"id": "a", "primitives": [{"type": "point", "coords": [1, 0, 0]}]},
            {"id": "b", "primitives": [{"type": "point", "coords": [-1, 0]}]}]}"#;
        assert_eq!(
            parse_scene::<f64>(text).unwrap_err(),
            SceneError::DimensionMismatch { site: "a".into(), expected: 2, got: 3 }
        );
    }

    #[test]
    fn round_trips_through_json() {
        let s: Scene<f64> = parse_scene(TWO_SHEETS).unwrap();
        let again: Scene<f64> = parse_scene(&scene_to_json(&s)).unwrap();
        assert_eq!(s, again);
    }
}
