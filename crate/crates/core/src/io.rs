//! File formats: CSV point clouds and distance matrices, JSON covers and map
//! specifications, diagram CSV/SVG.

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::measure::FiniteMeasure;
use crate::metric::{Cover, FiniteMetricSpace, MetricError, PointSet};
use crate::persistence::PersistenceDiagram;
use crate::straighten::{PiecewiseLinearMap, StraightenError};

#[derive(Debug, Error)]
pub enum InputError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}, column {column}: {value:?} is not a number")]
    NotANumber { line: usize, column: usize, value: String },
    #[error("input contains no data rows")]
    Empty,
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("map specification must give exactly one of \"points\" and \"matrix\"")]
    AmbiguousSpace,
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Straighten(#[from] StraightenError),
}

pub fn read_to_string(path: &Path) -> Result<String, InputError> {
    std::fs::read_to_string(path).map_err(|source| InputError::Io { path: path.display().to_string(), source })
}

/// Parses numeric CSV rows. A first row that does not parse is treated as a
/// header and skipped.
pub fn parse_numeric_csv(text: &str) -> Result<Vec<Vec<f64>>, InputError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: Result<Vec<f64>, usize> =
            record.iter().enumerate().map(|(c, v)| v.parse::<f64>().map_err(|_| c)).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if i == 0 => continue,
            Err(c) => {
                return Err(InputError::NotANumber {
                    line: record.position().map_or(i + 1, |p| p.line() as usize),
                    column: c + 1,
                    value: record[c].to_string(),
                })
            }
        }
    }
    if rows.is_empty() {
        return Err(InputError::Empty);
    }
    Ok(rows)
}

/// Point cloud, Euclidean metric.
pub fn space_from_points_csv(text: &str) -> Result<FiniteMetricSpace, InputError> {
    Ok(FiniteMetricSpace::from_points(&parse_numeric_csv(text)?)?)
}

/// Full distance matrix.
pub fn space_from_matrix_csv(text: &str) -> Result<FiniteMetricSpace, InputError> {
    Ok(FiniteMetricSpace::from_matrix(&parse_numeric_csv(text)?)?)
}

/// Explicit cover: a JSON list of index arrays.
pub fn cover_from_json(space: &FiniteMetricSpace, text: &str) -> Result<Cover, InputError> {
    let sets: Vec<Vec<usize>> = serde_json::from_str(text)?;
    Ok(Cover::explicit(space, sets.into_iter().map(PointSet::new).collect())?)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoverSpec {
    Ball(f64),
    Diameter(f64),
    Explicit(Vec<Vec<usize>>),
}

/// A piecewise-linear source map with its space and cover.
///
/// ```json
/// {"points": [[0],[1],[2]], "cover": {"ball": 1.5}, "dim": 1, "resolution": 2,
///  "values": [{"support":[0],"weights":[1]}, ...]}
/// ```
/// `values` lists `(resolution + 1)^dim` measures in lexicographic lattice order.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    #[serde(default)]
    pub points: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub matrix: Option<Vec<Vec<f64>>>,
    pub cover: CoverSpec,
    pub dim: usize,
    pub resolution: usize,
    pub values: Vec<FiniteMeasure>,
    #[serde(default)]
    pub p_mass: Option<f64>,
}

impl MapSpec {
    pub fn parse(text: &str) -> Result<Self, InputError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn build(self) -> Result<(FiniteMetricSpace, Cover, PiecewiseLinearMap), InputError> {
        let space = match (&self.points, &self.matrix) {
            (Some(p), None) => FiniteMetricSpace::from_points(p)?,
            (None, Some(m)) => FiniteMetricSpace::from_matrix(m)?,
            _ => return Err(InputError::AmbiguousSpace),
        };
        let cover = match self.cover {
            CoverSpec::Ball(r) => Cover::ball(&space, r)?,
            CoverSpec::Diameter(r) => Cover::diameter(&space, r)?,
            CoverSpec::Explicit(sets) => Cover::explicit(&space, sets.into_iter().map(PointSet::new).collect())?,
        };
        let map = PiecewiseLinearMap::new(self.dim, self.resolution, self.values)?;
        map.check_in(&space)?;
        Ok((space, cover, map))
    }
}

/// Static SVG scatter plot of a diagram. Essential classes sit on a dashed
/// line above the finite range.
pub fn diagram_svg(diagram: &PersistenceDiagram) -> String {
    const SIZE: f64 = 420.0;
    const MARGIN: f64 = 48.0;
    const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
    let finite_max =
        diagram.intervals().iter().flat_map(|i| [i.birth, i.death]).filter(|v| v.is_finite()).fold(0.0f64, f64::max);
    let top = if finite_max > 0.0 { finite_max * 1.1 } else { 1.0 };
    let inf_level = top * 1.05;
    let span = SIZE - 2.0 * MARGIN;
    let sx = |v: f64| MARGIN + v / inf_level * span;
    let sy = |v: f64| SIZE - MARGIN - v / inf_level * span;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(out, r#"<rect width="{SIZE}" height="{SIZE}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black"/>"#,
        sx(0.0),
        sy(0.0),
        sx(0.0),
        sy(inf_level)
    );
    let _ = writeln!(
        out,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black"/>"#,
        sx(0.0),
        sy(0.0),
        sx(inf_level),
        sy(0.0)
    );
    let _ = writeln!(
        out,
        r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#888"/>"##,
        sx(0.0),
        sy(0.0),
        sx(top),
        sy(top)
    );
    let _ = writeln!(
        out,
        r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#888" stroke-dasharray="4 3"/>"##,
        sx(0.0),
        sy(inf_level),
        sx(inf_level),
        sy(inf_level)
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="end">inf</text>"#,
        sx(0.0) - 4.0,
        sy(inf_level) + 4.0
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">birth (max {:.4})</text>"#,
        SIZE / 2.0,
        SIZE - 12.0,
        top
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{:.2}" font-size="12" text-anchor="middle" transform="rotate(-90 14 {:.2})">death</text>"#,
        SIZE / 2.0,
        SIZE / 2.0
    );
    for i in diagram.intervals() {
        let y = if i.is_essential() { inf_level } else { i.death };
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{}" fill-opacity="0.7"><title>H{} ({}, {})</title></circle>"#,
            sx(i.birth),
            sy(y),
            COLORS[i.dim % COLORS.len()],
            i.dim,
            i.birth,
            if i.is_essential() { "inf".to_string() } else { i.death.to_string() }
        );
    }
    let dims = diagram.max_dim().map_or(0, |d| d + 1);
    for d in 0..dims {
        let y = MARGIN + 14.0 * d as f64;
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{}"/><text x="{:.2}" y="{:.2}" font-size="12">H{d}</text>"#,
            SIZE - MARGIN - 30.0,
            y,
            COLORS[d % COLORS.len()],
            SIZE - MARGIN - 22.0,
            y + 4.0
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::persistence::Interval;

    #[test]
    fn csv_with_header_and_blank_lines() {
        let rows = parse_numeric_csv("x,y\n0,0\n\n1, 0\n").unwrap();
        assert_eq!(rows, vec![vec![0.0, 0.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn empty_and_bad_csv() {
        assert!(matches!(parse_numeric_csv(""), Err(InputError::Empty)));
        assert!(matches!(parse_numeric_csv("1,2\n3,x\n"), Err(InputError::NotANumber { column: 2, .. })));
    }

    #[test]
    fn matrix_validation_passes_through() {
        let err = space_from_matrix_csv("0,1,3\n1,0,1\n3,1,0\n").unwrap_err();
        assert!(matches!(err, InputError::Metric(MetricError::TriangleViolation(0, 2, 1))));
    }

    #[test]
    fn map_spec_round_trip() {
        let text = r#"{"points": [[0],[1],[2]], "cover": {"ball": 1.5}, "dim": 1, "resolution": 1,
            "values": [{"support":[0],"weights":[1]}, {"support":[1],"weights":[1]}]}"#;
        let (space, cover, map) = MapSpec::parse(text).unwrap().build().unwrap();
        assert_eq!(space.len(), 3);
        assert_eq!(cover.bound(), 3.0);
        assert_eq!(map.values().len(), 2);
        let bad = text.replace("\"support\":[1]", "\"support\":[7]");
        assert!(MapSpec::parse(&bad).unwrap().build().is_err());
    }

    #[test]
    fn svg_is_well_formed() {
        let d = PersistenceDiagram::new(vec![
            Interval { dim: 0, birth: 0.0, death: f64::INFINITY },
            Interval { dim: 1, birth: 1.0, death: 1.5 },
        ]);
        let svg = diagram_svg(&d);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<circle").count(), 4);
    }
}
