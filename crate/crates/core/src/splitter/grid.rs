//! Separation lines and the grid lattice they cut out.

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::Axis;
use serde::{Deserialize, Serialize};

/// A separation line sampled once per feature row (column lines) or per
/// feature column (row lines), in feature-map coordinates.
///
/// Row lines hold `(x, y(x))` with increasing `x`; column lines hold
/// `(x(y), y)` with increasing `y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Line {
    axis: Axis,
    points: Vec<Point>,
}

impl Line {
    pub fn new(axis: Axis, points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Degenerate(format!("{axis} line without points")));
        }
        if points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
            return Err(Error::NonFinite(format!("{axis} line point")));
        }
        let line = Self { axis, points };
        if line.params().windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Validation(format!(
                "{axis} line samples must strictly increase along the line"
            )));
        }
        Ok(line)
    }

    /// Straight line at `offset` sampled at `0..len`.
    pub fn straight(axis: Axis, offset: f64, len: usize) -> Self {
        let points = (0..len)
            .map(|t| match axis {
                Axis::Row => (t as f64, offset),
                Axis::Col => (offset, t as f64),
            })
            .collect();
        Self { axis, points }
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    fn split(&self, p: Point) -> (f64, f64) {
        match self.axis {
            Axis::Row => (p.0, p.1),
            Axis::Col => (p.1, p.0),
        }
    }

    fn params(&self) -> Vec<f64> {
        self.points.iter().map(|&p| self.split(p).0).collect()
    }

    /// Mean offset: mean y of a row line, mean x of a column line.
    pub fn mean(&self) -> f64 {
        self.points.iter().map(|&p| self.split(p).1).sum::<f64>() / self.points.len() as f64
    }

    fn median(&self) -> f64 {
        let mut v: Vec<f64> = self.points.iter().map(|&p| self.split(p).1).collect();
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    }

    /// Offset at parameter `t` (x for row lines, y for column lines), linearly
    /// interpolated and held constant past either end.
    pub fn at(&self, t: f64) -> f64 {
        let first = self.split(self.points[0]);
        if t <= first.0 {
            return first.1;
        }
        for w in self.points.windows(2) {
            let (a, b) = (self.split(w[0]), self.split(w[1]));
            if t <= b.0 {
                let u = (t - a.0) / (b.0 - a.0);
                return a.1 + u * (b.1 - a.1);
            }
        }
        self.split(*self.points.last().unwrap()).1
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            axis: self.axis,
            points: self.points.iter().map(|&(x, y)| (x * s, y * s)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridStructure {
    pub row_lines: Vec<Line>,
    pub col_lines: Vec<Line>,
    /// `M×N` boxes `[x0, y0, x1, y1]`, row-major, in feature-map coordinates.
    pub boxes: Vec<[f64; 4]>,
    pub m: usize,
    pub n: usize,
}

impl GridStructure {
    pub fn shape(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn box_at(&self, i: usize, j: usize) -> [f64; 4] {
        self.boxes[i * self.n + j]
    }

    /// Lines and boxes multiplied by `s`, e.g. the feature stride.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            row_lines: self.row_lines.iter().map(|l| l.scaled(s)).collect(),
            col_lines: self.col_lines.iter().map(|l| l.scaled(s)).collect(),
            boxes: self.boxes.iter().map(|b| b.map(|v| v * s)).collect(),
            m: self.m,
            n: self.n,
        }
    }
}

pub const INTERSECT_ITERATIONS: usize = 8;
pub const INTERSECT_TOLERANCE: f64 = 0.5;

/// Crossing of a row line and a column line by fixed-point iteration,
/// starting from the column line's median x.
pub fn intersect(row: &Line, col: &Line) -> Point {
    let mut x = col.median();
    let mut y = row.at(x);
    for _ in 0..INTERSECT_ITERATIONS {
        let nx = col.at(y);
        let done = (nx - x).abs() < INTERSECT_TOLERANCE;
        x = nx;
        y = row.at(x);
        if done {
            break;
        }
    }
    (x, y)
}

fn check_order(lines: &[Line], axis: Axis) -> Result<()> {
    for (r, w) in lines.windows(2).enumerate() {
        let crosses = w[0]
            .points
            .iter()
            .map(|&p| w[0].split(p))
            .chain(w[1].points.iter().map(|&p| w[1].split(p)))
            .any(|(t, _)| w[1].at(t) < w[0].at(t));
        if crosses {
            return Err(Error::Topology {
                axis,
                first: r,
                second: r + 1,
            });
        }
    }
    Ok(())
}

/// Builds the grid lattice from at least two lines per axis.
///
/// Lines are sorted by mean offset. Adjacent lines that cross anywhere give
/// [`Error::Topology`]; a grid with no area gives [`Error::Degenerate`].
pub fn lines_to_grid(mut row_lines: Vec<Line>, mut col_lines: Vec<Line>) -> Result<GridStructure> {
    for (lines, axis) in [(&row_lines, Axis::Row), (&col_lines, Axis::Col)] {
        if lines.len() < 2 {
            return Err(Error::Degenerate(format!("{} {axis} lines; a grid needs at least 2", lines.len())));
        }
        if let Some(l) = lines.iter().find(|l| l.axis != axis) {
            return Err(Error::Validation(format!("{} line given as a {axis} line", l.axis)));
        }
    }
    row_lines.sort_by(|a, b| a.mean().total_cmp(&b.mean()));
    col_lines.sort_by(|a, b| a.mean().total_cmp(&b.mean()));
    check_order(&row_lines, Axis::Row)?;
    check_order(&col_lines, Axis::Col)?;

    let (m, n) = (row_lines.len() - 1, col_lines.len() - 1);
    let pts: Vec<Vec<Point>> = row_lines
        .iter()
        .map(|r| col_lines.iter().map(|c| intersect(r, c)).collect())
        .collect();
    let mut boxes = Vec::with_capacity(m * n);
    for i in 0..m {
        for j in 0..n {
            let corners = [pts[i][j], pts[i][j + 1], pts[i + 1][j], pts[i + 1][j + 1]];
            let b = crate::geometry::bounds(&corners);
            if b[2] - b[0] <= 0.0 || b[3] - b[1] <= 0.0 {
                return Err(Error::Degenerate(format!("grid ({i}, {j}) has no area")));
            }
            boxes.push(b);
        }
    }
    Ok(GridStructure {
        row_lines,
        col_lines,
        boxes,
        m,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn straight(axis: Axis, offsets: &[f64], len: usize) -> Vec<Line> {
        offsets.iter().map(|&o| Line::straight(axis, o, len)).collect()
    }

    #[test]
    fn straight_lines() {
        let g = lines_to_grid(
            straight(Axis::Row, &[0.0, 10.0, 20.0], 21),
            straight(Axis::Col, &[0.0, 10.0, 20.0], 21),
        )
        .unwrap();
        assert_eq!(g.shape(), (2, 2));
        assert_eq!(g.box_at(0, 0), [0.0, 0.0, 10.0, 10.0]);
        assert_eq!(g.box_at(1, 1), [10.0, 10.0, 20.0, 20.0]);

        let g = lines_to_grid(straight(Axis::Row, &[5.0, 1.0], 8), straight(Axis::Col, &[7.0, 2.0], 8)).unwrap();
        assert_eq!(g.shape(), (1, 1));
        assert_eq!(g.box_at(0, 0), [2.0, 1.0, 7.0, 5.0]);
    }

    #[test]
    fn curved_boxes_contain_their_corners() {
        let h = 40;
        let rows: Vec<Line> = [0.0, 12.0, 25.0, 39.0]
            .iter()
            .map(|&o| Line::new(Axis::Row, (0..60).map(|x| (x as f64, o + 2.0 * (x as f64 / 10.0).sin())).collect()).unwrap())
            .collect();
        let cols: Vec<Line> = [0.0, 20.0, 41.0, 59.0]
            .iter()
            .map(|&o| Line::new(Axis::Col, (0..h).map(|y| (o + 0.1 * y as f64, y as f64)).collect()).unwrap())
            .collect();
        let g = lines_to_grid(rows.clone(), cols.clone()).unwrap();
        assert_eq!(g.shape(), (3, 3));
        for i in 0..3 {
            for j in 0..3 {
                let b = g.box_at(i, j);
                for (r, c) in [(i, j), (i, j + 1), (i + 1, j), (i + 1, j + 1)] {
                    let (x, y) = intersect(&rows[r], &cols[c]);
                    assert!(b[0] <= x && x <= b[2] && b[1] <= y && y <= b[3]);
                    // the fixed point lies on both lines
                    assert!((rows[r].at(x) - y).abs() < 0.5);
                    assert!((cols[c].at(y) - x).abs() < 0.5);
                }
            }
        }
    }

    #[test]
    fn unsorted_input_is_sorted() {
        let g = lines_to_grid(straight(Axis::Row, &[20.0, 0.0, 10.0], 30), straight(Axis::Col, &[30.0, 0.0], 30)).unwrap();
        assert_eq!(g.row_lines[0].mean(), 0.0);
        assert_eq!(g.box_at(1, 0), [0.0, 10.0, 30.0, 20.0]);
    }

    #[test]
    fn crossing_lines_name_the_pair() {
        let a = Line::new(Axis::Row, (0..10).map(|x| (x as f64, x as f64)).collect()).unwrap();
        let b = Line::straight(Axis::Row, 4.0, 10);
        let c = Line::straight(Axis::Row, 20.0, 10);
        let err = lines_to_grid(vec![a, b, c], straight(Axis::Col, &[0.0, 9.0], 25)).unwrap_err();
        assert!(
            matches!(
                err,
                Error::Topology {
                    axis: Axis::Row,
                    first: 0,
                    second: 1
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn too_few_lines() {
        assert!(lines_to_grid(straight(Axis::Row, &[0.0], 5), straight(Axis::Col, &[0.0, 4.0], 5)).is_err());
    }

    #[test]
    fn interpolation_and_clamping() {
        let l = Line::new(Axis::Col, vec![(2.0, 0.0), (4.0, 2.0)]).unwrap();
        assert_eq!(l.at(-5.0), 2.0);
        assert_eq!(l.at(1.0), 3.0);
        assert_eq!(l.at(9.0), 4.0);
        assert!(Line::new(Axis::Col, vec![(2.0, 1.0), (4.0, 1.0)]).is_err());
    }
}
