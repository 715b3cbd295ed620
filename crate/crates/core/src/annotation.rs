//! Table annotations: physical quads for cells and text lines plus row/column
//! spans, read from and written to JSON.
//!
//! ```json
//! { "image": {"width": 640, "height": 480},
//!   "cells": [{"quad": [x_lt, y_lt, x_rt, y_rt, x_rb, y_rb, x_lb, y_lb],
//!              "row_start": 0, "row_end": 0, "col_start": 0, "col_end": 1,
//!              "content": "optional"}],
//!   "textlines": [{"quad": [...], "content": "optional", "id": "t0"}],
//!   "row_groups": [[x, y, x, y, ...]],
//!   "col_groups": [[x, y, ...]] }
//! ```
//!
//! Grid indices are 0-based and inclusive. Cells may carry an optional
//! `textline_ids` list; predictions use it to record which text lines were
//! aligned to each cell.

use crate::error::{Error, Result};
use crate::geometry::{self, Point};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};

/// Four vertices listed left-top, right-top, right-bottom, left-bottom.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Quad(pub [f64; 8]);

impl Quad {
    pub fn from_points(p: [Point; 4]) -> Self {
        Quad([p[0].0, p[0].1, p[1].0, p[1].1, p[2].0, p[2].1, p[3].0, p[3].1])
    }

    pub fn from_rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Quad([x0, y0, x1, y0, x1, y1, x0, y1])
    }

    pub fn points(&self) -> [Point; 4] {
        let q = &self.0;
        [(q[0], q[1]), (q[2], q[3]), (q[4], q[5]), (q[6], q[7])]
    }

    /// Shoelace area, positive for the canonical vertex order.
    pub fn signed_area(&self) -> f64 {
        geometry::signed_area(&self.points())
    }

    pub fn bounds(&self) -> [f64; 4] {
        geometry::bounds(&self.points())
    }

    pub fn center(&self) -> Point {
        let p = self.points();
        (p.iter().map(|v| v.0).sum::<f64>() / 4.0, p.iter().map(|v| v.1).sum::<f64>() / 4.0)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Quad(self.0.map(|v| v * s))
    }

    pub fn validate(&self) -> Result<()> {
        if !self.0.iter().all(|v| v.is_finite()) {
            return Err(Error::Validation(format!("quad {:?} has non-finite vertices", self.0)));
        }
        if self.signed_area() <= 0.0 {
            return Err(Error::Validation(format!(
                "quad {:?} is degenerate or not listed lt→rt→rb→lb",
                self.0
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageSize {
    pub width: u32,
    pub height: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellAnn {
    pub quad: Quad,
    pub row_start: usize,
    pub row_end: usize,
    pub col_start: usize,
    pub col_end: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub content: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub textline_ids: Option<Vec<String>>,
}

impl CellAnn {
    pub fn rowspan(&self) -> usize {
        self.row_end - self.row_start + 1
    }

    pub fn colspan(&self) -> usize {
        self.col_end - self.col_start + 1
    }

    pub fn covers(&self, row: usize, col: usize) -> bool {
        (self.row_start..=self.row_end).contains(&row) && (self.col_start..=self.col_end).contains(&col)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TextLine {
    pub quad: Quad,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub content: Option<String>,
    pub id: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableAnnotation {
    pub image: ImageSize,
    pub cells: Vec<CellAnn>,
    pub textlines: Vec<TextLine>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub row_groups: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub col_groups: Option<Vec<Vec<f64>>>,
}

impl TableAnnotation {
    /// Grid size `(M, N)`: one past the largest row and column index.
    pub fn grid_shape(&self) -> Result<(usize, usize)> {
        derive_grid_shape(self)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Validates spans, quads, marker ids and grid-index overlaps.
    pub fn validate(&self) -> Result<()> {
        if self.image.width == 0 || self.image.height == 0 {
            return Err(Error::Validation("image size must be positive".into()));
        }
        for (i, c) in self.cells.iter().enumerate() {
            if c.row_start > c.row_end || c.col_start > c.col_end {
                return Err(Error::Validation(format!(
                    "cell {i} has inverted span rows {}..={} cols {}..={}",
                    c.row_start, c.row_end, c.col_start, c.col_end
                )));
            }
            c.quad.validate().map_err(|e| Error::Validation(format!("cell {i}: {e}")))?;
        }
        let mut ids = BTreeSet::new();
        for (i, t) in self.textlines.iter().enumerate() {
            t.quad.validate().map_err(|e| Error::Validation(format!("textline {i}: {e}")))?;
            if !ids.insert(t.id.as_str()) {
                return Err(Error::Validation(format!("duplicate textline id `{}`", t.id)));
            }
        }
        for (name, groups) in [("row_groups", &self.row_groups), ("col_groups", &self.col_groups)] {
            for (i, g) in groups.iter().flatten().enumerate() {
                if g.len() < 6 || g.len() % 2 != 0 || !g.iter().all(|v| v.is_finite()) {
                    return Err(Error::Validation(format!("{name}[{i}] must list at least three finite x,y pairs")));
                }
            }
        }
        let mut owner: HashMap<(usize, usize), usize> = HashMap::new();
        let mut collisions = Vec::new();
        for (i, c) in self.cells.iter().enumerate() {
            for r in c.row_start..=c.row_end {
                for k in c.col_start..=c.col_end {
                    if let Some(&j) = owner.get(&(r, k)) {
                        collisions.push(format!("cells {j} and {i} at ({r}, {k})"));
                    } else {
                        owner.insert((r, k), i);
                    }
                }
            }
        }
        if !collisions.is_empty() {
            return Err(Error::Overlap(collisions.join("; ")));
        }
        Ok(())
    }

    pub fn textline(&self, id: &str) -> Option<&TextLine> {
        self.textlines.iter().find(|t| t.id == id)
    }
}

/// Parses and validates an annotation document.
pub fn parse_annotation(json_text: &str) -> Result<TableAnnotation> {
    let de = &mut serde_json::Deserializer::from_str(json_text);
    let ann: TableAnnotation = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::Parse {
            path,
            message: e.into_inner().to_string(),
        }
    })?;
    ann.validate()?;
    Ok(ann)
}

pub fn load_annotation(path: &std::path::Path) -> Result<TableAnnotation> {
    parse_annotation(&std::fs::read_to_string(path)?)
}

pub fn derive_grid_shape(a: &TableAnnotation) -> Result<(usize, usize)> {
    let rows = a.cells.iter().map(|c| c.row_end).max();
    let cols = a.cells.iter().map(|c| c.col_end).max();
    match (rows, cols) {
        (Some(r), Some(c)) => Ok((r + 1, c + 1)),
        _ => Err(Error::Missing("cells: annotation has no cells".into())),
    }
}

/// Grid slots not covered by any cell, in row-major order.
pub fn validate_coverage(a: &TableAnnotation) -> Vec<(usize, usize)> {
    let Ok((m, n)) = derive_grid_shape(a) else {
        return Vec::new();
    };
    let mut covered = vec![false; m * n];
    for c in &a.cells {
        for r in c.row_start..=c.row_end {
            for k in c.col_start..=c.col_end {
                covered[r * n + k] = true;
            }
        }
    }
    (0..m * n).filter(|&i| !covered[i]).map(|i| (i / n, i % n)).collect()
}
