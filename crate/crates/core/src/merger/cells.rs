//! Logical cells over the grid lattice and the text assigned to them.

use crate::annotation::{CellAnn, Quad, TableAnnotation, TextLine};
use crate::error::{Error, Result};
use crate::geometry;
use serde::{Deserialize, Serialize};

/// A text line attached to a cell.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextItem {
    pub id: String,
    pub text: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub row_start: usize,
    pub row_end: usize,
    pub col_start: usize,
    pub col_end: usize,
    /// Physical outline in image pixels.
    pub quad: Option<Quad>,
    pub content: Vec<TextItem>,
}

impl Cell {
    pub fn singleton(r: usize, c: usize) -> Self {
        Self {
            row_start: r,
            row_end: r,
            col_start: c,
            col_end: c,
            quad: None,
            content: Vec::new(),
        }
    }

    pub fn rowspan(&self) -> usize {
        self.row_end - self.row_start + 1
    }

    pub fn colspan(&self) -> usize {
        self.col_end - self.col_start + 1
    }

    pub fn covers(&self, r: usize, c: usize) -> bool {
        (self.row_start..=self.row_end).contains(&r) && (self.col_start..=self.col_end).contains(&c)
    }

    pub fn is_blank(&self) -> bool {
        self.content.is_empty()
    }

    /// Content strings joined by a space; items without text contribute
    /// nothing.
    pub fn text(&self) -> String {
        self.content.iter().filter_map(|t| t.text.as_deref()).collect::<Vec<_>>().join(" ")
    }

    /// Sorted text-line ids, used as the cell's identity in relation matching.
    pub fn ids(&self) -> Vec<String> {
        let mut v: Vec<String> = self.content.iter().map(|t| t.id.clone()).collect();
        v.sort();
        v
    }
}

/// Cells partitioning an `M×N` grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSet {
    pub m: usize,
    pub n: usize,
    pub cells: Vec<Cell>,
}

impl CellSet {
    pub fn singletons(m: usize, n: usize) -> Self {
        Self {
            m,
            n,
            cells: (0..m * n).map(|s| Cell::singleton(s / n, s % n)).collect(),
        }
    }

    /// Index of the cell covering each slot, row-major; errors on gaps,
    /// overlaps or out-of-range spans.
    pub fn slot_owners(&self) -> Result<Vec<usize>> {
        let mut owner = vec![usize::MAX; self.m * self.n];
        for (ci, c) in self.cells.iter().enumerate() {
            if c.row_start > c.row_end || c.col_start > c.col_end || c.row_end >= self.m || c.col_end >= self.n {
                return Err(Error::Validation(format!(
                    "cell {ci} spans rows {}..={} and columns {}..={} outside a {}×{} grid",
                    c.row_start, c.row_end, c.col_start, c.col_end, self.m, self.n
                )));
            }
            for r in c.row_start..=c.row_end {
                for k in c.col_start..=c.col_end {
                    let o = &mut owner[r * self.n + k];
                    if *o != usize::MAX {
                        return Err(Error::Overlap(format!("cells {} and {ci} at ({r}, {k})", *o)));
                    }
                    *o = ci;
                }
            }
        }
        if let Some(s) = owner.iter().position(|&o| o == usize::MAX) {
            return Err(Error::Validation(format!("grid slot ({}, {}) has no cell", s / self.n, s % self.n)));
        }
        Ok(owner)
    }

    /// Ground-truth cells of an annotation.
    ///
    /// Content comes from `textline_ids` when any cell lists them, otherwise
    /// from IoU alignment of the text lines. Annotations without text lines
    /// fall back to each cell's own content string. Uncovered slots become
    /// blank singletons.
    pub fn from_annotation(a: &TableAnnotation) -> Result<Self> {
        let (m, n) = a.grid_shape()?;
        let mut cells: Vec<Cell> = a
            .cells
            .iter()
            .map(|c| Cell {
                row_start: c.row_start,
                row_end: c.row_end,
                col_start: c.col_start,
                col_end: c.col_end,
                quad: Some(c.quad),
                content: Vec::new(),
            })
            .collect();
        if a.cells.iter().any(|c| c.textline_ids.is_some()) {
            for (cell, ann) in cells.iter_mut().zip(&a.cells) {
                for id in ann.textline_ids.iter().flatten() {
                    let t = a
                        .textline(id)
                        .ok_or_else(|| Error::Missing(format!("text line `{id}` referenced by a cell")))?;
                    cell.content.push(TextItem {
                        id: id.clone(),
                        text: t.content.clone(),
                    });
                }
            }
        } else if a.textlines.is_empty() {
            for (i, (cell, ann)) in cells.iter_mut().zip(&a.cells).enumerate() {
                if let Some(text) = &ann.content {
                    cell.content.push(TextItem {
                        id: format!("cell{i}"),
                        text: Some(text.clone()),
                    });
                }
            }
        }
        let mut set = Self { m, n, cells };
        let covered: Vec<(usize, usize)> = crate::annotation::validate_coverage(a);
        set.cells.extend(covered.into_iter().map(|(r, c)| Cell::singleton(r, c)));
        if !a.textlines.is_empty() && !a.cells.iter().any(|c| c.textline_ids.is_some()) {
            assign_content(&mut set, &a.textlines);
        }
        set.slot_owners()?;
        Ok(set)
    }

    /// Annotation cells with derived quads and `textline_ids`; cells without
    /// a quad get the zero quad.
    pub fn to_cell_anns(&self) -> Vec<CellAnn> {
        self.cells
            .iter()
            .map(|c| CellAnn {
                quad: c.quad.unwrap_or(Quad([0.0; 8])),
                row_start: c.row_start,
                row_end: c.row_end,
                col_start: c.col_start,
                col_end: c.col_end,
                content: Some(c.text()).filter(|t| !t.is_empty()),
                textline_ids: Some(c.content.iter().map(|t| t.id.clone()).collect()),
            })
            .collect()
    }

    /// Same cells in canonical row-major order of their top-left slot.
    pub fn sorted(mut self) -> Self {
        self.cells.sort_by_key(|c| (c.row_start, c.col_start));
        self
    }

    /// Structural equality: same spans in the same canonical order.
    pub fn same_structure(&self, other: &CellSet) -> bool {
        let spans = |s: &CellSet| {
            let mut v: Vec<_> = s.cells.iter().map(|c| (c.row_start, c.row_end, c.col_start, c.col_end)).collect();
            v.sort();
            v
        };
        self.m == other.m && self.n == other.n && spans(self) == spans(other)
    }
}

/// Assigns each text line to the cell of highest quad IoU.
///
/// Ties go to the smaller cell index; lines overlapping no cell are returned
/// by id. Cell contents are ordered by the text's top-left corner, y first.
pub fn assign_content(cells: &mut CellSet, textlines: &[TextLine]) -> Vec<String> {
    let mut unassigned = Vec::new();
    let mut placed: Vec<Vec<(f64, f64, TextItem)>> = vec![Vec::new(); cells.cells.len()];
    for t in textlines {
        let tp = t.quad.points();
        let mut best: Option<(usize, f64)> = None;
        for (ci, c) in cells.cells.iter().enumerate() {
            let Some(q) = c.quad else { continue };
            let iou = geometry::convex_iou(&tp, &q.points());
            if iou > 0.0 && best.map_or(true, |(_, b)| iou > b) {
                best = Some((ci, iou));
            }
        }
        match best {
            Some((ci, _)) => {
                let b = t.quad.bounds();
                placed[ci].push((
                    b[1],
                    b[0],
                    TextItem {
                        id: t.id.clone(),
                        text: t.content.clone(),
                    },
                ));
            }
            None => unassigned.push(t.id.clone()),
        }
    }
    for (cell, mut items) in cells.cells.iter_mut().zip(placed) {
        items.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        cell.content = items.into_iter().map(|(_, _, t)| t).collect();
    }
    unassigned
}
