//! Grid-matrix views: every grid slot carries the cell covering it.

use crate::error::Result;
use crate::merger::CellSet;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridEntry {
    /// Index of the covering cell.
    pub cell: usize,
    pub rowspan: usize,
    pub colspan: usize,
    /// Position of the slot inside its cell.
    pub row_offset: usize,
    pub col_offset: usize,
    pub content: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridMatrixView {
    pub m: usize,
    pub n: usize,
    /// Row-major `M×N` entries.
    pub entries: Vec<GridEntry>,
}

impl GridMatrixView {
    pub fn at(&self, i: usize, j: usize) -> &GridEntry {
        &self.entries[i * self.n + j]
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn grid_matrix_view(cells: &CellSet) -> Result<GridMatrixView> {
    let owner = cells.slot_owners()?;
    let n = cells.n;
    let entries = owner
        .iter()
        .enumerate()
        .map(|(s, &o)| {
            let c = &cells.cells[o];
            GridEntry {
                cell: o,
                rowspan: c.rowspan(),
                colspan: c.colspan(),
                row_offset: s / n - c.row_start,
                col_offset: s % n - c.col_start,
                content: c.text(),
            }
        })
        .collect();
    Ok(GridMatrixView { m: cells.m, n, entries })
}
