//! Training and evaluation targets derived from an annotation.
//!
//! Separator masks live on the stride-4 feature grid. Feature pixel `(y, x)`
//! covers image pixels `[4x, 4x + 4) × [4y, 4y + 4)`. Each of the `M + 1`
//! horizontal and `N + 1` vertical boundaries (borders included) gets one
//! channel holding the widest band that stays clear of text belonging to
//! cells that do not span across that axis. Text lines are first clipped to
//! each cell quad so only the part inside a cell counts as its content.
//!
//! For a row boundary `b` and a feature column, the band's upper limit is the
//! lowest text bottom among row-`b - 1` cells overlapping that column and the
//! lower limit is the highest text top among row-`b` cells. Where no such text
//! overlaps the column (blank or spanning cells) the horizontally nearest text
//! of that row is used. Column boundaries are the transpose. Bands are
//! clipped to the convex hull of the cell quads.

use crate::annotation::TableAnnotation;
use crate::error::{Error, Result};
use crate::geometry::{self, Point};
use crate::numerics::Tensor;
use crate::{Axis, FEATURE_STRIDE};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq)]
pub struct SeparatorMasks {
    /// `Hf×Wf×(M+1)`, one channel per horizontal boundary, values 0 or 1.
    pub row: Tensor,
    /// `Hf×Wf×(N+1)`, one channel per vertical boundary.
    pub col: Tensor,
}

impl SeparatorMasks {
    pub fn for_axis(&self, axis: Axis) -> &Tensor {
        match axis {
            Axis::Row => &self.row,
            Axis::Col => &self.col,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InstanceVectors {
    /// Length `Hf`; ones at the y of each row line's start point.
    pub p_row: Vec<bool>,
    /// Length `Wf`; ones at the x of each column line's start point.
    pub p_col: Vec<bool>,
}

impl InstanceVectors {
    pub fn for_axis(&self, axis: Axis) -> &[bool] {
        match axis {
            Axis::Row => &self.p_row,
            Axis::Col => &self.p_col,
        }
    }
}

/// Which grid slots share a cell, stored as one class id per slot.
///
/// `get(i, j, k, l)` is the merged-map target `m̃_{i,j}[k, l]`. Storing class
/// ids keeps the relation reflexive, symmetric and transitive by construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MergeLabels {
    rows: usize,
    cols: usize,
    class: Vec<usize>,
}

impl MergeLabels {
    pub fn new(rows: usize, cols: usize, class: Vec<usize>) -> Result<Self> {
        if class.len() != rows * cols {
            return Err(Error::shape(format!("{} class ids for a {rows}×{cols} grid", class.len())));
        }
        Ok(Self { rows, cols, class })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn class_of(&self, i: usize, j: usize) -> usize {
        self.class[i * self.cols + j]
    }

    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> bool {
        self.class_of(i, j) == self.class_of(k, l)
    }

    /// The `M×N` binary map of grid `(i, j)`, row-major.
    pub fn map(&self, i: usize, j: usize) -> Vec<bool> {
        let c = self.class_of(i, j);
        self.class.iter().map(|&v| v == c).collect()
    }

    /// L1 norm of `m̃_{i,j}`: the number of slots in `(i, j)`'s cell.
    pub fn map_norm(&self, i: usize, j: usize) -> usize {
        let c = self.class_of(i, j);
        self.class.iter().filter(|&&v| v == c).count()
    }

    /// `M×N×M×N` tensor of zeros and ones.
    pub fn to_tensor(&self) -> Tensor {
        let (m, n) = (self.rows, self.cols);
        Tensor::from_fn(
            &[m, n, m, n],
            |idx| {
                if self.get(idx[0], idx[1], idx[2], idx[3]) {
                    1.0
                } else {
                    0.0
                }
            },
        )
    }
}

/// Channel-to-boundary sidecar written next to the mask tensors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelMap {
    pub row_channels: Vec<ChannelEntry>,
    pub col_channels: Vec<ChannelEntry>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelEntry {
    pub channel: usize,
    pub boundary: usize,
    pub start: usize,
}

/// Clipped text bounds belonging to one cell.
#[derive(Clone, Copy, Debug)]
struct Piece {
    cell: usize,
    bounds: [f64; 4],
}

fn content_pieces(a: &TableAnnotation) -> Vec<Piece> {
    let mut out = Vec::new();
    for t in &a.textlines {
        let tp = t.quad.points();
        for (ci, c) in a.cells.iter().enumerate() {
            let clipped = geometry::clip_convex(&tp, &c.quad.points());
            if geometry::area(&clipped) > 1e-9 {
                out.push(Piece {
                    cell: ci,
                    bounds: geometry::bounds(&clipped),
                });
            }
        }
    }
    out
}

/// Axis-generic view: "along" runs parallel to the separator, "across" is
/// the coordinate that separates one row (column) from the next.
#[derive(Clone, Copy)]
struct View {
    axis: Axis,
}

impl View {
    fn along(&self, b: &[f64; 4]) -> (f64, f64) {
        match self.axis {
            Axis::Row => (b[0], b[2]),
            Axis::Col => (b[1], b[3]),
        }
    }

    fn across(&self, b: &[f64; 4]) -> (f64, f64) {
        match self.axis {
            Axis::Row => (b[1], b[3]),
            Axis::Col => (b[0], b[2]),
        }
    }

    fn span(&self, c: &crate::annotation::CellAnn) -> (usize, usize) {
        match self.axis {
            Axis::Row => (c.row_start, c.row_end),
            Axis::Col => (c.col_start, c.col_end),
        }
    }

    /// `(along_len, across_len)` on the `hf×wf` feature grid.
    fn extent(&self, hf: usize, wf: usize) -> (usize, usize) {
        match self.axis {
            Axis::Row => (wf, hf),
            Axis::Col => (hf, wf),
        }
    }

    /// `(y, x)` of the feature pixel at `along`, `across`.
    fn pixel(&self, along: usize, across: usize) -> (usize, usize) {
        match self.axis {
            Axis::Row => (across, along),
            Axis::Col => (along, across),
        }
    }
}

enum Side {
    /// Content before the boundary; the band starts below its far edge.
    Before,
    /// Content after the boundary; the band ends above its near edge.
    After,
}

fn limit(view: View, pieces: &[&Piece], lo: f64, hi: f64, side: Side) -> f64 {
    let covering: Vec<_> = pieces
        .iter()
        .filter(|p| {
            let (a0, a1) = view.along(&p.bounds);
            a0 < hi && a1 > lo
        })
        .collect();
    let pool: Vec<&&Piece> = if covering.is_empty() {
        let gap = |p: &Piece| {
            let (a0, a1) = view.along(&p.bounds);
            (a0 - hi).max(lo - a1).max(0.0)
        };
        let best = pieces.iter().map(|p| gap(p)).fold(f64::INFINITY, f64::min);
        pieces.iter().filter(|p| gap(p) <= best).collect()
    } else {
        covering
    };
    match side {
        Side::Before => pool.iter().map(|p| view.across(&p.bounds).1).fold(f64::NEG_INFINITY, f64::max),
        Side::After => pool.iter().map(|p| view.across(&p.bounds).0).fold(f64::INFINITY, f64::min),
    }
}

/// Feature-grid size for an image.
pub fn feature_dims(a: &TableAnnotation) -> (usize, usize) {
    (
        (a.image.height as usize).div_ceil(FEATURE_STRIDE),
        (a.image.width as usize).div_ceil(FEATURE_STRIDE),
    )
}

fn axis_masks(a: &TableAnnotation, view: View, pieces: &[Piece], hull: &[Point], lines: usize) -> Result<Tensor> {
    let (hf, wf) = feature_dims(a);
    let (along_len, across_len) = view.extent(hf, wf);
    let s = FEATURE_STRIDE as f64;
    let unit: Vec<&Piece> = pieces
        .iter()
        .filter(|p| {
            let (s0, s1) = view.span(&a.cells[p.cell]);
            s0 == s1
        })
        .collect();
    let in_hull = |along: usize, across: usize| {
        let (y, x) = view.pixel(along, across);
        geometry::contains(hull, ((x as f64 + 0.5) * s, (y as f64 + 0.5) * s))
    };
    let mut data = vec![0.0; hf * wf * lines];
    for b in 0..lines {
        let before: Vec<&Piece> = unit
            .iter()
            .copied()
            .filter(|p| b > 0 && view.span(&a.cells[p.cell]).0 == b - 1)
            .collect();
        let after: Vec<&Piece> = unit.iter().copied().filter(|p| view.span(&a.cells[p.cell]).0 == b).collect();
        let last = lines - 1;
        if (b > 0 && before.is_empty()) || (b < last && after.is_empty()) {
            return Err(Error::DegenerateSeparator { axis: view.axis, index: b });
        }
        for along in 0..along_len {
            let hull_cells: Vec<usize> = (0..across_len).filter(|&c| in_hull(along, c)).collect();
            if hull_cells.is_empty() {
                continue;
            }
            let (lo, hi) = (along as f64 * s, (along + 1) as f64 * s);
            let start = if b == 0 {
                f64::NEG_INFINITY
            } else {
                limit(view, &before, lo, hi, Side::Before)
            };
            let end = if b == last {
                f64::INFINITY
            } else {
                limit(view, &after, lo, hi, Side::After)
            };
            let mut any = false;
            for c in hull_cells {
                if c as f64 * s >= start && (c + 1) as f64 * s <= end {
                    let (y, x) = view.pixel(along, c);
                    data[(y * wf + x) * lines + b] = 1.0;
                    any = true;
                }
            }
            if !any {
                return Err(Error::DegenerateSeparator { axis: view.axis, index: b });
            }
        }
    }
    Tensor::new(vec![hf, wf, lines], data)
}

/// Separator-band masks for every row and column boundary.
pub fn gen_separator_masks(a: &TableAnnotation) -> Result<SeparatorMasks> {
    let (m, n) = a.grid_shape()?;
    let pieces = content_pieces(a);
    let corners: Vec<Point> = a.cells.iter().flat_map(|c| c.quad.points()).collect();
    let hull = geometry::convex_hull(&corners);
    if geometry::area(&hull) <= 0.0 {
        return Err(Error::Degenerate("table hull has no area".into()));
    }
    let row = axis_masks(a, View { axis: Axis::Row }, &pieces, &hull, m + 1)?;
    let col = axis_masks(a, View { axis: Axis::Col }, &pieces, &hull, n + 1)?;
    Ok(SeparatorMasks { row, col })
}

/// Start point of every channel of an `Hf×Wf×K` mask: the across-coordinate
/// of the first mask pixel met while scanning along the line.
///
/// Column lines start at their topmost pixel (the returned value is its x);
/// row lines start at their leftmost pixel (the returned value is its y).
/// Ties resolve to the smaller coordinate. Pixels count as set when `> 0.5`
/// for binary masks; logit maps should be thresholded at zero by the caller.
pub fn start_points(masks: &Tensor, axis: Axis, threshold: f64) -> Result<Vec<usize>> {
    let (hf, wf, k) = masks.dims3()?;
    let view = View { axis };
    let (along_len, across_len) = view.extent(hf, wf);
    let mut out = Vec::with_capacity(k);
    'channel: for ch in 0..k {
        for along in 0..along_len {
            for across in 0..across_len {
                let (y, x) = view.pixel(along, across);
                if masks.at3(y, x, ch) > threshold {
                    out.push(across);
                    continue 'channel;
                }
            }
        }
        return Err(Error::Degenerate(format!("{axis} mask channel {ch} is empty")));
    }
    Ok(out)
}

fn instance_vector(masks: &Tensor, axis: Axis) -> Result<Vec<bool>> {
    let (hf, wf, _) = masks.dims3()?;
    let len = match axis {
        Axis::Row => hf,
        Axis::Col => wf,
    };
    let starts = start_points(masks, axis, 0.5)?;
    let mut owner: Vec<Option<usize>> = vec![None; len];
    for (ch, &s) in starts.iter().enumerate() {
        if let Some(first) = owner[s] {
            return Err(Error::LabelCollision {
                axis,
                first,
                second: ch,
                position: s,
            });
        }
        owner[s] = Some(ch);
    }
    Ok(owner.into_iter().map(|o| o.is_some()).collect())
}

pub fn gen_instance_vectors(masks: &SeparatorMasks) -> Result<InstanceVectors> {
    Ok(InstanceVectors {
        p_row: instance_vector(&masks.row, Axis::Row)?,
        p_col: instance_vector(&masks.col, Axis::Col)?,
    })
}

pub fn channel_map(masks: &SeparatorMasks) -> Result<ChannelMap> {
    let entries = |t: &Tensor, axis| -> Result<Vec<ChannelEntry>> {
        Ok(start_points(t, axis, 0.5)?
            .into_iter()
            .enumerate()
            .map(|(channel, start)| ChannelEntry {
                channel,
                boundary: channel,
                start,
            })
            .collect())
    };
    Ok(ChannelMap {
        row_channels: entries(&masks.row, Axis::Row)?,
        col_channels: entries(&masks.col, Axis::Col)?,
    })
}

/// Merge targets: grids in the same annotated cell share a class; uncovered
/// slots are singleton classes.
pub fn gen_merge_labels(a: &TableAnnotation) -> Result<MergeLabels> {
    let (m, n) = a.grid_shape()?;
    let mut class = vec![usize::MAX; m * n];
    for (ci, c) in a.cells.iter().enumerate() {
        for r in c.row_start..=c.row_end {
            for k in c.col_start..=c.col_end {
                class[r * n + k] = ci;
            }
        }
    }
    let mut next = a.cells.len();
    for v in class.iter_mut().filter(|v| **v == usize::MAX) {
        *v = next;
        next += 1;
    }
    MergeLabels::new(m, n, class)
}
