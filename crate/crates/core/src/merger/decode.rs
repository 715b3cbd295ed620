//! Turning merge votes into cells.

use super::cells::{Cell, CellSet};
use super::merge::MergedMaps;
use crate::annotation::Quad;
use crate::error::{Error, Result};
use crate::splitter::GridStructure;

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, a: usize) -> usize {
        let mut r = a;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut a = a;
        while self.0[a] != r {
            let next = self.0[a];
            self.0[a] = r;
            a = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller root wins so component ids are stable
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.0[hi] = lo;
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decoded {
    pub cells: CellSet,
    pub warnings: Vec<String>,
}

/// Groups grids whose merge votes agree in both directions.
///
/// Components that do not fill their bounding index rectangle are split
/// back into singletons. Cell quads are the union of member grid boxes,
/// multiplied by `scale` (feature map to image pixels).
pub fn decode_cells(maps: &MergedMaps, grid: &GridStructure, scale: f64) -> Result<Decoded> {
    let (m, n) = maps.shape();
    if grid.shape() != (m, n) {
        return Err(Error::shape(format!("{m}×{n} merged maps for a {}×{} grid", grid.m, grid.n)));
    }
    let g = m * n;
    let mut uf = UnionFind::new(g);
    for a in 0..g {
        for b in a + 1..g {
            let (i, j, k, l) = (a / n, a % n, b / n, b % n);
            if maps.vote(i, j, k, l) && maps.vote(k, l, i, j) {
                uf.union(a, b);
            }
        }
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); g];
    for s in 0..g {
        let r = uf.find(s);
        members[r].push(s);
    }
    let mut warnings = Vec::new();
    let mut cells = Vec::new();
    for comp in members.into_iter().filter(|c| !c.is_empty()) {
        let r0 = comp.iter().map(|s| s / n).min().unwrap();
        let r1 = comp.iter().map(|s| s / n).max().unwrap();
        let c0 = comp.iter().map(|s| s % n).min().unwrap();
        let c1 = comp.iter().map(|s| s % n).max().unwrap();
        if comp.len() == (r1 - r0 + 1) * (c1 - c0 + 1) {
            cells.push(Cell {
                row_start: r0,
                row_end: r1,
                col_start: c0,
                col_end: c1,
                quad: None,
                content: Vec::new(),
            });
        } else {
            let msg = format!(
                "merged component over rows {r0}..={r1}, columns {c0}..={c1} is not rectangular; kept {} grids as single cells",
                comp.len()
            );
            log::warn!("{msg}");
            warnings.push(msg);
            cells.extend(comp.iter().map(|&s| Cell::singleton(s / n, s % n)));
        }
    }
    for c in &mut cells {
        let mut b = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
        for r in c.row_start..=c.row_end {
            for k in c.col_start..=c.col_end {
                let gb = grid.box_at(r, k);
                b = [b[0].min(gb[0]), b[1].min(gb[1]), b[2].max(gb[2]), b[3].max(gb[3])];
            }
        }
        c.quad = Some(Quad::from_rect(b[0] * scale, b[1] * scale, b[2] * scale, b[3] * scale));
    }
    let cells = CellSet { m, n, cells }.sorted();
    debug_assert!(cells.slot_owners().is_ok());
    Ok(Decoded { cells, warnings })
}
