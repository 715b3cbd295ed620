//! Horizontal and vertical neighbour relations between non-blank cells.

use crate::error::Result;
use crate::merger::CellSet;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Right,
    Below,
}

/// `b` is the nearest non-blank cell to the right of (or below) `a`.
/// Endpoints are indices into the cell list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AdjacencyRelation {
    pub a: usize,
    pub b: usize,
    pub direction: Direction,
}

/// For every grid row a non-blank cell occupies, the first non-blank cell
/// to its right; likewise per column for `Below`. Blank cells are skipped
/// and duplicates removed. Sorted.
pub fn adjacency_relations(cells: &CellSet) -> Result<Vec<AdjacencyRelation>> {
    let owner = cells.slot_owners()?;
    let (m, n) = (cells.m, cells.n);
    let blank = |o: usize| cells.cells[o].is_blank();
    let mut out = Vec::new();
    for (a, c) in cells.cells.iter().enumerate() {
        if c.is_blank() {
            continue;
        }
        for r in c.row_start..=c.row_end {
            if let Some(b) = (c.col_end + 1..n).map(|k| owner[r * n + k]).find(|&o| !blank(o)) {
                out.push(AdjacencyRelation {
                    a,
                    b,
                    direction: Direction::Right,
                });
            }
        }
        for k in c.col_start..=c.col_end {
            if let Some(b) = (c.row_end + 1..m).map(|r| owner[r * n + k]).find(|&o| !blank(o)) {
                out.push(AdjacencyRelation {
                    a,
                    b,
                    direction: Direction::Below,
                });
            }
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::merger::{Cell, TextItem};
    use proptest::prelude::*;

    fn filled(mut c: Cell, id: &str) -> Cell {
        c.content.push(TextItem { id: id.into(), text: None });
        c
    }

    #[test]
    fn fixtures() {
        let mut s = CellSet::singletons(1, 2);
        s.cells[0] = filled(s.cells[0].clone(), "a");
        s.cells[1] = filled(s.cells[1].clone(), "b");
        assert_eq!(
            adjacency_relations(&s).unwrap(),
            vec![AdjacencyRelation {
                a: 0,
                b: 1,
                direction: Direction::Right
            }]
        );

        let mut s = CellSet::singletons(1, 3);
        s.cells[0] = filled(s.cells[0].clone(), "a");
        s.cells[2] = filled(s.cells[2].clone(), "c");
        assert_eq!(
            adjacency_relations(&s).unwrap(),
            vec![AdjacencyRelation {
                a: 0,
                b: 2,
                direction: Direction::Right
            }]
        );

        let mut s = CellSet::singletons(1, 1);
        s.cells[0] = filled(s.cells[0].clone(), "a");
        assert!(adjacency_relations(&s).unwrap().is_empty());
    }

    /// Random partitions with random blanks.
    fn cell_sets() -> impl Strategy<Value = CellSet> {
        (
            1usize..=6,
            1usize..=6,
            prop::collection::vec((1usize..3, 1usize..3, any::<bool>()), 36),
        )
            .prop_map(|(m, n, spec)| {
                let mut taken = vec![false; m * n];
                let mut cells = Vec::new();
                for r in 0..m {
                    for c in 0..n {
                        if taken[r * n + c] {
                            continue;
                        }
                        let (mut rs, mut cs, full) = spec[r * n + c];
                        rs = rs.min(m - r);
                        cs = cs.min(n - c);
                        while (r..r + rs).any(|rr| (c..c + cs).any(|cc| taken[rr * n + cc])) {
                            if cs > 1 {
                                cs -= 1
                            } else {
                                rs -= 1
                            }
                        }
                        for rr in r..r + rs {
                            for cc in c..c + cs {
                                taken[rr * n + cc] = true;
                            }
                        }
                        let mut cell = Cell::singleton(r, c);
                        cell.row_end = r + rs - 1;
                        cell.col_end = c + cs - 1;
                        if full {
                            cell = filled(cell, &format!("t{r}_{c}"));
                        }
                        cells.push(cell);
                    }
                }
                CellSet { m, n, cells }
            })
    }

    proptest! {
        #[test]
        fn matches_pairwise_oracle(s in cell_sets()) {
            let got = adjacency_relations(&s).unwrap();
            let mut expect = Vec::new();
            let cs = &s.cells;
            for (a, ca) in cs.iter().enumerate() {
                for (b, cb) in cs.iter().enumerate() {
                    if a == b || ca.is_blank() || cb.is_blank() {
                        continue;
                    }
                    // right: shares a row, starts after a, nothing non-blank in between on that row
                    let right = (ca.row_start..=ca.row_end).any(|r| {
                        (cb.row_start..=cb.row_end).contains(&r)
                            && cb.col_start > ca.col_end
                            && !cs.iter().any(|x| !x.is_blank()
                                && (x.row_start..=x.row_end).contains(&r)
                                && x.col_start > ca.col_end && x.col_end < cb.col_start)
                    });
                    if right {
                        expect.push(AdjacencyRelation { a, b, direction: Direction::Right });
                    }
                    let below = (ca.col_start..=ca.col_end).any(|k| {
                        (cb.col_start..=cb.col_end).contains(&k)
                            && cb.row_start > ca.row_end
                            && !cs.iter().any(|x| !x.is_blank()
                                && (x.col_start..=x.col_end).contains(&k)
                                && x.row_start > ca.row_end && x.row_end < cb.row_start)
                    });
                    if below {
                        expect.push(AdjacencyRelation { a, b, direction: Direction::Below });
                    }
                }
            }
            expect.sort();
            prop_assert_eq!(got, expect);
        }
    }
}
