//! Adjacency-relation precision, recall and F1, and their IoU-weighted
//! average.

use crate::annotation::Quad;
use crate::error::{Error, Result};
use crate::geometry;
use crate::merger::CellSet;
use crate::structure::{adjacency_relations, Direction};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};

/// How predicted cells are identified with ground-truth cells.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Matching {
    /// Cells match when they hold the same set of text-line ids.
    Exact,
    /// Greedy one-to-one matching by descending quad IoU at or above the
    /// threshold.
    Iou(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct F1Score {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub correct: usize,
    pub predicted: usize,
    pub expected: usize,
}

impl F1Score {
    /// Scores from counts. With nothing predicted and nothing expected the
    /// prediction is perfect; otherwise `0/0` reads as 0.
    pub fn from_counts(correct: usize, predicted: usize, expected: usize) -> Self {
        if predicted == 0 && expected == 0 {
            return Self {
                precision: 1.0,
                recall: 1.0,
                f1: 1.0,
                correct,
                predicted,
                expected,
            };
        }
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let (p, r) = (ratio(correct, predicted), ratio(correct, expected));
        let f1 = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        Self {
            precision: p,
            recall: r,
            f1,
            correct,
            predicted,
            expected,
        }
    }
}

pub fn quad_iou(a: &Quad, b: &Quad) -> Result<f64> {
    for q in [a, b] {
        if q.signed_area().abs() <= 0.0 {
            return Err(Error::Degenerate(format!("quad {:?} has no area", q.0)));
        }
    }
    Ok(geometry::convex_iou(&a.points(), &b.points()))
}

/// Greedy one-to-one matching of non-blank cells: `gt index → pred index`.
fn iou_matching(pred: &CellSet, gt: &CellSet, thresh: f64) -> BTreeMap<usize, usize> {
    let mut pairs = Vec::new();
    for (g, gc) in gt.cells.iter().enumerate() {
        let Some(gq) = gc.quad.filter(|_| !gc.is_blank()) else { continue };
        for (p, pc) in pred.cells.iter().enumerate() {
            let Some(pq) = pc.quad.filter(|_| !pc.is_blank()) else { continue };
            if let Ok(iou) = quad_iou(&gq, &pq) {
                if iou >= thresh {
                    pairs.push((iou, g, p));
                }
            }
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let (mut used_g, mut used_p) = (HashSet::new(), HashSet::new());
    let mut out = BTreeMap::new();
    for (_, g, p) in pairs {
        if !used_g.contains(&g) && !used_p.contains(&p) {
            used_g.insert(g);
            used_p.insert(p);
            out.insert(g, p);
        }
    }
    out
}

pub fn f1_adjacency(pred: &CellSet, gt: &CellSet, matching: Matching) -> Result<F1Score> {
    let pr = adjacency_relations(pred)?;
    let gr = adjacency_relations(gt)?;
    let correct = match matching {
        Matching::Exact => {
            let key = |cells: &CellSet, a: usize, b: usize, d: Direction| (cells.cells[a].ids(), cells.cells[b].ids(), d);
            let mut want: BTreeMap<_, usize> = BTreeMap::new();
            for r in &gr {
                *want.entry(key(gt, r.a, r.b, r.direction)).or_default() += 1;
            }
            let mut hit = 0;
            for r in &pr {
                if let Some(c) = want.get_mut(&key(pred, r.a, r.b, r.direction)).filter(|c| **c > 0) {
                    *c -= 1;
                    hit += 1;
                }
            }
            hit
        }
        Matching::Iou(thresh) => {
            if !(thresh > 0.0 && thresh <= 1.0) {
                return Err(Error::Range(format!("IoU threshold {thresh} outside (0, 1]")));
            }
            let map = iou_matching(pred, gt, thresh);
            let predicted: HashSet<_> = pr.iter().map(|r| (r.a, r.b, r.direction)).collect();
            gr.iter()
                .filter_map(|r| Some((*map.get(&r.a)?, *map.get(&r.b)?, r.direction)))
                .filter(|k| predicted.contains(k))
                .count()
        }
    };
    Ok(F1Score::from_counts(correct, pr.len(), gr.len()))
}

/// IoU thresholds and weights of the weighted-average F1.
pub const WAVG_THRESHOLDS: [f64; 4] = [0.6, 0.7, 0.8, 0.9];

/// `Σ IoU_i · F1_i / Σ IoU_i` over the four thresholds.
pub fn wavg_f1(f1_at: &[(f64, f64)]) -> Result<f64> {
    let mut total = 0.0;
    for t in WAVG_THRESHOLDS {
        let hits: Vec<f64> = f1_at.iter().filter(|(k, _)| (k - t).abs() < 1e-9).map(|&(_, v)| v).collect();
        let [f] = hits[..] else {
            return Err(Error::Missing(format!("F1 at IoU {t} (found {} values)", hits.len())));
        };
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::Range(format!("F1 {f} at IoU {t}")));
        }
        total += t * f;
    }
    if f1_at.len() != WAVG_THRESHOLDS.len() {
        return Err(Error::Validation(format!(
            "expected F1 at exactly {:?}, got {} entries",
            WAVG_THRESHOLDS,
            f1_at.len()
        )));
    }
    Ok(total / WAVG_THRESHOLDS.iter().sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::merger::{Cell, TextItem};
    use proptest::prelude::*;

    fn cell(r0: usize, r1: usize, c0: usize, c1: usize, id: Option<&str>) -> Cell {
        Cell {
            row_start: r0,
            row_end: r1,
            col_start: c0,
            col_end: c1,
            quad: Some(Quad::from_rect(
                c0 as f64 * 10.0,
                r0 as f64 * 10.0,
                (c1 + 1) as f64 * 10.0,
                (r1 + 1) as f64 * 10.0,
            )),
            content: id.map(|i| TextItem { id: i.into(), text: None }).into_iter().collect(),
        }
    }

    fn units() -> CellSet {
        CellSet {
            m: 2,
            n: 2,
            cells: vec![
                cell(0, 0, 0, 0, Some("a")),
                cell(0, 0, 1, 1, Some("b")),
                cell(1, 1, 0, 0, Some("c")),
                cell(1, 1, 1, 1, Some("d")),
            ],
        }
    }

    #[test]
    fn quad_iou_values() {
        let a = Quad::from_rect(0.0, 0.0, 1.0, 1.0);
        assert_eq!(quad_iou(&a, &a).unwrap(), 1.0);
        assert_eq!(quad_iou(&a, &Quad::from_rect(5.0, 5.0, 6.0, 6.0)).unwrap(), 0.0);
        assert!((quad_iou(&a, &Quad::from_rect(0.5, 0.0, 1.5, 1.0)).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!(quad_iou(&a, &Quad::from_rect(0.0, 0.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn perfect_and_empty() {
        let gt = units();
        let s = f1_adjacency(&gt, &gt, Matching::Exact).unwrap();
        assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
        assert_eq!(s.expected, 4);
        let empty = CellSet::singletons(2, 2);
        let s = f1_adjacency(&empty, &gt, Matching::Exact).unwrap();
        assert_eq!((s.precision, s.recall, s.f1), (0.0, 0.0, 0.0));
        assert!(f1_adjacency(&gt, &gt, Matching::Iou(0.0)).is_err());
        assert!(f1_adjacency(&gt, &gt, Matching::Iou(1.5)).is_err());
    }

    #[test]
    fn wrong_merge_fixture() {
        // prediction merges a and b into one cell holding both lines
        let gt = units();
        let mut ab = cell(0, 0, 0, 1, Some("a"));
        ab.content.push(TextItem {
            id: "b".into(),
            text: None,
        });
        let pred = CellSet {
            m: 2,
            n: 2,
            cells: vec![ab, cell(1, 1, 0, 0, Some("c")), cell(1, 1, 1, 1, Some("d"))],
        };
        // gt: a→b, a↓c, b↓d, c→d ; pred: ab↓c, ab↓d, c→d
        let s = f1_adjacency(&pred, &gt, Matching::Exact).unwrap();
        assert_eq!((s.correct, s.predicted, s.expected), (1, 3, 4));
        assert!((s.f1 - 2.0 * (1.0 / 3.0) * 0.25 / (1.0 / 3.0 + 0.25)).abs() < 1e-12);
    }

    #[test]
    fn weighted_average() {
        let at = |v: [f64; 4]| -> Vec<(f64, f64)> { WAVG_THRESHOLDS.iter().copied().zip(v).collect() };
        assert_eq!(wavg_f1(&at([1.0; 4])).unwrap(), 1.0);
        assert!((wavg_f1(&at([0.3; 4])).unwrap() - 0.3).abs() < 1e-12);
        assert!((wavg_f1(&at([0.8, 0.6, 0.4, 0.2])).unwrap() - 1.4 / 3.0).abs() < 1e-12);
        assert!(wavg_f1(&at([1.0; 4])[..3]).is_err());
    }

    proptest! {
        #[test]
        fn wavg_is_monotone(v in prop::array::uniform4(0.0..=1.0f64), k in 0usize..4, bump in 0.0..1.0f64) {
            let base: Vec<(f64, f64)> = WAVG_THRESHOLDS.iter().copied().zip(v).collect();
            let mut up = base.clone();
            up[k].1 = (up[k].1 + bump).min(1.0);
            prop_assert!(wavg_f1(&up).unwrap() >= wavg_f1(&base).unwrap() - 1e-15);
        }

        #[test]
        fn iou_mode_agrees_with_exact_on_shared_quads(
            merges in prop::collection::vec(any::<bool>(), 4),
            blanks in prop::collection::vec(any::<bool>(), 9),
        ) {
            // ground truth 3×3 units; prediction merges some horizontal pairs.
            // A merge of one blank and one filled cell would keep the filled
            // cell's id set under a new quad, so only like pairs merge.
            let mut gt = CellSet::singletons(3, 3);
            for (k, c) in gt.cells.iter_mut().enumerate() {
                *c = cell(c.row_start, c.row_end, c.col_start, c.col_end, (!blanks[k]).then(|| format!("t{k}")).as_deref());
            }
            let mut pred = gt.clone();
            for (r, &mg) in merges.iter().take(3).enumerate() {
                let k = r * 3;
                if mg && blanks[k] == blanks[k + 1] {
                    let mut merged = cell(r, r, 0, 1, None);
                    merged.content = [&gt.cells[k], &gt.cells[k + 1]].iter().flat_map(|c| c.content.clone()).collect();
                    pred.cells[k] = merged;
                    pred.cells[k + 1].row_start = usize::MAX;
                }
            }
            pred.cells.retain(|c| c.row_start != usize::MAX);
            let exact = f1_adjacency(&pred, &gt, Matching::Exact).unwrap();
            let iou = f1_adjacency(&pred, &gt, Matching::Iou(0.99)).unwrap();
            prop_assert_eq!(exact, iou);
        }
    }
}
