//! Adjacency F1 (exact and IoU-matched), WAvg.F1 and GriTS on a prediction
//! that splits one merged cell.

use gridsplit::annotation::Quad;
use gridsplit::merger::{Cell, CellSet, TextItem};
use gridsplit::metrics::{f1_adjacency, grits, wavg_f1, GritsMode, Matching, WAVG_THRESHOLDS};
use gridsplit::structure::grid_matrix_view;

fn cell(r: (usize, usize), c: (usize, usize), text: &str, id: &str) -> Cell {
    let quad = Quad::from_rect(
        c.0 as f64 * 40.0,
        r.0 as f64 * 20.0,
        (c.1 + 1) as f64 * 40.0,
        (r.1 + 1) as f64 * 20.0,
    );
    Cell {
        row_start: r.0,
        row_end: r.1,
        col_start: c.0,
        col_end: c.1,
        quad: Some(quad),
        content: vec![TextItem {
            id: id.into(),
            text: Some(text.into()),
        }],
    }
}

fn main() -> gridsplit::Result<()> {
    let gt = CellSet {
        m: 2,
        n: 3,
        cells: vec![
            cell((0, 1), (0, 0), "name", "t0"),
            cell((0, 0), (1, 1), "q1", "t1"),
            cell((0, 0), (2, 2), "q2", "t2"),
            cell((1, 1), (1, 1), "10", "t3"),
            cell((1, 1), (2, 2), "20", "t4"),
        ],
    };
    let mut pred = gt.clone();
    // the row-spanning label is split in two; the text stays in the top half
    pred.cells[0] = cell((0, 0), (0, 0), "name", "t0");
    let mut blank = cell((1, 1), (0, 0), "", "");
    blank.content.clear();
    pred.cells.push(blank);

    let exact = f1_adjacency(&pred, &gt, Matching::Exact)?;
    println!("exact  P {:.3} R {:.3} F1 {:.3}", exact.precision, exact.recall, exact.f1);
    let mut at = Vec::new();
    for t in WAVG_THRESHOLDS {
        let s = f1_adjacency(&pred, &gt, Matching::Iou(t))?;
        println!("IoU {t}: F1 {:.3}", s.f1);
        at.push((t, s.f1));
    }
    println!("WAvg.F1 {:.4}", wavg_f1(&at)?);

    let (pv, gv) = (grid_matrix_view(&pred)?, grid_matrix_view(&gt)?);
    println!("GriTS-Top {:.4}", grits(&pv, &gv, GritsMode::Topology));
    println!("GriTS-Con {:.4}", grits(&pv, &gv, GritsMode::Content));
    Ok(())
}
